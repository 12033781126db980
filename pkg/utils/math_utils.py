"""
Math utilities for safe entropy and bound calculations.
Handles edge cases like 0·log 0, PSD round-off noise and out-of-range eigenvalues.
"""

import numpy as np

EIGENVALUE_CLAMP = 1e-9


def clamp_probabilities(values, clamp: float = EIGENVALUE_CLAMP) -> np.ndarray:
    """
    Clamp round-off noise in a probability-like spectrum.

    Args:
        values: Eigenvalues of a density matrix
        clamp: Width of the tolerated band below 0 and above 1

    Returns:
        np.ndarray: Values with [-clamp, 0) set to 0

    Raises:
        ValueError: If any value is below -clamp or above 1 + clamp

    Examples:
        >>> clamp_probabilities([0.5, 0.5, -1e-12])
        array([0.5, 0.5, 0. ])
    """
    arr = np.asarray(values, dtype=float)

    below = arr < -clamp
    if below.any():
        raise ValueError(f"Eigenvalue {arr[below].min():.3e} is below -{clamp:g}: not a density matrix")

    above = arr > 1.0 + clamp
    if above.any():
        raise ValueError(f"Eigenvalue {arr[above].max():.6f} exceeds 1 + {clamp:g}: not a density matrix")

    return np.where(arr < 0.0, 0.0, arr)


def entropy_bits(values, clamp: float = EIGENVALUE_CLAMP) -> float:
    """
    Shannon entropy in bits of a probability spectrum, with 0·log 0 = 0.

    Args:
        values: Eigenvalues (or Schmidt coefficients) summing to 1
        clamp: See clamp_probabilities

    Returns:
        float: -sum p log2 p

    Examples:
        >>> entropy_bits([0.5, 0.5, 0.0])
        1.0
    """
    p = clamp_probabilities(values, clamp)
    p = p[p > 0.0]
    return float(-np.sum(p * np.log2(p)))


def log2_ratio(d: int) -> float:
    """
    log2(d / (d - 1)), the per-copy floor for antisymmetric states.

    Raises:
        ValueError: If d < 2

    Examples:
        >>> log2_ratio(2)
        1.0
    """
    if d < 2:
        raise ValueError(f"Local dimension must be >= 2, got {d}")
    return float(np.log2(d) - np.log2(d - 1))


def lambda_tilde(d: int) -> float:
    """(d - 1) / d, the contraction constant of the tilde map"""
    if d < 2:
        raise ValueError(f"Local dimension must be >= 2, got {d}")
    return (d - 1) / d

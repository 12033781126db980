"""
Dense complex-matrix primitives shared by every construction and check.

Matrices are plain 2-D numpy arrays (complex128, row-major). Tensor factors are
described by a DimSignature; multi-factor operators are reshaped into one axis
per factor so partial traces and factor permutations are single einsum /
transpose calls.
"""

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from utils.logger import get_logger

logger = get_logger(__name__)

HERMITICITY_TOL = 1e-10
PSD_TOL = 1e-9
PHASE_FIX_THRESHOLD = 1e-10


class SizeBudgetError(ValueError):
    """Raised when a construction would exceed its configured size budget"""

    def __init__(self, what: str, required: int, allowed: int):
        self.what = what
        self.required = required
        self.allowed = allowed
        super().__init__(f"{what} needs {required:,} but the budget allows {allowed:,}")


class NotHermitianError(ValueError):
    """Raised when an input expected to be Hermitian is not"""

    def __init__(self, violation: float, allowed: float):
        self.violation = violation
        self.allowed = allowed
        super().__init__(
            f"Matrix is not Hermitian: max|M - M^dagger| = {violation:.3e} exceeds {allowed:.3e}"
        )


def check_budget(what: str, required: int, allowed: int) -> None:
    """Reject a construction whose size exceeds the allowed budget"""
    if required > allowed:
        logger.warning(f"✗ Budget exceeded for {what}: {required:,} > {allowed:,}")
        raise SizeBudgetError(what, required, allowed)


@dataclass(frozen=True)
class DimSignature:
    """Ordered tensor-factor dimensions of a vector or square matrix"""

    factor_dims: Tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(x) for x in self.factor_dims)
        if len(dims) == 0 or any(x < 1 for x in dims):
            raise ValueError(f"Factor dimensions must be positive, got {self.factor_dims}")
        object.__setattr__(self, 'factor_dims', dims)

    @classmethod
    def uniform(cls, dim: int, count: int) -> 'DimSignature':
        return cls((dim,) * count)

    @property
    def side(self) -> int:
        return int(np.prod(self.factor_dims))

    @property
    def num_factors(self) -> int:
        return len(self.factor_dims)

    def permuted(self, perm: Sequence[int]) -> 'DimSignature':
        self.check_permutation(perm)
        return DimSignature(tuple(self.factor_dims[p] for p in perm))

    def kept(self, keep: Iterable[int]) -> 'DimSignature':
        return DimSignature(tuple(self.factor_dims[k] for k in sorted(set(keep))))

    def check_side(self, side: int) -> None:
        if side != self.side:
            raise ValueError(
                f"Signature {self.factor_dims} describes side {self.side}, got side {side}"
            )

    def check_permutation(self, perm: Sequence[int]) -> None:
        if sorted(int(p) for p in perm) != list(range(self.num_factors)):
            raise ValueError(
                f"Invalid permutation {list(perm)} for {self.num_factors} factors"
            )

    def to_json(self):
        return list(self.factor_dims)


@dataclass(frozen=True)
class Spectrum:
    """
    Ascending real eigenvalues with optional orthonormal eigenvector columns.

    min, max and max_abs of an empty (0x0) spectrum are 0.0.
    """

    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray] = None

    @property
    def min(self) -> float:
        return float(self.eigenvalues[0]) if self.eigenvalues.size else 0.0

    @property
    def max(self) -> float:
        return float(self.eigenvalues[-1]) if self.eigenvalues.size else 0.0

    @property
    def max_abs(self) -> float:
        return max_abs(self.eigenvalues)

    def to_json(self):
        return [float(v) for v in self.eigenvalues]


@dataclass(frozen=True)
class PsdWitness:
    """Outcome of a positivity test; the min eigenvalue is always reported"""

    is_psd: bool
    min_eigenvalue: float
    threshold: float
    offending_vector: Optional[np.ndarray] = None

    def __bool__(self):
        return self.is_psd


def as_cmatrix(m) -> np.ndarray:
    """
    Coerce input to a finite 2-D complex128 array.

    Raises:
        ValueError: If the input is not 2-D or holds non-finite entries
    """
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2:
        raise ValueError(f"Expected a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("Matrix has non-finite entries")
    return arr


def max_abs(m) -> float:
    """Entrywise max-norm ||M||_max (0.0 for empty input)"""
    arr = np.asarray(m)
    return float(np.max(np.abs(arr))) if arr.size else 0.0


def hermiticity_violation(m: np.ndarray) -> float:
    return max_abs(m - m.conj().T)


def check_hermitian(m, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """
    Validate Hermiticity against a tolerance relative to ||M||_max and return
    the symmetrized matrix (M + M^dagger) / 2.

    Raises:
        ValueError: If M is not square
        NotHermitianError: If ||M - M^dagger||_max > tol * ||M||_max
    """
    m = as_cmatrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"Expected a square matrix, got shape {m.shape}")
    violation = hermiticity_violation(m)
    allowed = tol * max_abs(m)
    if violation > allowed:
        raise NotHermitianError(violation, allowed)
    return (m + m.conj().T) / 2


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its first non-negligible component is real positive"""
    fixed = vectors.copy()
    for col in range(fixed.shape[1]):
        column = fixed[:, col]
        nonzero = np.flatnonzero(np.abs(column) > PHASE_FIX_THRESHOLD)
        if nonzero.size:
            lead = column[nonzero[0]]
            fixed[:, col] = column * (np.conj(lead) / abs(lead))
    return fixed


def eig_hermitian(m, vectors: bool = True, tol: float = HERMITICITY_TOL) -> Spectrum:
    """
    Hermitian eigendecomposition with deterministic output.

    Args:
        m: Square matrix, Hermitian within tol * ||M||_max
        vectors: Also return eigenvectors (phase-fixed columns)
        tol: Relative Hermiticity tolerance

    Returns:
        Spectrum: Ascending eigenvalues (and eigenvectors when requested)

    Raises:
        NotHermitianError: With the violation magnitude

    Examples:
        >>> eig_hermitian(np.array([[0, 1], [1, 0]])).eigenvalues
        array([-1.,  1.])
    """
    h = check_hermitian(m, tol)
    if h.shape[0] == 0:
        return Spectrum(np.zeros(0), np.zeros((0, 0), dtype=np.complex128) if vectors else None)
    if not vectors:
        return Spectrum(np.linalg.eigvalsh(h))
    values, vecs = np.linalg.eigh(h)
    return Spectrum(values, _fix_phases(vecs))


def kron(a, b, *more) -> np.ndarray:
    """Kronecker product of two or more matrices (or vectors)"""
    return reduce(np.kron, (np.asarray(x, dtype=np.complex128) for x in (a, b) + more))


def kron_power(a, n: int) -> np.ndarray:
    if n < 1:
        raise ValueError(f"Kronecker power needs n >= 1, got {n}")
    a = np.asarray(a, dtype=np.complex128)
    return reduce(np.kron, [a] * n)


def partial_trace(m, sig: DimSignature, keep: Iterable[int]) -> np.ndarray:
    """
    Trace out every factor not listed in keep.

    Kept factors appear in ascending index order in the result.

    Args:
        m: Square operator on the space described by sig
        sig: Factor dimensions of m
        keep: Indices of factors to keep (non-empty)

    Returns:
        np.ndarray: Reduced operator

    Raises:
        ValueError: If the signature does not match m or keep is invalid

    Examples:
        >>> partial_trace(np.eye(4), DimSignature((2, 2)), [0])
        array([[2.+0.j, 0.+0.j],
               [0.+0.j, 2.+0.j]])
    """
    m = as_cmatrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"Expected a square matrix, got shape {m.shape}")
    sig.check_side(m.shape[0])

    keep = sorted(set(int(k) for k in keep))
    n = sig.num_factors
    if not keep or keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"keep must be a non-empty subset of 0..{n - 1}, got {keep}")

    dims = sig.factor_dims
    tensor = m.reshape(dims + dims)
    row_axes = list(range(n))
    col_axes = [k if k not in keep else n + k for k in range(n)]
    out_axes = keep + [n + k for k in keep]
    reduced = np.einsum(tensor, row_axes + col_axes, out_axes)

    side = int(np.prod([dims[k] for k in keep]))
    return reduced.reshape(side, side)


def permute_factors(m, sig: DimSignature, perm: Sequence[int]) -> np.ndarray:
    """
    Reorder the tensor factors of a square operator.

    New factor k is old factor perm[k]; this is conjugation by the matching
    permutation unitary, so the spectrum is unchanged.

    Raises:
        ValueError: If perm is not a permutation of the factors
    """
    m = as_cmatrix(m)
    sig.check_side(m.shape[0])
    sig.check_permutation(perm)

    n = sig.num_factors
    perm = [int(p) for p in perm]
    tensor = m.reshape(sig.factor_dims + sig.factor_dims)
    permuted = tensor.transpose(perm + [n + p for p in perm])
    return permuted.reshape(m.shape)


def permute_vector_factors(v, sig: DimSignature, perm: Sequence[int]) -> np.ndarray:
    """Reorder the factors of a vector, or of every column of a 2-D array"""
    v = np.asarray(v, dtype=np.complex128)
    sig.check_side(v.shape[0])
    sig.check_permutation(perm)

    extra = v.shape[1:]
    tensor = v.reshape(sig.factor_dims + extra)
    axes = [int(p) for p in perm] + list(range(sig.num_factors, sig.num_factors + len(extra)))
    return tensor.transpose(axes).reshape(v.shape)


def interleaved_to_blocked(num_pairs: int) -> list:
    """
    Permutation taking A1 B1 A2 B2 ... to A1 ... AN B1 ... BN.

    Examples:
        >>> interleaved_to_blocked(2)
        [0, 2, 1, 3]
    """
    return [2 * k for k in range(num_pairs)] + [2 * k + 1 for k in range(num_pairs)]


def is_psd(m, tol: float = PSD_TOL) -> PsdWitness:
    """
    Positivity test relative to the operator norm.

    PSD iff the min eigenvalue is >= -tol * max(1, ||M||).

    Raises:
        NotHermitianError: If m is not Hermitian
    """
    spectrum = eig_hermitian(m, vectors=True)
    threshold = -tol * max(1.0, spectrum.max_abs)
    min_eig = spectrum.min

    if min_eig >= threshold:
        return PsdWitness(True, min_eig, threshold)

    logger.debug(f"PSD check failed: min eigenvalue {min_eig:.3e} < {threshold:.3e}")
    return PsdWitness(False, min_eig, threshold, spectrum.eigenvectors[:, 0])


def matrix_leq(a, b, tol: float = PSD_TOL) -> bool:
    """
    Loewner order A <= B, i.e. B - A is PSD.

    Raises:
        ValueError: On shape mismatch
    """
    a = as_cmatrix(a)
    b = as_cmatrix(b)
    if a.shape != b.shape:
        raise ValueError(f"Shape mismatch: {a.shape} vs {b.shape}")
    return is_psd(b - a, tol).is_psd

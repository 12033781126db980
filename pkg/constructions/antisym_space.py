"""
Antisymmetric subspace H- of C^d ⊗ C^d and its tensor powers.

Pairs (i, j) are 1-based with i < j, listed lexicographically; the coordinate
basis of H-^⊗N is the lexicographic product of those pairs. Full-space vectors
use interleaved factor order A1 B1 A2 B2 ...; blocked order A1..AN B1..BN is
produced on demand with permute_vector_factors.
"""

from dataclasses import dataclass
from itertools import combinations
from typing import Tuple

import numpy as np

from utils.logger import get_logger
from utils.tensor_core import (
    DimSignature,
    check_budget,
    interleaved_to_blocked,
    kron_power,
    permute_vector_factors,
)

logger = get_logger(__name__)

DEFAULT_EMBEDDING_BUDGET = 20_000_000
NORM_TOL = 1e-12


def _check_dimension(d: int) -> int:
    if int(d) != d or d < 2:
        raise ValueError(f"Local dimension d must be an integer >= 2, got {d}")
    return int(d)


def _check_power(n: int) -> int:
    if int(n) != n or n < 1:
        raise ValueError(f"Tensor power N must be an integer >= 1, got {n}")
    return int(n)


@dataclass(frozen=True)
class AntisymBasis:
    """The basis D' = {|(i,j)>} of H- for local dimension d"""

    d: int
    pairs: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        d = _check_dimension(self.d)
        expected = d * (d - 1) // 2
        if len(self.pairs) != expected:
            raise ValueError(f"D' for d={d} has {expected} pairs, got {len(self.pairs)}")
        for i, j in self.pairs:
            if not 1 <= i < j <= d:
                raise ValueError(f"Invalid pair ({i},{j}) for d={d}")
        if list(self.pairs) != sorted(set(self.pairs)):
            raise ValueError("Pairs must be strictly lexicographically ordered")

    @classmethod
    def for_dimension(cls, d: int) -> 'AntisymBasis':
        d = _check_dimension(d)
        return cls(d, tuple(combinations(range(1, d + 1), 2)))

    @property
    def size(self) -> int:
        return len(self.pairs)

    def index_of(self, i: int, j: int) -> int:
        """0-based coordinate index of |(i,j)>"""
        try:
            return self.pairs.index((i, j))
        except ValueError:
            raise ValueError(f"({i},{j}) is not a pair of D' for d={self.d}") from None

    def coordinate_signature(self, n: int) -> DimSignature:
        return DimSignature.uniform(self.size, _check_power(n))

    def full_signature(self, n: int) -> DimSignature:
        return DimSignature.uniform(self.d, 2 * _check_power(n))

    def to_json(self):
        return {'d': self.d, 'pairs': [list(p) for p in self.pairs]}


@dataclass(frozen=True)
class Ket:
    """Complex amplitude vector tagged with its tensor-factor signature"""

    amplitudes: np.ndarray
    sig: DimSignature
    normalized: bool = True

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        self.sig.check_side(amps.size)
        if self.normalized:
            norm = np.linalg.norm(amps)
            if abs(norm - 1.0) > NORM_TOL:
                raise ValueError(f"Ket flagged normalized has norm {norm:.15f}")
        object.__setattr__(self, 'amplitudes', amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def overlap(self, other: 'Ket') -> complex:
        """<self|other>"""
        if self.sig != other.sig:
            raise ValueError(f"Signature mismatch: {self.sig.factor_dims} vs {other.sig.factor_dims}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def to_json(self):
        return {
            'sig': self.sig.to_json(),
            'amplitudes': [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }


def _pair_column(d: int, i: int, j: int) -> np.ndarray:
    column = np.zeros(d * d, dtype=np.complex128)
    column[(i - 1) * d + (j - 1)] = 1 / np.sqrt(2)
    column[(j - 1) * d + (i - 1)] = -1 / np.sqrt(2)
    return column


def antisym_ket(i: int, j: int, d: int) -> Ket:
    """
    |(i,j)> = (|i>_A|j>_B - |j>_A|i>_B) / sqrt(2), indices 1-based.

    Raises:
        ValueError: If not 1 <= i < j <= d

    Examples:
        >>> antisym_ket(1, 2, 2).amplitudes.real.round(4)
        array([ 0.    ,  0.7071, -0.7071,  0.    ])
    """
    d = _check_dimension(d)
    if not (1 <= i < j <= d):
        raise ValueError(f"antisym_ket needs 1 <= i < j <= d, got i={i}, j={j}, d={d}")
    return Ket(_pair_column(d, i, j), DimSignature((d, d)))


def embedding_isometry(d: int, n: int = 1, budget: int = DEFAULT_EMBEDDING_BUDGET) -> np.ndarray:
    """
    Isometry V from D'^N coordinates into (C^d ⊗ C^d)^⊗N.

    Columns are tensor products of D' kets in lexicographic multi-index order;
    rows follow the interleaved factor order A1 B1 A2 B2 ...

    Args:
        d: Local dimension
        n: Tensor power N
        budget: Maximum number of matrix entries

    Returns:
        np.ndarray: Shape (d^2)^N x (d(d-1)/2)^N with V^dagger V = I

    Raises:
        SizeBudgetError: If the matrix would exceed the budget
    """
    basis = AntisymBasis.for_dimension(d)
    n = _check_power(n)
    rows, cols = (d * d) ** n, basis.size ** n
    check_budget(f"embedding_isometry(d={d}, N={n})", rows * cols, budget)

    single = np.column_stack([_pair_column(d, i, j) for i, j in basis.pairs])
    isometry = kron_power(single, n)
    logger.debug(f"Embedding isometry d={d}, N={n}: {rows}x{cols}")
    return isometry


def blocked_embedding(d: int, n: int = 1, budget: int = DEFAULT_EMBEDDING_BUDGET) -> np.ndarray:
    """embedding_isometry with rows reordered to A1..AN B1..BN"""
    isometry = embedding_isometry(d, n, budget)
    sig = DimSignature.uniform(d, 2 * n)
    return permute_vector_factors(isometry, sig, interleaved_to_blocked(n))


def antisym_projector(d: int) -> np.ndarray:
    """Orthogonal projector P = V V^dagger onto H-; trace d(d-1)/2"""
    v = embedding_isometry(d, 1)
    return v @ v.conj().T


def embed_coordinates(coords, d: int, n: int = 1, budget: int = DEFAULT_EMBEDDING_BUDGET) -> Ket:
    """
    Map a normalized coordinate vector on D'^N into the full interleaved space.

    Raises:
        ValueError: If the coordinate vector has the wrong length or norm
    """
    basis = AntisymBasis.for_dimension(d)
    coordinate_ket = Ket(coords, basis.coordinate_signature(n))
    v = embedding_isometry(d, n, budget)
    return Ket(v @ coordinate_ket.amplitudes, basis.full_signature(n))


def counterexample_state() -> Ket:
    """
    (1/sqrt 3) · sum_{i<j} |(i,j)>^⊗2 for d = 3, an element of H-^⊗2.

    Its A-side reduction has largest eigenvalue 1/3, above 2^-2.
    """
    basis = AntisymBasis.for_dimension(3)
    coords = np.zeros(basis.size ** 2, dtype=np.complex128)
    for k in range(basis.size):
        coords[k * basis.size + k] = 1 / np.sqrt(basis.size)
    return embed_coordinates(coords, 3, 2)

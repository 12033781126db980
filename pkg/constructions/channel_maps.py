"""
Linear maps between matrix spaces, stored as explicit superoperators.

A ChannelMap with input side n and output side m holds S of shape m^2 x n^2
acting on row-major vectorizations: vec(Phi(X)) = S · vec(X), vec(X)[i*n + j]
= X[i, j]. Tensor powers, linear combinations and Choi matrices are then
reshapes and einsums of S.

Choi layout is input-index outer, output-index inner: block (I, J) of the
Choi matrix is Phi(E_IJ).
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from constructions.antisym_space import AntisymBasis, embedding_isometry
from utils.logger import get_logger
from utils.math_utils import lambda_tilde
from utils.tensor_core import (
    PSD_TOL,
    as_cmatrix,
    check_budget,
    eig_hermitian,
    hermiticity_violation,
    max_abs,
)

logger = get_logger(__name__)

DEFAULT_SUPEROPERATOR_BUDGET = 10_000
DEFAULT_CHOI_BUDGET = 1_000


@dataclass(frozen=True)
class ChannelMap:
    """Linear map M_in_side -> M_out_side given by its superoperator matrix"""

    in_side: int
    out_side: int
    superoperator: np.ndarray = field(repr=False)
    name: str = 'map'

    # numpy scalars defer to __rmul__
    __array_ufunc__ = None

    def __post_init__(self):
        s = as_cmatrix(self.superoperator)
        expected = (self.out_side ** 2, self.in_side ** 2)
        if s.shape != expected:
            raise ValueError(f"Superoperator for {self.name} must have shape {expected}, got {s.shape}")
        object.__setattr__(self, 'superoperator', s)

    def __call__(self, x) -> np.ndarray:
        x = as_cmatrix(x)
        if x.shape != (self.in_side, self.in_side):
            raise ValueError(
                f"{self.name} acts on {self.in_side}x{self.in_side} matrices, got {x.shape}"
            )
        return (self.superoperator @ x.reshape(-1)).reshape(self.out_side, self.out_side)

    def _check_compatible(self, other: 'ChannelMap') -> None:
        if (self.in_side, self.out_side) != (other.in_side, other.out_side):
            raise ValueError(
                f"Cannot combine {self.name} ({self.in_side}->{self.out_side}) with "
                f"{other.name} ({other.in_side}->{other.out_side})"
            )

    def __add__(self, other: 'ChannelMap') -> 'ChannelMap':
        self._check_compatible(other)
        return ChannelMap(self.in_side, self.out_side, self.superoperator + other.superoperator,
                          f"({self.name} + {other.name})")

    def __sub__(self, other: 'ChannelMap') -> 'ChannelMap':
        self._check_compatible(other)
        return ChannelMap(self.in_side, self.out_side, self.superoperator - other.superoperator,
                          f"({self.name} - {other.name})")

    def __rmul__(self, scalar) -> 'ChannelMap':
        return ChannelMap(self.in_side, self.out_side, scalar * self.superoperator,
                          f"{scalar:g}·{self.name}")

    def compose(self, first: 'ChannelMap') -> 'ChannelMap':
        """self ∘ first (first applied first)"""
        if first.out_side != self.in_side:
            raise ValueError(f"Cannot compose {self.name} after {first.name}: side mismatch")
        return ChannelMap(first.in_side, self.out_side, self.superoperator @ first.superoperator,
                          f"{self.name}∘{first.name}")

    def tensor(self, other: 'ChannelMap', budget: int = DEFAULT_SUPEROPERATOR_BUDGET) -> 'ChannelMap':
        """Phi ⊗ Psi acting on M_(n1 n2) = M_n1 ⊗ M_n2"""
        in_side = self.in_side * other.in_side
        out_side = self.out_side * other.out_side
        check_budget(f"superoperator of {self.name}⊗{other.name}",
                     max(in_side, out_side) ** 2, budget)

        a = self.superoperator.reshape(self.out_side, self.out_side, self.in_side, self.in_side)
        b = other.superoperator.reshape(other.out_side, other.out_side, other.in_side, other.in_side)
        joint = np.einsum('abij,cdkl->acbdikjl', a, b)
        return ChannelMap(in_side, out_side, joint.reshape(out_side ** 2, in_side ** 2),
                          f"{self.name}⊗{other.name}")

    def is_hermiticity_preserving(self, tol: float = 1e-12) -> bool:
        return choi(self).hermiticity_violation <= tol * max(1.0, max_abs(self.superoperator))


@dataclass(frozen=True)
class ChoiMatrix:
    """[Phi(E_IJ)]_{I,J}, input index outer and output index inner"""

    matrix: np.ndarray = field(repr=False)
    in_side: int
    out_side: int
    layout: str = 'input-outer/output-inner'

    @property
    def side(self) -> int:
        return self.in_side * self.out_side

    @property
    def hermiticity_violation(self) -> float:
        return hermiticity_violation(self.matrix)

    def block(self, i: int, j: int) -> np.ndarray:
        """Phi(E_ij) read back from the Choi matrix (0-based input indices)"""
        m = self.out_side
        return self.matrix[i * m:(i + 1) * m, j * m:(j + 1) * m]

    def to_json(self, include_matrix: bool = False):
        payload = {
            'in_side': self.in_side,
            'out_side': self.out_side,
            'side': self.side,
            'layout': self.layout,
            'trace': [float(np.trace(self.matrix).real), float(np.trace(self.matrix).imag)],
        }
        if include_matrix:
            payload['matrix'] = [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix]
        return payload


@dataclass(frozen=True)
class CpVerdict:
    """Choi-criterion verdict; min_eigenvalue is always reported as the certificate"""

    is_cp: bool
    min_eigenvalue: float
    threshold: float
    choi_side: int

    def __bool__(self):
        return self.is_cp


# =========================================================================
# Constructors
# =========================================================================

def map_from_action(action: Callable[[np.ndarray], np.ndarray], in_side: int, out_side: int,
                    name: str = 'map') -> ChannelMap:
    """Build the superoperator of a linear action by evaluating it on matrix units"""
    columns = []
    for k in range(in_side * in_side):
        unit = np.zeros(in_side * in_side, dtype=np.complex128)
        unit[k] = 1.0
        out = as_cmatrix(action(unit.reshape(in_side, in_side)))
        if out.shape != (out_side, out_side):
            raise ValueError(f"Action returned shape {out.shape}, expected {(out_side, out_side)}")
        columns.append(out.reshape(-1))
    return ChannelMap(in_side, out_side, np.column_stack(columns), name)


def identity_map(side: int) -> ChannelMap:
    return ChannelMap(side, side, np.eye(side * side, dtype=np.complex128), 'Id')


def _lambda_tensor(d: int) -> np.ndarray:
    """S[a, c, I, J] = sum_b V[a, b, I] conj(V[c, b, J]), i.e. Lambda(E_IJ)[a, c]"""
    basis = AntisymBasis.for_dimension(d)
    v = embedding_isometry(d, 1).reshape(d, d, basis.size)
    return np.einsum('abI,cbJ->acIJ', v, v.conj())


def lambda_map(d: int) -> ChannelMap:
    """
    Lambda: M(D') -> M(D), X ↦ Tr_B(sum_IJ X_IJ |I><J|).

    Examples:
        >>> lambda_map(3)(np.diag([1, 0, 0])).real.round(3)
        array([[0.5, 0. , 0. ],
               [0. , 0.5, 0. ],
               [0. , 0. , 0. ]])
    """
    n = AntisymBasis.for_dimension(d).size
    s = _lambda_tensor(d)
    return ChannelMap(n, d, s.reshape(d * d, n * n), 'Λ')


def lambda_dagger_map(d: int) -> ChannelMap:
    """
    M†: the linear map with M†(E_IJ) = Lambda(E_IJ^dagger) = Lambda(E_JI).

    On real symmetric X it coincides with Lambda; on complex Hermitian X it
    returns conj(Lambda(X)), since it equals X ↦ Lambda(X^T).
    """
    n = AntisymBasis.for_dimension(d).size
    s = _lambda_tensor(d).transpose(0, 1, 3, 2)
    return ChannelMap(n, d, s.reshape(d * d, n * n), 'M†')


def tilde_map(d: int) -> ChannelMap:
    """M~ = (1/d)·Lambda + ((d-1)/d)·M†"""
    combined = (1 / d) * lambda_map(d) + lambda_tilde(d) * lambda_dagger_map(d)
    return ChannelMap(combined.in_side, combined.out_side, combined.superoperator, 'M~')


def id_sharp(in_side: int, out_side: int) -> ChannelMap:
    """Id#: X ↦ (Tr X)·id_out"""
    if in_side < 1 or out_side < 1:
        raise ValueError(f"Sides must be >= 1, got {in_side}, {out_side}")
    s = np.outer(np.eye(out_side).reshape(-1), np.eye(in_side).reshape(-1)).astype(np.complex128)
    return ChannelMap(in_side, out_side, s, 'Id#')


def map_tensor_power(phi: ChannelMap, n: int, budget: int = DEFAULT_SUPEROPERATOR_BUDGET) -> ChannelMap:
    """
    Phi^⊗N acting slot-wise on M_in^⊗N.

    Raises:
        ValueError: If N < 1
        SizeBudgetError: If the superoperator side would exceed the budget
    """
    if int(n) != n or n < 1:
        raise ValueError(f"Tensor power N must be an integer >= 1, got {n}")
    check_budget(f"superoperator of {phi.name}^⊗{n}",
                 max(phi.in_side, phi.out_side) ** (2 * n), budget)

    result = phi
    for _ in range(int(n) - 1):
        result = result.tensor(phi, budget)
    if n > 1:
        result = ChannelMap(result.in_side, result.out_side, result.superoperator, f"{phi.name}^⊗{n}")
    return result


def bound_map(d: int, n: int, budget: int = DEFAULT_SUPEROPERATOR_BUDGET) -> ChannelMap:
    """lambda_tilde^N · Id# - M~^⊗N, from M(D')^⊗N into M(D)^⊗N"""
    tilde_n = map_tensor_power(tilde_map(d), n, budget)
    sharp = id_sharp(tilde_n.in_side, tilde_n.out_side)
    combined = lambda_tilde(d) ** n * sharp - tilde_n
    return ChannelMap(combined.in_side, combined.out_side, combined.superoperator,
                      f"λ~^{n}·Id# - M~^⊗{n}")


# =========================================================================
# Choi matrix and complete positivity
# =========================================================================

def choi(phi: ChannelMap, budget: int = DEFAULT_CHOI_BUDGET) -> ChoiMatrix:
    """
    Choi matrix [Phi(E_IJ)]_{I,J}.

    Raises:
        SizeBudgetError: If the Choi side would exceed the budget
    """
    n, m = phi.in_side, phi.out_side
    check_budget(f"Choi matrix of {phi.name}", n * m, budget)
    s = phi.superoperator.reshape(m, m, n, n)
    matrix = s.transpose(2, 0, 3, 1).reshape(n * m, n * m)
    return ChoiMatrix(matrix, n, m)


def is_cp(phi: ChannelMap, tol: float = PSD_TOL, budget: int = DEFAULT_CHOI_BUDGET) -> CpVerdict:
    """
    Complete positivity by the Choi criterion.

    Args:
        phi: Hermiticity-preserving map
        tol: Relative PSD tolerance
        budget: Maximum Choi side

    Returns:
        CpVerdict: Verdict plus the minimum Choi eigenvalue

    Raises:
        NotHermitianError: If the Choi matrix is not Hermitian
    """
    c = choi(phi, budget)
    spectrum = eig_hermitian(c.matrix, vectors=False)
    threshold = -tol * max(1.0, spectrum.max_abs)
    verdict = CpVerdict(spectrum.min >= threshold, spectrum.min, threshold, c.side)
    logger.debug(f"{phi.name}: min Choi eigenvalue {spectrum.min:.3e} (CP={verdict.is_cp})")
    return verdict


def slot_agreement(d: int, n: int, x, budget: int = DEFAULT_SUPEROPERATOR_BUDGET) -> float:
    """
    ||Lambda^⊗N(X) - M~^⊗N(X)||_max for an input on M(D')^⊗N.

    Zero for N = 1 and real symmetric X; in general non-zero for N >= 2 because
    M~^⊗N mixes partial transposes of X.
    """
    lam = map_tensor_power(lambda_map(d), n, budget)
    tilde = map_tensor_power(tilde_map(d), n, budget)
    return max_abs(lam(x) - tilde(x))


def apply_lambda_power(x, d: int, n: int, budget: Optional[int] = None) -> np.ndarray:
    """Lambda^⊗N(X) via the superoperator tensor power"""
    lam = map_tensor_power(lambda_map(d), n, budget or DEFAULT_SUPEROPERATOR_BUDGET)
    return lam(x)

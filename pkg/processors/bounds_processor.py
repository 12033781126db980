"""
Bounds Processor - reduced spectra, entropies and the chain of entanglement floors

For a state in H-^⊗N the A-side reduction has every eigenvalue at most
((d-1)/d)^N, hence entropy at least N·log2(d/(d-1)) bits. The same floor holds
for E_f of any state supported on H-^⊗N and, per copy, for its entanglement cost.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Union

import numpy as np
import pandas as pd

from constructions.antisym_space import (
    DEFAULT_EMBEDDING_BUDGET,
    AntisymBasis,
    Ket,
    counterexample_state,
    embedding_isometry,
)
from constructions.channel_maps import DEFAULT_SUPEROPERATOR_BUDGET, apply_lambda_power
from processors.base_processor import BaseProcessor
from utils.logger import get_logger
from utils.math_utils import EIGENVALUE_CLAMP, entropy_bits, lambda_tilde, log2_ratio
from utils.tensor_core import (
    HERMITICITY_TOL,
    DimSignature,
    as_cmatrix,
    check_hermitian,
    eig_hermitian,
    interleaved_to_blocked,
    max_abs,
    partial_trace,
    permute_vector_factors,
)

logger = get_logger(__name__)

BOUND_TOL = 1e-10
ENTROPY_TOL = 1e-8
TRACE_TOL = 1e-10
SUPPORT_TOL = 1e-10
COUNTEREXAMPLE_MARGIN = 1e-3


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, PSD, unit-trace matrix tagged with its factor signature"""

    matrix: np.ndarray = field(repr=False)
    sig: DimSignature
    hermiticity_tol: float = field(default=HERMITICITY_TOL, repr=False, compare=False)

    def __post_init__(self):
        m = check_hermitian(self.matrix, self.hermiticity_tol)
        self.sig.check_side(m.shape[0])

        trace = np.trace(m).real
        if abs(trace - 1.0) > TRACE_TOL:
            raise ValueError(f"Density matrix trace is {trace:.15f}, expected 1")

        min_eig = eig_hermitian(m, vectors=False, tol=self.hermiticity_tol).min
        if min_eig < -EIGENVALUE_CLAMP:
            raise ValueError(f"Density matrix has eigenvalue {min_eig:.3e} below -{EIGENVALUE_CLAMP:g}")
        object.__setattr__(self, 'matrix', m)

    @property
    def side(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return eig_hermitian(self.matrix, vectors=False, tol=self.hermiticity_tol).eigenvalues

    def rank(self, tol: float = EIGENVALUE_CLAMP) -> int:
        return int(np.sum(self.eigenvalues() > tol))

    def to_json(self):
        return {
            'sig': self.sig.to_json(),
            'matrix': [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix],
        }


@dataclass(frozen=True)
class BoundReport:
    """Reduced-spectrum and entropy values next to their caps and floors"""

    d: int
    N: int
    max_reduced_eig: float
    entropy: float
    eig_cap: float
    entropy_floor: float
    tol: float = BOUND_TOL
    entropy_tol: float = ENTROPY_TOL

    @property
    def eig_ok(self) -> bool:
        return self.max_reduced_eig <= self.eig_cap + self.tol

    @property
    def entropy_ok(self) -> bool:
        return self.entropy >= self.entropy_floor - self.entropy_tol

    @property
    def passes(self) -> bool:
        return self.eig_ok and self.entropy_ok

    def to_json(self):
        return {
            'd': self.d,
            'N': self.N,
            'max_reduced_eig': self.max_reduced_eig,
            'eig_cap': self.eig_cap,
            'entropy': self.entropy,
            'entropy_floor': self.entropy_floor,
            'verdicts': {'eig_cap': self.eig_ok, 'entropy_floor': self.entropy_ok},
            'verdict': 'pass' if self.passes else 'fail',
        }

    def to_row(self):
        return {
            'd': self.d,
            'N': self.N,
            'max_eig': self.max_reduced_eig,
            'cap': self.eig_cap,
            'entropy': self.entropy,
            'floor': self.entropy_floor,
            'pass': self.passes,
        }


@dataclass(frozen=True)
class BoundChain:
    """Every floor implied for (d, N) in one record"""

    d: int
    N: int
    eig_cap: float
    entropy_floor: float
    ef_floor: float
    ec_floor: float

    def to_json(self):
        return {
            'd': self.d,
            'N': self.N,
            'eig_cap': self.eig_cap,
            'entropy_floor': self.entropy_floor,
            'ef_floor': self.ef_floor,
            'ec_floor': self.ec_floor,
        }


@dataclass(frozen=True)
class CounterexampleReport:
    """The d=3, N=2 state whose reduction breaks the 2^-N eigenvalue cap"""

    max_reduced_eig: float
    naive_cap: float
    eig_cap: float
    entropy: float
    margin: float = COUNTEREXAMPLE_MARGIN

    @property
    def refutes_naive_cap(self) -> bool:
        return self.max_reduced_eig > self.naive_cap + self.margin

    @property
    def within_cap(self) -> bool:
        return self.max_reduced_eig <= self.eig_cap + BOUND_TOL

    @property
    def passes(self) -> bool:
        return self.refutes_naive_cap and self.within_cap

    def to_json(self):
        return {
            'max_reduced_eig': self.max_reduced_eig,
            'naive_cap': self.naive_cap,
            'eig_cap': self.eig_cap,
            'entropy': self.entropy,
            'refutes_2^-N_cap': self.refutes_naive_cap,
            'within_eig_cap': self.within_cap,
            'verdict': 'pass' if self.passes else 'fail',
        }


# =========================================================================
# Reductions and entropy
# =========================================================================

def _full_amplitudes(psi: Union[Ket, np.ndarray], d: int, n: int) -> np.ndarray:
    """Interleaved full-space amplitudes, embedding D'^N coordinates when needed"""
    amps = psi.amplitudes if isinstance(psi, Ket) else np.asarray(psi, dtype=np.complex128).reshape(-1)
    norm = np.linalg.norm(amps)
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"State must be normalized, got norm {norm:.15f}")

    basis = AntisymBasis.for_dimension(d)
    if amps.size == basis.size ** n:
        return embedding_isometry(d, n) @ amps
    if amps.size == d ** (2 * n):
        return amps
    raise ValueError(
        f"State of length {amps.size} is neither D'^N coordinates ({basis.size ** n}) "
        f"nor a full-space vector ({d ** (2 * n)}) for d={d}, N={n}"
    )


def _blocked_matrix(psi, d: int, n: int) -> np.ndarray:
    """Amplitudes as a d^N x d^N matrix, rows A1..AN and columns B1..BN"""
    amps = _full_amplitudes(psi, d, n)
    sig = DimSignature.uniform(d, 2 * n)
    return permute_vector_factors(amps, sig, interleaved_to_blocked(n)).reshape(d ** n, d ** n)


def reduced_state(psi: Union[Ket, np.ndarray], d: int, n: int) -> DensityMatrix:
    """
    A-side reduction of a pure state in (C^d ⊗ C^d)^⊗N.

    Args:
        psi: Normalized ket, either D'^N coordinates or interleaved full-space amplitudes
        d: Local dimension
        n: Number of copies N

    Returns:
        DensityMatrix: d^N-side reduction with every B factor traced out

    Raises:
        ValueError: If psi is not normalized or has the wrong length
    """
    m = _blocked_matrix(psi, d, n)
    return DensityMatrix(m @ m.conj().T, DimSignature.uniform(d, n))


def schmidt_coefficients(psi: Union[Ket, np.ndarray], d: int, n: int) -> np.ndarray:
    """Descending squared singular values of the blocked amplitude matrix"""
    singular = np.linalg.svd(_blocked_matrix(psi, d, n), compute_uv=False)
    return singular ** 2


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """-Tr rho log2 rho, in bits"""
    return entropy_bits(rho.eigenvalues())


def pure_state_report(psi: Union[Ket, np.ndarray], d: int, n: int,
                      tol: float = BOUND_TOL, entropy_tol: float = ENTROPY_TOL) -> BoundReport:
    """Eigenvalue cap and entropy floor for one pure state, via its Schmidt coefficients"""
    coefficients = schmidt_coefficients(psi, d, n)
    return BoundReport(d, n, float(coefficients[0]), entropy_bits(coefficients),
                       lambda_tilde(d) ** n, entropy_floor(d, n), tol, entropy_tol)


# =========================================================================
# Bounds
# =========================================================================

def _compress_to_coordinates(x: np.ndarray, d: int, n: int, tol: float,
                             embedding_budget: int = DEFAULT_EMBEDDING_BUDGET) -> np.ndarray:
    """V^dagger X V for a full-space X supported on H-^⊗N"""
    v = embedding_isometry(d, n, embedding_budget)
    coords = v.conj().T @ x @ v
    leakage = max_abs(x - v @ coords @ v.conj().T)
    if leakage > tol * max(1.0, max_abs(x)):
        raise ValueError(f"Input is not supported on the antisymmetric subspace (leakage {leakage:.3e})")
    return coords


def check_eigenvalue_bound(x, d: int, n: int, tol: float = BOUND_TOL,
                           budget: int = DEFAULT_SUPEROPERATOR_BUDGET,
                           hermiticity_tol: float = HERMITICITY_TOL,
                           embedding_budget: int = DEFAULT_EMBEDDING_BUDGET) -> BoundReport:
    """
    Lambda^⊗N(X) <= ((d-1)/d)^N · id for a density matrix X on D'^N coordinates.

    A full-space X of side d^2N is accepted when supported on H-^⊗N and is
    compressed to coordinates first.

    Args:
        x: Density matrix on D'^N coordinates or on the full space
        d: Local dimension
        n: Number of copies N
        tol: Absolute slack on the eigenvalue cap
        budget: Maximum superoperator side for Lambda^⊗N
        hermiticity_tol: Relative Hermiticity tolerance for X and its image
        embedding_budget: Maximum entries of the embedding isometry

    Raises:
        ValueError: If X is not a density matrix or not supported on H-^⊗N
        SizeBudgetError: If Lambda^⊗N or the embedding exceeds its budget
    """
    basis = AntisymBasis.for_dimension(d)
    x = as_cmatrix(x)
    if x.shape[0] == d ** (2 * n):
        x = _compress_to_coordinates(x, d, n, SUPPORT_TOL, embedding_budget)
    elif x.shape[0] != basis.size ** n:
        raise ValueError(f"X of side {x.shape[0]} does not act on D'^N coordinates (side {basis.size ** n})")

    x = DensityMatrix(x, basis.coordinate_signature(n), hermiticity_tol).matrix
    image = apply_lambda_power(x, d, n, budget)
    rho = DensityMatrix(image, DimSignature.uniform(d, n), hermiticity_tol)

    report = BoundReport(d, n, float(rho.eigenvalues()[-1]), von_neumann_entropy(rho),
                         lambda_tilde(d) ** n, entropy_floor(d, n), tol)
    logger.debug(f"Eigenvalue bound d={d}, N={n}: {report.max_reduced_eig:.12f} <= {report.eig_cap:.12f}")
    return report


def lambda_vs_partial_trace(x, d: int, n: int, budget: int = DEFAULT_SUPEROPERATOR_BUDGET,
                            embedding_budget: int = DEFAULT_EMBEDDING_BUDGET) -> float:
    """
    ||Lambda^⊗N(X) - Tr_B(V X V^dagger)||_max for X on D'^N coordinates.

    Both paths produce an operator on A1..AN.
    """
    x = as_cmatrix(x)
    v = embedding_isometry(d, n, embedding_budget)
    full = v @ x @ v.conj().T
    traced = partial_trace(full, DimSignature.uniform(d, 2 * n), range(0, 2 * n, 2))
    image = apply_lambda_power(x, d, n, budget)
    return max_abs(image - traced)


def entropy_floor(d: int, n: int) -> float:
    """
    N·log2(d/(d-1)) bits.

    Examples:
        >>> entropy_floor(2, 1)
        1.0
    """
    if int(n) != n or n < 1:
        raise ValueError(f"Tensor power N must be an integer >= 1, got {n}")
    return n * log2_ratio(d)


def ef_floor(d: int, n: int) -> float:
    """E_f floor for any state supported on H-^⊗N"""
    return entropy_floor(d, n)


def ec_lower_bound(d: int) -> float:
    """
    Entanglement cost floor log2(d/(d-1)) per copy of a state supported on H-.

    Examples:
        >>> round(ec_lower_bound(3), 10)
        0.5849625007
    """
    return log2_ratio(d)


def bound_chain(d: int, n: int) -> BoundChain:
    return BoundChain(d, n, lambda_tilde(d) ** n, entropy_floor(d, n), ef_floor(d, n), ec_lower_bound(d))


def counterexample_report() -> CounterexampleReport:
    rho = reduced_state(counterexample_state(), 3, 2)
    return CounterexampleReport(
        max_reduced_eig=float(rho.eigenvalues()[-1]),
        naive_cap=2.0 ** -2,
        eig_cap=lambda_tilde(3) ** 2,
        entropy=von_neumann_entropy(rho),
    )


# =========================================================================
# Processor
# =========================================================================

class BoundsProcessor(BaseProcessor):
    """Tabulates the floors over (d, N) and checks the counterexample"""

    def __init__(self, export_dir: Optional[str] = None):
        super().__init__("Bounds", export_dir)
        logger.info("BoundsProcessor initialized")

    def process_all(self, dims: Sequence[int] = (2, 3, 4, 5, 6),
                    powers: Sequence[int] = (1, 2, 3)) -> Dict[str, pd.DataFrame]:
        """
        Args:
            dims: Local dimensions of the sweep
            powers: Numbers of copies N of the sweep

        Returns:
            Dictionary with bound_chain and counterexample tables
        """
        logger.info(f"Processing bound chain for d in {list(dims)}, N in {list(powers)}")

        chain = pd.DataFrame([bound_chain(d, n).to_json() for d in dims for n in powers])
        report = counterexample_report()
        if report.passes:
            logger.info(f"✓ Counterexample max eigenvalue {report.max_reduced_eig:.12f} > 1/4")
        else:
            logger.warning(f"✗ Counterexample check failed: {report.to_json()}")

        self.tables = {
            'bound_chain': chain,
            'counterexample': pd.DataFrame([report.to_json()]),
        }
        for name, df in self.tables.items():
            self.log_processing_summary(df, name)

        logger.info("✅ Bounds processing complete")
        return self.tables

"""
Upper bounds on the entanglement of formation.

Every decomposition of a rank-r state rho = sum_j l_j |e_j><e_j| arises from an
m x r isometry V through the unnormalized members sum_j conj(V_ij) sqrt(l_j) |e_j>.
The optimizer searches over V with Givens rotations of row pairs; each rotation
only touches two members, so a trial costs two Schmidt decompositions.

The result is an upper bound only. Paired with the floor N·log2(d/(d-1)) for
states supported on H-^⊗N it brackets E_f and, per copy, the entanglement cost.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from constructions.antisym_space import AntisymBasis, Ket, embedding_isometry
from processors.bounds_processor import (
    DensityMatrix,
    ec_lower_bound,
    ef_floor,
    schmidt_coefficients,
)
from utils.logger import get_logger
from utils.math_utils import entropy_bits
from utils.random_utils import haar_isometry, substream
from utils.tensor_core import (
    DimSignature,
    eig_hermitian,
    interleaved_to_blocked,
    max_abs,
    permute_vector_factors,
)

logger = get_logger(__name__)

RANK_TOL = 1e-12
DROP_TOL = 1e-15
ISOMETRY_TOL = 1e-10
PROBABILITY_TOL = 1e-10
RECONSTRUCTION_TOL = 1e-9
RANGE_TOL = 1e-9
SUPPORT_TOL = 1e-10
ACCEPT_TOL = 1e-12
BRACKET_TOL = 1e-8
TRIAL_PHASES = (0.0, np.pi / 2)


@dataclass(frozen=True)
class OptimizerSettings:
    restarts: int = 16
    iterations: int = 200
    initial_step: float = 0.5
    step_decay: float = 0.5
    min_step: float = 1e-6
    stall_threshold: float = 1e-10
    ensemble_size: Optional[int] = None
    threads: int = 1

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {self.restarts}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if not 0 < self.step_decay < 1:
            raise ValueError(f"step_decay must be in (0, 1), got {self.step_decay}")
        if not 0 < self.min_step <= self.initial_step:
            raise ValueError(f"Need 0 < min_step <= initial_step, got {self.min_step}, {self.initial_step}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")


@dataclass(frozen=True)
class Ensemble:
    """
    Decomposition {(p_i, |phi_i>)} of a density matrix.

    Members are the rows of `members`, unit norm, in the source's own space.
    """

    probabilities: np.ndarray
    members: np.ndarray = field(repr=False)
    source: DensityMatrix = field(repr=False)

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        members = np.atleast_2d(np.asarray(self.members, dtype=np.complex128))
        if p.size != members.shape[0]:
            raise ValueError(f"{p.size} probabilities for {members.shape[0]} members")
        if np.any(p <= 0):
            raise ValueError("Ensemble probabilities must be positive")
        if abs(p.sum() - 1.0) > PROBABILITY_TOL:
            raise ValueError(f"Ensemble probabilities sum to {p.sum():.15f}")
        norms = np.linalg.norm(members, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise ValueError(f"Ensemble member norms deviate from 1 by {np.max(np.abs(norms - 1.0)):.3e}")

        error = max_abs(self._reconstruct(p, members) - self.source.matrix)
        if error > RECONSTRUCTION_TOL:
            raise ValueError(f"Ensemble does not reconstruct its source (error {error:.3e})")

        object.__setattr__(self, 'probabilities', p)
        object.__setattr__(self, 'members', members)

    @staticmethod
    def _reconstruct(p: np.ndarray, members: np.ndarray) -> np.ndarray:
        return (members.T * p) @ members.conj()

    @property
    def size(self) -> int:
        return self.probabilities.size

    def reconstruct(self) -> np.ndarray:
        return self._reconstruct(self.probabilities, self.members)

    def kets(self) -> List[Tuple[float, Ket]]:
        return [(float(p), Ket(m, self.source.sig)) for p, m in zip(self.probabilities, self.members)]

    def to_json(self):
        return {
            'probabilities': [float(p) for p in self.probabilities],
            'members': [[[float(z.real), float(z.imag)] for z in m] for m in self.members],
        }


@dataclass(frozen=True)
class EfResult:
    upper_bound: float
    lower_bound: float
    best_ensemble: Ensemble = field(repr=False)
    trace: Tuple[float, ...]
    restart_values: Tuple[float, ...]
    start_value: float
    seed: int

    @property
    def inverted(self) -> bool:
        return self.upper_bound < self.lower_bound - BRACKET_TOL

    def to_json(self, include_ensemble: bool = True):
        payload = {
            'upper_bound': self.upper_bound,
            'lower_bound': self.lower_bound,
            'start_value': self.start_value,
            'restart_values': list(self.restart_values),
            'trace': list(self.trace),
            'seed': self.seed,
            'verdict': 'fail' if self.inverted else 'pass',
        }
        if include_ensemble:
            payload['ensemble'] = self.best_ensemble.to_json()
        return payload


@dataclass(frozen=True)
class EcBracket:
    """log2(d/(d-1)) <= E_c, and E_f(sigma-^⊗N)/N from above"""

    d: int
    N: int
    ec_lower: float
    ef_lower: float
    ef_upper: float
    witness: float
    restarts: int
    seed: int

    @property
    def ec_upper(self) -> float:
        return self.ef_upper / self.N

    @property
    def passes(self) -> bool:
        return self.ef_lower <= self.ef_upper + BRACKET_TOL and self.ef_upper <= self.witness + BRACKET_TOL

    def to_json(self):
        return {
            'd': self.d,
            'N': self.N,
            'ec_lower': self.ec_lower,
            'ef_lower': self.ef_lower,
            'ef_upper': self.ef_upper,
            'ec_upper': self.ec_upper,
            'eigen_ensemble_witness': self.witness,
            'restarts': self.restarts,
            'seed': self.seed,
            'verdict': 'pass' if self.passes else 'fail',
        }


# =========================================================================
# Ensembles
# =========================================================================

def _weighted_eigenvectors(rho: DensityMatrix) -> np.ndarray:
    """Columns sqrt(l_j)·e_j over the support of rho, largest eigenvalue first"""
    spectrum = eig_hermitian(rho.matrix)
    keep = spectrum.eigenvalues > RANK_TOL
    values = spectrum.eigenvalues[keep][::-1]
    vectors = spectrum.eigenvectors[:, keep][:, ::-1]
    return vectors * np.sqrt(values)


def ensemble_from_isometry(rho: DensityMatrix, v) -> Ensemble:
    """
    Decomposition of rho generated by an m x r isometry.

    Zero-probability members are dropped.

    Raises:
        ValueError: If V is not m x r with m >= r = rank(rho), or not an isometry
    """
    w = _weighted_eigenvectors(rho)
    rank = w.shape[1]
    v = np.atleast_2d(np.asarray(v, dtype=np.complex128))
    if v.shape[1] != rank or v.shape[0] < rank:
        raise ValueError(f"Isometry must be m x {rank} with m >= {rank}, got {v.shape}")

    defect = max_abs(v.conj().T @ v - np.eye(rank))
    if defect > ISOMETRY_TOL:
        raise ValueError(f"V is not an isometry: ||V^dagger V - I||_max = {defect:.3e}")

    raw = v.conj() @ w.T
    p = np.sum(np.abs(raw) ** 2, axis=1)
    keep = p > DROP_TOL
    members = raw[keep] / np.sqrt(p[keep])[:, None]
    return Ensemble(p[keep] / p[keep].sum(), members, rho)


def _coordinate_side(d: int, n: int) -> int:
    return AntisymBasis.for_dimension(d).size ** n


def _to_blocked_full(vectors: np.ndarray, d: int, n: int) -> np.ndarray:
    """Columns in the source space -> columns in blocked full-space order"""
    if vectors.shape[0] == _coordinate_side(d, n):
        vectors = embedding_isometry(d, n) @ vectors
    elif vectors.shape[0] != d ** (2 * n):
        raise ValueError(f"Vectors of length {vectors.shape[0]} do not fit d={d}, N={n}")
    return permute_vector_factors(vectors, DimSignature.uniform(d, 2 * n), interleaved_to_blocked(n))


def average_entanglement(e: Ensemble, d: int, n: int) -> float:
    """sum_i p_i E(phi_i), in bits"""
    return float(sum(p * entropy_bits(schmidt_coefficients(member, d, n))
                     for p, member in zip(e.probabilities, e.members)))


def range_check(e: Ensemble, rho: DensityMatrix, tol: float = RANGE_TOL) -> bool:
    """True iff every member lies in Range(rho) up to tol"""
    spectrum = eig_hermitian(rho.matrix)
    support = spectrum.eigenvectors[:, spectrum.eigenvalues > RANK_TOL]
    residual = e.members.T - support @ (support.conj().T @ e.members.T)
    worst = float(np.max(np.linalg.norm(residual, axis=0))) if residual.size else 0.0
    return worst <= tol


def is_supported_on_antisym(rho: DensityMatrix, d: int, n: int, tol: float = SUPPORT_TOL) -> bool:
    if rho.side == _coordinate_side(d, n):
        return True
    v = embedding_isometry(d, n)
    projector = v @ v.conj().T
    return max_abs(projector @ rho.matrix @ projector - rho.matrix) <= tol


# =========================================================================
# Local descent
# =========================================================================

def _member_term(u: np.ndarray, half_side: int) -> float:
    """p·E(u/|u|) for an unnormalized blocked member u"""
    weight = float(np.vdot(u, u).real)
    if weight <= DROP_TOL:
        return 0.0
    singular = np.linalg.svd(u.reshape(half_side, half_side), compute_uv=False)
    return weight * entropy_bits(singular ** 2 / weight)


def _givens(theta: float, phi: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -np.exp(1j * phi) * s], [np.exp(-1j * phi) * s, c]])


def _descend(v: np.ndarray, w_blocked: np.ndarray, half_side: int,
             settings: OptimizerSettings) -> Tuple[np.ndarray, List[float]]:
    """
    Coordinate descent over row-pair rotations of V.

    Returns the final isometry and the objective after every sweep; only
    strict improvements are accepted, so the trace is non-increasing.
    """
    v = v.copy()
    u = v.conj() @ w_blocked.T
    terms = np.array([_member_term(row, half_side) for row in u])
    trace = [float(terms.sum())]

    m = v.shape[0]
    if m < 2:
        return v, trace

    pairs = [(p, q) for p in range(m) for q in range(p + 1, m)]
    step = settings.initial_step
    for _ in range(settings.iterations):
        for p, q in pairs:
            current = terms[p] + terms[q]
            best = None
            for theta in (step, -step):
                for phi in TRIAL_PHASES:
                    g = _givens(theta, phi)
                    rows = g.conj() @ u[[p, q]]
                    new = (_member_term(rows[0], half_side), _member_term(rows[1], half_side))
                    delta = new[0] + new[1] - current
                    if delta < -ACCEPT_TOL and (best is None or delta < best[0]):
                        best = (delta, g, rows, new)
            if best is not None:
                _, g, rows, new = best
                v[[p, q]] = g @ v[[p, q]]
                u[[p, q]] = rows
                terms[p], terms[q] = new

        value = float(terms.sum())
        previous = trace[-1]
        trace.append(min(value, previous))
        if previous - value < settings.stall_threshold * max(abs(previous), 1e-300):
            step *= settings.step_decay
            if step < settings.min_step:
                break
    return v, trace


def minimize_ef(rho: DensityMatrix, d: int, n: int, seed: int = 0,
                settings: Optional[OptimizerSettings] = None) -> EfResult:
    """
    Best E_f upper bound over random-restart local descent.

    Restart 0 starts from the eigen-ensemble; restart k > 0 from a Haar isometry
    drawn from substream (seed, k). The bound is the minimum over restarts, so
    it never exceeds the eigen-ensemble value and never grows with more restarts.

    Args:
        rho: State in D'^N coordinates or interleaved full space
        d: Local dimension
        n: Number of copies N
        seed: Master seed
        settings: Optimizer settings (defaults when None)

    Returns:
        EfResult: Upper bound, floor, witnessing ensemble and descent trace

    Raises:
        ValueError: If ensemble_size < rank(rho)
    """
    settings = settings or OptimizerSettings()
    w = _weighted_eigenvectors(rho)
    rank = w.shape[1]
    m = settings.ensemble_size or rank * rank
    if m < rank:
        raise ValueError(f"Ensemble size {m} is below rank(rho) = {rank}")

    w_blocked = _to_blocked_full(w, d, n)
    half_side = d ** n

    def run(index: int) -> Tuple[np.ndarray, List[float]]:
        if index == 0:
            start = np.eye(m, rank, dtype=np.complex128)
        else:
            start = haar_isometry(substream(seed, index), m, rank)
        return _descend(start, w_blocked, half_side, settings)

    logger.info(f"Minimizing E_f: d={d}, N={n}, rank {rank}, ensemble size {m}, "
                f"{settings.restarts} restarts on {settings.threads} thread(s)")
    if settings.threads > 1:
        with ThreadPoolExecutor(max_workers=settings.threads) as pool:
            outcomes = list(pool.map(run, range(settings.restarts)))
    else:
        outcomes = [run(k) for k in range(settings.restarts)]

    finals = [trace[-1] for _, trace in outcomes]
    best = int(np.argmin(finals))
    best_v, best_trace = outcomes[best]

    lower = ef_floor(d, n) if is_supported_on_antisym(rho, d, n) else 0.0
    result = EfResult(
        upper_bound=finals[best],
        lower_bound=lower,
        best_ensemble=ensemble_from_isometry(rho, best_v),
        trace=tuple(best_trace),
        restart_values=tuple(finals),
        start_value=outcomes[0][1][0],
        seed=seed,
    )
    if result.inverted:
        logger.warning(f"✗ E_f bracket inverted: upper {result.upper_bound:.10f} < lower {lower:.10f}")
    else:
        logger.info(f"✓ E_f in [{lower:.10f}, {result.upper_bound:.10f}] (best restart {best})")
    return result


def antisym_projector_state(d: int, n: int = 1) -> DensityMatrix:
    """sigma-^⊗N: the normalized projector onto H-^⊗N, in D'^N coordinates"""
    basis = AntisymBasis.for_dimension(d)
    side = basis.size ** n
    return DensityMatrix(np.eye(side, dtype=np.complex128) / side, basis.coordinate_signature(n))


def bracket_entanglement_cost(d: int, n: int = 1, seed: int = 0,
                              settings: Optional[OptimizerSettings] = None) -> EcBracket:
    """Pair the entanglement-cost floor with an E_f upper bound for sigma-^⊗N"""
    settings = settings or OptimizerSettings()
    result = minimize_ef(antisym_projector_state(d, n), d, n, seed, settings)
    return EcBracket(
        d=d,
        N=n,
        ec_lower=ec_lower_bound(d),
        ef_lower=result.lower_bound,
        ef_upper=result.upper_bound,
        witness=result.start_value,
        restarts=settings.restarts,
        seed=seed,
    )

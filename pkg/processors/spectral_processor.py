"""
Spectral certificates for the Choi matrix of x·Lambda + y·M†.

The Choi matrix splits into a direct sum of labelled blocks: one 3x3 block per
level triple i<j<k and one (d-1)x(d-1) star block per level m. The analytic
spectrum {-y, y/2, (d-1)x/2 + y/2} and its multiplicities follow from that
structure and are checked against dense eigensolves.
"""

from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from constructions.antisym_space import AntisymBasis
from constructions.channel_maps import (
    DEFAULT_CHOI_BUDGET,
    DEFAULT_SUPEROPERATOR_BUDGET,
    bound_map,
    choi,
    is_cp,
    lambda_dagger_map,
    lambda_map,
    map_tensor_power,
    tilde_map,
)
from processors.base_processor import BaseProcessor
from utils.logger import get_logger
from utils.math_utils import lambda_tilde
from utils.random_utils import substream
from utils.tensor_core import PSD_TOL, Spectrum, as_cmatrix, eig_hermitian, matrix_leq

logger = get_logger(__name__)

SPECTRUM_TOL = 1e-9
SANDWICH_TOL = 1e-10
GRID_TOL = 1e-6
MERGE_TOL = 1e-12
LAMBDA_GRID = (-2.0, 3.0, 5001)

TRIPLE_PATTERN = np.array([[0, 1, -1], [1, 0, 1], [-1, 1, 0]], dtype=float)

Label = Tuple[Tuple[int, int], int]


@dataclass(frozen=True)
class TripleBlock:
    levels: Tuple[int, int, int]
    labels: Tuple[Label, ...]
    matrix: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class StarBlock:
    """Block of level m: lambda_part (x/2)·v v^T plus dagger_part (y/2)·I"""

    level: int
    labels: Tuple[Label, ...]
    lambda_part: np.ndarray = field(repr=False)
    dagger_part: np.ndarray = field(repr=False)

    @property
    def matrix(self) -> np.ndarray:
        return self.lambda_part + self.dagger_part


@dataclass(frozen=True)
class XiDecomposition:
    """
    Block decomposition of choi(x·Lambda + y·M†).

    Labels are (pair, level), 1-based. `permutation` lists Choi basis indices
    (pair index * d + level - 1) in block order, so that
    choi.matrix[np.ix_(permutation, permutation)] == assemble().
    """

    d: int
    x: float
    y: float
    triple_blocks: Tuple[TripleBlock, ...]
    star_blocks: Tuple[StarBlock, ...]

    @property
    def basis_labels(self) -> List[Label]:
        labels: List[Label] = []
        for block in self.triple_blocks:
            labels.extend(block.labels)
        for block in self.star_blocks:
            labels.extend(block.labels)
        return labels

    @property
    def block_sizes(self) -> List[int]:
        return [len(b.labels) for b in self.triple_blocks] + [len(b.labels) for b in self.star_blocks]

    @property
    def permutation(self) -> List[int]:
        basis = AntisymBasis.for_dimension(self.d)
        return [basis.index_of(*pair) * self.d + level - 1 for pair, level in self.basis_labels]

    def assemble(self) -> np.ndarray:
        """Block-diagonal direct sum in label order"""
        side = sum(self.block_sizes)
        out = np.zeros((side, side), dtype=np.complex128)
        offset = 0
        for block in list(self.triple_blocks) + list(self.star_blocks):
            size = len(block.labels)
            out[offset:offset + size, offset:offset + size] = block.matrix
            offset += size
        return out


@dataclass(frozen=True)
class SpectralCertificate:
    d: int
    x: float
    y: float
    analytic: Tuple[Tuple[float, int], ...]
    numeric: np.ndarray = field(repr=False)
    max_deviation: float
    tol: float
    N: int = 1

    @property
    def passes(self) -> bool:
        expected = sum(m for _, m in self.analytic)
        return expected == self.numeric.size and self.max_deviation <= self.tol

    def numeric_counts(self) -> List[int]:
        """Number of numeric eigenvalues nearest to each analytic value"""
        values = np.array([v for v, _ in self.analytic])
        nearest = np.argmin(np.abs(self.numeric[:, None] - values[None, :]), axis=1)
        return [int(np.sum(nearest == k)) for k in range(values.size)]

    def to_json(self):
        return {
            'd': self.d,
            'N': self.N,
            'x': self.x,
            'y': self.y,
            'analytic': [[v, m] for v, m in self.analytic],
            'numeric': [float(v) for v in self.numeric],
            'max_deviation': self.max_deviation,
            'verdict': 'pass' if self.passes else 'fail',
        }


@dataclass(frozen=True)
class LambdaMinimum:
    """Closed-form minimizer of lambda(x, 1-x) and its grid confirmation"""

    d: int
    x: float
    y: float
    value: float
    grid_min: float
    grid_argmin: float
    grid_points: int
    tol: float = GRID_TOL
    assumption: str = 'real parameters with x + y = 1'

    @property
    def passes(self) -> bool:
        return self.grid_min >= self.value - self.tol

    def to_json(self):
        return {
            'd': self.d,
            'x': self.x,
            'y': self.y,
            'lambda': self.value,
            'grid_min': self.grid_min,
            'grid_argmin': self.grid_argmin,
            'grid_points': self.grid_points,
            'assumption': self.assumption,
            'verdict': 'pass' if self.passes else 'fail',
        }


@dataclass(frozen=True)
class SandwichCertificate:
    """-lambda_tilde·id <= choi(M~) <= lambda_tilde·id"""

    d: int
    max_abs_eig: float
    lambda_tilde: float
    tol: float
    offending_eigenvalue: Optional[float] = None

    @property
    def deviation(self) -> float:
        return abs(self.max_abs_eig - self.lambda_tilde)

    @property
    def tight(self) -> bool:
        """max |eig| reaches (d-1)/d, not just stays below it"""
        return self.deviation <= self.tol

    @property
    def passes(self) -> bool:
        return self.offending_eigenvalue is None and self.tight

    def to_json(self):
        return {
            'd': self.d,
            'max_abs_eig': self.max_abs_eig,
            'lambda_tilde': self.lambda_tilde,
            'deviation': self.deviation,
            'tight': self.tight,
            'offending_eigenvalue': self.offending_eigenvalue,
            'verdict': 'pass' if self.passes else 'fail',
        }


@dataclass(frozen=True)
class CpCertificate:
    """CP verdict for lambda_tilde^N · Id# - M~^⊗N"""

    d: int
    N: int
    is_cp: bool
    min_choi_eig: float
    threshold: float
    choi_side: int
    scale: float

    @property
    def passes(self) -> bool:
        return self.is_cp

    def to_json(self):
        return {
            'd': self.d,
            'N': self.N,
            'lambda_tilde_N': self.scale,
            'min_choi_eig': self.min_choi_eig,
            'threshold': self.threshold,
            'choi_side': self.choi_side,
            'verdict': 'pass' if self.is_cp else 'fail',
        }


# =========================================================================
# Block structure and analytic spectrum
# =========================================================================

def _local_dimension(d) -> int:
    if int(d) != d or d < 2:
        raise ValueError(f"Local dimension d must be an integer >= 2, got {d}")
    return int(d)


def _sign(a: int, m: int) -> float:
    """Amplitude sign of |a>_A|m>_B inside |(min, max)>"""
    return 1.0 if a < m else -1.0


def xi_decomposition(d: int, x: float, y: float) -> XiDecomposition:
    """
    Labelled direct-sum blocks of choi(x·Lambda + y·M†).

    Triple block for i<j<k, labels ((j,k),i), ((i,k),j), ((i,j),k):
    (y/2)·[[0,1,-1],[1,0,1],[-1,1,0]], spectrum {-y, y/2, y/2}.

    Star block for level m, labels ({a,m}, a) for a != m:
    (x/2)·v v^T + (y/2)·I with v_a = +1 if a < m else -1.
    """
    d = _local_dimension(d)
    x, y = float(x), float(y)

    triples = []
    for i, j, k in combinations(range(1, d + 1), 3):
        labels = (((j, k), i), ((i, k), j), ((i, j), k))
        triples.append(TripleBlock((i, j, k), labels, (y / 2) * TRIPLE_PATTERN))

    stars = []
    for m in range(1, d + 1):
        others = [a for a in range(1, d + 1) if a != m]
        labels = tuple(((min(a, m), max(a, m)), a) for a in others)
        v = np.array([_sign(a, m) for a in others])
        stars.append(StarBlock(m, labels, (x / 2) * np.outer(v, v), (y / 2) * np.eye(d - 1)))

    return XiDecomposition(d, x, y, tuple(triples), tuple(stars))


def xi_spectrum_analytic(d: int, x: float, y: float) -> List[Tuple[float, int]]:
    """
    Analytic Choi spectrum of x·Lambda + y·M† as ascending (value, multiplicity).

    Equal values are merged and zero multiplicities dropped; multiplicities
    always total d^2 (d-1) / 2.

    Examples:
        >>> xi_spectrum_analytic(3, 1.0, 0.0)
        [(0.0, 6), (1.0, 3)]
        >>> xi_spectrum_analytic(2, 1.0, 0.0)
        [(0.5, 2)]
    """
    d = _local_dimension(d)
    x, y = float(x), float(y)
    triples = comb(d, 3)
    raw = [
        (-y, triples),
        (y / 2, 2 * triples + d * (d - 2)),
        ((d - 1) * x / 2 + y / 2, d),
    ]

    merged: List[List] = []
    for value, mult in sorted((v, m) for v, m in raw if m > 0):
        if merged and abs(value - merged[-1][0]) <= MERGE_TOL:
            merged[-1][1] += mult
        else:
            merged.append([value + 0.0, mult])
    return [(float(v), int(m)) for v, m in merged]


def combined_map(d: int, x: float, y: float):
    return float(x) * lambda_map(d) + float(y) * lambda_dagger_map(d)


def xi_spectrum_numeric(d: int, x: float, y: float, budget: int = DEFAULT_CHOI_BUDGET) -> Spectrum:
    """Dense spectrum of choi(x·Lambda + y·M†), side d^2 (d-1) / 2"""
    return eig_hermitian(choi(combined_map(d, x, y), budget).matrix, vectors=False)


def match_spectra(numeric: Sequence[float], analytic: Sequence[Tuple[float, int]]) -> float:
    """
    Max deviation after reconciling numeric eigenvalues with analytic multiplicities.

    Both sides are expanded to ascending lists and paired in order, which
    assigns every numeric value to the nearest unused analytic slot.

    Raises:
        ValueError: If the multiplicities do not total the numeric count
    """
    expanded = np.repeat([v for v, _ in analytic], [m for _, m in analytic])
    numeric = np.sort(np.asarray(numeric, dtype=float))
    if expanded.size != numeric.size:
        raise ValueError(f"Analytic multiplicities total {expanded.size}, numeric spectrum has {numeric.size}")
    return float(np.max(np.abs(numeric - expanded))) if numeric.size else 0.0


def spectral_certificate(d: int, x: float, y: float, tol: float = SPECTRUM_TOL,
                         budget: int = DEFAULT_CHOI_BUDGET) -> SpectralCertificate:
    analytic = xi_spectrum_analytic(d, x, y)
    numeric = xi_spectrum_numeric(d, x, y, budget).eigenvalues
    deviation = match_spectra(numeric, analytic)
    cert = SpectralCertificate(d, float(x), float(y), tuple(analytic), numeric, deviation, tol)
    if not cert.passes:
        logger.warning(f"✗ Choi spectrum mismatch d={d}, x={x:.6f}, y={y:.6f}: deviation {deviation:.3e}")
    return cert


# =========================================================================
# lambda(x, y) and its minimizer
# =========================================================================

def lambda_xy(d: int, x, y):
    """
    lambda(x, y) = max{|y|, |y/2|, |(d-1)x/2 + y/2|}; vectorized over x, y.

    Examples:
        >>> lambda_xy(3, 1.0, 0.0)
        1.0
    """
    d = _local_dimension(d)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    value = np.maximum.reduce([np.abs(y), np.abs(y / 2), np.abs((d - 1) * x / 2 + y / 2)])
    return float(value) if value.ndim == 0 else value


def minimize_lambda(d: int, grid: Tuple[float, float, int] = LAMBDA_GRID, tol: float = GRID_TOL) -> LambdaMinimum:
    """
    Closed-form minimizer (1/d, (d-1)/d) of lambda on x + y = 1, with value
    (d-1)/d, confirmed against an exhaustive grid over x.
    """
    start, stop, points = grid
    xs = np.linspace(start, stop, int(points))
    values = lambda_xy(d, xs, 1.0 - xs)
    best = int(np.argmin(values))

    result = LambdaMinimum(
        d=d,
        x=1 / d,
        y=lambda_tilde(d),
        value=float(lambda_xy(d, 1 / d, lambda_tilde(d))),
        grid_min=float(values[best]),
        grid_argmin=float(xs[best]),
        grid_points=int(points),
        tol=tol,
    )
    logger.debug(f"lambda minimum d={d}: closed {result.value:.12f}, grid {result.grid_min:.12f}")
    return result


# =========================================================================
# Sandwich bound and CP certificate
# =========================================================================

def check_sandwich(d: int, tol: float = SANDWICH_TOL, budget: int = DEFAULT_CHOI_BUDGET) -> SandwichCertificate:
    """max |eig| of choi(M~) equals (d-1)/d within tol, with no eigenvalue beyond it"""
    spectrum = eig_hermitian(choi(tilde_map(d), budget).matrix, vectors=False)
    cap = lambda_tilde(d)
    values = spectrum.eigenvalues
    worst = int(np.argmax(np.abs(values)))
    offending = float(values[worst]) if abs(values[worst]) > cap + tol else None
    if offending is not None:
        logger.warning(f"✗ Sandwich violated d={d}: eigenvalue {offending:.12f} beyond ±{cap:.12f}")
    return SandwichCertificate(d, spectrum.max_abs, cap, tol, offending)


def cp_certificate(d: int, n: int, tol: float = PSD_TOL,
                   superop_budget: int = DEFAULT_SUPEROPERATOR_BUDGET,
                   choi_budget: int = DEFAULT_CHOI_BUDGET) -> CpCertificate:
    """
    Complete positivity of lambda_tilde^N · Id# - M~^⊗N by the Choi criterion.

    Raises:
        SizeBudgetError: If the map or its Choi matrix exceeds the budgets
    """
    phi = bound_map(d, n, superop_budget)
    verdict = is_cp(phi, tol, choi_budget)
    logger.info(f"{'✓' if verdict.is_cp else '✗'} CP certificate d={d}, N={n}: "
                f"min Choi eig {verdict.min_eigenvalue:.3e} (side {verdict.choi_side})")
    return CpCertificate(d, n, verdict.is_cp, verdict.min_eigenvalue, verdict.threshold,
                         verdict.choi_side, lambda_tilde(d) ** n)


def check_tilde_domination(d: int, n: int, x, tol: float = PSD_TOL,
                           budget: int = DEFAULT_SUPEROPERATOR_BUDGET) -> bool:
    """
    M~^⊗N(X) <= lambda_tilde^N · Tr(X) · id for PSD X on M(D')^⊗N, the
    positivity consequence of the CP certificate.
    """
    x = as_cmatrix(x)
    tilde = map_tensor_power(tilde_map(d), n, budget)
    image = tilde(x)
    cap = lambda_tilde(d) ** n * np.trace(x).real * np.eye(tilde.out_side)
    return matrix_leq(image, cap, tol)


# =========================================================================
# Processor
# =========================================================================

class SpectralProcessor(BaseProcessor):
    """Sweeps the spectral certificates over dimensions and (d, N) cases"""

    def __init__(self, tol: float = SPECTRUM_TOL, psd_tol: float = PSD_TOL,
                 export_dir: Optional[str] = None):
        super().__init__("Spectral", export_dir)
        self.tol = tol
        self.psd_tol = psd_tol
        logger.info("SpectralProcessor initialized")

    def process_all(self, dims: Sequence[int] = (2, 3, 4, 5, 6), pairs: int = 20, seed: int = 0,
                    cp_cases: Sequence[Tuple[int, int]] = ((2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (4, 1), (4, 2)),
                    lambda_dims: Sequence[int] = tuple(range(2, 9))) -> Dict[str, pd.DataFrame]:
        """
        Run every spectral check

        Args:
            dims: Dimensions for the Choi spectrum and sandwich checks
            pairs: Random (x, y) pairs per dimension, drawn from [-2, 2]^2
            seed: Master seed; dimension d uses substream (seed, d)
            cp_cases: (d, N) pairs for the CP certificate
            lambda_dims: Dimensions for the minimizer check

        Returns:
            Dictionary with xi_spectrum, lambda_minimum, sandwich and cp_certificate tables
        """
        logger.info(f"Processing spectral checks for d in {list(dims)}")

        self.tables = {
            'xi_spectrum': self._xi_spectrum_table(dims, pairs, seed),
            'lambda_minimum': pd.DataFrame([m.to_json() for m in map(minimize_lambda, lambda_dims)]),
            'sandwich': self._sandwich_table(dims),
            'cp_certificate': pd.DataFrame([cp_certificate(d, n, self.psd_tol).to_json() for d, n in cp_cases]),
        }

        for name, df in self.tables.items():
            self.log_processing_summary(df, name)

        logger.info("✅ Spectral processing complete")
        return self.tables

    def _xi_spectrum_table(self, dims, pairs, seed) -> pd.DataFrame:
        rows = []
        for d in dims:
            gen = substream(seed, d)
            for x, y in gen.uniform(-2.0, 2.0, size=(pairs, 2)):
                cert = spectral_certificate(d, x, y, self.tol)
                rows.append({
                    'd': d,
                    'x': cert.x,
                    'y': cert.y,
                    'max_deviation': cert.max_deviation,
                    'verdict': 'pass' if cert.passes else 'fail',
                })
        return pd.DataFrame(rows, columns=['d', 'x', 'y', 'max_deviation', 'verdict'])

    def _sandwich_table(self, dims) -> pd.DataFrame:
        rows = []
        for d in dims:
            cert = check_sandwich(d)
            rows.append({k: v for k, v in cert.to_json().items() if k != 'offending_eigenvalue'})
        return pd.DataFrame(rows)

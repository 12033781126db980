"""
Sampler Processor - seeded Haar-random pure states in H-^⊗N

Each trial draws a complex Gaussian coordinate vector from its own substream
(seed, trial index), maps it through the blocked embedding and records the
Schmidt spectrum. Results are identical for any thread count.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from constructions.antisym_space import (
    DEFAULT_EMBEDDING_BUDGET,
    AntisymBasis,
    Ket,
    blocked_embedding,
    counterexample_state,
)
from processors.base_processor import BaseProcessor
from processors.bounds_processor import BOUND_TOL, ENTROPY_TOL, entropy_floor, schmidt_coefficients
from utils.logger import get_logger
from utils.math_utils import entropy_bits, lambda_tilde
from utils.random_utils import MAX_SEED, complex_gaussian, substream
from utils.tensor_core import DimSignature, max_abs

logger = get_logger(__name__)

ISOMETRY_TOL = 1e-10
DEFAULT_BINS = 20


@dataclass(frozen=True)
class ExperimentConfig:
    d: int
    N: int
    trials: int
    seed: int
    tol: float = BOUND_TOL
    entropy_tol: float = ENTROPY_TOL
    bins: int = DEFAULT_BINS
    inject_counterexample: bool = False
    keep_spectra: bool = False
    threads: int = 1
    budget: int = DEFAULT_EMBEDDING_BUDGET

    def __post_init__(self):
        AntisymBasis.for_dimension(self.d)
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be an integer >= 1, got {self.N}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.seed <= MAX_SEED:
            raise ValueError(f"seed must be in [0, 2^64 - 1], got {self.seed}")
        if self.bins < 1:
            raise ValueError(f"bins must be >= 1, got {self.bins}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")
        if self.inject_counterexample and (self.d, self.N) != (3, 2):
            raise ValueError("The counterexample trial exists only for d=3, N=2")

    @property
    def eig_cap(self) -> float:
        return lambda_tilde(self.d) ** self.N

    @property
    def entropy_floor(self) -> float:
        return entropy_floor(self.d, self.N)

    def to_json(self):
        return {
            'd': self.d,
            'N': self.N,
            'trials': self.trials,
            'seed': self.seed,
            'tol': self.tol,
            'entropy_tol': self.entropy_tol,
            'bins': self.bins,
            'inject_counterexample': self.inject_counterexample,
        }


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    worst_max_eig: float
    worst_entropy: float
    worst_max_eig_trial: int
    worst_entropy_trial: int
    histogram: Tuple[Tuple[float, int], ...]
    violations: Tuple[dict, ...]
    max_eigs: np.ndarray = field(repr=False)
    entropies: np.ndarray = field(repr=False)
    designated: Tuple[dict, ...] = ()
    spectra: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def passes(self) -> bool:
        return not self.violations

    def histogram_frame(self) -> pd.DataFrame:
        return pd.DataFrame(list(self.histogram), columns=['bin_lower', 'count'])

    def to_json(self):
        payload = {
            'config': self.config.to_json(),
            'eig_cap': self.config.eig_cap,
            'entropy_floor': self.config.entropy_floor,
            'worst_max_eig': self.worst_max_eig,
            'worst_max_eig_trial': self.worst_max_eig_trial,
            'worst_entropy': self.worst_entropy,
            'worst_entropy_trial': self.worst_entropy_trial,
            'mean_max_eig': float(np.mean(self.max_eigs)),
            'histogram': [[lower, count] for lower, count in self.histogram],
            'designated': list(self.designated),
            'violations': list(self.violations),
            'verdict': 'pass' if self.passes else 'fail',
        }
        if self.spectra is not None:
            payload['spectra'] = [[float(v) for v in row] for row in self.spectra]
        return payload


def _check_isometry(v: np.ndarray) -> None:
    defect = max_abs(v.conj().T @ v - np.eye(v.shape[1]))
    if defect > ISOMETRY_TOL:
        raise ValueError(f"V is not an isometry: ||V^dagger V - I||_max = {defect:.3e}")


def _draw(v: np.ndarray, gen: np.random.Generator) -> np.ndarray:
    g = complex_gaussian(gen, v.shape[1])
    return v @ (g / np.linalg.norm(g))


def sample_pure_in_subspace(v, seed: int, index: int = 0, sig: Optional[DimSignature] = None) -> Ket:
    """
    Uniformly random unit vector in the span of V's columns.

    V·g/|g| for a complex Gaussian g drawn from substream (seed, index).

    Raises:
        ValueError: If V is not an isometry
    """
    v = np.atleast_2d(np.asarray(v, dtype=np.complex128))
    _check_isometry(v)
    return Ket(_draw(v, substream(seed, index)), sig or DimSignature((v.shape[0],)))


def _trial_spectra(v_blocked: np.ndarray, cfg: ExperimentConfig, indices: Sequence[int]) -> np.ndarray:
    half = cfg.d ** cfg.N
    out = np.empty((len(indices), half))
    for row, index in enumerate(indices):
        psi = _draw(v_blocked, substream(cfg.seed, index))
        singular = np.linalg.svd(psi.reshape(half, half), compute_uv=False)
        out[row] = singular ** 2
    return out


def _violation(cfg: ExperimentConfig, max_eig: float, entropy: float, **where) -> Optional[dict]:
    broken = []
    if max_eig > cfg.eig_cap + cfg.tol:
        broken.append('eig_cap')
    if entropy < cfg.entropy_floor - cfg.entropy_tol:
        broken.append('entropy_floor')
    if not broken:
        return None
    return dict(where, seed=cfg.seed, max_eig=max_eig, entropy=entropy, broken=broken)


def run_bound_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """
    Monte-Carlo check of the reduced eigenvalue cap and the entropy floor.

    Raises:
        SizeBudgetError: If the embedding for (d, N) exceeds the budget
    """
    v_blocked = blocked_embedding(cfg.d, cfg.N, cfg.budget)
    logger.info(f"Sampling {cfg.trials:,} states in H-^⊗{cfg.N}, d={cfg.d}, seed={cfg.seed}")

    indices = list(range(cfg.trials))
    if cfg.threads > 1:
        chunks = [indices[k::cfg.threads] for k in range(cfg.threads)]
        spectra = np.empty((cfg.trials, cfg.d ** cfg.N))
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            for chunk, values in zip(chunks, pool.map(lambda c: _trial_spectra(v_blocked, cfg, c), chunks)):
                spectra[chunk] = values
    else:
        spectra = _trial_spectra(v_blocked, cfg, indices)

    max_eigs = spectra[:, 0].copy()
    entropies = np.array([entropy_bits(row) for row in spectra])

    violations: List[dict] = []
    for trial in range(cfg.trials):
        found = _violation(cfg, float(max_eigs[trial]), float(entropies[trial]), trial=trial)
        if found:
            violations.append(found)

    designated = []
    if cfg.inject_counterexample:
        coefficients = schmidt_coefficients(counterexample_state(), 3, 2)
        entry = {'name': 'counterexample', 'max_eig': float(coefficients[0]),
                 'entropy': entropy_bits(coefficients)}
        designated.append(entry)
        found = _violation(cfg, entry['max_eig'], entry['entropy'], trial='counterexample')
        if found:
            violations.append(found)

    counts, edges = np.histogram(np.clip(max_eigs, 0.0, 1.0), bins=cfg.bins, range=(0.0, 1.0))
    report = ExperimentReport(
        config=cfg,
        worst_max_eig=float(max_eigs.max()),
        worst_entropy=float(entropies.min()),
        worst_max_eig_trial=int(np.argmax(max_eigs)),
        worst_entropy_trial=int(np.argmin(entropies)),
        histogram=tuple((float(lower), int(count)) for lower, count in zip(edges[:-1], counts)),
        violations=tuple(violations),
        max_eigs=max_eigs,
        entropies=entropies,
        designated=tuple(designated),
        spectra=spectra if cfg.keep_spectra else None,
    )

    if report.passes:
        logger.info(f"✓ d={cfg.d}, N={cfg.N}: worst max eig {report.worst_max_eig:.12f} "
                    f"<= {cfg.eig_cap:.12f}, worst entropy {report.worst_entropy:.10f}")
    else:
        logger.warning(f"✗ d={cfg.d}, N={cfg.N}: {len(violations)} violation(s)")
    return report


class SamplerProcessor(BaseProcessor):
    """Runs a batch of experiments and tabulates their summaries"""

    def __init__(self, export_dir: Optional[str] = None):
        super().__init__("Sampler", export_dir)
        self.reports: List[ExperimentReport] = []
        logger.info("SamplerProcessor initialized")

    def process_all(self, configs: Sequence[ExperimentConfig]) -> Dict[str, pd.DataFrame]:
        """
        Args:
            configs: One experiment per (d, N) case

        Returns:
            Dictionary with experiments and histogram tables
        """
        self.reports = [run_bound_experiment(cfg) for cfg in configs]

        summary = pd.DataFrame([{
            'd': r.config.d,
            'N': r.config.N,
            'trials': r.config.trials,
            'seed': r.config.seed,
            'worst_max_eig': r.worst_max_eig,
            'eig_cap': r.config.eig_cap,
            'worst_entropy': r.worst_entropy,
            'entropy_floor': r.config.entropy_floor,
            'violations': len(r.violations),
            'verdict': 'pass' if r.passes else 'fail',
        } for r in self.reports])

        histograms = [r.histogram_frame().assign(d=r.config.d, N=r.config.N) for r in self.reports]
        self.tables = {
            'experiments': summary,
            'histogram': pd.concat(histograms, ignore_index=True) if histograms else pd.DataFrame(),
        }
        for name, df in self.tables.items():
            self.log_processing_summary(df, name)

        logger.info("✅ Sampler processing complete")
        return self.tables

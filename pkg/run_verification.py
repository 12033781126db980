"""
Antisymmetric Entanglement Bounds - Verification CLI

One command per construction or check, each producing a single Report on
standard output (or --out):

    basis, choi, spectrum, minimize, sandwich, cp-check, bound,
    counterexample, sample, ef-upper, bracket

and `verify`, which orchestrates every acceptance check in phases:
1. Spectral certificates (Choi spectra, lambda minimizer, sandwich, CP)
2. Bounds (floors, counterexample)
3. Monte-Carlo sampler
4. E_f optimizer bracket
5. Cross-representation consistency and determinism
6. Consolidated JSON report + Markdown summary

Exit codes: 0 all verdicts pass, 1 a verdict failed, 2 usage error,
3 computational error.
"""

import argparse
import os
import sys
from datetime import datetime
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from constructions.antisym_space import AntisymBasis, antisym_projector, embedding_isometry
from constructions.channel_maps import (
    bound_map,
    choi,
    id_sharp,
    lambda_dagger_map,
    lambda_map,
    map_tensor_power,
    slot_agreement,
    tilde_map,
)
from generators.markdown_exporter import MarkdownExporter
from generators.report_generator import Report, ReportGenerator, emit_report, error_report
from processors.bounds_processor import (
    BoundsProcessor,
    DensityMatrix,
    bound_chain,
    check_eigenvalue_bound,
    counterexample_report,
    ec_lower_bound,
    lambda_vs_partial_trace,
    schmidt_coefficients,
)
from processors.ef_optimizer import (
    OptimizerSettings,
    antisym_projector_state,
    bracket_entanglement_cost,
    minimize_ef,
)
from processors.sampler_processor import ExperimentConfig, SamplerProcessor, run_bound_experiment
from processors.spectral_processor import (
    SpectralProcessor,
    check_sandwich,
    cp_certificate,
    minimize_lambda,
    spectral_certificate,
)
from utils.config_loader import OUTPUT_DIR_ENV, load_config
from utils.logger import get_logger, log_elapsed, setup_logging
from utils.math_utils import entropy_bits
from utils.random_utils import MAX_SEED, haar_isometry, random_density, substream
from utils.tensor_core import DimSignature, eig_hermitian, max_abs

logger = get_logger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_ERROR = 3

DEFAULT_CONFIG_PATH = 'config/config.yaml'

MAX_D = 12
MAX_N = 6


class UsageError(ValueError):
    """Flag combination rejected after parsing"""


# =========================================================================
# Argument types
# =========================================================================

def bounded_int(lo: int, hi: int) -> Callable[[str], int]:
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
        if not lo <= value <= hi:
            raise argparse.ArgumentTypeError(f"{value} is outside [{lo}, {hi}]")
        return value
    parse.__name__ = f"int[{lo},{hi}]"
    return parse


def open_unit_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"{value} is outside (0, 1)")
    return value


def finite_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not np.isfinite(value):
        raise argparse.ArgumentTypeError(f"{text!r} is not finite")
    return value


seed_type = bounded_int(0, MAX_SEED)


# =========================================================================
# Parser
# =========================================================================

def build_parser(config: Dict) -> argparse.ArgumentParser:
    tol = config['tolerances']
    sampler = config['sampler']
    optimizer = config['optimizer']
    threads = config['execution']['threads']

    parser = argparse.ArgumentParser(
        prog='run_verification.py',
        description='Numerical verification of entanglement-cost bounds for antisymmetric states',
    )
    parser.add_argument('--config', default=DEFAULT_CONFIG_PATH, help='Path to config file')

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--out', default=None,
                        help=f'Output path (default: standard output; bare file names go under ${OUTPUT_DIR_ENV} when set)')
    common.add_argument('--format', choices=['json', 'csv'], default='json', help='Report format')
    common.add_argument('--threads', type=bounded_int(1, 256), default=threads, help='Worker cap, in [1, 256]')
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument('--verbose', action='store_true', help='Log progress to stderr')
    verbosity.add_argument('--quiet', action='store_true', help='Log errors only')

    formatter = argparse.ArgumentDefaultsHelpFormatter
    sub = parser.add_subparsers(dest='command', required=True, metavar='COMMAND')

    def command(name: str, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, parents=[common], help=help_text, description=help_text,
                              formatter_class=formatter)

    def add_d(p, default=3):
        p.add_argument('--d', type=bounded_int(2, MAX_D), default=default, help=f'Local dimension, in [2, {MAX_D}]')

    def add_n(p, default=1):
        p.add_argument('--N', type=bounded_int(1, MAX_N), default=default, help=f'Number of copies, in [1, {MAX_N}]')

    def add_tol(p, default):
        p.add_argument('--tol', type=open_unit_float, default=default, help='Tolerance, in (0, 1)')

    def add_optimizer(p):
        p.add_argument('--restarts', type=bounded_int(1, 1024), default=optimizer['restarts'],
                       help='Optimizer restarts, in [1, 1024]')
        p.add_argument('--iterations', type=bounded_int(1, 100_000), default=optimizer['iterations'],
                       help='Sweep cap per restart, in [1, 100000]')
        p.add_argument('--ensemble-size', type=bounded_int(1, 10_000), default=None,
                       help='Ensemble size m >= rank, in [1, 10000] (default: rank^2)')

    p = command('basis', 'Antisymmetric basis D\', embedding isometry and projector')
    add_d(p)
    add_n(p)

    p = command('choi', 'Choi matrix of one of the maps')
    p.add_argument('--map', choices=['lambda', 'dagger', 'tilde', 'id-sharp', 'bound'], default='tilde',
                   help='Map: Λ, M†, M̃, Id# or λ̃ᴺ·Id# − M̃^⊗N')
    add_d(p)
    add_n(p)
    p.add_argument('--include-matrix', action='store_true', help='Embed the Choi matrix as [re, im] pairs')

    p = command('spectrum', 'Analytic vs numeric Choi spectrum of x·Λ + y·M†')
    add_d(p)
    p.add_argument('--x', type=finite_float, default=1 / 3, help='Coefficient of Λ')
    p.add_argument('--y', type=finite_float, default=2 / 3, help='Coefficient of M†')
    add_tol(p, tol['spectrum'])

    p = command('minimize', 'Minimizer of λ(x, 1−x) with grid confirmation')
    p.add_argument('--d', type=bounded_int(2, 10_000), default=3, help='Local dimension, in [2, 10000]')

    p = command('sandwich', 'max |eig| of choi(M̃) against (d−1)/d')
    add_d(p)
    add_tol(p, 1e-10)

    p = command('cp-check', 'Complete positivity of λ̃ᴺ·Id# − M̃^⊗N')
    add_d(p)
    add_n(p)
    add_tol(p, tol['psd'])

    p = command('bound', 'Reduced eigenvalue cap and entropy floor on density matrices over D\'^N')
    add_d(p)
    add_n(p)
    p.add_argument('--sweep', type=bounded_int(2, MAX_D), nargs=2, metavar=('D_MIN', 'D_MAX'), default=None,
                   help='Sweep d over [D_MIN, D_MAX] instead of a single --d')
    p.add_argument('--samples', type=bounded_int(0, 1_000_000), default=0,
                   help='Random density matrices per d, in [0, 1000000] (needs --seed)')
    p.add_argument('--seed', type=seed_type, default=None, help='Master seed, in [0, 2^64 - 1]')
    add_tol(p, tol['bound'])

    p = command('counterexample', 'Reduced spectrum of the d=3, N=2 counterexample state')

    p = command('sample', 'Monte-Carlo check of the cap and floor on Haar-random states in H-^⊗N')
    add_d(p)
    add_n(p)
    p.add_argument('--trials', type=bounded_int(1, 10_000_000), default=sampler['trials'],
                   help='Number of trials, in [1, 10^7]')
    p.add_argument('--seed', type=seed_type, required=True, help='Master seed, in [0, 2^64 - 1]')
    p.add_argument('--bins', type=bounded_int(1, 1000), default=sampler['bins'],
                   help='Histogram bins over [0, 1], in [1, 1000]')
    p.add_argument('--inject-counterexample', action='store_true',
                   help='Add the counterexample state as a designated trial (d=3, N=2 only)')
    p.add_argument('--keep-spectra', action='store_true', help='Embed every Schmidt spectrum')

    p = command('ef-upper', 'Upper bound on E_f by ensemble minimization')
    add_d(p)
    add_n(p)
    p.add_argument('--state', choices=['projector', 'pure-pair', 'pair-mixture'], default='projector',
                   help="Normalized projector onto H-^⊗N, |(1,2)>^⊗N, or (|(1,2)><(1,2)| + |(1,3)><(1,3)|)/2")
    p.add_argument('--seed', type=seed_type, required=True, help='Master seed, in [0, 2^64 - 1]')
    add_optimizer(p)

    p = command('bracket', 'Bracket the entanglement cost of the normalized antisymmetric projector')
    add_d(p)
    add_n(p)
    p.add_argument('--seed', type=seed_type, required=True, help='Master seed, in [0, 2^64 - 1]')
    add_optimizer(p)

    p = command('verify', 'Run every acceptance check and write the consolidated report')
    p.add_argument('--scale', choices=['quick', 'full'], default='quick', help='Trial and restart counts')
    p.add_argument('--seed', type=seed_type, required=True, help='Master seed, in [0, 2^64 - 1]')

    return parser


# =========================================================================
# Command handlers
# =========================================================================

def _params(args: argparse.Namespace, *names: str) -> Dict:
    return {name: getattr(args, name.replace('-', '_')) for name in names}


def _optimizer_settings(args: argparse.Namespace, config: Dict) -> OptimizerSettings:
    opt = config['optimizer']
    return OptimizerSettings(
        restarts=args.restarts,
        iterations=args.iterations,
        initial_step=opt['initial_step'],
        step_decay=opt['step_decay'],
        min_step=opt['min_step'],
        stall_threshold=opt['stall_threshold'],
        ensemble_size=args.ensemble_size,
        threads=args.threads,
    )


def cmd_basis(args, config) -> Report:
    basis = AntisymBasis.for_dimension(args.d)
    v = embedding_isometry(args.d, args.N, config['budgets']['embedding_entries'])
    projector = antisym_projector(args.d)
    isometry_defect = max_abs(v.conj().T @ v - np.eye(v.shape[1]))
    idempotency_defect = max_abs(projector @ projector - projector)

    payload = {
        'basis': basis.to_json(),
        'isometry_shape': list(v.shape),
        'isometry_defect': isometry_defect,
        'projector_trace': float(np.trace(projector).real),
        'projector_idempotency_defect': idempotency_defect,
    }
    ok = isometry_defect <= 1e-12 and idempotency_defect <= 1e-12
    return Report('basis', _params(args, 'd', 'N'), payload, verdict='pass' if ok else 'fail')


def cmd_choi(args, config) -> Report:
    budgets = config['budgets']
    maps = {
        'lambda': lambda: lambda_map(args.d),
        'dagger': lambda: lambda_dagger_map(args.d),
        'tilde': lambda: tilde_map(args.d),
        'id-sharp': lambda: id_sharp(AntisymBasis.for_dimension(args.d).size, args.d),
        'bound': lambda: bound_map(args.d, args.N, budgets['superoperator_side']),
    }
    phi = maps[args.map]()
    if args.map in ('lambda', 'dagger', 'tilde', 'id-sharp') and args.N > 1:
        phi = map_tensor_power(phi, args.N, budgets['superoperator_side'])

    c = choi(phi, budgets['choi_side'])
    spectrum = eig_hermitian(c.matrix, vectors=False, tol=config['tolerances']['hermiticity'])
    payload = c.to_json(include_matrix=args.include_matrix)
    payload.update({
        'map': phi.name,
        'hermiticity_violation': c.hermiticity_violation,
        'min_eig': spectrum.min,
        'max_eig': spectrum.max,
        'eigenvalues': spectrum.to_json(),
    })
    return Report('choi', _params(args, 'map', 'd', 'N'), payload)


def cmd_spectrum(args, config) -> Report:
    cert = spectral_certificate(args.d, args.x, args.y, args.tol, config['budgets']['choi_side'])
    payload = cert.to_json()
    payload['numeric_counts'] = cert.numeric_counts()
    payload['assumption'] = 'real parameters'
    return Report('spectrum', _params(args, 'd', 'x', 'y', 'tol'), payload, verdict=payload['verdict'])


def cmd_minimize(args, config) -> Report:
    result = minimize_lambda(args.d)
    return Report('minimize', _params(args, 'd'), result.to_json(), verdict=result.to_json()['verdict'])


def cmd_sandwich(args, config) -> Report:
    cert = check_sandwich(args.d, args.tol, config['budgets']['choi_side'])
    return Report('sandwich', _params(args, 'd', 'tol'), cert.to_json(), verdict=cert.to_json()['verdict'])


def cmd_cp_check(args, config) -> Report:
    budgets = config['budgets']
    cert = cp_certificate(args.d, args.N, args.tol, budgets['superoperator_side'], budgets['choi_side'])
    return Report('cp-check', _params(args, 'd', 'N', 'tol'), cert.to_json(), verdict=cert.to_json()['verdict'])


def cmd_bound(args, config) -> Report:
    if args.samples and args.seed is None:
        raise UsageError('--samples needs --seed')
    if args.sweep and args.sweep[0] > args.sweep[1]:
        raise UsageError('--sweep needs D_MIN <= D_MAX')

    budgets = config['budgets']
    dims = range(args.sweep[0], args.sweep[1] + 1) if args.sweep else [args.d]
    rows = []
    for d in dims:
        side = AntisymBasis.for_dimension(d).size ** args.N
        candidates = [np.eye(side) / side]
        if args.samples:
            gen = substream(args.seed, d)
            candidates.extend(random_density(gen, side) for _ in range(args.samples))
        reports = [check_eigenvalue_bound(x, d, args.N, args.tol, budgets['superoperator_side'],
                                          config['tolerances']['hermiticity'], budgets['embedding_entries'])
                   for x in candidates]
        worst = max(reports, key=lambda r: r.max_reduced_eig)
        row = worst.to_row()
        row['pass'] = all(r.passes for r in reports)
        row.update({f'chain_{k}': v for k, v in bound_chain(d, args.N).to_json().items() if k not in ('d', 'N')})
        rows.append(row)

    table = pd.DataFrame(rows)
    ok = bool(table['pass'].all())
    return Report('bound', _params(args, 'd', 'N', 'sweep', 'samples', 'tol'), {'rows': rows},
                  seed=args.seed, verdict='pass' if ok else 'fail', table=table)


def cmd_counterexample(args, config) -> Report:
    report = counterexample_report()
    return Report('counterexample', {}, report.to_json(), verdict=report.to_json()['verdict'])


def cmd_sample(args, config) -> Report:
    cfg = ExperimentConfig(
        d=args.d,
        N=args.N,
        trials=args.trials,
        seed=args.seed,
        tol=config['tolerances']['bound'],
        entropy_tol=config['tolerances']['entropy'],
        bins=args.bins,
        inject_counterexample=args.inject_counterexample,
        keep_spectra=args.keep_spectra,
        threads=args.threads,
        budget=config['budgets']['embedding_entries'],
    )
    report = run_bound_experiment(cfg)
    payload = report.to_json()
    return Report('sample', _params(args, 'd', 'N', 'trials', 'bins', 'inject-counterexample'), payload,
                  seed=args.seed, verdict=payload['verdict'], table=report.histogram_frame())


def _ef_state(name: str, d: int, n: int) -> DensityMatrix:
    basis = AntisymBasis.for_dimension(d)
    side = basis.size ** n
    if name == 'projector':
        return antisym_projector_state(d, n)
    if name == 'pure-pair':
        x = np.zeros((side, side))
        x[0, 0] = 1.0
        return DensityMatrix(x, basis.coordinate_signature(n))
    if d < 3 or n != 1:
        raise UsageError('--state pair-mixture needs --d >= 3 and --N 1')
    return DensityMatrix(np.diag([0.5, 0.5] + [0.0] * (side - 2)), basis.coordinate_signature(1))


def cmd_ef_upper(args, config) -> Report:
    rho = _ef_state(args.state, args.d, args.N)
    result = minimize_ef(rho, args.d, args.N, args.seed, _optimizer_settings(args, config))
    payload = result.to_json()
    return Report('ef-upper', _params(args, 'd', 'N', 'state', 'restarts', 'iterations', 'ensemble-size'),
                  payload, seed=args.seed, verdict=payload['verdict'])


def cmd_bracket(args, config) -> Report:
    bracket = bracket_entanglement_cost(args.d, args.N, args.seed, _optimizer_settings(args, config))
    payload = bracket.to_json()
    return Report('bracket', _params(args, 'd', 'N', 'restarts', 'iterations'), payload,
                  seed=args.seed, verdict=payload['verdict'])


def cmd_verify(args, config) -> Report:
    pipeline = VerificationPipeline(config, args.seed, args.scale, args.threads)
    return pipeline.run()


COMMANDS: Dict[str, Callable] = {
    'basis': cmd_basis,
    'choi': cmd_choi,
    'spectrum': cmd_spectrum,
    'minimize': cmd_minimize,
    'sandwich': cmd_sandwich,
    'cp-check': cmd_cp_check,
    'bound': cmd_bound,
    'counterexample': cmd_counterexample,
    'sample': cmd_sample,
    'ef-upper': cmd_ef_upper,
    'bracket': cmd_bracket,
    'verify': cmd_verify,
}


# =========================================================================
# Full verification run
# =========================================================================

SCALES = {
    'quick': {'pairs': 5, 'trials': 1_000, 'powers': (1, 2), 'restarts': 4, 'iterations': 50,
              'pure_states': 5, 'densities': 20},
    'full': {'pairs': 20, 'trials': 10_000, 'powers': (1, 2, 3), 'restarts': 16, 'iterations': 200,
             'pure_states': 20, 'densities': 100},
}


class VerificationPipeline:
    """Orchestrate every acceptance check from spectra to determinism"""

    def __init__(self, config: Dict, seed: int, scale: str = 'quick', threads: int = 1):
        """
        Initialize pipeline with all processors

        Args:
            config: Validated configuration
            seed: Master seed for every stochastic phase
            scale: 'quick' or 'full'
            threads: Worker cap for sampler and optimizer
        """
        self.config = config
        self.seed = seed
        self.scale = scale
        self.settings = SCALES[scale]
        self.threads = threads
        self.output_dir = Path(config['output']['reports_dir'])
        self.timestamp = datetime.now().strftime('%Y%m%d%H%M%S')
        tables_dir = str(self.output_dir / 'tables')

        tol = config['tolerances']
        self.spectral_processor = SpectralProcessor(tol['spectrum'], tol['psd'], tables_dir)
        self.bounds_processor = BoundsProcessor(tables_dir)
        self.sampler_processor = SamplerProcessor(tables_dir)

        self.phases: Dict[str, Dict] = {}
        self.criteria: Dict[str, str] = {}
        self.errors: List[str] = []

        logger.info("=" * 80)
        logger.info(f"🚀 Antisymmetric bounds verification ({scale}, seed={seed})")
        logger.info("=" * 80)

    def run(self) -> Report:
        """
        Execute every phase; a failing phase marks its criteria as 'error'

        Returns:
            Report: Consolidated verify report (also written to the reports directory)
        """
        phases = [
            ("1️⃣ SPECTRAL CERTIFICATES", 'spectral', self._run_spectral,
             ['choi_spectrum', 'lambda_minimizer', 'sandwich', 'cp_certificate']),
            ("2️⃣ BOUNDS", 'bounds', self._run_bounds, ['counterexample', 'ec_floor']),
            ("3️⃣ MONTE-CARLO SAMPLER", 'sampler', self._run_sampler, ['monte_carlo']),
            ("4️⃣ E_f OPTIMIZER", 'optimizer', self._run_optimizer, ['ef_bracket']),
            ("5️⃣ CONSISTENCY", 'consistency', self._run_consistency, ['consistency', 'determinism']),
        ]

        for title, key, step, criteria in phases:
            logger.info("")
            logger.info(title)
            try:
                with log_elapsed(logger, key):
                    self.phases[key] = step()
            except Exception as e:
                logger.error(f"✗ Phase {key} failed: {e}", exc_info=True)
                self.errors.append(f"{key}: {e}")
                self.phases[key] = {'error': {'type': type(e).__name__, 'message': str(e)}}
                for name in criteria:
                    self.criteria[name] = 'error'

        logger.info("")
        logger.info("6️⃣ REPORTS")
        for processor in (self.spectral_processor, self.bounds_processor, self.sampler_processor):
            if processor.tables:
                processor.export_tables(self.timestamp)

        parameters = {'scale': self.scale, 'threads': self.threads}
        json_path = ReportGenerator(self.output_dir).generate_consolidated_report(
            parameters, self.phases, self.criteria, self.seed, self.timestamp)
        MarkdownExporter(self.output_dir).export_report(json_path)

        self._print_execution_summary()

        verdict = 'pass' if all(v == 'pass' for v in self.criteria.values()) else 'fail'
        return Report('verify', parameters,
                      {'criteria': self.criteria, 'report_path': str(json_path), 'errors': self.errors},
                      seed=self.seed, verdict=verdict)

    def _mark(self, name: str, ok: bool) -> None:
        self.criteria[name] = 'pass' if ok else 'fail'
        logger.info(f"  {'✓' if ok else '✗'} {name}")

    def _run_spectral(self) -> Dict:
        tables = self.spectral_processor.process_all(pairs=self.settings['pairs'], seed=self.seed)
        all_passed = self.spectral_processor.all_passed

        self._mark('choi_spectrum', all_passed(tables['xi_spectrum']))
        self._mark('lambda_minimizer', all_passed(tables['lambda_minimum']))
        sandwich = tables['sandwich']
        self._mark('sandwich', all_passed(sandwich))
        self._mark('cp_certificate', all_passed(tables['cp_certificate']))

        return {
            'xi_spectrum_worst_deviation': float(tables['xi_spectrum']['max_deviation'].max()),
            'lambda_minimum': tables['lambda_minimum'].to_dict(orient='records'),
            'sandwich': sandwich.to_dict(orient='records'),
            'cp_certificate': tables['cp_certificate'].to_dict(orient='records'),
        }

    def _run_bounds(self) -> Dict:
        tables = self.bounds_processor.process_all()
        counterexample = tables['counterexample'].iloc[0].to_dict()
        self._mark('counterexample', counterexample['verdict'] == 'pass'
                   and abs(counterexample['max_reduced_eig'] - 1 / 3) <= 1e-12)

        floors = [{'d': d, 'value': ec_lower_bound(d)} for d in (2, 3, 10)]
        self._mark('ec_floor', abs(ec_lower_bound(3) - 0.5849625007) <= 1e-7
                   and abs(ec_lower_bound(2) - 1.0) <= 1e-12)

        return {
            'counterexample': counterexample,
            'ec_floor': floors,
            'bound_chain': tables['bound_chain'].to_dict(orient='records'),
        }

    def _run_sampler(self) -> Dict:
        tol = self.config['tolerances']
        configs = [
            ExperimentConfig(3, n, self.settings['trials'], self.seed, tol['bound'], tol['entropy'],
                             self.config['sampler']['bins'], inject_counterexample=(n == 2),
                             keep_spectra=(n == 1), threads=self.threads)
            for n in self.settings['powers']
        ]
        tables = self.sampler_processor.process_all(configs)

        ok = self.sampler_processor.all_passed(tables['experiments'])
        for report in self.sampler_processor.reports:
            if report.config.N == 1:
                spread = np.abs(report.spectra - np.array([0.5, 0.5, 0.0])).max()
                ok = ok and spread <= 1e-10
            for entry in report.designated:
                ok = ok and abs(entry['max_eig'] - 1 / 3) <= 1e-12
        self._mark('monte_carlo', ok)

        return {'experiments': tables['experiments'].to_dict(orient='records')}

    def _run_optimizer(self) -> Dict:
        opt = self.config['optimizer']
        settings = OptimizerSettings(
            restarts=self.settings['restarts'],
            iterations=self.settings['iterations'],
            initial_step=opt['initial_step'],
            step_decay=opt['step_decay'],
            min_step=opt['min_step'],
            stall_threshold=opt['stall_threshold'],
            threads=self.threads,
        )

        pure_gaps = []
        for k in range(self.settings['pure_states']):
            d = 2 + k % 3
            gen = substream(self.seed, 1000 + k)
            psi = haar_isometry(gen, d * d, 1)[:, 0]
            rho = DensityMatrix(np.outer(psi, psi.conj()), DimSignature((d, d)))
            result = minimize_ef(rho, d, 1, self.seed, settings)
            pure_gaps.append(abs(result.upper_bound - entropy_bits(schmidt_coefficients(psi, d, 1))))

        bracket = bracket_entanglement_cost(3, 1, self.seed, settings)
        ok = (max(pure_gaps) <= 1e-8 and bracket.passes
              and 0.5849 <= bracket.ef_upper <= 1 + 1e-8)
        self._mark('ef_bracket', ok)

        return {'pure_state_worst_gap': max(pure_gaps), 'bracket': bracket.to_json()}

    def _run_consistency(self) -> Dict:
        budgets = self.config['budgets']
        worst = 0.0
        for n in (1, 2):
            side = AntisymBasis.for_dimension(3).size ** n
            gen = substream(self.seed, 2000 + n)
            for _ in range(self.settings['densities']):
                worst = max(worst, lambda_vs_partial_trace(
                    random_density(gen, side), 3, n, budgets['superoperator_side'], budgets['embedding_entries']))

        gen = substream(self.seed, 3000)
        tilde_gap = 0.0
        for _ in range(self.settings['densities']):
            x = random_density(gen, 3).real
            x = (x + x.T) / 2
            tilde_gap = max(tilde_gap, max_abs(tilde_map(3)(x) - lambda_map(3)(x)))
        self._mark('consistency', worst <= 1e-10 and tilde_gap <= 1e-12)

        cfg = ExperimentConfig(3, 2, 200, self.seed, threads=self.threads)
        first = Report('sample', {}, run_bound_experiment(cfg).to_json(), seed=self.seed, timestamp='-')
        second = Report('sample', {}, run_bound_experiment(cfg).to_json(), seed=self.seed, timestamp='-')
        self._mark('determinism', first.to_json_text() == second.to_json_text())

        mixed = random_density(substream(self.seed, 3001), 9)
        return {
            'lambda_vs_partial_trace': worst,
            'tilde_vs_lambda_real_symmetric': tilde_gap,
            'slot_agreement_random_N2': slot_agreement(3, 2, mixed),
        }

    def _print_execution_summary(self):
        logger.info("")
        logger.info("=" * 80)
        passed = sum(v == 'pass' for v in self.criteria.values())
        if passed == len(self.criteria):
            logger.info(f"✅ VERIFICATION: {passed}/{len(self.criteria)} criteria passed")
        else:
            logger.info(f"❌ VERIFICATION: {passed}/{len(self.criteria)} criteria passed")
            for name, verdict in self.criteria.items():
                if verdict != 'pass':
                    logger.info(f"  - {name}: {verdict}")
        logger.info("=" * 80)


# =========================================================================
# Entry point
# =========================================================================

def resolve_output(out: Optional[str]) -> Optional[Path]:
    """Bare file names go under $ANTISYM_OUTPUT_DIR when it is set"""
    if out is None:
        return None
    path = Path(out)
    env_dir = os.getenv(OUTPUT_DIR_ENV)
    if env_dir and not path.is_absolute() and path.parent == Path('.'):
        return Path(env_dir) / path
    return path


def _load_config_for(argv: Optional[List[str]]) -> Dict:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument('--config', default=None)
    known, _ = pre.parse_known_args(argv)
    path = known.config
    if path is None and Path(DEFAULT_CONFIG_PATH).exists():
        path = DEFAULT_CONFIG_PATH
    return load_config(path)


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; returns the process exit code"""
    try:
        config = _load_config_for(argv)
    except (OSError, ValueError) as e:
        logger.error(f"✗ Configuration error: {e}")
        return EXIT_USAGE

    parser = build_parser(config)
    args = parser.parse_args(argv)

    console_level = 'INFO' if args.verbose else 'ERROR' if args.quiet else config['logging']['console_level']
    setup_logging(config['output'].get('logs_dir'), config['logging']['level'], console_level)

    params = {k: v for k, v in vars(args).items() if k not in ('config', 'out', 'format', 'verbose', 'quiet')}
    try:
        report = COMMANDS[args.command](args, config)
    except UsageError as e:
        parser.error(str(e))
    except Exception as e:
        logger.error(f"✗ {args.command} failed: {e}", exc_info=True)
        report = error_report(args.command, params, e)
        try:
            emit_report(report, 'json', resolve_output(args.out))
        except OSError as write_error:
            logger.error(f"✗ {write_error}")
        return EXIT_ERROR

    try:
        emit_report(report, args.format, resolve_output(args.out))
    except OSError as e:
        logger.error(f"✗ {e}")
        return EXIT_ERROR

    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == '__main__':
    sys.exit(main())

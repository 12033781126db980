import json

import pandas as pd
import pytest

import run_verification
from generators.report_generator import load_envelope_schema, validate_envelope
from run_verification import COMMANDS, EXIT_ERROR, EXIT_PASS, EXIT_USAGE, main, resolve_output


@pytest.fixture(autouse=True)
def workdir(tmp_path, monkeypatch):
    """Run every command from an empty directory so only built-in defaults apply"""
    monkeypatch.chdir(tmp_path)
    return tmp_path


def run_json(capsys, *argv):
    code = main(list(argv))
    report = json.loads(capsys.readouterr().out)
    validate_envelope(report)
    return code, report


def test_schema_lists_every_command():
    assert set(load_envelope_schema()['properties']['command']['enum']) == set(COMMANDS)


def test_counterexample(capsys):
    code, report = run_json(capsys, 'counterexample')
    assert code == EXIT_PASS
    assert report['command'] == 'counterexample'
    assert report['verdict'] == 'pass'
    assert report['payload']['max_reduced_eig'] == pytest.approx(1 / 3, abs=1e-12)


def test_minimize(capsys):
    code, report = run_json(capsys, 'minimize', '--d', '3')
    assert code == EXIT_PASS
    assert report['payload']['lambda'] == pytest.approx(2 / 3)
    assert report['parameters'] == {'d': 3}


def test_spectrum(capsys):
    code, report = run_json(capsys, 'spectrum', '--d', '4', '--x', '0.25', '--y', '-0.5')
    assert code == EXIT_PASS
    assert sum(m for _, m in report['payload']['analytic']) == 24


def test_cp_check(capsys):
    code, report = run_json(capsys, 'cp-check', '--d', '2', '--N', '2')
    assert code == EXIT_PASS
    assert report['payload']['lambda_tilde_N'] == pytest.approx(0.25)


def test_basis_and_choi(capsys):
    code, report = run_json(capsys, 'basis', '--d', '3')
    assert code == EXIT_PASS
    assert report['payload']['isometry_shape'] == [9, 3]

    code, report = run_json(capsys, 'choi', '--map', 'lambda', '--d', '3')
    assert code == EXIT_PASS
    assert 'verdict' not in report
    assert report['payload']['side'] == 9
    assert report['payload']['min_eig'] >= -1e-12


def test_bound_with_samples(capsys):
    code, report = run_json(capsys, 'bound', '--d', '3', '--N', '2', '--samples', '4', '--seed', '1')
    assert code == EXIT_PASS
    assert report['seed'] == 1
    assert report['payload']['rows'][0]['cap'] == pytest.approx(4 / 9)


def test_bound_uses_configured_tolerance_and_budget(capsys, monkeypatch, workdir):
    (workdir / 'tight.yaml').write_text(
        'tolerances:\n  hermiticity: 1.0e-7\nbudgets:\n  embedding_entries: 12345\n', encoding='utf-8')
    calls = []
    original = run_verification.check_eigenvalue_bound

    def recording(*args, **kwargs):
        calls.append(args)
        return original(*args, **kwargs)

    monkeypatch.setattr(run_verification, 'check_eigenvalue_bound', recording)
    code, _ = run_json(capsys, '--config', 'tight.yaml', 'bound', '--d', '3')

    assert code == EXIT_PASS
    assert calls and all(call[5:] == (1e-7, 12345) for call in calls)


def test_bound_sweep_as_csv(capsys, workdir):
    code = main(['bound', '--sweep', '2', '4', '--format', 'csv', '--out', 'sweep.csv'])
    assert code == EXIT_PASS
    table = pd.read_csv(workdir / 'sweep.csv')
    assert list(table['d']) == [2, 3, 4]
    assert table['pass'].all()


def test_sample_histogram_goes_to_output_dir(monkeypatch, workdir):
    out_dir = workdir / 'out'
    monkeypatch.setenv('ANTISYM_OUTPUT_DIR', str(out_dir))
    code = main(['sample', '--d', '3', '--N', '1', '--trials', '25', '--seed', '7',
                 '--format', 'csv', '--out', 'hist.csv'])

    assert code == EXIT_PASS
    histogram = pd.read_csv(out_dir / 'hist.csv')
    assert len(histogram) == 20
    assert histogram['count'].sum() == 25


def test_sample_is_byte_identical_across_runs(capsys, monkeypatch):
    monkeypatch.setenv('SOURCE_DATE_EPOCH', '1700000000')
    argv = ['sample', '--d', '3', '--N', '2', '--trials', '15', '--seed', '123', '--inject-counterexample']
    assert main(argv) == EXIT_PASS
    first = capsys.readouterr().out.encode('utf-8')
    assert main(argv) == EXIT_PASS
    second = capsys.readouterr().out.encode('utf-8')

    assert first == second
    assert json.loads(first)['timestamp'] == '2023-11-14T22:13:20Z'


def test_sample_payload_ignores_threads(capsys, monkeypatch):
    monkeypatch.setenv('SOURCE_DATE_EPOCH', '1700000000')
    argv = ['sample', '--d', '3', '--N', '2', '--trials', '15', '--seed', '123', '--inject-counterexample']
    assert main(argv) == EXIT_PASS
    first = capsys.readouterr().out
    assert main(argv + ['--threads', '3']) == EXIT_PASS
    second = json.loads(capsys.readouterr().out)
    first = json.loads(first)

    assert first['payload'] == second['payload']
    assert first['payload']['designated'][0]['max_eig'] == pytest.approx(1 / 3, abs=1e-12)


def test_ef_upper_and_bracket(capsys):
    code, report = run_json(capsys, 'ef-upper', '--state', 'pair-mixture', '--d', '3', '--seed', '0',
                            '--restarts', '2', '--iterations', '10')
    assert code == EXIT_PASS
    assert report['payload']['upper_bound'] == pytest.approx(1.0, abs=1e-8)

    code, report = run_json(capsys, 'bracket', '--d', '3', '--seed', '0', '--restarts', '2', '--iterations', '10')
    assert code == EXIT_PASS
    assert report['payload']['ec_lower'] == pytest.approx(0.5849625007, abs=1e-10)


def test_budget_overrun_is_a_computational_error(capsys):
    code, report = run_json(capsys, 'choi', '--map', 'bound', '--d', '4', '--N', '3')
    assert code == EXIT_ERROR
    assert report['verdict'] == 'error'
    assert report['payload']['error']['type'] == 'SizeBudgetError'


@pytest.mark.parametrize('argv', [
    ['sample', '--d', '3'],
    ['minimize', '--d', '1'],
    ['cp-check', '--tol', '1.5'],
    ['bound', '--samples', '3'],
    ['ef-upper', '--state', 'pair-mixture', '--d', '2', '--seed', '0'],
    ['spectrum', '--x', 'nan'],
    ['sample', '--seed', '-1'],
    ['nonsense'],
])
def test_usage_errors_exit_2(argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == EXIT_USAGE


def test_missing_config_file_is_a_usage_error():
    assert main(['--config', 'absent.yaml', 'counterexample']) == EXIT_USAGE


def test_resolve_output(monkeypatch, tmp_path):
    assert resolve_output(None) is None
    monkeypatch.setenv('ANTISYM_OUTPUT_DIR', str(tmp_path))
    assert resolve_output('r.json') == tmp_path / 'r.json'
    assert resolve_output('sub/r.json').as_posix() == 'sub/r.json'


def test_verify_quick(capsys, workdir):
    code, report = run_json(capsys, 'verify', '--seed', '5')

    assert code == EXIT_PASS, report['payload']['criteria']
    assert set(report['payload']['criteria'].values()) == {'pass'}
    assert len(report['payload']['criteria']) == 10
    assert list((workdir / 'reports').glob('verification_report_*.json'))
    assert list((workdir / 'reports').glob('verification_report_*.md'))
    assert list((workdir / 'reports' / 'tables').glob('sampler_experiments_*.csv'))

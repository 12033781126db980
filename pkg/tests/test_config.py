from pathlib import Path

import pytest
import yaml

from utils.config_loader import DEFAULT_CONFIG, load_config
from utils.config_validator import ConfigValidator

REPO_CONFIG = Path(__file__).resolve().parents[1] / 'config' / 'config.yaml'


def write_yaml(path: Path, data) -> str:
    path.write_text(yaml.safe_dump(data), encoding='utf-8')
    return str(path)


def test_defaults_validate():
    assert ConfigValidator.validate_config(DEFAULT_CONFIG)
    assert load_config() == DEFAULT_CONFIG


def test_shipped_config_loads():
    config = load_config(str(REPO_CONFIG))
    assert config['output']['reports_dir'] == 'reports'
    assert config['budgets']['choi_side'] == 1000


def test_partial_file_merges_over_defaults(tmp_path):
    config = load_config(write_yaml(tmp_path / 'c.yaml', {'sampler': {'trials': 5}}))
    assert config['sampler']['trials'] == 5
    assert config['sampler']['bins'] == DEFAULT_CONFIG['sampler']['bins']
    assert config['tolerances'] == DEFAULT_CONFIG['tolerances']


def test_output_dir_from_environment(monkeypatch):
    monkeypatch.setenv('ANTISYM_OUTPUT_DIR', '/tmp/antisym-out')
    assert load_config()['output']['reports_dir'] == '/tmp/antisym-out'


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config(str(tmp_path / 'absent.yaml'))


@pytest.mark.parametrize('override, message', [
    ({'optimizer': {'step_decay': 1.5}}, 'step_decay'),
    ({'tolerances': {'psd': -1}}, 'tolerances.psd'),
    ({'budgets': {'choi_side': 10.5}}, 'budgets.choi_side'),
    ({'logging': {'level': 'LOUD'}}, 'logging.level'),
    ({'execution': {'threads': 0}}, 'execution.threads'),
])
def test_invalid_values_rejected(tmp_path, override, message):
    with pytest.raises(ValueError, match=message):
        load_config(write_yaml(tmp_path / 'bad.yaml', override))


def test_non_mapping_file_rejected(tmp_path):
    with pytest.raises(ValueError, match='mapping'):
        load_config(write_yaml(tmp_path / 'list.yaml', [1, 2]))


def test_missing_section_rejected():
    config = {k: v for k, v in DEFAULT_CONFIG.items() if k != 'budgets'}
    with pytest.raises(ValueError, match='budgets'):
        ConfigValidator.validate_config(config)

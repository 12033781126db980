"""
Configuration loading: YAML file merged over built-in defaults, then validated.
"""

import copy
import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

from utils.config_validator import ConfigValidator
from utils.logger import get_logger

logger = get_logger(__name__)

OUTPUT_DIR_ENV = 'ANTISYM_OUTPUT_DIR'

DEFAULT_CONFIG: Dict[str, Any] = {
    'tolerances': {
        'hermiticity': 1e-10,
        'psd': 1e-9,
        'spectrum': 1e-9,
        'bound': 1e-10,
        'entropy': 1e-8,
    },
    'budgets': {
        'superoperator_side': 10_000,
        'choi_side': 1_000,
        'embedding_entries': 20_000_000,
    },
    'sampler': {
        'trials': 10_000,
        'bins': 20,
    },
    'optimizer': {
        'restarts': 16,
        'iterations': 200,
        'initial_step': 0.5,
        'step_decay': 0.5,
        'min_step': 1e-6,
        'stall_threshold': 1e-10,
    },
    'output': {
        'reports_dir': 'reports',
        'logs_dir': None,
    },
    'logging': {
        'level': 'INFO',
        'console_level': 'WARNING',
    },
    'execution': {
        'threads': 1,
    },
}


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(config_path: Optional[str] = None) -> Dict[str, Any]:
    """
    Load configuration from YAML, falling back to defaults for missing keys

    Args:
        config_path: Path to config.yaml (None uses defaults only)

    Returns:
        Dict: Validated configuration

    Raises:
        FileNotFoundError: If config_path is given but does not exist
        ValueError: If the merged configuration is invalid
    """
    user_config: Dict[str, Any] = {}
    if config_path:
        path = Path(config_path)
        if not path.exists():
            raise FileNotFoundError(f"Config file not found: {path}")
        with open(path, 'r', encoding='utf-8') as f:
            user_config = yaml.safe_load(f) or {}
        if not isinstance(user_config, dict):
            raise ValueError(f"Config file {path} must contain a mapping at top level")

    config = _merge(DEFAULT_CONFIG, user_config)

    env_dir = os.getenv(OUTPUT_DIR_ENV)
    if env_dir:
        config['output']['reports_dir'] = env_dir

    try:
        ConfigValidator.validate_config(config, logger)
        logger.debug("✓ Configuration validation passed")
    except ValueError as e:
        logger.error(f"✗ Configuration validation failed: {e}")
        raise

    return config

"""
Configuration validation for verification startup.
Ensures all required sections and valid values before any computation.
"""

from typing import Dict, Any


class ConfigValidator:
    """Validates verification configuration structure and content"""

    REQUIRED_SECTIONS = ['tolerances', 'budgets', 'sampler', 'optimizer', 'output', 'logging', 'execution']
    LOG_LEVELS = {'DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'}

    @staticmethod
    def validate_config(config: Dict[str, Any], logger=None) -> bool:
        """
        Validate complete configuration structure.

        Args:
            config: Configuration dictionary (YAML merged over defaults)
            logger: Optional logger instance for warnings

        Returns:
            bool: True if valid, raises ValueError otherwise

        Raises:
            ValueError: If any validation check fails

        Examples:
            >>> from utils.config_loader import DEFAULT_CONFIG
            >>> ConfigValidator.validate_config(DEFAULT_CONFIG)
            True
        """
        # Check required top-level sections
        missing = [s for s in ConfigValidator.REQUIRED_SECTIONS if s not in config]

        if missing:
            raise ValueError(f"Missing configuration sections: {missing}")

        # Validate each section
        ConfigValidator._validate_tolerances_section(config['tolerances'], logger)
        ConfigValidator._validate_budgets_section(config['budgets'], logger)
        ConfigValidator._validate_sampler_section(config['sampler'], logger)
        ConfigValidator._validate_optimizer_section(config['optimizer'], logger)
        ConfigValidator._validate_output_section(config['output'], logger)
        ConfigValidator._validate_logging_section(config['logging'], logger)
        ConfigValidator._validate_execution_section(config['execution'], logger)

        return True

    @staticmethod
    def _positive_number(section: str, key: str, value, integer: bool = False) -> None:
        try:
            number = int(value) if integer else float(value)
        except (TypeError, ValueError):
            raise ValueError(f"Invalid {section}.{key}: {value!r} (must be a number)")
        if integer and number != value:
            raise ValueError(f"Invalid {section}.{key}: {value!r} (must be an integer)")
        if number <= 0:
            raise ValueError(f"Invalid {section}.{key}: {value!r} (must be > 0)")

    @staticmethod
    def _validate_tolerances_section(tolerances: Dict, logger=None) -> None:
        """Validate numeric tolerances"""
        for key in ['hermiticity', 'psd', 'spectrum', 'bound', 'entropy']:
            if key not in tolerances:
                raise ValueError(f"Missing 'tolerances.{key}'")
            ConfigValidator._positive_number('tolerances', key, tolerances[key])
            if float(tolerances[key]) > 1e-3 and logger:
                logger.warning(f"tolerances.{key} = {tolerances[key]} is loose; verdicts may be meaningless")

    @staticmethod
    def _validate_budgets_section(budgets: Dict, logger=None) -> None:
        """Validate size budgets"""
        for key in ['superoperator_side', 'choi_side', 'embedding_entries']:
            if key not in budgets:
                raise ValueError(f"Missing 'budgets.{key}'")
            ConfigValidator._positive_number('budgets', key, budgets[key], integer=True)

    @staticmethod
    def _validate_sampler_section(sampler: Dict, logger=None) -> None:
        """Validate Monte-Carlo settings"""
        for key in ['trials', 'bins']:
            if key in sampler:
                ConfigValidator._positive_number('sampler', key, sampler[key], integer=True)

    @staticmethod
    def _validate_optimizer_section(optimizer: Dict, logger=None) -> None:
        """Validate E_f optimizer settings"""
        for key in ['restarts', 'iterations']:
            if key in optimizer:
                ConfigValidator._positive_number('optimizer', key, optimizer[key], integer=True)

        for key in ['initial_step', 'min_step', 'stall_threshold']:
            if key in optimizer:
                ConfigValidator._positive_number('optimizer', key, optimizer[key])

        if 'step_decay' in optimizer:
            decay = optimizer['step_decay']
            if not isinstance(decay, (int, float)) or not 0 < decay < 1:
                raise ValueError(f"Invalid optimizer.step_decay: {decay!r} (must be in (0, 1))")

    @staticmethod
    def _validate_output_section(output_config: Dict, logger=None) -> None:
        """Validate output configuration"""
        required_dirs = ['reports_dir']
        missing = [d for d in required_dirs if d not in output_config]

        if missing:
            raise ValueError(f"Missing output directories: {missing}")

    @staticmethod
    def _validate_logging_section(logging_config: Dict, logger=None) -> None:
        """Validate logging levels"""
        for key in ['level', 'console_level']:
            level = str(logging_config.get(key, 'INFO')).upper()
            if level not in ConfigValidator.LOG_LEVELS:
                raise ValueError(f"Invalid logging.{key}: {logging_config.get(key)!r}")

    @staticmethod
    def _validate_execution_section(exec_config: Dict, logger=None) -> None:
        """Validate execution configuration"""
        if 'threads' in exec_config:
            ConfigValidator._positive_number('execution', 'threads', exec_config['threads'], integer=True)

from abc import ABC, abstractmethod
from typing import Dict, Optional
import pandas as pd
from pathlib import Path
from datetime import datetime
from utils.logger import get_logger

logger = get_logger(__name__)

CSV_FLOAT_FORMAT = '%.17g'


class BaseProcessor(ABC):
    """Abstract base class for all verification processors"""

    def __init__(self, domain_name: str, export_dir: Optional[str] = None):
        """
        Initialize processor with domain-specific metadata

        Args:
            domain_name: Human-readable name (e.g., "Spectral", "Bounds", "Sampler")
            export_dir: Directory for CSV tables (created on first export)
        """
        self.domain_name = domain_name
        self.tables: Dict[str, pd.DataFrame] = {}
        self.export_dir = Path(export_dir or "./reports/tables")

    @abstractmethod
    def process_all(self, *args, **kwargs) -> Dict[str, pd.DataFrame]:
        """
        Run every check of this domain

        Returns:
            Dictionary of result tables, keyed by table name
        """
        pass

    def export_tables(self, timestamp: Optional[str] = None) -> Dict[str, Path]:
        """
        Export all tables to CSV with consistent naming

        Args:
            timestamp: Optional timestamp override (YYYYMMDD_HHMMSS format)

        Returns:
            Dictionary mapping table names to file paths
        """
        if not timestamp:
            timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")

        self.export_dir.mkdir(parents=True, exist_ok=True)
        exported_files = {}

        for table_name, df in self.tables.items():
            # Construct filename: {domain}_{table_name}_{timestamp}.csv
            filename = f"{self.domain_name.lower()}_{table_name}_{timestamp}.csv"
            filepath = self.export_dir / filename

            write_csv(df, filepath)
            logger.info(f"✓ Exported: {filename}")
            exported_files[table_name] = filepath

        return exported_files

    @staticmethod
    def all_passed(df: pd.DataFrame, column: str = 'verdict') -> bool:
        """True when every row of a verdict table passed (an empty table passes)"""
        if df.empty or column not in df.columns:
            return True
        return bool((df[column] == 'pass').all())

    def log_processing_summary(self, df: pd.DataFrame, stage: str = "output"):
        """Log data processing checkpoint"""
        logger.debug(
            f"[{self.domain_name}] {stage}: "
            f"{len(df):,} rows, {len(df.columns)} cols"
        )


def write_csv(df: pd.DataFrame, dest) -> None:
    """UTF-8 CSV with header row and round-trip-safe reals"""
    df.to_csv(dest, index=False, float_format=CSV_FLOAT_FORMAT, encoding='utf-8')

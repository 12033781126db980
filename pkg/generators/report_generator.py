"""
Report Generator for antisymmetric-state verification runs

Every command produces one Report envelope:
- schema_version, command echo and parameters
- timestamp (SOURCE_DATE_EPOCH when set, else current UTC time)
- seed for stochastic commands
- command-specific payload and, when a pass/fail claim exists, the verdict

JSON output keeps insertion order, writes complex numbers as [re, im] and reals
with Python's round-trip repr. CSV output uses '%.17g'.
"""

import io
import json
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Optional

import jsonschema
import numpy as np
import pandas as pd

from processors.base_processor import write_csv
from utils.logger import get_logger

logger = get_logger(__name__)

SCHEMA_VERSION = '1.0'
FORMATS = ('json', 'csv')
SCHEMA_PATH = Path(__file__).resolve().parents[1] / 'config' / 'report.schema.json'


class ReportWriteError(OSError):
    """Raised when a report cannot be written to its destination"""

    def __init__(self, path, reason):
        self.path = str(path)
        super().__init__(f"Cannot write report to {self.path}: {reason}")


def report_timestamp() -> str:
    """ISO-8601 UTC timestamp, pinned by SOURCE_DATE_EPOCH when set"""
    epoch = os.getenv('SOURCE_DATE_EPOCH')
    if epoch:
        moment = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
    else:
        moment = datetime.now(timezone.utc)
    return moment.strftime('%Y-%m-%dT%H:%M:%SZ')


def to_jsonable(obj: Any) -> Any:
    """
    Convert numpy and complex values into plain JSON types

    Examples:
        >>> to_jsonable({'z': 1 + 2j, 'v': np.array([0.5, 1.0])})
        {'z': [1.0, 2.0], 'v': [0.5, 1.0]}
    """
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


@dataclass
class Report:
    command: str
    parameters: Dict[str, Any]
    payload: Dict[str, Any]
    seed: Optional[int] = None
    verdict: Optional[str] = None
    timestamp: str = field(default_factory=report_timestamp)
    table: Optional[pd.DataFrame] = field(default=None, repr=False)
    schema_version: str = SCHEMA_VERSION

    @property
    def passed(self) -> bool:
        return self.verdict in (None, 'pass')

    def to_json(self) -> Dict[str, Any]:
        document = {
            'schema_version': self.schema_version,
            'command': self.command,
            'parameters': self.parameters,
            'timestamp': self.timestamp,
        }
        if self.seed is not None:
            document['seed'] = self.seed
        document['payload'] = self.payload
        if self.verdict is not None:
            document['verdict'] = self.verdict
        return to_jsonable(document)

    def to_json_text(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False, allow_nan=False) + '\n'

    def to_frame(self) -> pd.DataFrame:
        """The report's table, or its scalar payload fields as a single row"""
        if self.table is not None:
            return self.table
        flat = pd.json_normalize(to_jsonable(self.payload), sep='.')
        scalar = [c for c in flat.columns if not isinstance(flat[c].iloc[0], (list, dict))]
        return flat[scalar]


@lru_cache(maxsize=1)
def load_envelope_schema() -> Dict[str, Any]:
    with open(SCHEMA_PATH, encoding='utf-8') as f:
        return json.load(f)


def validate_envelope(document: Dict[str, Any]) -> None:
    """
    Check a report document against config/report.schema.json

    Raises:
        jsonschema.ValidationError: If the document breaks the schema, naming the offending field
    """
    jsonschema.validate(instance=document, schema=load_envelope_schema())


def error_report(command: str, parameters: Dict[str, Any], exc: BaseException) -> Report:
    return Report(command, parameters, {'error': {'type': type(exc).__name__, 'message': str(exc)}},
                  verdict='error')


def emit_report(report: Report, fmt: str = 'json', dest=None) -> Optional[Path]:
    """
    Write a report to stdout (dest None) or to a file

    Args:
        report: Report to write
        fmt: 'json' or 'csv'
        dest: Output path, or None for standard output

    Returns:
        Path: Written file, or None for standard output

    Raises:
        ValueError: If fmt is unknown
        jsonschema.ValidationError: If the envelope does not match the report schema
        ReportWriteError: If the destination cannot be written
    """
    if fmt not in FORMATS:
        raise ValueError(f"Unknown report format {fmt!r}; expected one of {FORMATS}")
    validate_envelope(report.to_json())

    if fmt == 'json':
        text = report.to_json_text()
    else:
        buffer = io.StringIO()
        write_csv(report.to_frame(), buffer)
        text = buffer.getvalue()

    if dest is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return None

    path = Path(dest)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
    except OSError as e:
        raise ReportWriteError(path, e.strerror or e) from e

    logger.info(f"✓ Report saved: {path}")
    return path


class ReportGenerator:
    """
    Consolidates the phases of a full verification run into one JSON report

    Features:
    - One section per phase (spectral, bounds, sampler, optimizer, consistency)
    - Per-criterion verdict table and an aggregate verdict
    - Handles failed phases gracefully (recorded with their error)
    """

    def __init__(self, output_dir='./reports'):
        """
        Initialize report generator

        Args:
            output_dir (str): Directory for report output
        """
        self.output_dir = Path(output_dir)
        logger.info(f"ReportGenerator initialized: {self.output_dir}")

    def generate_consolidated_report(self, parameters: Dict[str, Any], phases: Dict[str, Dict],
                                     criteria: Dict[str, str], seed: int, timestamp: str) -> Path:
        """
        Generate consolidated JSON report from all phases

        Args:
            parameters: Echo of the run's parameters
            phases: Payload per phase name
            criteria: Verdict ('pass'/'fail'/'error') per acceptance criterion
            seed: Master seed of the run
            timestamp (str): Timestamp string for filename (YYYYMMDDHHMMSS)

        Returns:
            Path: Path to generated report file
        """
        logger.info("Starting consolidated report generation...")

        verdict = 'pass' if all(v == 'pass' for v in criteria.values()) else 'fail'
        report = Report(
            command='verify',
            parameters=parameters,
            payload={
                'criteria': criteria,
                'summary': {
                    'total': len(criteria),
                    'passed': sum(v == 'pass' for v in criteria.values()),
                },
                'phases': phases,
            },
            seed=seed,
            verdict=verdict,
        )

        report_filename = self.output_dir / f"verification_report_{timestamp}.json"
        emit_report(report, 'json', report_filename)

        logger.info(f"  - Criteria passed: {report.payload['summary']['passed']}/{len(criteria)}")
        logger.info(f"  - File size: {report_filename.stat().st_size / 1024:.1f} KB")

        return report_filename

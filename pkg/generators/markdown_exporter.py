"""
Markdown Summary Exporter for verification reports

Turns the consolidated JSON report of a `verify` run into a table-only Markdown
summary: run details, one verdict row per acceptance criterion, and the key
numbers of each phase.
"""

import json
from pathlib import Path
from typing import Dict, List

from utils.logger import get_logger

logger = get_logger(__name__)

CRITERIA_LABELS = {
    'choi_spectrum': 'Choi spectrum of x·Λ + y·M† matches the analytic set',
    'lambda_minimizer': 'Closed-form minimizer of λ(x, 1−x) beats the grid',
    'sandwich': 'max |eig| of choi(M̃) equals (d−1)/d',
    'cp_certificate': 'λ̃ᴺ·Id# − M̃^⊗N is completely positive',
    'counterexample': 'Counterexample reduction: 1/3 > 2⁻², ≤ (2/3)²',
    'monte_carlo': 'Sampled states respect the eigenvalue cap and entropy floor',
    'ec_floor': 'log₂(d/(d−1)) floor values',
    'ef_bracket': 'E_f upper bound never falls below the floor',
    'consistency': 'Λ^⊗N agrees with the embedded partial trace',
    'determinism': 'Re-running with the same seed is bit-identical',
}

VERDICT_MARKS = {'pass': '✅ pass', 'fail': '❌ fail', 'error': '⚠️ error'}


class MarkdownExporter:
    """Export JSON verification reports to Markdown (table format)"""

    def __init__(self, output_dir='./reports'):
        """
        Initialize Markdown exporter

        Args:
            output_dir: Directory for markdown output
        """
        self.output_dir = Path(output_dir)

    def export_report(self, json_report_path: Path) -> Path:
        """
        Export JSON report to Markdown

        Args:
            json_report_path: Path to JSON report file

        Returns:
            Path to generated markdown file
        """
        with open(json_report_path, 'r', encoding='utf-8') as f:
            report_data = json.load(f)

        md_content = self._build_markdown(report_data)

        self.output_dir.mkdir(parents=True, exist_ok=True)
        md_filename = self.output_dir / f"{Path(json_report_path).stem}.md"
        with open(md_filename, 'w', encoding='utf-8') as f:
            f.write(md_content)

        logger.info(f"✅ Markdown summary exported: {md_filename}")
        return md_filename

    def _build_markdown(self, data: Dict) -> str:
        """Build complete markdown content"""
        sections = [
            self._build_cover(data),
            self._build_criteria(data),
            self._build_phase_numbers(data),
        ]
        return "\n\n".join(s for s in sections if s) + "\n"

    def _build_cover(self, data: Dict) -> str:
        summary = data.get('payload', {}).get('summary', {})
        params = data.get('parameters', {})
        verdict = VERDICT_MARKS.get(data.get('verdict'), data.get('verdict', 'N/A'))

        return f"""# Antisymmetric Entanglement Bounds: Verification Summary

| **Run Details** | |
|:----------------|:------|
| **Generated** | {data.get('timestamp', 'N/A')} |
| **Seed** | {data.get('seed', 'N/A')} |
| **Scale** | {params.get('scale', 'N/A')} |
| **Criteria passed** | {summary.get('passed', 0)}/{summary.get('total', 0)} |
| **Verdict** | {verdict} |"""

    def _build_criteria(self, data: Dict) -> str:
        criteria = data.get('payload', {}).get('criteria', {})
        if not criteria:
            return ""

        rows = [f"| {idx} | {CRITERIA_LABELS.get(name, name)} | {VERDICT_MARKS.get(v, v)} |"
                for idx, (name, v) in enumerate(criteria.items(), 1)]
        return "## Criteria\n\n| # | Check | Verdict |\n|:--|:------|:--------|\n" + "\n".join(rows)

    def _build_phase_numbers(self, data: Dict) -> str:
        phases = data.get('payload', {}).get('phases', {})
        rows: List[str] = []

        bounds = phases.get('bounds', {})
        counterexample = bounds.get('counterexample', {})
        if counterexample:
            rows.append(f"| Counterexample max reduced eigenvalue | {counterexample.get('max_reduced_eig', 0):.12f} |")

        for ec in bounds.get('ec_floor', []):
            rows.append(f"| log₂(d/(d−1)), d={ec['d']} | {ec['value']:.10f} |")

        for exp in phases.get('sampler', {}).get('experiments', []):
            rows.append(f"| Worst max eigenvalue, d={exp['d']}, N={exp['N']} ({exp['trials']:,} trials) "
                        f"| {exp['worst_max_eig']:.12f} (cap {exp['eig_cap']:.12f}) |")

        bracket = phases.get('optimizer', {}).get('bracket', {})
        if bracket:
            rows.append(f"| E_c bracket, d={bracket['d']} | [{bracket['ec_lower']:.10f}, {bracket['ec_upper']:.10f}] |")

        for cp in phases.get('spectral', {}).get('cp_certificate', []):
            rows.append(f"| Min Choi eigenvalue, d={cp['d']}, N={cp['N']} | {cp['min_choi_eig']:.3e} |")

        if not rows:
            return ""
        return "## Key Numbers\n\n| Quantity | Value |\n|:---------|:------|\n" + "\n".join(rows)

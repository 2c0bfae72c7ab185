"""
Report formatting module for Pickands Lab.

Reports leave the laboratory as JSON (versioned by a top-level "schema"
field) or as CSV tables built with pandas. CSV columns per report type:

    Path              t, value
    ConvergenceTable  T, mean, stderr, ratio
    BorellReport      w, tail, stderr, bound, dominated
    inequality checks check, level, value, lower, upper, holds
    anything else     one row of flattened to_dict() fields
"""

import json
from typing import Any, Dict

import numpy as np
import pandas as pd

from .exceptions import ConfigError
from .pickands import ConvergenceTable
from .process import Path

SCHEMA_VERSION = 1
OUTPUT_FORMATS = ("csv", "json")
# List fields rendered as one CSV row each.
TABLE_KEYS = ("levels", "checks")


def to_plain(value: Any) -> Any:
    """Convert numpy scalars, arrays and tuples into JSON-native values."""
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_plain(v) for v in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


class ReportFormatter:
    """Formats laboratory reports for stdout and the run ledger."""

    def __init__(self, output_format: str = "csv"):
        if output_format not in OUTPUT_FORMATS:
            raise ConfigError(f"output format must be one of {OUTPUT_FORMATS}, got {output_format!r}")
        self.output_format = output_format

    def payload(self, command: str, report: Any) -> Dict:
        """
        Versioned, JSON-native payload of a report.

        Args:
            command: Subcommand that produced the report
            report: Object with to_dict(), a Path, or a plain dict

        Returns:
            Dict with keys schema, command, report
        """
        if isinstance(report, Path):
            body = {"t": report.grid.points, "value": report.values}
        elif hasattr(report, "to_dict"):
            body = report.to_dict()
        else:
            body = report
        return {"schema": SCHEMA_VERSION, "command": command, "report": to_plain(body)}

    def format(self, command: str, report: Any) -> str:
        """Render a report in the configured output format."""
        if self.output_format == "json":
            return self.format_json(command, report)
        return self.format_csv(report)

    def format_json(self, command: str, report: Any) -> str:
        return json.dumps(self.payload(command, report), indent=2)

    def format_csv(self, report: Any) -> str:
        return self._frame(report).to_csv(index=False)

    def _frame(self, report: Any) -> pd.DataFrame:
        """
        Tabular view of a report.

        Args:
            report: Report object

        Returns:
            pd.DataFrame: One row per path point, table row or level
        """
        if isinstance(report, (Path, ConvergenceTable)):
            return report.to_frame()
        body = to_plain(report.to_dict() if hasattr(report, "to_dict") else report)
        for key in TABLE_KEYS:
            if isinstance(body.get(key), list):
                return pd.DataFrame(body[key])
        flat = pd.json_normalize(self._join_lists(body), sep=".")
        return flat

    def _join_lists(self, body: Dict) -> Dict:
        """Collapse list fields (flags, lag probabilities) into ';'-joined cells."""
        joined = {}
        for key, value in body.items():
            if isinstance(value, dict):
                joined[key] = self._join_lists(value)
            elif isinstance(value, list):
                joined[key] = ";".join(str(v) for v in value)
            else:
                joined[key] = value
        return joined

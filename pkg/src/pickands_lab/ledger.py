"""
Run ledger: one newline-delimited JSON record per CLI invocation.

The ledger is append-only. Each record keeps the argv of its run, so
replaying a record re-executes the same seeded computation.
"""

import json
from dataclasses import asdict, dataclass, field
from datetime import datetime
from typing import Dict, List, Optional

import pytz
from dateutil import parser
from loguru import logger

from . import __version__
from .config import config
from .exceptions import PickandsLabError
from .utils import ensure_parent_directory


def artifact_version() -> str:
    return f"pickands-lab-v{__version__}"


@dataclass
class RunRecord:
    """Persisted result of one CLI run."""

    command: str
    argv: List[str]
    seed: Optional[int]
    outputs: Dict
    wall_time: float
    timestamp: str = field(default_factory=lambda: datetime.now(pytz.UTC).isoformat())
    version: str = field(default_factory=artifact_version)

    @property
    def recorded_at(self) -> datetime:
        """Timestamp as an aware UTC datetime."""
        return parser.isoparse(self.timestamp).astimezone(pytz.UTC)

    def to_json_line(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: Dict) -> "RunRecord":
        return cls(
            command=data["command"],
            argv=list(data["argv"]),
            seed=data.get("seed"),
            outputs=data["outputs"],
            wall_time=float(data["wall_time"]),
            timestamp=data["timestamp"],
            version=data.get("version", "unknown"),
        )


def append_run_record(record: RunRecord, path: Optional[str] = None) -> None:
    """
    Append a record to the ledger.

    Args:
        record: Record to append
        path: Ledger file; defaults to PICKANDS_LEDGER or the configured path
    """
    path = path or config.ledger_path()
    try:
        ledger_file = ensure_parent_directory(path)
        with open(ledger_file, "a", encoding="utf-8") as f:
            f.write(record.to_json_line() + "\n")
    except OSError as e:
        logger.error(f"Error appending run record to {path}: {e}")
        raise PickandsLabError(f"cannot write ledger {path}: {e}")

    logger.info(f"Appended {record.command} run to {path}")


def load_run_records(path: Optional[str] = None) -> List[RunRecord]:
    """
    Read every record from the ledger.

    Malformed lines are skipped with a warning; a missing ledger reads as empty.

    Args:
        path: Ledger file

    Returns:
        Records in append order
    """
    path = path or config.ledger_path()
    try:
        with open(path, "r", encoding="utf-8") as f:
            lines = f.readlines()
    except FileNotFoundError:
        logger.info(f"Ledger {path} doesn't exist, no runs recorded")
        return []

    records = []
    for number, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            records.append(RunRecord.from_dict(json.loads(line)))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            logger.warning(f"Skipping malformed ledger line {number} in {path}: {e}")

    logger.info(f"Loaded {len(records)} run records from {path}")
    return records


def replay(record: RunRecord) -> Dict:
    """
    Re-execute a recorded run without touching the ledger.

    Returns:
        Fresh outputs, comparable with record.outputs
    """
    from .cli import execute

    _, payload, _ = execute(record.argv)
    return json.loads(json.dumps(payload))

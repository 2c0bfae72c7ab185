"""
Shared pytest setup: puts src/ on the import path and keeps test runs
from writing to the default ledger.
"""

import sys
from pathlib import Path

import pytest
from loguru import logger

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))


@pytest.fixture(autouse=True)
def isolated_ledger(tmp_path, monkeypatch):
    """Point PICKANDS_LEDGER at a per-test file."""
    ledger = tmp_path / "ledger.jsonl"
    monkeypatch.setenv("PICKANDS_LEDGER", str(ledger))
    return ledger


@pytest.fixture(autouse=True)
def reset_logging():
    """Drop sinks a CLI run bound to a captured stream."""
    yield
    logger.remove()
    logger.add(sys.__stderr__, level="WARNING")


@pytest.fixture(autouse=True)
def fresh_sampling_plans():
    """Start every test without cached embeddings."""
    from pickands_lab.process import clear_sampling_plans

    clear_sampling_plans()
    yield
    clear_sampling_plans()

"""
Configuration management for Pickands Lab.
"""

import os
from typing import Optional
from dotenv import load_dotenv

from .exceptions import ConfigError

# Load environment variables from .env file
load_dotenv()


class Config:
    """Configuration class for the laboratory."""

    # Run ledger (newline-delimited JSON)
    LEDGER_PATH: str = os.getenv("PICKANDS_LEDGER", "runs/ledger.jsonl")

    # Replication layout
    WORKERS: int = int(os.getenv("PICKANDS_WORKERS", "1"))
    CHUNK_SIZE: int = int(os.getenv("PICKANDS_CHUNK_SIZE", "10000"))

    # Logging Configuration
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "WARNING")
    LOG_FILE: Optional[str] = os.getenv("LOG_FILE")

    @classmethod
    def ledger_path(cls) -> str:
        """Ledger path, re-read so a PICKANDS_LEDGER set after import wins."""
        return os.getenv("PICKANDS_LEDGER", cls.LEDGER_PATH)

    @classmethod
    def validate(cls) -> bool:
        """Validate the replication layout."""
        for field in ("WORKERS", "CHUNK_SIZE"):
            if getattr(cls, field) < 1:
                raise ConfigError(f"Configuration field '{field}' must be positive")

        return True


# Global configuration instance
config = Config()

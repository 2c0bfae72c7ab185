#!/usr/bin/env python3
"""
Main entry point for Pickands Lab.

Usage examples:
    python main.py lower-bound --alpha 1
    python main.py estimate-h --alpha 2 --T 1 --step 0.01 --n 200000 --seed 7
    python main.py simulate --alpha 1 --model exp --p 1 --step 0.1 --seed 1
"""

import sys
from pathlib import Path

# Add src to Python path
sys.path.insert(0, str(Path(__file__).parent / "src"))

from pickands_lab.cli import run


if __name__ == "__main__":
    sys.exit(run(sys.argv[1:]))

"""Run the acceptance criteria and print one PASS/FAIL line each.

    python3 scripts/run_acceptance.py
"""

import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    code = pytest.main([str(ROOT / "tests" / "test_acceptance.py"), "-q", "-p", "no:cacheprovider"])
    sys.exit(int(code))

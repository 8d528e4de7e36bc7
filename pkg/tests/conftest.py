import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_line():
    """Record one summary line per acceptance criterion."""

    def record(number, title, ok, detail=""):
        status = "PASS" if ok else "FAIL"
        ACCEPTANCE_LINES.append((number, f"[{status}] criterion {number:>2}: {title}  {detail}"))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES, key=lambda t: t[0]):
        terminalreporter.write_line(line)


@pytest.fixture
def close():
    def check(a, b, tol=1e-10):
        return float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) <= tol

    return check

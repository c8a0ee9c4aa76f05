import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", max_examples=1000, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record and print one pass/fail line per acceptance criterion."""

    def record(label, ok, detail, seconds=None):
        line = f"{label}: {'PASS' if ok else 'FAIL'} | {detail}"
        if seconds is not None:
            line += f" | {seconds:.2f} s"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

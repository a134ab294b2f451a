import numpy as np
import pytest

# Verdict lines produced by the acceptance suite (tests/test_acceptance.py).
# Emitted via the terminal-summary hook because pytest's fd-level capture
# would otherwise swallow plain prints even on sys.__stdout__.
ACCEPTANCE_REPORT: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_REPORT:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_REPORT:
            terminalreporter.write_line(line)

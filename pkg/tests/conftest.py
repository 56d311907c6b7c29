import numpy as np
import pytest

# One line per acceptance criterion, filled in by test_acceptance.py and
# replayed after the run so the checklist survives output capture.
criterion_lines: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in criterion_lines:
            terminalreporter.write_line(line)

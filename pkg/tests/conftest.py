import numpy as np
import pytest

from irs_oob.geometry import DEFAULT_PATHLOSS, Position, RngStream, link_budget

MID_UE = Position(100.0, 100.0)


@pytest.fixture
def rng():
    return RngStream(12345, 7)


@pytest.fixture
def mid_budget_y():
    """BS-Y link budget for the out-of-band UE at the centre of the region."""
    return link_budget(MID_UE, Position(200.0, 0.0), Position(0.0, 0.0), DEFAULT_PATHLOSS)


def within_sigmas(samples, expected, sigmas=3.0):
    samples = np.asarray(samples)
    se = samples.std(ddof=1) / np.sqrt(samples.size)
    return abs(samples.mean() - expected) <= sigmas * se, samples.mean(), se


# filled by test_acceptance; printed once at the end of the session
ACCEPTANCE_LINES: dict[str, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: (int(k.split()[0]), k)):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])

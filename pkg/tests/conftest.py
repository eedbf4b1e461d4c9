from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ncqft.nilpotent_group import GroupParams, LatticeSpec

settings.register_profile("ncqft", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ncqft")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def finite3():
    return LatticeSpec.finite(GroupParams(2, 1, "finite", 3))


@pytest.fixture
def finite5():
    return LatticeSpec.finite(GroupParams(2, 1, "finite", 5))


# one summary line per acceptance criterion, shown even when output is captured
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

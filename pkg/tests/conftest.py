import os

import pytest
from hypothesis import HealthCheck, settings

from autoloop.algebra import make_quadratic_context
from autoloop.extension import enumerate_admissible_W
from autoloop.qrv import realize_cayley

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_LINES: list = []


@pytest.fixture(scope="session")
def ctx3():
    return make_quadratic_context(3)


@pytest.fixture(scope="session")
def Ws3(ctx3):
    return enumerate_admissible_W(ctx3)


@pytest.fixture(scope="session")
def loops3(Ws3):
    """Realized tables of W_0, W_1, W_2 at p = 3."""
    return [realize_cayley(W.backend()) for W in Ws3]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

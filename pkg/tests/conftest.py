import os

import numpy as np
import pytest

# keep matrix caches inside the test tree so runs are hermetic
os.environ.setdefault("HAARVERIFY_CACHE_DIR", os.path.join(os.path.dirname(__file__), ".cache"))

from haarverify.opmat import get_opmats  # noqa: E402
from haarverify.problems import (  # noqa: E402
    ForcedLogistic,
    Logistic,
    Lorenz,
    default_initial_guess,
    newton_solve,
)


@pytest.fixture(scope="session")
def ops2():
    return get_opmats(2)


@pytest.fixture(scope="session")
def ops3():
    return get_opmats(3)


@pytest.fixture(scope="session")
def ops4():
    return get_opmats(4)


@pytest.fixture(scope="session")
def ops6():
    return get_opmats(6)


@pytest.fixture(scope="session")
def logistic_spec():
    return Logistic(lam=6.0, u0=0.2)


@pytest.fixture(scope="session")
def logistic6(logistic_spec, ops6):
    """Converged logistic solve at J=6 (shared; treated as read-only)."""
    return newton_solve(
        logistic_spec, ops6, default_initial_guess(logistic_spec, ops6)
    )


@pytest.fixture(scope="session")
def forced_spec():
    return ForcedLogistic(lam=6.0, u0=0.2)


@pytest.fixture(scope="session")
def lorenz_spec():
    return Lorenz(sigma=10.0, rho=28.0, beta=8.0 / 3.0)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


SCOREBOARD: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print the acceptance scoreboard after capture ends so it shows in
    plain ``pytest -v`` logs."""
    if SCOREBOARD:
        terminalreporter.section("acceptance scoreboard")
        for line in SCOREBOARD:
            terminalreporter.line(line)

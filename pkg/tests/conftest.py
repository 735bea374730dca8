import numpy as np
import pytest

from eitcascade.config import load_example
from eitcascade.pipeline import Experiment

# lines collected by test_acceptance.py, echoed at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])


@pytest.fixture(scope="session")
def few_photon():
    exp = Experiment(load_example("few_photon_8"))
    return exp, exp.cascade()


@pytest.fixture(scope="session")
def classical():
    exp = Experiment(load_example("classical"))
    return exp, exp.cascade()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

import numpy as np
import pytest

from twosolve.cli import preset
from twosolve.functional import ProblemSpec
from twosolve.grid import build_grid
from twosolve.solvers import solve_two


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def grid64():
    return build_grid(2, (1.0, 1.0), (64, 64))


@pytest.fixture(scope="session")
def paper_spec(grid64):
    c, f, mu, _ = preset("paper-regime", grid64)
    return ProblemSpec(grid64, c, f, mu)


@pytest.fixture(scope="session")
def paper_report(paper_spec):
    return solve_two(paper_spec)


@pytest.fixture(scope="session")
def coercive_spec(grid64):
    c, f, mu, _ = preset("coercive", grid64)
    return ProblemSpec(grid64, c, f, mu)


@pytest.fixture(scope="session")
def coercive_report(coercive_spec):
    return solve_two(coercive_spec)

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from microlocal.grid import Box, Grid

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def grid1():
    return Grid.default(1)


@pytest.fixture(scope="session")
def grid2():
    return Grid.default(2)


@pytest.fixture(scope="session")
def small_grid1():
    return Grid(Box.cube(1, 4.0), (512,))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def ce_setup():
    """Grid, cone and six-term plan for the sequence construction in 1D and 2D."""
    from microlocal.cli import default_gamma
    from microlocal.counterexample import choose_sequence, counterexample_grid, find_boundary_point

    out = {}
    for n, seed in ((1, ((0.3,), (1.0,))), (2, ((0.0, 0.0), (1.0, 0.3)))):
        grid = counterexample_grid(n)
        gamma = default_gamma(n, grid)
        boundary = find_boundary_point(gamma, *seed)
        out[n] = (grid, gamma, choose_sequence(boundary, gamma, 6, grid=grid))
    return out

import numpy as np
import pytest

import hardynls as h


@pytest.fixture(scope="session")
def grid():
    return h.RadialGrid()


@pytest.fixture(scope="session")
def gs(grid):
    return h.solve_ground_state(3, 0.1, grid)


@pytest.fixture(scope="session")
def grid_small():
    return h.RadialGrid(n=2048)


@pytest.fixture(scope="session")
def gs_small(grid_small):
    return h.solve_ground_state(3, 0.1, grid_small)


@pytest.fixture(scope="session")
def box():
    return h.CartesianGrid(d=3, m=64, box_half_width=16.0, c=0.1)


@pytest.fixture(scope="session")
def blowup_small(gs_small):
    """Quick supercritical run (300x focusing) for module-level tests."""
    grid = gs_small.profile.grid
    u0 = h.Field(grid, 1.1 * gs_small.profile.values)
    h0 = grid.hardy_form(u0.values)
    cfg = h.EvolveConfig(delta_dt=0.01, dt_min=0.01 / (300.0 * h0))
    return h.evolve(u0, cfg)


def gaussian_field(grid, width=1.0):
    return h.Field(grid, np.exp(-grid.radii ** 2 / (2.0 * width ** 2)))

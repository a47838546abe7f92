import numpy as np
import pytest

from stillwater import (
    Bathymetry,
    BoundarySpec,
    FlowParams,
    Grid,
    State,
    fill_ghosts,
)


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the jitted kernels once so timed tests measure math, not LLVM."""
    from stillwater.cases import build, get_case
    from stillwater.imex import advance_to

    spec = get_case("accuracy1d")
    g, st, bathy, bc, params = build(spec, nx=40)
    advance_to(st, bathy, 5e-4, "imex3", params, bc)
    g, st, bathy, bc, params = build(spec, nx=40)
    advance_to(st, bathy, 1e-4, "explicit-ref", params, bc)
    spec2 = get_case("accuracy2d")
    g, st, bathy, bc, params = build(spec2, nx=8, ny=8)
    advance_to(st, bathy, 2e-3, "imex3", params, bc)


def make_lake(nx=100, H0=10.0, x1=10.0, bfun=None, eps=1.0):
    """Still-water state over a (default: discontinuous block) bottom."""
    grid = Grid(1, nx, x0=0.0, x1=x1)
    bc = BoundarySpec.periodic(1)
    if bfun is None:
        def bfun(x):
            return np.where((x >= 0.4 * x1) & (x <= 0.8 * x1), 0.4 * H0, 0.0)
    bathy = Bathymetry.from_callable(grid, bfun, bc)
    st = State(grid, H0 - bathy.b, grid.new_full(), None)
    fill_ghosts(st, bathy, bc)
    return grid, st, bathy, bc, FlowParams(eps=eps)


def periodic_state_1d(nx, hfun, hufun, bfun=None, x0=0.0, x1=1.0):
    grid = Grid(1, nx, x0=x0, x1=x1)
    bc = BoundarySpec.periodic(1)
    bathy = (Bathymetry.flat(grid) if bfun is None
             else Bathymetry.from_callable(grid, bfun, bc))
    x = grid.xc(ghosts=True)
    st = State(grid, np.asarray(hfun(x), dtype=float) + np.zeros_like(x),
               np.asarray(hufun(x), dtype=float) + np.zeros_like(x), None)
    fill_ghosts(st, bathy, bc)
    return grid, st, bathy, bc

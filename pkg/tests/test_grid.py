"""Grid, boundary fill, and reduction contracts."""

import numpy as np
import pytest

from stillwater import (
    Bathymetry,
    BoundarySpec,
    ConfigError,
    FlowParams,
    Grid,
    SolverError,
    State,
    compute_dt,
    fill_ghosts,
    max_wave_speed,
    spatial_mean,
    surface_level,
    total_mass,
)

from conftest import make_lake


def test_grid_spacing_and_centers():
    g = Grid(1, 8, x0=0.0, x1=2.0)
    assert g.dx == 2.0 / 8
    x = g.xc()
    assert x[0] == g.x0 + 0.5 * g.dx
    assert x[-1] == pytest.approx(g.x1 - 0.5 * g.dx, abs=0)


def test_grid_validation():
    with pytest.raises(ConfigError):
        Grid(3, 8)
    with pytest.raises(ConfigError):
        Grid(1, 0)
    with pytest.raises(ConfigError):
        Grid(1, 8, ghost=2)
    with pytest.raises(ConfigError):
        Grid(1, 8, x0=1.0, x1=0.0)
    with pytest.raises(ConfigError):
        FlowParams(eps=0.0)
    with pytest.raises(ConfigError):
        FlowParams(eps=1.0, cfl=1.5)


def _interior_field_1d(vals):
    g = Grid(1, len(vals))
    arr = g.new_full()
    g.interior(arr)[:] = vals
    return g, arr


def test_fill_ghosts_periodic_wrap():
    g, arr = _interior_field_1d([1.0, 2.0, 3.0, 4.0])
    bc = BoundarySpec.periodic(1)
    st = State(g, arr, arr.copy(), None)
    fill_ghosts(st, Bathymetry.flat(g), bc)
    # nearest ghosts wrap index-exactly
    assert st.h[g.ghost - 1] == 4.0
    assert st.h[g.ghost + g.nx] == 1.0
    assert list(st.h[:3]) == [2.0, 3.0, 4.0]
    assert list(st.h[-3:]) == [1.0, 2.0, 3.0]


def test_fill_ghosts_outflow_copies_nearest():
    g, arr = _interior_field_1d([1.0, 2.0, 3.0, 4.0])
    bc = BoundarySpec.outflow(1)
    st = State(g, arr, arr.copy(), None)
    fill_ghosts(st, Bathymetry.flat(g), bc)
    assert np.all(st.h[:3] == 1.0)
    assert np.all(st.h[-3:] == 4.0)


def test_fill_ghosts_inflow_pins_stored_values():
    g, arr = _interior_field_1d([1.0, 2.0, 3.0, 4.0])
    bc = BoundarySpec(1, {"left": "inflow", "right": "outflow"})
    bc.pinned[("left", "h")] = np.full(3, 20.0)
    bc.pinned[("left", "hu")] = np.zeros(3)
    st = State(g, arr, arr.copy(), None)
    fill_ghosts(st, Bathymetry.flat(g), bc)
    assert np.all(st.h[:3] == 20.0)
    assert np.all(st.hu[:3] == 0.0)


def test_fill_ghosts_idempotent():
    rng = np.random.default_rng(3)
    g = Grid(2, 6, 5)
    bc = BoundarySpec(2, {"left": "outflow", "right": "outflow",
                          "bottom": "periodic", "top": "periodic"})
    st = State(g, g.new_full(), g.new_full(), g.new_full())
    for _, arr in st.fields():
        g.interior(arr)[:] = rng.standard_normal((6, 5)) + 3.0
    bathy = Bathymetry.flat(g)
    fill_ghosts(st, bathy, bc)
    snap = [arr.copy() for _, arr in st.fields()]
    fill_ghosts(st, bathy, bc)
    for before, (_, after) in zip(snap, st.fields()):
        assert np.array_equal(before, after)


def test_periodic_pairing_enforced():
    with pytest.raises(ConfigError):
        BoundarySpec(1, {"left": "periodic", "right": "outflow"})


def test_periodic_corners_are_double_wrapped():
    g = Grid(2, 4, 4)
    bc = BoundarySpec.periodic(2)
    st = State.zeros(g)
    gi = g.interior(st.h)
    gi[:] = np.arange(16, dtype=float).reshape(4, 4)
    fill_ghosts(st, Bathymetry.flat(g), bc)
    gh = g.ghost
    assert st.h[gh - 1, gh - 1] == gi[-1, -1]
    assert st.h[gh + 4, gh + 4] == gi[0, 0]


def test_surface_level_recovers_depth():
    # dyadic bottom: sum and difference are exact
    grid, st, bathy, _, _ = make_lake(nx=64, H0=10.0)
    H = surface_level(st, bathy)
    assert np.array_equal(H - bathy.b, st.h)
    assert np.all(grid.interior(H) == 10.0)


def test_surface_level_pointwise():
    g = Grid(1, 2)
    st = State(g, g.new_full(), g.new_full(), None)
    g.interior(st.h)[:] = [2.0, 3.0]
    b = Bathymetry(g, g.new_full())
    g.interior(b.b)[:] = [1.0, 0.0]
    H = surface_level(st, b)
    assert list(g.interior(H)) == [3.0, 3.0]


def test_spatial_mean_basics():
    g = Grid(1, 2)
    arr = g.new_full()
    g.interior(arr)[:] = [0.0, 1.0]
    assert spatial_mean(arr, g) == 0.5
    arr2 = g.new_full(7.25)
    assert spatial_mean(arr2, g) == 7.25


def test_spatial_mean_sine_cancels():
    g = Grid(1, 128)
    arr = g.new_full()
    g.interior(arr)[:] = 10.0 + np.sin(2 * np.pi * g.xc())
    assert abs(spatial_mean(arr, g) - 10.0) < 1e-13


def test_spatial_mean_centering_property():
    rng = np.random.default_rng(5)
    g = Grid(1, 73)
    arr = g.new_full()
    g.interior(arr)[:] = rng.standard_normal(73) * 40.0
    m = spatial_mean(arr, g)
    centered = arr - m
    assert abs(spatial_mean(centered, g)) <= 1e-14 * np.max(np.abs(arr))


def _uniform_state(h, u, nx=16, dim=1):
    if dim == 1:
        g = Grid(1, nx)
        st = State(g, g.new_full(h), g.new_full(h * u), None)
    else:
        g = Grid(2, nx, nx)
        st = State(g, g.new_full(h), g.new_full(h * u), g.new_full(0.0))
    return g, st


def test_max_wave_speed_formula():
    _, st = _uniform_state(1.0, 2.0)
    lam, ax, _ = max_wave_speed(st, eps=0.5)
    assert lam == pytest.approx(3.0, abs=1e-14)
    _, st = _uniform_state(4.0, 0.0)
    lam, _, _ = max_wave_speed(st, eps=2.0)
    assert lam == pytest.approx(1.0, abs=1e-14)
    _, st = _uniform_state(1.0, 1.0)
    lam, _, _ = max_wave_speed(st, eps=1e-4)
    assert lam == pytest.approx(2.0, abs=1e-14)  # capped, not 1 + 1e4


def test_max_wave_speed_uncapped():
    _, st = _uniform_state(1.0, 1.0)
    lam, _, _ = max_wave_speed(st, eps=1e-2, capped=False)
    assert lam == pytest.approx(101.0, abs=1e-10)


def test_max_wave_speed_relabeling_and_monotone():
    rng = np.random.default_rng(11)
    g = Grid(1, 50)
    h = 1.0 + rng.random(50)
    hu = rng.standard_normal(50)
    st = State(g, g.new_full(), g.new_full(), None)
    g.interior(st.h)[:] = h
    g.interior(st.hu)[:] = hu
    lam1, _, _ = max_wave_speed(st, eps=1.0)
    perm = rng.permutation(50)
    g.interior(st.h)[:] = h[perm]
    g.interior(st.hu)[:] = hu[perm]
    lam2, _, _ = max_wave_speed(st, eps=1.0)
    assert lam1 == lam2
    g.interior(st.hu)[:] = 2.0 * hu[perm]
    lam3, _, _ = max_wave_speed(st, eps=1.0)
    assert lam3 >= lam2


def test_max_wave_speed_rejects_dry():
    g, st = _uniform_state(1.0, 0.0)
    g.interior(st.h)[0] = -1.0
    with pytest.raises(SolverError):
        max_wave_speed(st, eps=1.0)


def test_compute_dt_formula():
    g, st = _uniform_state(4.0, 2.0, nx=100)  # c = 2, u = 2 -> lam = 4
    params = FlowParams(eps=1.0, cfl=0.2)
    assert compute_dt(st, g, params) == pytest.approx(0.2 * 0.01 / 4.0, rel=1e-12)


def test_compute_dt_accuracy_mode():
    g = Grid(1, 10)  # dx = 0.1
    st = State(g, g.new_full(1.0), g.new_full(1.0), None)  # u=1, c=1 -> lam=2
    params = FlowParams(eps=1.0, cfl=0.2, accuracy_mode=True)
    expected = 0.2 * 0.1 ** (5.0 / 3.0) / 2.0
    assert compute_dt(st, g, params) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(2.154434690031884e-3, rel=1e-9)


def test_compute_dt_still_water_lake():
    grid, st, bathy, _, _ = make_lake(nx=100, H0=10.0)
    params = FlowParams(eps=1.0 / np.sqrt(9.812), cfl=0.2)
    lam, _, _ = max_wave_speed(st, params.eps)
    assert lam == pytest.approx(np.sqrt(10.0), rel=1e-13)
    assert compute_dt(st, grid, params) == pytest.approx(
        0.2 * grid.dx / np.sqrt(10.0), rel=1e-12)


def test_compute_dt_quiescent_fallback():
    g = Grid(1, 10)
    st = State(g, g.new_full(1.0), g.new_full(0.0), None)
    params = FlowParams(eps=1e30, cfl=0.2)  # capped celerity ~ 1e-30
    assert compute_dt(st, g, params) == pytest.approx(0.2 * g.dx, rel=1e-12)


def test_total_mass():
    g = Grid(1, 37)
    st = State(g, g.new_full(1.0), g.new_full(), None)
    assert total_mass(st, g) == pytest.approx(1.0, rel=1e-14)
    g2 = Grid(2, 24, 11, x0=0.0, x1=2.0, y0=0.0, y1=1.0)
    st2 = State(g2, g2.new_full(2.0), g2.new_full(), g2.new_full())
    assert total_mass(st2, g2) == pytest.approx(4.0, rel=1e-14)

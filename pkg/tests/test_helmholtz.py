"""Helmholtz operator, right-hand sides, and the PCG solver contract."""

import numpy as np
import pytest

import stillwater.helmholtz as hh
from stillwater import (
    Bathymetry,
    BoundarySpec,
    Grid,
    SolverError,
    State,
    apply_operator,
    build_rhs_first_order,
    build_rhs_stage,
    div_lf_mass,
    div_tensor_c,
    fill_ghosts,
    solve,
    spatial_mean,
)
from stillwater.helmholtz import HelmholtzSystem, expand

from conftest import make_lake, periodic_state_1d


def _system_1d(n, coeff_fun, eps, tau, bc=None, **kw):
    g = Grid(1, n)
    bc = bc or BoundarySpec.periodic(1)
    x = g.xc(ghosts=True)
    coeff = np.asarray(coeff_fun(x), dtype=float) + np.zeros_like(x)
    from stillwater.grid import fill_scalar_ghosts
    fill_scalar_ghosts(coeff, g, bc)
    return g, HelmholtzSystem.from_state(g, coeff, eps, tau, bc, **kw)


def test_apply_tau_zero_is_scaled_identity():
    rng = np.random.default_rng(0)
    g, sys_ = _system_1d(24, lambda x: 1.0 + 0.2 * np.sin(2 * np.pi * x), 0.5, 0.0)
    v = rng.standard_normal(24)
    out = apply_operator(sys_, v)
    assert np.array_equal(out, 0.25 * v)


def test_apply_annihilates_constants():
    g, sys_ = _system_1d(24, lambda x: 1.0 + 0.3 * np.cos(2 * np.pi * x), 0.5, 0.1)
    out = apply_operator(sys_, np.full(24, 3.0))
    assert np.max(np.abs(out - 0.25 * 3.0)) < 1e-12


def test_apply_eigenfunction_truncation_order():
    eps, tau = 0.4, 0.05
    errs = []
    for n in (32, 64, 128):
        g, sys_ = _system_1d(n, lambda x: np.ones_like(x), eps, tau)
        v = np.sin(2 * np.pi * g.xc())
        out = apply_operator(sys_, v)
        exact = (eps ** 2 + tau ** 2 * 4 * np.pi ** 2) * v
        errs.append(np.max(np.abs(out - exact)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 3.7)


def test_spd_sanity():
    rng = np.random.default_rng(4)
    g, sys_ = _system_1d(32, lambda x: 1.0 + 0.4 * np.sin(2 * np.pi * x), 0.3, 0.02)
    for _ in range(5):
        v = rng.standard_normal(32)
        quad = float(np.dot(v, apply_operator(sys_, v)))
        assert quad > 0.0


def test_solver_rejects_nonpositive_coefficient():
    g = Grid(1, 16)
    coeff = np.ones(g.full_shape)
    coeff[8] = -0.5
    with pytest.raises(SolverError):
        HelmholtzSystem(g, 1.0, 0.1, coeff, True)


def test_solve_zero_rhs_short_circuits():
    g, sys_ = _system_1d(16, lambda x: np.ones_like(x), 1.0, 0.5)
    out = solve(sys_, np.zeros(16))
    assert np.array_equal(out, np.zeros(16))
    assert sys_.last_iterations == 0


def test_solve_identity_scaling():
    rng = np.random.default_rng(7)
    g, sys_ = _system_1d(16, lambda x: np.ones_like(x), 1.0, 0.0)
    rhs = rng.standard_normal(16)
    out = solve(sys_, rhs)
    assert np.allclose(out, rhs, rtol=1e-12, atol=1e-13)


@pytest.mark.parametrize("coeff_fun", [
    lambda x: np.ones_like(x),
    lambda x: 1.0 + 0.5 * np.sin(2 * np.pi * x),
])
def test_solve_manufactured_fourth_order(coeff_fun):
    eps, tau = 0.3, 0.05
    variable = bool(np.ptp(coeff_fun(np.linspace(0, 1, 7))) > 0)
    errs = []
    for n in (32, 64, 128):
        g, sys_ = _system_1d(n, coeff_fun, eps, tau)
        xc = g.xc()
        sin = np.sin(2 * np.pi * xc)
        if variable:
            rhs = eps ** 2 * sin + tau ** 2 * (
                4 * np.pi ** 2 * sin - 2 * np.pi ** 2 * np.cos(4 * np.pi * xc))
        else:
            rhs = (eps ** 2 + tau ** 2 * 4 * np.pi ** 2) * sin
        out = solve(sys_, rhs)
        assert sys_.last_residual <= sys_.tol
        errs.append(np.max(np.abs(out - sin)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert orders[-1] > 3.6


def test_solve_spectral_and_jacobi_paths_agree(monkeypatch):
    # force each path on the same stiff periodic system
    g = Grid(1, 64)
    bc = BoundarySpec.periodic(1)
    x = g.xc(ghosts=True)
    coeff = 2.0 + np.sin(2 * np.pi * x)
    rng = np.random.default_rng(12)
    rhs = rng.standard_normal(64)
    rhs -= rhs.mean()

    monkeypatch.setattr(hh, "SPECTRAL_KAPPA", 1e30)  # never spectral
    s1 = HelmholtzSystem.from_state(g, coeff, 1e-3, 0.002, bc)
    j = solve(s1, rhs)
    assert s1.last_residual <= s1.tol
    monkeypatch.setattr(hh, "SPECTRAL_KAPPA", 0.0)  # always spectral
    s2 = HelmholtzSystem.from_state(g, coeff, 1e-3, 0.002, bc)
    p = solve(s2, rhs)
    assert s2.last_residual <= s2.tol
    assert np.max(np.abs(j - p)) < 1e-9 * np.max(np.abs(j))


def test_solve_singular_lake_limit():
    g, sys_ = _system_1d(64, lambda x: np.ones_like(x), 0.0, 1.0)
    assert sys_.singular
    xc = g.xc()
    rhs = 4 * np.pi ** 2 * np.sin(2 * np.pi * xc)
    out = solve(sys_, rhs)
    assert abs(np.mean(out)) < 1e-12
    assert np.max(np.abs(out - np.sin(2 * np.pi * xc))) < 2e-4  # truncation


def test_solve_neumann_closure():
    g = Grid(1, 64)
    bc = BoundarySpec.outflow(1)
    x = g.xc(ghosts=True)
    sys_ = HelmholtzSystem.from_state(g, np.ones_like(x), 0.5, 0.02, bc)
    xc = g.xc()
    q = np.cos(np.pi * xc)  # zero normal derivative at both walls
    rhs = 0.25 * q + 0.02 ** 2 * np.pi ** 2 * q
    out = solve(sys_, rhs)
    assert np.max(np.abs(out - q)) < 1e-6


def test_solve_iteration_cap_raises():
    g, sys_ = _system_1d(64, lambda x: 1.0 + 0.5 * np.sin(2 * np.pi * x),
                         1e-4, 0.5)
    sys_.max_iter = 2
    xc = g.xc()
    with pytest.raises(SolverError, match="iterations|stalled"):
        solve(sys_, np.sin(2 * np.pi * xc))


def test_solve_2d_manufactured():
    g = Grid(2, 24, 24)
    bc = BoundarySpec.periodic(2)
    X, Y = g.coords(ghosts=True)
    coeff = 2.0 + 0.5 * np.sin(2 * np.pi * X) * np.cos(2 * np.pi * Y)
    eps, tau = 0.3, 0.04
    sys_ = HelmholtzSystem.from_state(g, coeff, eps, tau, bc)
    Xi, Yi = np.meshgrid(g.xc(), g.yc(), indexing="ij")
    import sympy as sp
    xs, ys = sp.symbols("x y")
    a_e = 2 + sp.sin(2 * sp.pi * xs) * sp.cos(2 * sp.pi * ys) / 2
    q_e = sp.sin(2 * sp.pi * xs) * sp.sin(2 * sp.pi * ys)
    rhs_e = eps ** 2 * q_e - tau ** 2 * (
        sp.diff(a_e * sp.diff(q_e, xs), xs) + sp.diff(a_e * sp.diff(q_e, ys), ys))
    rhs = sp.lambdify((xs, ys), rhs_e, "numpy")(Xi, Yi)
    out = solve(sys_, rhs)
    assert sys_.last_residual <= sys_.tol
    assert np.max(np.abs(out - np.sin(2 * np.pi * Xi) * np.sin(2 * np.pi * Yi))) < 5e-4


def test_expand_applies_closure():
    g, sys_ = _system_1d(16, lambda x: np.ones_like(x), 1.0, 0.1)
    v = np.arange(16.0)
    full = expand(sys_, v)
    assert np.array_equal(g.interior(full), v)
    assert full[g.ghost - 1] == v[-1]  # periodic wrap
    bc = BoundarySpec.outflow(1)
    g2, sys2 = _system_1d(16, lambda x: np.ones_like(x), 1.0, 0.1, bc=bc)
    full2 = expand(sys2, v)
    assert full2[g2.ghost - 1] == v[0]  # mirror


# ---------------------------------------------------------------------------
# right-hand sides
# ---------------------------------------------------------------------------

def test_build_rhs_first_order_still_water():
    grid, st, bathy, bc, params = make_lake(nx=64)
    rhs = build_rhs_first_order(st, bathy, dt=1e-3, eps=params.eps)
    assert np.max(np.abs(rhs)) <= 1e-14


def test_build_rhs_first_order_constant_surface_moving():
    # constant H with nonzero momentum: the H - Hbar part cancels exactly
    grid, st, bathy, bc = periodic_state_1d(
        48, lambda x: np.full_like(x, 2.0), lambda x: np.full_like(x, 0.5) + 0.1 * np.sin(2 * np.pi * x))
    dt = 2e-3
    rhs = build_rhs_first_order(st, bathy, dt, eps=1.0)
    dmass = div_lf_mass(st, bathy, 1.0)
    dtens = div_tensor_c(st)
    expected = -dt * (grid.interior(dmass) - dt * grid.interior(dtens))
    assert np.max(np.abs(rhs - expected)) < 1e-14


def test_build_rhs_stage_matches_direct_composition():
    rng = np.random.default_rng(3)
    grid, st, bathy, bc = periodic_state_1d(
        40, lambda x: 2.0 + 0.4 * np.sin(2 * np.pi * x),
        lambda x: 0.3 * np.cos(2 * np.pi * x),
        bfun=lambda x: 0.2 + 0.1 * np.cos(2 * np.pi * x))
    st_E = st.copy()
    # perturb the explicit state so the two arguments differ
    grid.interior(st_E.hu)[:] += 0.05 * rng.standard_normal(40)
    fill_ghosts(st_E, bathy, bc)
    hbar = spatial_mean(st_E.h + bathy.b, grid)
    a_ii, dt, eps = 0.435, 1.3e-3, 0.5
    rhs = build_rhs_stage(st, st_E, hbar, bathy, a_ii, dt, eps)
    tau = a_ii * dt
    expected = grid.interior(
        (st.h + bathy.b - hbar)
        - tau * (div_lf_mass(st, bathy, eps) - tau * div_tensor_c(st_E)))
    assert np.max(np.abs(rhs - expected)) < 1e-13


def test_build_rhs_stage_still_water_zero():
    grid, st, bathy, bc, params = make_lake(nx=50)
    hbar = spatial_mean(st.h + bathy.b, grid)
    rhs = build_rhs_stage(st, st, hbar, bathy, 0.435866521508, 1e-2, params.eps)
    assert np.max(np.abs(rhs)) == 0.0


def test_residual_contract_on_every_solve():
    # tau values follow the CFL-limited stage scale; at eps -> 0 the rhs is
    # taken mean-free, as the stage algebra guarantees (telescoping flux
    # sums), since the quasi-null constant mode would otherwise sit beyond
    # double-precision conditioning
    rng = np.random.default_rng(5)
    for eps, tau in ((1.0, 0.002), (1e-2, 0.002), (1e-4, 0.05)):
        g, sys_ = _system_1d(48, lambda x: 1.0 + 0.3 * np.sin(2 * np.pi * x), eps, tau)
        rhs = rng.standard_normal(48)
        if eps < 1e-2:
            rhs -= rhs.mean()
        solve(sys_, rhs)
        assert sys_.last_residual <= sys_.tol

"""Central stencils: polynomial exactness, orders, compact-operator algebra."""

import numpy as np
import pytest
import sympy as sp

from stillwater import (
    Bathymetry,
    BoundarySpec,
    Grid,
    SolverError,
    State,
    div_tensor_c,
    div_var_diffusion,
    fill_ghosts,
    first_deriv_c4,
    second_deriv_c4,
)
from stillwater.stencils import COMPACT2, COMPACT4


def test_compact4_matrix_algebra():
    # rows annihilate constants; unit coefficient reduces to the classic
    # 4th-order second-derivative weights
    assert np.max(np.abs(COMPACT4.sum(axis=1))) < 1e-15
    assert np.allclose(COMPACT4.sum(axis=0) * 12.0,
                       [-1.0, 16.0, -30.0, 16.0, -1.0], atol=1e-12)
    assert np.max(np.abs(COMPACT2.sum(axis=1))) == 0.0
    assert np.allclose(COMPACT2.sum(axis=0), [1.0, -2.0, 1.0], atol=0)


def _grid_field_1d(n, fun, x0=0.0, x1=1.0):
    g = Grid(1, n, x0=x0, x1=x1)
    return g, np.asarray(fun(g.xc(ghosts=True)), dtype=float)


def test_second_deriv_exactness():
    g, q = _grid_field_1d(16, lambda x: np.full_like(x, 3.25), x1=2.0)
    assert np.max(np.abs(g.interior(second_deriv_c4(q, g)))) == 0.0
    g, q = _grid_field_1d(16, lambda x: x * x, x1=2.0)
    out = second_deriv_c4(q, g)
    assert np.max(np.abs(g.interior(out) - 2.0)) < 1e-12


def test_second_deriv_order4():
    errs = []
    for n in (16, 32, 64, 128):
        g, q = _grid_field_1d(n, lambda x: np.sin(2 * np.pi * x))
        out = second_deriv_c4(q, g)
        exact = -4 * np.pi ** 2 * np.sin(2 * np.pi * g.xc())
        errs.append(np.max(np.abs(g.interior(out) - exact)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 3.7)


def test_first_deriv_exactness_and_order():
    g, q = _grid_field_1d(16, lambda x: np.full_like(x, 1.5))
    assert np.max(np.abs(g.interior(first_deriv_c4(q, g)))) == 0.0
    g, q = _grid_field_1d(16, lambda x: x.copy(), x1=3.0)
    assert np.max(np.abs(g.interior(first_deriv_c4(q, g)) - 1.0)) < 1e-13
    errs = []
    for n in (16, 32, 64, 128):
        g, q = _grid_field_1d(n, lambda x: np.sin(2 * np.pi * x))
        out = first_deriv_c4(q, g)
        exact = 2 * np.pi * np.cos(2 * np.pi * g.xc())
        errs.append(np.max(np.abs(g.interior(out) - exact)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 3.7)


def test_first_deriv_antisymmetric():
    rng = np.random.default_rng(1)
    g = Grid(1, 32)
    q = g.new_full()
    g.interior(q)[:] = rng.standard_normal(32)
    from stillwater.grid import fill_scalar_ghosts
    fill_scalar_ghosts(q, g, BoundarySpec.periodic(1))
    dq = g.interior(first_deriv_c4(q, g))
    # periodic sum of an antisymmetric stencil telescopes to zero
    assert abs(np.sum(dq)) < 1e-12 * np.max(np.abs(q)) * 32


def test_div_tensor_zero_and_quadratic():
    g = Grid(1, 20, x0=0.0, x1=2.0)
    st = State(g, g.new_full(1.0), g.new_full(), None)
    assert np.max(np.abs(g.interior(div_tensor_c(st)))) == 0.0
    # hu = x locally: (hu^2)_xx = 2 exactly
    x = g.xc(ghosts=True)
    st = State(g, g.new_full(1.0), x.copy(), None)
    out = div_tensor_c(st)
    assert np.max(np.abs(g.interior(out) - 2.0)) < 1e-11


def test_div_tensor_2d_order4_vs_symbolic():
    xs, ys = sp.symbols("x y")
    h_e = 2 + sp.sin(2 * sp.pi * xs) * sp.cos(2 * sp.pi * ys) / 2
    hu_e = sp.sin(2 * sp.pi * xs) * sp.sin(2 * sp.pi * ys)
    hv_e = sp.cos(2 * sp.pi * xs) * sp.cos(2 * sp.pi * ys)
    expr = (sp.diff(hu_e ** 2 / h_e, xs, 2)
            + 2 * sp.diff(hu_e * hv_e / h_e, xs, ys)
            + sp.diff(hv_e ** 2 / h_e, ys, 2))
    exact_f = sp.lambdify((xs, ys), expr, "numpy")
    hf = sp.lambdify((xs, ys), h_e, "numpy")
    huf = sp.lambdify((xs, ys), hu_e, "numpy")
    hvf = sp.lambdify((xs, ys), hv_e, "numpy")
    errs = []
    for n in (16, 32, 64):
        g = Grid(2, n, n)
        X, Y = g.coords(ghosts=True)
        st = State(g, hf(X, Y), huf(X, Y), hvf(X, Y))
        out = div_tensor_c(st)
        Xi, Yi = np.meshgrid(g.xc(), g.yc(), indexing="ij")
        errs.append(np.max(np.abs(g.interior(out) - exact_f(Xi, Yi))))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert orders[-1] > 3.6


def test_div_tensor_low_order_mode_matches_3point():
    g = Grid(1, 24)
    x = g.xc(ghosts=True)
    st = State(g, np.full_like(x, 1.0), np.sin(2 * np.pi * x), None)
    out = g.interior(div_tensor_c(st, fourth=False))
    hu2 = st.hu ** 2
    gg = g.ghost
    ref = (hu2[gg + 1:gg + g.nx + 1] - 2 * hu2[gg:gg + g.nx]
           + hu2[gg - 1:gg + g.nx - 1]) / g.dx ** 2
    assert np.allclose(out, ref, atol=1e-12)


def test_div_var_diffusion_constant_annihilation():
    # zero up to the ulp-level residue of the 25-term row cancellation,
    # amplified by 1/dx^2
    rng = np.random.default_rng(9)
    g = Grid(1, 32)
    a = 1.0 + rng.random(g.full_shape)
    q = np.full(g.full_shape, 4.75)
    out = div_var_diffusion(a, q, g)
    assert np.max(np.abs(out)) < 1e-14 * 4.75 * np.max(a) / g.dx ** 2


def test_div_var_diffusion_reduces_to_second_derivative():
    g = Grid(1, 16, x0=0.0, x1=2.0)
    x = g.xc(ghosts=True)
    out = div_var_diffusion(np.ones_like(x), x * x, g)
    assert np.max(np.abs(g.interior(out) - 2.0)) < 1e-11


def test_div_var_diffusion_order4():
    errs = []
    for n in (32, 64, 128):
        g = Grid(1, n)
        x = g.xc(ghosts=True)
        a = 1.0 + 0.5 * np.sin(2 * np.pi * x)
        q = np.cos(2 * np.pi * x)
        out = div_var_diffusion(a, q, g)
        xc = g.xc()
        exact = -4 * np.pi ** 2 * np.cos(2 * np.pi * xc) * (1 + np.sin(2 * np.pi * xc))
        errs.append(np.max(np.abs(g.interior(out) - exact)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 3.6)


def test_div_var_diffusion_rejects_nonpositive():
    g = Grid(1, 16)
    a = np.ones(g.full_shape)
    a[5] = 0.0
    with pytest.raises(SolverError):
        div_var_diffusion(a, np.ones(g.full_shape), g)


def _bilinear(a, q, w, g, fourth):
    return float(np.dot(g.interior(w), g.interior(div_var_diffusion(a, q, g, fourth=fourth))))


def test_low_order_compact_exactly_self_adjoint():
    rng = np.random.default_rng(21)
    g = Grid(1, 48)
    bc = BoundarySpec.periodic(1)
    from stillwater.grid import fill_scalar_ghosts
    a = g.new_full()
    q = g.new_full()
    w = g.new_full()
    g.interior(a)[:] = 1.0 + rng.random(48)
    g.interior(q)[:] = rng.standard_normal(48)
    g.interior(w)[:] = rng.standard_normal(48)
    for arr in (a, q, w):
        fill_scalar_ghosts(arr, g, bc)
    bwq = _bilinear(a, q, w, g, fourth=False)
    bqw = _bilinear(a, w, q, g, fourth=False)
    scale = max(abs(bwq), abs(bqw), 1.0)
    assert abs(bwq - bqw) <= 1e-12 * scale
    # negative semidefiniteness of the symmetric low-order operator
    bqq = _bilinear(a, q, q, g, fourth=False)
    assert bqq <= 1e-12 * abs(bqq) + 1e-12


def test_fourth_order_compact_self_adjoint_to_truncation():
    # for variable coefficients the 4th-order compact operator is self-adjoint
    # only to truncation order; assert the asymmetry decays under refinement
    from stillwater.grid import fill_scalar_ghosts
    bc = BoundarySpec.periodic(1)
    asyms = []
    for n in (32, 64, 128):
        g = Grid(1, n)
        x = g.xc(ghosts=True)
        a = 1.0 + 0.5 * np.sin(2 * np.pi * x)
        q = np.cos(2 * np.pi * x)
        w = np.sin(4 * np.pi * x)
        bwq = _bilinear(a, q, w, g, fourth=True)
        bqw = _bilinear(a, w, q, g, fourth=True)
        asyms.append(abs(bwq - bqw) / n)
    orders = np.log2(np.array(asyms[:-1]) / np.array(asyms[1:]))
    assert np.all(orders > 3.0)

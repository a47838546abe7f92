"""Fifth-order WENO reconstruction and the well-balanced flux divergences.

The convective operators follow the pre-balanced Lax-Friedrichs splitting:
the mass flux carries its dissipation on the surface level H = h + b (so a
lake at rest produces identically zero interface fluxes), the momentum
fluxes on the momentum itself.  The source gradient uses a zero-viscosity
splitting whose nonlinear weights, computed from the composite flux, are
reused verbatim for the bathymetry reconstruction; that weight sharing is
what makes the equilibrium cancellation exact.
"""

from __future__ import annotations

import numpy as np

from . import _kernels as K
from .grid import Bathymetry, Grid, SolverError, State

#: linear (optimal) weights of the three substencils
LINEAR_WEIGHTS = (K.DLIN0, K.DLIN1, K.DLIN2)


def weno5_reconstruct(v, record_weights: bool = False):
    """Interface value at the right edge of the center of a 5-point stencil.

    Returns (value, weights) with weights None unless requested.
    """
    v = [float(x) for x in v]
    if len(v) != 5:
        raise ValueError("weno5_reconstruct expects exactly 5 point values")
    if not all(np.isfinite(x) for x in v):
        raise ValueError("non-finite value in WENO stencil")
    if record_weights:
        val, w0, w1, w2 = K.weno5_point_weights(*v)
        return val, (w0, w1, w2)
    return K.weno5_point(*v), None


def apply_weights(weights, v) -> float:
    """Combine the three substencil interface values with given weights."""
    w0, w1, w2 = (float(w) for w in weights)
    if abs((w0 + w1 + w2) - 1.0) > 1e-12:
        raise ValueError("weights must sum to 1 within 1e-12")
    v = [float(x) for x in v]
    if len(v) != 5:
        raise ValueError("apply_weights expects exactly 5 point values")
    return K.weno5_apply_point(w0, w1, w2, *v)


def _check_depth(h: np.ndarray) -> None:
    lo, _ = K.minmax_all(h)
    if lo <= 0.0:
        raise SolverError("nonpositive depth in flux stencil")


def _alpha_1d(state: State, fac: float, grid: Grid, global_alpha: bool) -> np.ndarray:
    out = np.empty(grid.nx + 1)
    if global_alpha:
        out[:] = np.max(np.abs(state.hu) / state.h + fac * np.sqrt(state.h))
        return out
    K.alpha_fields_1d(state.h, state.hu, fac, grid.ghost, grid.nx, out)
    return out


def _alphas_2d(state: State, fac: float, grid: Grid, global_alpha: bool):
    ax = np.empty((grid.nx + 1, grid.ny))
    ay = np.empty((grid.nx, grid.ny + 1))
    if global_alpha:
        c = fac * np.sqrt(state.h)
        ax[:] = np.max(np.abs(state.hu) / state.h + c)
        ay[:] = np.max(np.abs(state.hv) / state.h + c)
        return ax, ay
    K.alpha_fields_x_2d(state.h, state.hu, fac, grid.ghost, grid.nx, grid.ny, ax)
    K.alpha_fields_y_2d(state.h, state.hv, fac, grid.ghost, grid.nx, grid.ny, ay)
    return ax, ay


def div_lf_mass(state: State, bathy: Bathymetry, eps: float,
                capped: bool = True, global_alpha: bool = False) -> np.ndarray:
    """Conservative WENO5 divergence of the momentum with H-based dissipation.

    Ghosts of the state must be filled.  Returned full-shaped array holds the
    divergence at interior points and zeros in the ghost layers.
    """
    g = state.grid
    _check_depth(state.h)
    out = g.new_full()
    H = state.h + bathy.b
    fac = min(1.0, 1.0 / eps) if capped else 1.0 / eps
    if g.dim == 1:
        if global_alpha:
            alpha = _alpha_1d(state, fac, g, True)
            K.split_flux_div_1d(state.hu, H, alpha, g.ghost, g.nx, g.dx, out)
        else:
            K.lf_div_1d(state.hu, H, state.h, state.hu, fac, g.ghost, g.nx,
                        g.dx, out)
        return out
    if global_alpha:
        ax, ay = _alphas_2d(state, fac, g, True)
        K.split_flux_div_x_2d(state.hu, H, ax, g.ghost, g.nx, g.ny, g.dx, out)
        K.split_flux_div_y_2d(state.hv, H, ay, g.ghost, g.nx, g.ny, g.dy, out)
        return out
    K.lf_div_x_2d(state.hu, H, state.h, state.hu, fac, g.ghost, g.nx, g.ny,
                  g.dx, out)
    K.lf_div_y_2d(state.hv, H, state.h, state.hv, fac, g.ghost, g.nx, g.ny,
                  g.dy, out)
    return out


def div_lf_momentum(state: State, eps: float, capped: bool = True,
                    global_alpha: bool = False):
    """WENO5 divergence of the advective momentum tensor, per component.

    Returns the hu-equation array in 1D, or an (hu, hv) pair in 2D.
    Dissipation rides on the momentum components themselves.
    """
    g = state.grid
    h = state.h
    _check_depth(h)
    fac = min(1.0, 1.0 / eps) if capped else 1.0 / eps
    hu2 = state.hu * state.hu / h
    if g.dim == 1:
        out = g.new_full()
        if global_alpha:
            alpha = _alpha_1d(state, fac, g, True)
            K.split_flux_div_1d(hu2, state.hu, alpha, g.ghost, g.nx, g.dx, out)
        else:
            K.lf_div_1d(hu2, state.hu, state.h, state.hu, fac, g.ghost, g.nx,
                        g.dx, out)
        return out
    huv = state.hu * state.hv / h
    hv2 = state.hv * state.hv / h
    out_u = g.new_full()
    out_v = g.new_full()
    if global_alpha:
        ax, ay = _alphas_2d(state, fac, g, True)
        K.split_flux_div_x_2d(hu2, state.hu, ax, g.ghost, g.nx, g.ny, g.dx, out_u)
        K.split_flux_div_y_2d(huv, state.hu, ay, g.ghost, g.nx, g.ny, g.dy, out_u)
        K.split_flux_div_x_2d(huv, state.hv, ax, g.ghost, g.nx, g.ny, g.dx, out_v)
        K.split_flux_div_y_2d(hv2, state.hv, ay, g.ghost, g.nx, g.ny, g.dy, out_v)
        return out_u, out_v
    K.lf_div_x_2d(hu2, state.hu, state.h, state.hu, fac, g.ghost, g.nx, g.ny,
                  g.dx, out_u)
    K.lf_div_y_2d(huv, state.hu, state.h, state.hv, fac, g.ghost, g.nx, g.ny,
                  g.dy, out_u)
    K.lf_div_x_2d(huv, state.hv, state.h, state.hu, fac, g.ghost, g.nx, g.ny,
                  g.dx, out_v)
    K.lf_div_y_2d(hv2, state.hv, state.h, state.hv, fac, g.ghost, g.nx, g.ny,
                  g.dy, out_v)
    return out_u, out_v


def grad_w_source(H2: np.ndarray, Hbar: float, bathy: Bathymetry, eps: float):
    """Zero-viscosity WENO gradient of the split source.

    Computes, per direction, the flux difference of the composite flux
    G = Hbar*H2 + eps^2/2 * H2^2 - H2*b plus the pointwise product of H2
    with the flux difference of b reconstructed under the same weights.
    H2 ghosts must be filled.  Returns one array in 1D, (Sx, Sy) in 2D.
    """
    g = bathy.grid
    G = np.empty_like(H2)
    K.compose_g(H2, bathy.b, Hbar, eps * eps, G)
    if g.dim == 1:
        out = g.new_full()
        K.gradw_source_1d(G, bathy.b, H2, g.ghost, g.nx, g.dx, out)
        return out
    sx = g.new_full()
    sy = g.new_full()
    K.gradw_source_x_2d(G, bathy.b, H2, g.ghost, g.nx, g.ny, g.dx, sx)
    K.gradw_source_y_2d(G, bathy.b, H2, g.ghost, g.nx, g.ny, g.dy, sy)
    return sx, sy

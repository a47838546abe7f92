"""Fourth-order central differences and the compact variable-coefficient
diffusion operator.

The mixed derivative is composed dimension-by-dimension (x-derivative of the
y-derivative).  A second-order mode is kept for debugging; it swaps in the
classic 3-point second derivative and the 3x3 compact matrix, which unlike
the 4th-order one is exactly self-adjoint.
"""

from __future__ import annotations

import numpy as np

from . import _kernels as K
from .grid import Grid, SolverError, State

COMPACT4 = K.COMPACT4
COMPACT2 = K.COMPACT2


def second_deriv_c4(q: np.ndarray, grid: Grid, direction: str = "x") -> np.ndarray:
    """q_xx (or q_yy), 4th order; needs 2 ghost layers filled."""
    out = grid.new_full()
    if grid.dim == 1:
        if direction != "x":
            raise ValueError("1D grids only have an x direction")
        K.deriv2_c4_1d(q, grid.ghost, grid.nx, grid.dx, out)
        return out
    if direction == "x":
        K.deriv2_c4_x_2d(q, grid.ghost, grid.nx, grid.ny, grid.dx, out)
    elif direction == "y":
        K.deriv2_c4_y_2d(q, grid.ghost, grid.nx, grid.ny, grid.dy, out)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return out


def first_deriv_c4(q: np.ndarray, grid: Grid, direction: str = "x") -> np.ndarray:
    """Antisymmetric 4th-order first derivative; exact through degree 4."""
    out = grid.new_full()
    if grid.dim == 1:
        if direction != "x":
            raise ValueError("1D grids only have an x direction")
        K.deriv1_c4_1d(q, grid.ghost, grid.nx, grid.dx, out)
        return out
    if direction == "x":
        K.deriv1_c4_x_of(q, grid.ghost, grid.nx, grid.ny, grid.dx, 1.0, out)
    elif direction == "y":
        tmp = grid.new_full()
        K.deriv1_c4_y_2d_ext(q, grid.ghost, grid.nx, grid.ny, grid.dy, tmp)
        grid.interior(out)[:] = grid.interior(tmp)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return out


def div_tensor_c(state: State, fourth: bool = True) -> np.ndarray:
    """Double divergence of the advective momentum tensor:
    (hu^2)_xx in 1D, (hu^2)_xx + 2(huv)_xy + (hv^2)_yy in 2D."""
    g = state.grid
    h = state.h
    if K.minmax_all(h)[0] <= 0.0:
        raise SolverError("nonpositive depth in tensor stencil")
    out = g.new_full()
    hu2 = state.hu * state.hu / h
    if g.dim == 1:
        if fourth:
            K.deriv2_c4_1d(hu2, g.ghost, g.nx, g.dx, out)
        else:
            _deriv2_c2_1d(hu2, g, out)
        return out
    hv2 = state.hv * state.hv / h
    huv = state.hu * state.hv / h
    if fourth:
        K.deriv2_c4_x_2d(hu2, g.ghost, g.nx, g.ny, g.dx, out)
        K.deriv2_c4_y_2d(hv2, g.ghost, g.nx, g.ny, g.dy, out)
        tmp = g.new_full()
        K.deriv1_c4_y_2d_ext(huv, g.ghost, g.nx, g.ny, g.dy, tmp)
        K.deriv1_c4_x_of(tmp, g.ghost, g.nx, g.ny, g.dx, 2.0, out)
    else:
        _div_tensor_c2_2d(hu2, huv, hv2, g, out)
    return out


def _deriv2_c2_1d(q, grid: Grid, out):
    g = grid.ghost
    i = slice(g, g + grid.nx)
    im = slice(g - 1, g + grid.nx - 1)
    ip = slice(g + 1, g + grid.nx + 1)
    out[i] += (q[ip] - 2.0 * q[i] + q[im]) / grid.dx**2


def _div_tensor_c2_2d(hu2, huv, hv2, grid: Grid, out):
    # the low-order form: 3-point second differences plus the wide cross
    # difference with the 1/(2 dx dy) factor
    g = grid.ghost
    i = slice(g, g + grid.nx)
    j = slice(g, g + grid.ny)
    im, ip = slice(g - 1, g + grid.nx - 1), slice(g + 1, g + grid.nx + 1)
    jm, jp = slice(g - 1, g + grid.ny - 1), slice(g + 1, g + grid.ny + 1)
    out[i, j] += (hu2[ip, j] - 2.0 * hu2[i, j] + hu2[im, j]) / grid.dx**2
    out[i, j] += (hv2[i, jp] - 2.0 * hv2[i, j] + hv2[i, jm]) / grid.dy**2
    out[i, j] += ((huv[ip, jp] - huv[im, jp]) - (huv[ip, jm] - huv[im, jm])) \
        / (2.0 * grid.dx * grid.dy)


def div_var_diffusion(a: np.ndarray, q: np.ndarray, grid: Grid,
                      fourth: bool = True) -> np.ndarray:
    """(a q_x)_x + (a q_y)_y via the compact bilinear stencil.

    a must be positive on every point the stencil touches; ghosts of both
    fields must be filled.
    """
    if K.minmax_all(a)[0] <= 0.0:
        raise SolverError("nonpositive coefficient in variable diffusion")
    out = grid.new_full()
    if grid.dim == 1:
        K.compact_div_1d(a, q, grid.ghost, grid.nx, grid.dx, fourth, out)
        return out
    K.compact_div_x_2d(a, q, grid.ghost, grid.nx, grid.ny, grid.dx, fourth, out)
    K.compact_div_y_2d(a, q, grid.ghost, grid.nx, grid.ny, grid.dy, fourth, out)
    return out

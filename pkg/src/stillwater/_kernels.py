"""Jitted low-level kernels.

Everything here is sequential and allocation-light; fastmath stays off so
that the equilibrium cancellations (split fluxes summing to zero on constant
surface data) survive floating point bit-for-bit.  Index conventions:

* full arrays carry `g` ghost layers per side; interior cell i lives at
  full index g+i,
* interface k (k = 0..n) sits between full indices g+k-1 and g+k,
* the viscosity coefficient alpha is fixed per interface, taken as the max
  of |u|+c over the union of both reconstruction stencils (6 points), so the
  plus and minus splits at one interface always share the same alpha.
"""

import numpy as np
from numba import njit

# LLVM fast-math subset for the WENO kernels: fused multiply-add and
# reciprocal rewrites only.  These are local pattern rewrites applied
# identically to identical expressions, so the exact negation symmetry of
# the two split reconstructions at an interface survives; reassociation is
# deliberately excluded because it may optimize the plus- and minus-side
# inline expansions differently and leak round-off into the equilibrium
# cancellation.  NaN/Inf semantics stay IEEE so blow-ups propagate.
FAST = {"contract", "arcp"}

# canonical Jiang-Shu constants for the fifth-order scheme
WENO_EPS = 1.0e-6
DLIN0 = 0.1
DLIN1 = 0.6
DLIN2 = 0.3

# compact variable-coefficient stencil (a(x) q_x)_x * dx^2; rows are
# a-offsets i-2..i+2, columns q-offsets
COMPACT4 = np.array([
    [-25.0 / 144.0, 1.0 / 3.0, -1.0 / 4.0, 1.0 / 9.0, -1.0 / 48.0],
    [1.0 / 6.0, 5.0 / 9.0, -1.0, 1.0 / 3.0, -1.0 / 18.0],
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [-1.0 / 18.0, 1.0 / 3.0, -1.0, 5.0 / 9.0, 1.0 / 6.0],
    [-1.0 / 48.0, 1.0 / 9.0, -1.0 / 4.0, 1.0 / 3.0, -25.0 / 144.0],
])

# second-order compact analogue on a 3x3 stencil
COMPACT2 = np.array([
    [0.5, -0.5, 0.0],
    [0.5, -1.0, 0.5],
    [0.0, -0.5, 0.5],
])


@njit(cache=True, fastmath=FAST, error_model="numpy", inline="always")
def _substencils(v0, v1, v2, v3, v4):
    s0 = (2.0 * v0 - 7.0 * v1 + 11.0 * v2) / 6.0
    s1 = (-v1 + 5.0 * v2 + 2.0 * v3) / 6.0
    s2 = (2.0 * v2 + 5.0 * v3 - v4) / 6.0
    return s0, s1, s2


@njit(cache=True, fastmath=FAST, error_model="numpy", inline="always")
def _weights(v0, v1, v2, v3, v4):
    b0 = 13.0 / 12.0 * (v0 - 2.0 * v1 + v2) ** 2 + 0.25 * (v0 - 4.0 * v1 + 3.0 * v2) ** 2
    b1 = 13.0 / 12.0 * (v1 - 2.0 * v2 + v3) ** 2 + 0.25 * (v1 - v3) ** 2
    b2 = 13.0 / 12.0 * (v2 - 2.0 * v3 + v4) ** 2 + 0.25 * (3.0 * v2 - 4.0 * v3 + v4) ** 2
    # d_k/(e+b_k)^2 normalized over a common denominator: one division total
    p0 = (WENO_EPS + b0) * (WENO_EPS + b0)
    p1 = (WENO_EPS + b1) * (WENO_EPS + b1)
    p2 = (WENO_EPS + b2) * (WENO_EPS + b2)
    a0 = DLIN0 * p1 * p2
    a1 = DLIN1 * p0 * p2
    a2 = DLIN2 * p0 * p1
    rsum = 1.0 / (a0 + a1 + a2)
    return a0 * rsum, a1 * rsum, a2 * rsum


@njit(cache=True, fastmath=FAST, error_model="numpy", inline="always")
def _weno5(v0, v1, v2, v3, v4):
    s0, s1, s2 = _substencils(v0, v1, v2, v3, v4)
    w0, w1, w2 = _weights(v0, v1, v2, v3, v4)
    return s1 + w0 * (s0 - s1) + w2 * (s2 - s1)


@njit(cache=True, fastmath=FAST, error_model="numpy")
def weno5_point(v0, v1, v2, v3, v4):
    """Left-biased interface value at the right edge of the center point."""
    return _weno5(v0, v1, v2, v3, v4)


@njit(cache=True, fastmath=FAST, error_model="numpy")
def weno5_point_weights(v0, v1, v2, v3, v4):
    w0, w1, w2 = _weights(v0, v1, v2, v3, v4)
    s0, s1, s2 = _substencils(v0, v1, v2, v3, v4)
    return s1 + w0 * (s0 - s1) + w2 * (s2 - s1), w0, w1, w2


@njit(cache=True, fastmath=FAST, error_model="numpy")
def weno5_apply_point(w0, w1, w2, v0, v1, v2, v3, v4):
    """Combine the three substencil values with externally given weights."""
    s0, s1, s2 = _substencils(v0, v1, v2, v3, v4)
    return s1 + w0 * (s0 - s1) + w2 * (s2 - s1)


# ---------------------------------------------------------------------------
# interface viscosity coefficients
# ---------------------------------------------------------------------------

@njit(cache=True, error_model="numpy")
def alpha_interfaces_1d(speed, g, n, out):
    # speed = |u| + c on the full array; out[k] over full indices g+k-3..g+k+2
    for k in range(n + 1):
        m = 0.0
        for ix in range(g + k - 3, g + k + 3):
            s = speed[ix]
            if s > m:
                m = s
        out[k] = m


@njit(cache=True, error_model="numpy")
def alpha_interfaces_x_2d(speed, g, nx, ny, out):
    for jj in range(ny):
        j = g + jj
        for k in range(nx + 1):
            m = 0.0
            for ix in range(g + k - 3, g + k + 3):
                s = speed[ix, j]
                if s > m:
                    m = s
            out[k, jj] = m


@njit(cache=True, error_model="numpy")
def alpha_interfaces_y_2d(speed, g, nx, ny, out):
    for ii in range(nx):
        i = g + ii
        for k in range(ny + 1):
            m = 0.0
            for jy in range(g + k - 3, g + k + 3):
                s = speed[i, jy]
                if s > m:
                    m = s
            out[ii, k] = m


# ---------------------------------------------------------------------------
# Lax-Friedrichs split-flux divergences (WENO5 both sides of each interface)
# ---------------------------------------------------------------------------

@njit(cache=True, fastmath=FAST, error_model="numpy", inline="always")
def _split_interface(f, s, a, c):
    """Numerical flux at the interface left of full cell index c (1D slice)."""
    p = _weno5(0.5 * (f[c - 3] + a * s[c - 3]),
               0.5 * (f[c - 2] + a * s[c - 2]),
               0.5 * (f[c - 1] + a * s[c - 1]),
               0.5 * (f[c] + a * s[c]),
               0.5 * (f[c + 1] + a * s[c + 1]))
    m = _weno5(0.5 * (f[c + 2] - a * s[c + 2]),
               0.5 * (f[c + 1] - a * s[c + 1]),
               0.5 * (f[c] - a * s[c]),
               0.5 * (f[c - 1] - a * s[c - 1]),
               0.5 * (f[c - 2] - a * s[c - 2]))
    return p + m


@njit(cache=True, fastmath=FAST, error_model="numpy")
def split_flux_div_1d(f, s, alpha, g, n, dx, out):
    """out[g+i] += (F[i+1] - F[i])/dx with F the split WENO interface flux
    of point values f, dissipation carried by s."""
    F = np.empty(n + 1)
    rdx = 1.0 / dx
    for k in range(n + 1):
        F[k] = _split_interface(f, s, alpha[k], g + k)
    for i in range(n):
        out[g + i] += (F[i + 1] - F[i]) * rdx


@njit(cache=True, fastmath=FAST, error_model="numpy")
def split_flux_div_x_2d(f, s, alpha, g, nx, ny, dx, out):
    F = np.empty(nx + 1)
    rdx = 1.0 / dx
    for jj in range(ny):
        j = g + jj
        for k in range(nx + 1):
            c = g + k
            a = alpha[k, jj]
            p = _weno5(0.5 * (f[c - 3, j] + a * s[c - 3, j]),
                       0.5 * (f[c - 2, j] + a * s[c - 2, j]),
                       0.5 * (f[c - 1, j] + a * s[c - 1, j]),
                       0.5 * (f[c, j] + a * s[c, j]),
                       0.5 * (f[c + 1, j] + a * s[c + 1, j]))
            m = _weno5(0.5 * (f[c + 2, j] - a * s[c + 2, j]),
                       0.5 * (f[c + 1, j] - a * s[c + 1, j]),
                       0.5 * (f[c, j] - a * s[c, j]),
                       0.5 * (f[c - 1, j] - a * s[c - 1, j]),
                       0.5 * (f[c - 2, j] - a * s[c - 2, j]))
            F[k] = p + m
        for i in range(nx):
            out[g + i, j] += (F[i + 1] - F[i]) * rdx


@njit(cache=True, fastmath=FAST, error_model="numpy")
def split_flux_div_y_2d(f, s, alpha, g, nx, ny, dy, out):
    F = np.empty(ny + 1)
    rdy = 1.0 / dy
    for ii in range(nx):
        i = g + ii
        for k in range(ny + 1):
            c = g + k
            a = alpha[ii, k]
            p = _weno5(0.5 * (f[i, c - 3] + a * s[i, c - 3]),
                       0.5 * (f[i, c - 2] + a * s[i, c - 2]),
                       0.5 * (f[i, c - 1] + a * s[i, c - 1]),
                       0.5 * (f[i, c] + a * s[i, c]),
                       0.5 * (f[i, c + 1] + a * s[i, c + 1]))
            m = _weno5(0.5 * (f[i, c + 2] - a * s[i, c + 2]),
                       0.5 * (f[i, c + 1] - a * s[i, c + 1]),
                       0.5 * (f[i, c] - a * s[i, c]),
                       0.5 * (f[i, c - 1] - a * s[i, c - 1]),
                       0.5 * (f[i, c - 2] - a * s[i, c - 2]))
            F[k] = p + m
        for i2 in range(ny):
            out[i, g + i2] += (F[i2 + 1] - F[i2]) * rdy


# ---------------------------------------------------------------------------
# zero-viscosity shared-weight gradient (composite flux + bathymetry term)
# ---------------------------------------------------------------------------

@njit(cache=True, fastmath=FAST, error_model="numpy", inline="always")
def _gradw_interface(Gf, bf, c):
    """Zero-viscosity interface values of G and b; the nonlinear weights are
    computed from G and reused verbatim for b (both split signs)."""
    g0 = 0.5 * Gf[c - 3]
    g1 = 0.5 * Gf[c - 2]
    g2 = 0.5 * Gf[c - 1]
    g3 = 0.5 * Gf[c]
    g4 = 0.5 * Gf[c + 1]
    w0, w1, w2 = _weights(g0, g1, g2, g3, g4)
    s0, s1, s2 = _substencils(g0, g1, g2, g3, g4)
    ghat = s1 + w0 * (s0 - s1) + w2 * (s2 - s1)
    t0, t1, t2 = _substencils(0.5 * bf[c - 3], 0.5 * bf[c - 2], 0.5 * bf[c - 1],
                              0.5 * bf[c], 0.5 * bf[c + 1])
    bhat = t1 + w0 * (t0 - t1) + w2 * (t2 - t1)
    # minus split, reversed stencil
    g0 = 0.5 * Gf[c + 2]
    g1 = 0.5 * Gf[c + 1]
    g2 = 0.5 * Gf[c]
    g3 = 0.5 * Gf[c - 1]
    g4 = 0.5 * Gf[c - 2]
    w0, w1, w2 = _weights(g0, g1, g2, g3, g4)
    s0, s1, s2 = _substencils(g0, g1, g2, g3, g4)
    ghat += s1 + w0 * (s0 - s1) + w2 * (s2 - s1)
    t0, t1, t2 = _substencils(0.5 * bf[c + 2], 0.5 * bf[c + 1], 0.5 * bf[c],
                              0.5 * bf[c - 1], 0.5 * bf[c - 2])
    bhat += t1 + w0 * (t0 - t1) + w2 * (t2 - t1)
    return ghat, bhat


@njit(cache=True, fastmath=FAST, error_model="numpy")
def gradw_source_1d(Gf, bf, H2, g, n, dx, out):
    """out[g+i] += d/dx of the composite flux plus H2 * d/dx of b-hat."""
    Gh = np.empty(n + 1)
    Bh = np.empty(n + 1)
    rdx = 1.0 / dx
    for k in range(n + 1):
        Gh[k], Bh[k] = _gradw_interface(Gf, bf, g + k)
    for i in range(n):
        c = g + i
        out[c] += (Gh[i + 1] - Gh[i]) * rdx + H2[c] * ((Bh[i + 1] - Bh[i]) * rdx)


@njit(cache=True, fastmath=FAST, error_model="numpy", inline="always")
def _gradw_interface_x(Gf, bf, c, j):
    g0 = 0.5 * Gf[c - 3, j]
    g1 = 0.5 * Gf[c - 2, j]
    g2 = 0.5 * Gf[c - 1, j]
    g3 = 0.5 * Gf[c, j]
    g4 = 0.5 * Gf[c + 1, j]
    w0, w1, w2 = _weights(g0, g1, g2, g3, g4)
    s0, s1, s2 = _substencils(g0, g1, g2, g3, g4)
    ghat = s1 + w0 * (s0 - s1) + w2 * (s2 - s1)
    t0, t1, t2 = _substencils(0.5 * bf[c - 3, j], 0.5 * bf[c - 2, j],
                              0.5 * bf[c - 1, j], 0.5 * bf[c, j], 0.5 * bf[c + 1, j])
    bhat = t1 + w0 * (t0 - t1) + w2 * (t2 - t1)
    g0 = 0.5 * Gf[c + 2, j]
    g1 = 0.5 * Gf[c + 1, j]
    g2 = 0.5 * Gf[c, j]
    g3 = 0.5 * Gf[c - 1, j]
    g4 = 0.5 * Gf[c - 2, j]
    w0, w1, w2 = _weights(g0, g1, g2, g3, g4)
    s0, s1, s2 = _substencils(g0, g1, g2, g3, g4)
    ghat += s1 + w0 * (s0 - s1) + w2 * (s2 - s1)
    t0, t1, t2 = _substencils(0.5 * bf[c + 2, j], 0.5 * bf[c + 1, j],
                              0.5 * bf[c, j], 0.5 * bf[c - 1, j], 0.5 * bf[c - 2, j])
    bhat += t1 + w0 * (t0 - t1) + w2 * (t2 - t1)
    return ghat, bhat


@njit(cache=True, fastmath=FAST, error_model="numpy")
def gradw_source_x_2d(Gf, bf, H2, g, nx, ny, dx, out):
    Gh = np.empty(nx + 1)
    Bh = np.empty(nx + 1)
    rdx = 1.0 / dx
    for jj in range(ny):
        j = g + jj
        for k in range(nx + 1):
            Gh[k], Bh[k] = _gradw_interface_x(Gf, bf, g + k, j)
        for i in range(nx):
            c = g + i
            out[c, j] += (Gh[i + 1] - Gh[i]) * rdx + H2[c, j] * ((Bh[i + 1] - Bh[i]) * rdx)


@njit(cache=True, fastmath=FAST, error_model="numpy", inline="always")
def _gradw_interface_y(Gf, bf, i, c):
    g0 = 0.5 * Gf[i, c - 3]
    g1 = 0.5 * Gf[i, c - 2]
    g2 = 0.5 * Gf[i, c - 1]
    g3 = 0.5 * Gf[i, c]
    g4 = 0.5 * Gf[i, c + 1]
    w0, w1, w2 = _weights(g0, g1, g2, g3, g4)
    s0, s1, s2 = _substencils(g0, g1, g2, g3, g4)
    ghat = s1 + w0 * (s0 - s1) + w2 * (s2 - s1)
    t0, t1, t2 = _substencils(0.5 * bf[i, c - 3], 0.5 * bf[i, c - 2],
                              0.5 * bf[i, c - 1], 0.5 * bf[i, c], 0.5 * bf[i, c + 1])
    bhat = t1 + w0 * (t0 - t1) + w2 * (t2 - t1)
    g0 = 0.5 * Gf[i, c + 2]
    g1 = 0.5 * Gf[i, c + 1]
    g2 = 0.5 * Gf[i, c]
    g3 = 0.5 * Gf[i, c - 1]
    g4 = 0.5 * Gf[i, c - 2]
    w0, w1, w2 = _weights(g0, g1, g2, g3, g4)
    s0, s1, s2 = _substencils(g0, g1, g2, g3, g4)
    ghat += s1 + w0 * (s0 - s1) + w2 * (s2 - s1)
    t0, t1, t2 = _substencils(0.5 * bf[i, c + 2], 0.5 * bf[i, c + 1],
                              0.5 * bf[i, c], 0.5 * bf[i, c - 1], 0.5 * bf[i, c - 2])
    bhat += t1 + w0 * (t0 - t1) + w2 * (t2 - t1)
    return ghat, bhat


@njit(cache=True, fastmath=FAST, error_model="numpy")
def gradw_source_y_2d(Gf, bf, H2, g, nx, ny, dy, out):
    Gh = np.empty(ny + 1)
    Bh = np.empty(ny + 1)
    rdy = 1.0 / dy
    for ii in range(nx):
        i = g + ii
        for k in range(ny + 1):
            Gh[k], Bh[k] = _gradw_interface_y(Gf, bf, i, g + k)
        for i2 in range(ny):
            c = g + i2
            out[i, c] += (Gh[i2 + 1] - Gh[i2]) * rdy + H2[i, c] * ((Bh[i2 + 1] - Bh[i2]) * rdy)


# ---------------------------------------------------------------------------
# central stencils
# ---------------------------------------------------------------------------

@njit(cache=True, error_model="numpy")
def deriv2_c4_1d(q, g, n, dx, out):
    rc2 = 1.0 / (12.0 * dx * dx)
    for i in range(n):
        c = g + i
        out[c] += (-q[c - 2] + 16.0 * q[c - 1] - 30.0 * q[c]
                   + 16.0 * q[c + 1] - q[c + 2]) * rc2


@njit(cache=True, error_model="numpy")
def deriv1_c4_1d(q, g, n, dx, out):
    rc1 = 1.0 / (12.0 * dx)
    for i in range(n):
        c = g + i
        out[c] += (q[c - 2] - 8.0 * q[c - 1] + 8.0 * q[c + 1] - q[c + 2]) * rc1


@njit(cache=True, error_model="numpy")
def deriv2_c4_x_2d(q, g, nx, ny, dx, out):
    rc2 = 1.0 / (12.0 * dx * dx)
    for ii in range(nx):
        i = g + ii
        for jj in range(ny):
            j = g + jj
            out[i, j] += (-q[i - 2, j] + 16.0 * q[i - 1, j] - 30.0 * q[i, j]
                          + 16.0 * q[i + 1, j] - q[i + 2, j]) * rc2


@njit(cache=True, error_model="numpy")
def deriv2_c4_y_2d(q, g, nx, ny, dy, out):
    rc2 = 1.0 / (12.0 * dy * dy)
    for ii in range(nx):
        i = g + ii
        for jj in range(ny):
            j = g + jj
            out[i, j] += (-q[i, j - 2] + 16.0 * q[i, j - 1] - 30.0 * q[i, j]
                          + 16.0 * q[i, j + 1] - q[i, j + 2]) * rc2


@njit(cache=True, error_model="numpy")
def deriv1_c4_y_2d_ext(q, g, nx, ny, dy, out):
    # inner pass of the mixed derivative: d/dy, written on an i-range wide
    # enough (full array) for a following x-derivative at the interior
    rc1 = 1.0 / (12.0 * dy)
    for i in range(nx + 2 * g):
        for j in range(g, g + ny):
            out[i, j] = (q[i, j - 2] - 8.0 * q[i, j - 1]
                         + 8.0 * q[i, j + 1] - q[i, j + 2]) * rc1


@njit(cache=True, error_model="numpy")
def deriv1_c4_x_of(q, g, nx, ny, dx, scale, out):
    # outer pass of the mixed derivative: accumulate scale * d/dx at interior
    rc1 = scale / (12.0 * dx)
    for i in range(g, g + nx):
        for j in range(g, g + ny):
            out[i, j] += (q[i - 2, j] - 8.0 * q[i - 1, j]
                          + 8.0 * q[i + 1, j] - q[i + 2, j]) * rc1


@njit(cache=True, error_model="numpy")
def compact_div_1d(a, q, g, n, dx, fourth, out):
    rdx2 = 1.0 / (dx * dx)
    for i in range(n):
        c = g + i
        acc = 0.0
        if fourth:
            for ro in range(-2, 3):
                av = a[c + ro]
                for co in range(-2, 3):
                    acc += av * COMPACT4[ro + 2, co + 2] * q[c + co]
        else:
            for ro in range(-1, 2):
                av = a[c + ro]
                for co in range(-1, 2):
                    acc += av * COMPACT2[ro + 1, co + 1] * q[c + co]
        out[c] += acc * rdx2


@njit(cache=True, error_model="numpy")
def compact_div_x_2d(a, q, g, nx, ny, dx, fourth, out):
    rdx2 = 1.0 / (dx * dx)
    for ii in range(nx):
        i = g + ii
        for jj in range(ny):
            j = g + jj
            acc = 0.0
            if fourth:
                for ro in range(-2, 3):
                    av = a[i + ro, j]
                    for co in range(-2, 3):
                        acc += av * COMPACT4[ro + 2, co + 2] * q[i + co, j]
            else:
                for ro in range(-1, 2):
                    av = a[i + ro, j]
                    for co in range(-1, 2):
                        acc += av * COMPACT2[ro + 1, co + 1] * q[i + co, j]
            out[i, j] += acc * rdx2


@njit(cache=True, error_model="numpy")
def compact_div_y_2d(a, q, g, nx, ny, dy, fourth, out):
    rdy2 = 1.0 / (dy * dy)
    for ii in range(nx):
        i = g + ii
        for jj in range(ny):
            j = g + jj
            acc = 0.0
            if fourth:
                for ro in range(-2, 3):
                    av = a[i, j + ro]
                    for co in range(-2, 3):
                        acc += av * COMPACT4[ro + 2, co + 2] * q[i, j + co]
            else:
                for ro in range(-1, 2):
                    av = a[i, j + ro]
                    for co in range(-1, 2):
                        acc += av * COMPACT2[ro + 1, co + 1] * q[i, j + co]
            out[i, j] += acc * rdy2


# ---------------------------------------------------------------------------
# Helmholtz operator: closure fills and matrix-free application
# ---------------------------------------------------------------------------

@njit(cache=True, error_model="numpy")
def closure_fill_1d(v, g, n, periodic):
    # periodic wrap or even (Neumann) mirror about the boundary faces
    if periodic:
        for t in range(g):
            v[t] = v[n + t]
            v[n + g + t] = v[g + t]
    else:
        for t in range(g):
            v[g - 1 - t] = v[g + t]
            v[n + g + t] = v[n + g - 1 - t]


@njit(cache=True, error_model="numpy")
def closure_fill_2d(v, g, nx, ny, periodic_x, periodic_y):
    ntot_y = ny + 2 * g
    if periodic_x:
        for t in range(g):
            for j in range(ntot_y):
                v[t, j] = v[nx + t, j]
                v[nx + g + t, j] = v[g + t, j]
    else:
        for t in range(g):
            for j in range(ntot_y):
                v[g - 1 - t, j] = v[g + t, j]
                v[nx + g + t, j] = v[nx + g - 1 - t, j]
    ntot_x = nx + 2 * g
    if periodic_y:
        for t in range(g):
            for i in range(ntot_x):
                v[i, t] = v[i, ny + t]
                v[i, ny + g + t] = v[i, g + t]
    else:
        for t in range(g):
            for i in range(ntot_x):
                v[i, g - 1 - t] = v[i, g + t]
                v[i, ny + g + t] = v[i, ny + g - 1 - t]


@njit(cache=True, error_model="numpy")
def helm_apply_1d(vint, coeff, eps2, tau2, g, n, dx, periodic, fourth, scratch, out):
    """out = eps2*v - tau2*(coeff v_x)_x on the interior, matrix-free."""
    for i in range(n):
        scratch[g + i] = vint[i]
    closure_fill_1d(scratch, g, n, periodic)
    rdx2 = 1.0 / (dx * dx)
    for i in range(n):
        c = g + i
        acc = 0.0
        if fourth:
            for ro in range(-2, 3):
                av = coeff[c + ro]
                for co in range(-2, 3):
                    acc += av * COMPACT4[ro + 2, co + 2] * scratch[c + co]
        else:
            for ro in range(-1, 2):
                av = coeff[c + ro]
                for co in range(-1, 2):
                    acc += av * COMPACT2[ro + 1, co + 1] * scratch[c + co]
        out[i] = eps2 * vint[i] - tau2 * (acc * rdx2)


@njit(cache=True, error_model="numpy")
def helm_apply_2d(vint, coeff, eps2, tau2, g, nx, ny, dx, dy,
                  periodic_x, periodic_y, fourth, scratch, out):
    for i in range(nx):
        for j in range(ny):
            scratch[g + i, g + j] = vint[i, j]
    closure_fill_2d(scratch, g, nx, ny, periodic_x, periodic_y)
    rdx2 = 1.0 / (dx * dx)
    rdy2 = 1.0 / (dy * dy)
    for ii in range(nx):
        i = g + ii
        for jj in range(ny):
            j = g + jj
            accx = 0.0
            accy = 0.0
            if fourth:
                for ro in range(-2, 3):
                    avx = coeff[i + ro, j]
                    avy = coeff[i, j + ro]
                    for co in range(-2, 3):
                        m = COMPACT4[ro + 2, co + 2]
                        accx += avx * m * scratch[i + co, j]
                        accy += avy * m * scratch[i, j + co]
            else:
                for ro in range(-1, 2):
                    avx = coeff[i + ro, j]
                    avy = coeff[i, j + ro]
                    for co in range(-1, 2):
                        m = COMPACT2[ro + 1, co + 1]
                        accx += avx * m * scratch[i + co, j]
                        accy += avy * m * scratch[i, j + co]
            out[ii, jj] = eps2 * vint[ii, jj] - tau2 * (accx * rdx2 + accy * rdy2)


@njit(cache=True, error_model="numpy")
def helm_diag_1d(coeff, eps2, tau2, g, n, dx, fourth, out):
    """Diagonal of the Helmholtz operator, for Jacobi preconditioning."""
    rdx2 = 1.0 / (dx * dx)
    for i in range(n):
        c = g + i
        acc = 0.0
        if fourth:
            for ro in range(-2, 3):
                acc += coeff[c + ro] * COMPACT4[ro + 2, 2]
        else:
            for ro in range(-1, 2):
                acc += coeff[c + ro] * COMPACT2[ro + 1, 1]
        out[i] = eps2 - tau2 * (acc * rdx2)


@njit(cache=True, error_model="numpy")
def helm_diag_2d(coeff, eps2, tau2, g, nx, ny, dx, dy, fourth, out):
    rdx2 = 1.0 / (dx * dx)
    rdy2 = 1.0 / (dy * dy)
    for ii in range(nx):
        i = g + ii
        for jj in range(ny):
            j = g + jj
            accx = 0.0
            accy = 0.0
            if fourth:
                for ro in range(-2, 3):
                    accx += coeff[i + ro, j] * COMPACT4[ro + 2, 2]
                    accy += coeff[i, j + ro] * COMPACT4[ro + 2, 2]
            else:
                for ro in range(-1, 2):
                    accx += coeff[i + ro, j] * COMPACT2[ro + 1, 1]
                    accy += coeff[i, j + ro] * COMPACT2[ro + 1, 1]
            out[ii, jj] = eps2 - tau2 * (accx * rdx2 + accy * rdy2)


# ---------------------------------------------------------------------------
# fully jitted PCG solves (status: 0 converged, 1 cap exceeded, 2 stalled)
# ---------------------------------------------------------------------------

@njit(cache=True, error_model="numpy", inline="always")
def _l2(v):
    acc = 0.0
    for i in range(v.size):
        acc += v.flat[i] * v.flat[i]
    return np.sqrt(acc)


@njit(cache=True, error_model="numpy", inline="always")
def _vdot(a, b):
    acc = 0.0
    for i in range(a.size):
        acc += a.flat[i] * b.flat[i]
    return acc


@njit(cache=True, error_model="numpy", inline="always")
def _demean(v):
    m = 0.0
    for i in range(v.size):
        m += v.flat[i]
    m /= v.size
    for i in range(v.size):
        v.flat[i] -= m


@njit(cache=True, error_model="numpy")
def pcg_1d(rhs, x, coeff, eps2, tau2, g, n, dx, periodic, fourth,
           tol, maxiter, singular):
    scratch = np.zeros(n + 2 * g)
    av = np.empty(n)
    diag = np.empty(n)
    helm_diag_1d(coeff, eps2, tau2, g, n, dx, fourth, diag)
    for i in range(n):
        if diag[i] <= 0.0:
            return 0, np.inf, 2
    rdiag = 1.0 / diag
    bnorm = _l2(rhs)
    target = tol * bnorm
    iters = 0
    if singular:
        _demean(x)
    helm_apply_1d(x, coeff, eps2, tau2, g, n, dx, periodic, fourth, scratch, av)
    r = rhs - av
    if singular:
        _demean(r)
    true_res = _l2(r)
    while true_res > target:
        if iters >= maxiter:
            return iters, true_res / bnorm, 1
        iters_at_start = iters
        z = r * rdiag
        p = z.copy()
        rz = _vdot(r, z)
        while iters < maxiter:
            helm_apply_1d(p, coeff, eps2, tau2, g, n, dx, periodic, fourth,
                          scratch, av)
            pap = _vdot(p, av)
            if pap <= 0.0:
                break
            a_step = rz / pap
            rn2 = 0.0
            for i in range(n):
                x[i] += a_step * p[i]
                r[i] -= a_step * av[i]
                rn2 += r[i] * r[i]
            iters += 1
            if np.sqrt(rn2) <= 0.5 * target:
                break
            rz_new = 0.0
            for i in range(n):
                z[i] = r[i] * rdiag[i]
                rz_new += r[i] * z[i]
            beta = rz_new / rz
            for i in range(n):
                p[i] = z[i] + beta * p[i]
            rz = rz_new
        if singular:
            _demean(x)
        prev_res = true_res
        helm_apply_1d(x, coeff, eps2, tau2, g, n, dx, periodic, fourth, scratch, av)
        r = rhs - av
        if singular:
            _demean(r)
        true_res = _l2(r)
        if true_res > target and (iters == iters_at_start or true_res > 0.5 * prev_res):
            return iters, true_res / bnorm, 2
    return iters, true_res / bnorm, 0


@njit(cache=True, error_model="numpy")
def pcg_2d(rhs, x, coeff, eps2, tau2, g, nx, ny, dx, dy, periodic_x,
           periodic_y, fourth, tol, maxiter, singular):
    scratch = np.zeros((nx + 2 * g, ny + 2 * g))
    av = np.empty((nx, ny))
    diag = np.empty((nx, ny))
    helm_diag_2d(coeff, eps2, tau2, g, nx, ny, dx, dy, fourth, diag)
    for i in range(nx):
        for j in range(ny):
            if diag[i, j] <= 0.0:
                return 0, np.inf, 2
    rdiag = 1.0 / diag
    bnorm = _l2(rhs)
    target = tol * bnorm
    iters = 0
    if singular:
        _demean(x)
    helm_apply_2d(x, coeff, eps2, tau2, g, nx, ny, dx, dy, periodic_x,
                  periodic_y, fourth, scratch, av)
    r = rhs - av
    if singular:
        _demean(r)
    true_res = _l2(r)
    while true_res > target:
        if iters >= maxiter:
            return iters, true_res / bnorm, 1
        iters_at_start = iters
        z = r * rdiag
        p = z.copy()
        rz = _vdot(r, z)
        while iters < maxiter:
            helm_apply_2d(p, coeff, eps2, tau2, g, nx, ny, dx, dy, periodic_x,
                          periodic_y, fourth, scratch, av)
            pap = _vdot(p, av)
            if pap <= 0.0:
                break
            a_step = rz / pap
            rn2 = 0.0
            for i in range(nx):
                for j in range(ny):
                    x[i, j] += a_step * p[i, j]
                    r[i, j] -= a_step * av[i, j]
                    rn2 += r[i, j] * r[i, j]
            iters += 1
            if np.sqrt(rn2) <= 0.5 * target:
                break
            rz_new = 0.0
            for i in range(nx):
                for j in range(ny):
                    z[i, j] = r[i, j] * rdiag[i, j]
                    rz_new += r[i, j] * z[i, j]
            beta = rz_new / rz
            for i in range(nx):
                for j in range(ny):
                    p[i, j] = z[i, j] + beta * p[i, j]
            rz = rz_new
        if singular:
            _demean(x)
        prev_res = true_res
        helm_apply_2d(x, coeff, eps2, tau2, g, nx, ny, dx, dy, periodic_x,
                      periodic_y, fourth, scratch, av)
        r = rhs - av
        if singular:
            _demean(r)
        true_res = _l2(r)
        if true_res > target and (iters == iters_at_start or true_res > 0.5 * prev_res):
            return iters, true_res / bnorm, 2
    return iters, true_res / bnorm, 0


# fused per-interface viscosity coefficients straight from the fields
# (speed |u|+c evaluated once per point, then window maxima per interface)

@njit(cache=True, error_model="numpy")
def alpha_fields_1d(h, hm, fac, g, n, out):
    speed = np.empty(n + 2 * g)
    for ix in range(g - 3, n + g + 3):
        speed[ix] = abs(hm[ix]) / h[ix] + fac * np.sqrt(h[ix])
    for k in range(n + 1):
        m = 0.0
        for ix in range(g + k - 3, g + k + 3):
            if speed[ix] > m:
                m = speed[ix]
        out[k] = m


@njit(cache=True, error_model="numpy")
def alpha_fields_x_2d(h, hm, fac, g, nx, ny, out):
    speed = np.empty(nx + 2 * g)
    for jj in range(ny):
        j = g + jj
        for ix in range(g - 3, nx + g + 3):
            speed[ix] = abs(hm[ix, j]) / h[ix, j] + fac * np.sqrt(h[ix, j])
        for k in range(nx + 1):
            m = 0.0
            for ix in range(g + k - 3, g + k + 3):
                if speed[ix] > m:
                    m = speed[ix]
            out[k, jj] = m


@njit(cache=True, error_model="numpy")
def alpha_fields_y_2d(h, hm, fac, g, nx, ny, out):
    speed = np.empty(ny + 2 * g)
    for ii in range(nx):
        i = g + ii
        for jy in range(g - 3, ny + g + 3):
            speed[jy] = abs(hm[i, jy]) / h[i, jy] + fac * np.sqrt(h[i, jy])
        for k in range(ny + 1):
            m = 0.0
            for jy in range(g + k - 3, g + k + 3):
                if speed[jy] > m:
                    m = speed[jy]
            out[ii, k] = m


@njit(cache=True, error_model="numpy")
def axpy(out, a, x):
    """out += a * x elementwise (used by the stage accumulations)."""
    for i in range(out.size):
        out.flat[i] += a * x.flat[i]


# fused per-stage field assembly (cuts numpy temporaries in the hot loop)

@njit(cache=True, error_model="numpy")
def compose_g(H2, b, hbar, eps2, out):
    """Composite source flux hbar*H2 + eps2/2*H2^2 - H2*b."""
    for i in range(out.size):
        h2 = H2.flat[i]
        out.flat[i] = hbar * h2 + 0.5 * eps2 * h2 * h2 - h2 * b.flat[i]


@njit(cache=True, error_model="numpy")
def compose_hprov(H2, b, hbar, eps2, out):
    """Depth consistent with the elliptic relation: (hbar - b) + eps2*H2."""
    for i in range(out.size):
        out.flat[i] = (hbar - b.flat[i]) + eps2 * H2.flat[i]


@njit(cache=True, error_model="numpy")
def compose_rhs_1d(h_s, b, dmass, dtens, hbar, tau, g, n, out):
    for i in range(n):
        c = g + i
        out[i] = ((h_s[c] + b[c]) - hbar) - tau * (dmass[c] - tau * dtens[c])


@njit(cache=True, error_model="numpy")
def compose_rhs_2d(h_s, b, dmass, dtens, hbar, tau, g, nx, ny, out):
    for i in range(nx):
        for j in range(ny):
            ci = g + i
            cj = g + j
            out[i, j] = ((h_s[ci, cj] + b[ci, cj]) - hbar) \
                - tau * (dmass[ci, cj] - tau * dtens[ci, cj])


# fused sweeps: per-interface alpha (union-stencil window max of |u|+c)
# computed inline, then the split WENO interface flux and its divergence

@njit(cache=True, fastmath=FAST, error_model="numpy")
def lf_div_1d(f, s, h, hm, fac, g, n, dx, out):
    speed = np.empty(n + 2 * g)
    for ix in range(g - 3, n + g + 3):
        speed[ix] = abs(hm[ix]) / h[ix] + fac * np.sqrt(h[ix])
    F = np.empty(n + 1)
    rdx = 1.0 / dx
    for k in range(n + 1):
        a = 0.0
        for ix in range(g + k - 3, g + k + 3):
            if speed[ix] > a:
                a = speed[ix]
        F[k] = _split_interface(f, s, a, g + k)
    for i in range(n):
        out[g + i] += (F[i + 1] - F[i]) * rdx


@njit(cache=True, fastmath=FAST, error_model="numpy")
def lf_div_x_2d(f, s, h, hm, fac, g, nx, ny, dx, out):
    speed = np.empty(nx + 2 * g)
    F = np.empty(nx + 1)
    rdx = 1.0 / dx
    for jj in range(ny):
        j = g + jj
        for ix in range(g - 3, nx + g + 3):
            speed[ix] = abs(hm[ix, j]) / h[ix, j] + fac * np.sqrt(h[ix, j])
        for k in range(nx + 1):
            a = 0.0
            for ix in range(g + k - 3, g + k + 3):
                if speed[ix] > a:
                    a = speed[ix]
            c = g + k
            p = _weno5(0.5 * (f[c - 3, j] + a * s[c - 3, j]),
                       0.5 * (f[c - 2, j] + a * s[c - 2, j]),
                       0.5 * (f[c - 1, j] + a * s[c - 1, j]),
                       0.5 * (f[c, j] + a * s[c, j]),
                       0.5 * (f[c + 1, j] + a * s[c + 1, j]))
            m = _weno5(0.5 * (f[c + 2, j] - a * s[c + 2, j]),
                       0.5 * (f[c + 1, j] - a * s[c + 1, j]),
                       0.5 * (f[c, j] - a * s[c, j]),
                       0.5 * (f[c - 1, j] - a * s[c - 1, j]),
                       0.5 * (f[c - 2, j] - a * s[c - 2, j]))
            F[k] = p + m
        for i in range(nx):
            out[g + i, j] += (F[i + 1] - F[i]) * rdx


@njit(cache=True, fastmath=FAST, error_model="numpy")
def lf_div_y_2d(f, s, h, hm, fac, g, nx, ny, dy, out):
    speed = np.empty(ny + 2 * g)
    F = np.empty(ny + 1)
    rdy = 1.0 / dy
    for ii in range(nx):
        i = g + ii
        for jy in range(g - 3, ny + g + 3):
            speed[jy] = abs(hm[i, jy]) / h[i, jy] + fac * np.sqrt(h[i, jy])
        for k in range(ny + 1):
            a = 0.0
            for jy in range(g + k - 3, g + k + 3):
                if speed[jy] > a:
                    a = speed[jy]
            c = g + k
            p = _weno5(0.5 * (f[i, c - 3] + a * s[i, c - 3]),
                       0.5 * (f[i, c - 2] + a * s[i, c - 2]),
                       0.5 * (f[i, c - 1] + a * s[i, c - 1]),
                       0.5 * (f[i, c] + a * s[i, c]),
                       0.5 * (f[i, c + 1] + a * s[i, c + 1]))
            m = _weno5(0.5 * (f[i, c + 2] - a * s[i, c + 2]),
                       0.5 * (f[i, c + 1] - a * s[i, c + 1]),
                       0.5 * (f[i, c] - a * s[i, c]),
                       0.5 * (f[i, c - 1] - a * s[i, c - 1]),
                       0.5 * (f[i, c - 2] - a * s[i, c - 2]))
            F[k] = p + m
        for i2 in range(ny):
            out[i, g + i2] += (F[i2 + 1] - F[i2]) * rdy


@njit(cache=True, error_model="numpy")
def wave_speed_max_1d(h, hm, fac, g, n):
    m = 0.0
    for i in range(g, g + n):
        s = abs(hm[i]) / h[i] + fac * np.sqrt(h[i])
        if s > m:
            m = s
    return m


@njit(cache=True, error_model="numpy")
def wave_speed_max_2d(h, hu, hv, fac, g, nx, ny):
    lam = 0.0
    ax = 0.0
    ay = 0.0
    for i in range(g, g + nx):
        for j in range(g, g + ny):
            hij = h[i, j]
            c = fac * np.sqrt(hij)
            u = abs(hu[i, j]) / hij
            v = abs(hv[i, j]) / hij
            sx = u + c
            sy = v + c
            sl = np.sqrt(u * u + v * v) + c
            if sx > ax:
                ax = sx
            if sy > ay:
                ay = sy
            if sl > lam:
                lam = sl
    return lam, ax, ay


# scalar reductions without numpy dispatch overhead (guards run every stage)

@njit(cache=True, error_model="numpy")
def min_interior_1d(a, g, n):
    m = a[g]
    for i in range(g, g + n):
        if a[i] < m:
            m = a[i]
    return m


@njit(cache=True, error_model="numpy")
def min_interior_2d(a, g, nx, ny):
    m = a[g, g]
    for i in range(g, g + nx):
        for j in range(g, g + ny):
            if a[i, j] < m:
                m = a[i, j]
    return m


@njit(cache=True, error_model="numpy")
def minmax_all(a):
    lo = a.flat[0]
    hi = a.flat[0]
    for i in range(a.size):
        v = a.flat[i]
        if v < lo:
            lo = v
        if v > hi:
            hi = v
    return lo, hi


@njit(cache=True, error_model="numpy")
def absmax_all(a):
    m = 0.0
    for i in range(a.size):
        v = abs(a.flat[i])
        if v > m:
            m = v
    return m


@njit(cache=True, error_model="numpy")
def mean_interior_1d(a, g, n):
    acc = 0.0
    for i in range(g, g + n):
        acc += a[i]
    return acc / n


@njit(cache=True, error_model="numpy")
def mean_interior_2d(a, g, nx, ny):
    acc = 0.0
    for i in range(g, g + nx):
        for j in range(g, g + ny):
            acc += a[i, j]
    return acc / (nx * ny)

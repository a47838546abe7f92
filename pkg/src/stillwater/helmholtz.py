"""Assembly and solution of the stage Helmholtz equation
eps^2 v - tau^2 div(h_E grad v) = rhs for the surface perturbation.

The operator is applied matrix-free through the compact stencils; the solver
is Jacobi-preconditioned conjugate gradients.  Because the 4th-order compact
operator is only approximately self-adjoint for variable coefficients, the
loop recomputes the true residual periodically and restarts on stagnation,
so the returned field always honors the relative-residual contract.

Solution and right-hand-side vectors are interior-shaped arrays; `expand`
turns a solution back into a full ghosted field under the solver closure
(periodic wrap or Neumann mirror).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .grid import Bathymetry, BoundarySpec, Grid, SolverError, State, spatial_mean
from .stencils import div_tensor_c
from .weno import div_lf_mass

#: below this eps^2 the periodic operator is treated as singular with a
#: constant nullspace and everything is projected to zero mean
EPS2_SINGULAR = 1e-14


def default_max_iter(n_unknowns: int, dim: int) -> int:
    return int(min(10.0 * n_unknowns ** (1.0 / dim) * 50.0, 1e5))


@dataclass
class HelmholtzSystem:
    """Matrix-free eps^2 I - tau^2 div(coeff grad .) with boundary closure."""

    grid: Grid
    eps2: float
    tau: float
    coeff: np.ndarray            # positive field incl. ghosts, already filled
    periodic_x: bool
    periodic_y: bool = False
    tol: float = 1e-12
    max_iter: int = 0
    fourth: bool = True
    # diagnostics of the most recent solve
    last_iterations: int = field(default=0, repr=False)
    last_residual: float = field(default=0.0, repr=False)
    coeff_min: float = field(default=0.0, repr=False)
    coeff_max: float = field(default=0.0, repr=False)

    def __post_init__(self):
        self.coeff_min, self.coeff_max = (float(v) for v in K.minmax_all(self.coeff))
        if self.coeff_min <= 0.0:
            raise SolverError("Helmholtz coefficient must be positive everywhere")
        if self.eps2 < 0.0:
            raise SolverError("eps2 must be >= 0")
        if self.max_iter <= 0:
            n = self.grid.nx * (self.grid.ny if self.grid.dim == 2 else 1)
            self.max_iter = default_max_iter(n, self.grid.dim)

    @classmethod
    def from_state(cls, grid: Grid, coeff: np.ndarray, eps: float, tau: float,
                   bc: BoundarySpec, tol: float = 1e-12, fourth: bool = True):
        return cls(grid, eps * eps, tau, coeff, bc.periodic_x(),
                   bc.periodic_y(), tol=tol, fourth=fourth)

    @property
    def singular(self) -> bool:
        per = self.periodic_x and (self.grid.dim == 1 or self.periodic_y)
        return self.eps2 < EPS2_SINGULAR and per

    def _scratch(self) -> np.ndarray:
        return self.grid.new_full()


def apply_operator(sys: HelmholtzSystem, v: np.ndarray,
                   scratch: np.ndarray | None = None,
                   out: np.ndarray | None = None) -> np.ndarray:
    """eps^2 v - tau^2 div(coeff grad v) on interior-shaped v."""
    g = sys.grid
    if scratch is None:
        scratch = sys._scratch()
    if out is None:
        out = np.empty_like(v)
    t2 = sys.tau * sys.tau
    if g.dim == 1:
        K.helm_apply_1d(v, sys.coeff, sys.eps2, t2, g.ghost, g.nx, g.dx,
                        sys.periodic_x, sys.fourth, scratch, out)
    else:
        K.helm_apply_2d(v, sys.coeff, sys.eps2, t2, g.ghost, g.nx, g.ny,
                        g.dx, g.dy, sys.periodic_x, sys.periodic_y,
                        sys.fourth, scratch, out)
    return out


def operator_diagonal(sys: HelmholtzSystem) -> np.ndarray:
    g = sys.grid
    t2 = sys.tau * sys.tau
    if g.dim == 1:
        out = np.empty(g.nx)
        K.helm_diag_1d(sys.coeff, sys.eps2, t2, g.ghost, g.nx, g.dx, sys.fourth, out)
    else:
        out = np.empty((g.nx, g.ny))
        K.helm_diag_2d(sys.coeff, sys.eps2, t2, g.ghost, g.nx, g.ny,
                       g.dx, g.dy, sys.fourth, out)
    return out


def _stencil_symbol(theta, dx: float, fourth: bool):
    """Nonnegative Fourier symbol of -(q_x)_x for the compact stencil with
    unit coefficient (used to build the spectral preconditioner)."""
    if fourth:
        return (30.0 - 32.0 * np.cos(theta) + 2.0 * np.cos(2.0 * theta)) / (12.0 * dx * dx)
    return (2.0 - 2.0 * np.cos(theta)) / (dx * dx)


#: Jacobi-to-spectral switch: estimated diagonal conditioning above which the
#: FFT preconditioner wins (the Jacobi path needs O(sqrt(kappa)) iterations)
SPECTRAL_KAPPA = 400.0


def _use_spectral(sys: HelmholtzSystem) -> bool:
    g = sys.grid
    if not sys.periodic_x or (g.dim == 2 and not sys.periodic_y):
        return False
    t2 = sys.tau * sys.tau
    smax = _stencil_symbol(math.pi, g.dx, sys.fourth)
    smin = _stencil_symbol(2.0 * math.pi / g.nx, g.dx, sys.fourth)
    if g.dim == 2:
        smax = smax + _stencil_symbol(math.pi, g.dy, sys.fourth)
        smin = min(smin, _stencil_symbol(2.0 * math.pi / g.ny, g.dy, sys.fourth))
    kappa = (sys.eps2 + t2 * sys.coeff_max * smax) / (sys.eps2 + t2 * sys.coeff_min * smin)
    return kappa > SPECTRAL_KAPPA


def _pcg_spectral(sys: HelmholtzSystem, rhs, x, singular):
    """CG preconditioned by the exact inverse of the constant-coefficient
    operator (mean coefficient), applied in Fourier space.  Periodic only."""
    g = sys.grid
    cbar = float(np.mean(g.interior(sys.coeff)))
    if g.dim == 1:
        theta = 2.0 * np.pi * np.fft.rfftfreq(g.nx)
        sym = sys.eps2 + sys.tau ** 2 * cbar * _stencil_symbol(theta, g.dx, sys.fourth)
    else:
        tx = 2.0 * np.pi * np.fft.fftfreq(g.nx)[:, None]
        ty = 2.0 * np.pi * np.fft.rfftfreq(g.ny)[None, :]
        sym = sys.eps2 + sys.tau ** 2 * cbar * (
            _stencil_symbol(tx, g.dx, sys.fourth)
            + _stencil_symbol(ty, g.dy, sys.fourth))
    if singular:
        sym.flat[0] = 1.0  # zero mode handled by projection

    def precond(r):
        if g.dim == 1:
            return np.fft.irfft(np.fft.rfft(r) / sym, n=g.nx)
        return np.fft.irfft2(np.fft.rfft2(r) / sym, s=(g.nx, g.ny))

    scratch = sys._scratch()
    av = np.empty_like(rhs)
    bnorm = float(np.linalg.norm(rhs.ravel()))
    target = sys.tol * bnorm
    iters = 0

    def true_residual():
        apply_operator(sys, x, scratch, av)
        r = rhs - av
        if singular:
            r -= np.mean(r)
        return r, float(np.linalg.norm(r.ravel()))

    r, true_res = true_residual()
    while true_res > target:
        if iters >= sys.max_iter:
            return iters, true_res / bnorm, 1
        iters_at_start = iters
        z = precond(r)
        p = z.copy()
        rz = float(np.dot(r.ravel(), z.ravel()))
        while iters < sys.max_iter:
            apply_operator(sys, p, scratch, av)
            pap = float(np.dot(p.ravel(), av.ravel()))
            if pap <= 0.0:
                break
            a_step = rz / pap
            x += a_step * p
            r -= a_step * av
            iters += 1
            if float(np.linalg.norm(r.ravel())) <= 0.5 * target:
                break
            z = precond(r)
            rz_new = float(np.dot(r.ravel(), z.ravel()))
            p = z + (rz_new / rz) * p
            rz = rz_new
        if singular:
            x -= np.mean(x)
        prev_res = true_res
        r, true_res = true_residual()
        if true_res > target and (iters == iters_at_start or true_res > 0.5 * prev_res):
            return iters, true_res / bnorm, 2
    return iters, true_res / bnorm, 0


def expand(sys: HelmholtzSystem, v: np.ndarray) -> np.ndarray:
    """Interior solution -> full field with closure ghosts filled."""
    g = sys.grid
    full = g.new_full()
    g.interior(full)[:] = v
    if g.dim == 1:
        K.closure_fill_1d(full, g.ghost, g.nx, sys.periodic_x)
    else:
        K.closure_fill_2d(full, g.ghost, g.nx, g.ny, sys.periodic_x, sys.periodic_y)
    return full


def solve(sys: HelmholtzSystem, rhs: np.ndarray,
          x0: np.ndarray | None = None) -> np.ndarray:
    """PCG solve honoring ||A x - rhs|| <= tol * ||rhs|| on the true residual.

    A zero right-hand side short-circuits to zero.  In the singular case
    (eps2 ~ 0, fully periodic) rhs and iterates are projected to zero mean
    and the mean-zero solution is returned.
    """
    rhs = np.array(rhs, dtype=np.float64, copy=True)
    rmax = float(K.absmax_all(rhs))
    if not np.isfinite(rmax):
        raise SolverError("non-finite right-hand side in Helmholtz solve")
    if rmax == 0.0:
        sys.last_iterations = 0
        sys.last_residual = 0.0
        return np.zeros_like(rhs)

    singular = sys.singular
    if singular:
        rhs -= np.mean(rhs)
        if float(K.absmax_all(rhs)) == 0.0:
            sys.last_iterations = 0
            sys.last_residual = 0.0
            return np.zeros_like(rhs)

    x = np.zeros_like(rhs) if x0 is None else np.array(x0, dtype=np.float64, copy=True)
    g = sys.grid
    t2 = sys.tau * sys.tau
    if _use_spectral(sys):
        iters, relres, status = _pcg_spectral(sys, rhs, x, singular)
    elif g.dim == 1:
        iters, relres, status = K.pcg_1d(
            rhs, x, sys.coeff, sys.eps2, t2, g.ghost, g.nx, g.dx,
            sys.periodic_x, sys.fourth, sys.tol, sys.max_iter, singular)
    else:
        iters, relres, status = K.pcg_2d(
            rhs, x, sys.coeff, sys.eps2, t2, g.ghost, g.nx, g.ny, g.dx, g.dy,
            sys.periodic_x, sys.periodic_y, sys.fourth, sys.tol,
            sys.max_iter, singular)
    sys.last_iterations = int(iters)
    sys.last_residual = float(relres)
    if status == 1:
        raise SolverError(
            f"Helmholtz solve exceeded {sys.max_iter} iterations "
            f"(relative residual {relres:.3e})")
    if status == 2:
        raise SolverError(
            f"Helmholtz solve stalled at relative residual {relres:.3e} "
            f"(target {sys.tol:.1e}) after {iters} iterations; the tolerance "
            "sits below the attainable round-off floor for this "
            "conditioning, or the coefficient is not positive")
    return x


# ---------------------------------------------------------------------------
# right-hand sides of the implicit stage equation
# ---------------------------------------------------------------------------

def build_rhs_first_order(state: State, bathy: Bathymetry, dt: float, eps: float,
                          capped: bool = True, global_alpha: bool = False,
                          fourth: bool = True) -> np.ndarray:
    """H^n - Hbar^n - dt*(div_LF(hu)^n - dt * tensor double divergence^n),
    interior-shaped.  Identically zero on still water."""
    g = state.grid
    H = state.h + bathy.b
    hbar = spatial_mean(H, g)
    dmass = div_lf_mass(state, bathy, eps, capped=capped, global_alpha=global_alpha)
    dtens = div_tensor_c(state, fourth=fourth)
    full = (H - hbar) - dt * (dmass - dt * dtens)
    return g.interior(full).copy()


def build_rhs_stage(state_star: State, state_E: State, hbar_E: float,
                    bathy: Bathymetry, a_ii: float, dt: float, eps: float,
                    capped: bool = True, global_alpha: bool = False,
                    fourth: bool = True,
                    dmass_star: np.ndarray | None = None) -> np.ndarray:
    """Stage right-hand side h** = h* + b - Hbar_E
    - a_ii dt (div_LF(hu)* - a_ii dt tensor(E)).  Still water gives zero.

    dmass_star may carry a precomputed divergence of the starred momentum
    (the stage loop reuses the step-start evaluation when the starred state
    is bit-identical to it)."""
    g = state_star.grid
    tau = a_ii * dt
    if dmass_star is None:
        dmass_star = div_lf_mass(state_star, bathy, eps, capped=capped,
                                 global_alpha=global_alpha)
    dtens = div_tensor_c(state_E, fourth=fourth)
    if g.dim == 1:
        out = np.empty(g.nx)
        K.compose_rhs_1d(state_star.h, bathy.b, dmass_star, dtens, hbar_E,
                         tau, g.ghost, g.nx, out)
    else:
        out = np.empty((g.nx, g.ny))
        K.compose_rhs_2d(state_star.h, bathy.b, dmass_star, dtens, hbar_E,
                         tau, g.ghost, g.nx, g.ny, out)
    return out

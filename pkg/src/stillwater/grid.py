"""Grids, fields, parameters, boundary fills and the basic reductions.

Fields live on uniform cell-centered meshes stored as full arrays that
include ghost layers on every side.  In 1D a field has shape (nx + 2*ghost,),
in 2D (nx + 2*ghost, ny + 2*ghost) with the x index first.  Interior values
are authoritative; ghost values are only defined after a boundary fill.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

#: boundary condition kinds accepted per side
BC_KINDS = ("periodic", "outflow", "inflow")

#: ghost width: WENO5 interface stencils need 3, compact diffusion needs 2
GHOST = 3


class ConfigError(ValueError):
    """Invalid grid / boundary / run configuration."""


class SolverError(RuntimeError):
    """Numerical failure during a solve or a time step."""


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered mesh with ghost layers.

    Point coordinates are x_i = x0 + (i + 1/2) dx for interior index i;
    the same convention holds for ghost indices extended past the ends.
    """

    dim: int
    nx: int
    ny: int = 1
    x0: float = 0.0
    x1: float = 1.0
    y0: float = 0.0
    y1: float = 1.0
    ghost: int = GHOST

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ConfigError(f"dim must be 1 or 2, got {self.dim}")
        if self.nx < 1 or (self.dim == 2 and self.ny < 1):
            raise ConfigError("nx, ny must be >= 1")
        if self.ghost < 3:
            raise ConfigError("ghost width must be >= 3 for WENO5 stencils")
        if not (self.x1 > self.x0) or (self.dim == 2 and not (self.y1 > self.y0)):
            raise ConfigError("domain bounds must be increasing")

    @property
    def dx(self) -> float:
        return (self.x1 - self.x0) / self.nx

    @property
    def dy(self) -> float:
        if self.dim == 1:
            return 1.0
        return (self.y1 - self.y0) / self.ny

    @property
    def full_shape(self) -> tuple[int, ...]:
        g = self.ghost
        if self.dim == 1:
            return (self.nx + 2 * g,)
        return (self.nx + 2 * g, self.ny + 2 * g)

    def xc(self, ghosts: bool = False) -> np.ndarray:
        """Cell-center x coordinates (interior only unless ghosts=True)."""
        g = self.ghost if ghosts else 0
        idx = np.arange(-g, self.nx + g)
        return self.x0 + (idx + 0.5) * self.dx

    def yc(self, ghosts: bool = False) -> np.ndarray:
        g = self.ghost if ghosts else 0
        idx = np.arange(-g, self.ny + g)
        return self.y0 + (idx + 0.5) * self.dy

    def new_full(self, fill: float = 0.0) -> np.ndarray:
        if fill == 0.0:
            return np.zeros(self.full_shape, dtype=np.float64)
        return np.full(self.full_shape, fill, dtype=np.float64)

    def interior(self, arr: np.ndarray) -> np.ndarray:
        """View of the interior points of a full array."""
        g = self.ghost
        if self.dim == 1:
            return arr[g:-g]
        return arr[g:-g, g:-g]

    def coords(self, ghosts: bool = False):
        """Meshed coordinate arrays, shaped like a (full) field in 2D."""
        if self.dim == 1:
            return (self.xc(ghosts),)
        X, Y = np.meshgrid(self.xc(ghosts), self.yc(ghosts), indexing="ij")
        return X, Y


@dataclass(frozen=True)
class FlowParams:
    """Froude number and time-step control."""

    eps: float
    cfl: float = 0.2
    accuracy_mode: bool = False

    def __post_init__(self):
        if self.eps <= 0.0:
            raise ConfigError("eps must be > 0")
        if not (0.0 < self.cfl <= 1.0):
            raise ConfigError("cfl must lie in (0, 1]")


@dataclass
class BoundarySpec:
    """Per-side conditions plus pinned ghost blocks for inflow sides.

    sides maps 'left'/'right' (and 'bottom'/'top' in 2D) to one of
    BC_KINDS.  Periodic must be paired on opposing sides.  pinned maps
    (side, field_name) to the ghost-block array written verbatim on an
    inflow side; blocks span the full transverse extent in 2D.
    """

    dim: int
    sides: dict[str, str]
    pinned: dict[tuple[str, str], np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        want = ("left", "right") if self.dim == 1 else ("left", "right", "bottom", "top")
        if set(self.sides) != set(want):
            raise ConfigError(f"sides must be exactly {want}")
        for s, k in self.sides.items():
            if k not in BC_KINDS:
                raise ConfigError(f"unknown bc kind {k!r} on side {s!r}")
        for lo, hi in (("left", "right"), ("bottom", "top")):
            if lo in self.sides:
                if (self.sides[lo] == "periodic") != (self.sides[hi] == "periodic"):
                    raise ConfigError(f"periodic must be paired on {lo}/{hi}")

    @classmethod
    def periodic(cls, dim: int) -> "BoundarySpec":
        sides = {"left": "periodic", "right": "periodic"}
        if dim == 2:
            sides.update(bottom="periodic", top="periodic")
        return cls(dim, sides)

    @classmethod
    def outflow(cls, dim: int) -> "BoundarySpec":
        sides = {"left": "outflow", "right": "outflow"}
        if dim == 2:
            sides.update(bottom="outflow", top="outflow")
        return cls(dim, sides)

    def periodic_x(self) -> bool:
        return self.sides["left"] == "periodic"

    def periodic_y(self) -> bool:
        return self.dim == 2 and self.sides["bottom"] == "periodic"


@dataclass
class State:
    """Conservative fields h and h*velocity sharing one grid."""

    grid: Grid
    h: np.ndarray
    hu: np.ndarray
    hv: np.ndarray | None = None

    @classmethod
    def zeros(cls, grid: Grid) -> "State":
        hv = grid.new_full() if grid.dim == 2 else None
        return cls(grid, grid.new_full(), grid.new_full(), hv)

    def fields(self):
        """(name, array) pairs for the fields present."""
        out = [("h", self.h), ("hu", self.hu)]
        if self.hv is not None:
            out.append(("hv", self.hv))
        return out

    def copy(self) -> "State":
        hv = None if self.hv is None else self.hv.copy()
        return State(self.grid, self.h.copy(), self.hu.copy(), hv)

    def check_positive_depth(self, where: str = "") -> None:
        from . import _kernels as K

        g = self.grid
        if g.dim == 1:
            hmin = K.min_interior_1d(self.h, g.ghost, g.nx)
        else:
            hmin = K.min_interior_2d(self.h, g.ghost, g.nx, g.ny)
        if np.isnan(hmin):
            raise SolverError(f"non-finite depth encountered {where}".strip())
        if hmin <= 0.0:
            hi = g.interior(self.h)
            loc = np.unravel_index(int(np.argmin(hi)), hi.shape)
            raise SolverError(
                f"nonpositive depth h={hmin:.3e} at interior index {loc} {where}".strip()
            )


@dataclass(frozen=True)
class Bathymetry:
    """Time-independent bottom elevation, ghost values included."""

    grid: Grid
    b: np.ndarray

    @classmethod
    def from_callable(cls, grid: Grid, func: Callable, bc: BoundarySpec) -> "Bathymetry":
        """Sample func at every cell center (ghosts included), then overwrite
        the ghost layers through the boundary rules so that ghost values are
        consistent with the state fills (periodic wrap, zero-gradient copy,
        or pinned analytic samples on inflow sides)."""
        b = np.asarray(func(*grid.coords(ghosts=True)), dtype=np.float64)
        b = np.broadcast_to(b, grid.full_shape).copy()
        pinned = _analytic_pins(grid, bc, "b", func)
        _fill_field(b, grid, bc, "b", pinned)
        return cls(grid, b)

    @classmethod
    def flat(cls, grid: Grid) -> "Bathymetry":
        return cls(grid, grid.new_full())


# ---------------------------------------------------------------------------
# boundary fills
# ---------------------------------------------------------------------------

def _analytic_pins(grid: Grid, bc: BoundarySpec, name: str, func: Callable):
    """Pinned ghost blocks for inflow sides, sampled from an analytic field."""
    pins: dict[tuple[str, str], np.ndarray] = {}
    g = grid.ghost
    if grid.dim == 1:
        x = grid.xc(ghosts=True)
        if bc.sides["left"] == "inflow":
            pins[("left", name)] = np.asarray(func(x[:g]), dtype=np.float64)
        if bc.sides["right"] == "inflow":
            pins[("right", name)] = np.asarray(func(x[-g:]), dtype=np.float64)
        return pins
    X, Y = grid.coords(ghosts=True)
    if bc.sides["left"] == "inflow":
        pins[("left", name)] = np.asarray(func(X[:g, :], Y[:g, :]), dtype=np.float64)
    if bc.sides["right"] == "inflow":
        pins[("right", name)] = np.asarray(func(X[-g:, :], Y[-g:, :]), dtype=np.float64)
    if bc.sides["bottom"] == "inflow":
        pins[("bottom", name)] = np.asarray(func(X[:, :g], Y[:, :g]), dtype=np.float64)
    if bc.sides["top"] == "inflow":
        pins[("top", name)] = np.asarray(func(X[:, -g:], Y[:, -g:]), dtype=np.float64)
    return pins


def _fill_axis(arr: np.ndarray, grid: Grid, bc: BoundarySpec, name: str,
               pinned, axis: int) -> None:
    g = grid.ghost
    n = grid.nx if axis == 0 else grid.ny
    lo_side, hi_side = ("left", "right") if axis == 0 else ("bottom", "top")

    if arr.ndim == 1:
        def sl(a, b):
            return slice(a, b)
    elif axis == 0:
        def sl(a, b):
            return slice(a, b)
    else:
        def sl(a, b):
            return (slice(None), slice(a, b))

    kind_lo = bc.sides[lo_side]
    kind_hi = bc.sides[hi_side]
    if kind_lo == "periodic":
        arr[sl(0, g)] = arr[sl(n, n + g)]
        arr[sl(n + g, n + 2 * g)] = arr[sl(g, 2 * g)]
        return
    if kind_lo == "outflow":
        arr[sl(0, g)] = arr[sl(g, g + 1)]
    else:  # inflow
        pin = pinned.get((lo_side, name)) if pinned else None
        if pin is None:
            raise ConfigError(f"missing pinned values for inflow side {lo_side!r}/{name!r}")
        arr[sl(0, g)] = pin
    if kind_hi == "outflow":
        arr[sl(n + g, n + 2 * g)] = arr[sl(n + g - 1, n + g)]
    else:
        pin = pinned.get((hi_side, name)) if pinned else None
        if pin is None:
            raise ConfigError(f"missing pinned values for inflow side {hi_side!r}/{name!r}")
        arr[sl(n + g, n + 2 * g)] = pin


def _fill_field(arr: np.ndarray, grid: Grid, bc: BoundarySpec, name: str,
                pinned=None) -> None:
    # x sides first, then y; the y pass also completes the corner blocks.
    g = grid.ghost
    if arr.ndim == 1 and bc.sides["left"] == "periodic":
        n = grid.nx
        arr[0:g] = arr[n:n + g]
        arr[n + g:n + 2 * g] = arr[g:2 * g]
        return
    _fill_axis(arr, grid, bc, name, pinned, axis=0)
    if grid.dim == 2:
        _fill_axis(arr, grid, bc, name, pinned, axis=1)


def fill_ghosts(state: State, bathy: Bathymetry, bc: BoundarySpec) -> State:
    """Populate the ghost layers of every state field in place.

    Idempotent: a second application leaves the arrays bit-identical.
    Bathymetry ghosts were fixed at construction and are not touched.
    """
    for name, arr in state.fields():
        _fill_field(arr, state.grid, bc, name, bc.pinned)
    return state


def fill_scalar_ghosts(arr: np.ndarray, grid: Grid, bc: BoundarySpec,
                       name: str = "h") -> np.ndarray:
    """Boundary fill for a single auxiliary field (uses the rules of `name`)."""
    _fill_field(arr, grid, bc, name, bc.pinned)
    return arr


# ---------------------------------------------------------------------------
# reductions
# ---------------------------------------------------------------------------

def surface_level(state: State, bathy: Bathymetry) -> np.ndarray:
    """Water surface H = h + b, pointwise on the full array."""
    return state.h + bathy.b


def spatial_mean(field_arr: np.ndarray, grid: Grid) -> float:
    """Arithmetic mean over interior points (= integral average on a
    uniform mesh)."""
    from . import _kernels as K

    if grid.dim == 1:
        return float(K.mean_interior_1d(field_arr, grid.ghost, grid.nx))
    return float(K.mean_interior_2d(field_arr, grid.ghost, grid.nx, grid.ny))


def max_wave_speed(state: State, eps: float, capped: bool = True):
    """Largest |u| + c over the grid, plus the directional analogues.

    capped=True uses the semi-implicit celerity min(1, 1/eps)*sqrt(h);
    capped=False uses the full explicit celerity sqrt(h)/eps.
    Returns (lam, alpha_x, alpha_y); alpha_y is None in 1D.
    """
    from . import _kernels as K

    g = state.grid
    hmin = (K.min_interior_1d(state.h, g.ghost, g.nx) if g.dim == 1
            else K.min_interior_2d(state.h, g.ghost, g.nx, g.ny))
    if hmin <= 0.0:
        raise SolverError("nonpositive depth in max_wave_speed")
    fac = min(1.0, 1.0 / eps) if capped else 1.0 / eps
    if state.hv is None:
        ax = float(K.wave_speed_max_1d(state.h, state.hu, fac, g.ghost, g.nx))
        return max(ax, 0.0), ax, None
    lam, ax, ay = K.wave_speed_max_2d(state.h, state.hu, state.hv, fac,
                                      g.ghost, g.nx, g.ny)
    return float(lam), float(ax), float(ay)


#: below this wave speed the flow counts as quiescent and dt falls back
QUIESCENT_LAMBDA = 1e-12


def compute_dt(state: State, grid: Grid, params: FlowParams,
               capped: bool = True) -> float:
    """CFL time step cfl*min(dx,dy)/Lambda, or cfl*min(dx,dy)^(5/3)/Lambda
    in accuracy mode.  Final-step clipping is the caller's job."""
    lam, _, _ = max_wave_speed(state, params.eps, capped=capped)
    dmin = grid.dx if grid.dim == 1 else min(grid.dx, grid.dy)
    if lam < QUIESCENT_LAMBDA:
        return params.cfl * dmin
    dref = dmin ** (5.0 / 3.0) if params.accuracy_mode else dmin
    return params.cfl * dref / lam


def total_mass(state: State, grid: Grid) -> float:
    """Sum of h * dx * dy over the interior, in deterministic order."""
    cell = grid.dx * (grid.dy if grid.dim == 2 else 1.0)
    return float(np.sum(grid.interior(state.h))) * cell

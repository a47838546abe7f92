"""Catalog of the benchmark problems: initial data, bathymetries, domains,
boundary conditions, Froude numbers and final times, as declarative specs.

Dimensional benchmarks run the scaled system with eps = 1/sqrt(g), g = 9.812.
Case ids are stable CLI identifiers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import (
    Bathymetry,
    BoundarySpec,
    ConfigError,
    FlowParams,
    Grid,
    State,
    fill_ghosts,
)

GRAV = 9.812
EPS_GRAV = 1.0 / np.sqrt(GRAV)


@dataclass(frozen=True)
class CaseSpec:
    name: str
    dim: int
    x0: float
    x1: float
    eps: float
    t_final: float
    init: Callable                      # (x[, y]) -> (h, hu[, hv])
    bathy: Callable                     # (x[, y]) -> b
    bc_sides: dict[str, str]
    y0: float = 0.0
    y1: float = 1.0
    default_nx: int = 100
    default_ny: int = 50
    snap_times: tuple = ()
    meshes: tuple = ()
    notes: str = ""

    def boundary(self) -> BoundarySpec:
        return BoundarySpec(self.dim, dict(self.bc_sides))

    def grid(self, nx: int | None = None, ny: int | None = None) -> Grid:
        nx = self.default_nx if nx is None else nx
        if self.dim == 1:
            return Grid(1, nx, x0=self.x0, x1=self.x1)
        ny = self.default_ny if ny is None else ny
        return Grid(2, nx, ny, self.x0, self.x1, self.y0, self.y1)


def build(case: CaseSpec, nx: int | None = None, ny: int | None = None,
          eps: float | None = None, cfl: float = 0.2,
          accuracy_mode: bool = False):
    """Instantiate (grid, state, bathy, bc, params) on the requested mesh.

    Initial fields are sampled at every cell center including ghosts; inflow
    sides get their ghost blocks pinned to those initial samples.
    """
    g = case.grid(nx, ny)
    e = case.eps if eps is None else eps
    params = FlowParams(eps=e, cfl=cfl, accuracy_mode=accuracy_mode)
    bc = case.boundary()

    coords = g.coords(ghosts=True)
    vals = _sample(case, coords, e)
    st = State(g, vals["h"], vals["hu"], vals.get("hv"))
    _pin_inflow(case, g, bc, e)
    bathy = Bathymetry.from_callable(g, case.bathy, bc)
    fill_ghosts(st, bathy, bc)
    hmin = float(np.min(g.interior(st.h)))
    if hmin <= 0.0:
        raise ConfigError(f"case {case.name!r}: initial depth not positive (min {hmin:.3e})")
    return g, st, bathy, bc, params


def _sample(case: CaseSpec, coords, eps: float) -> dict[str, np.ndarray]:
    fields = case.init(*coords, eps=eps) if _wants_eps(case) else case.init(*coords)
    shape = np.broadcast(*coords).shape if len(coords) > 1 else coords[0].shape
    names = ("h", "hu", "hv")[: 2 + (case.dim == 2)]
    return {n: np.broadcast_to(np.asarray(f, dtype=np.float64), shape).copy()
            for n, f in zip(names, fields)}


def _wants_eps(case: CaseSpec) -> bool:
    return getattr(case.init, "takes_eps", False)


def _pin_inflow(case: CaseSpec, g: Grid, bc: BoundarySpec, eps: float) -> None:
    gh = g.ghost
    if not any(k == "inflow" for k in bc.sides.values()):
        return
    coords = g.coords(ghosts=True)
    vals = _sample(case, coords, eps)
    blocks = {"left": (slice(0, gh),), "right": (slice(-gh, None),)}
    if g.dim == 2:
        blocks = {"left": (slice(0, gh), slice(None)),
                  "right": (slice(-gh, None), slice(None)),
                  "bottom": (slice(None), slice(0, gh)),
                  "top": (slice(None), slice(-gh, None))}
    for side, kind in bc.sides.items():
        if kind != "inflow":
            continue
        for name, arr in vals.items():
            bc.pinned[(side, name)] = arr[blocks[side]].copy()


# ---------------------------------------------------------------------------
# 1D cases
# ---------------------------------------------------------------------------

def case_accuracy_1d() -> CaseSpec:
    """Smooth periodic accuracy benchmark over a sinusoidal bottom."""

    def init(x):
        h = 5.0 + np.exp(np.cos(2.0 * np.pi * x))
        hu = np.sin(np.cos(2.0 * np.pi * x))
        return h, hu

    return CaseSpec(
        name="accuracy1d", dim=1, x0=0.0, x1=1.0, eps=EPS_GRAV, t_final=0.1,
        init=init, bathy=lambda x: np.sin(np.pi * x) ** 2,
        bc_sides={"left": "periodic", "right": "periodic"},
        default_nx=320, meshes=(80, 160, 320, 640, 1280),
    )


def case_accuracy_eps_1d() -> CaseSpec:
    """Well-prepared accuracy benchmark; surface perturbation scales as eps^2."""

    def init(x, eps):
        b = 1.0 + np.sin(2.0 * np.pi * x)
        h = 10.0 - b + eps * eps * np.exp(np.sin(2.0 * np.pi * x))
        hu = 1.0 + eps * eps * np.sin(2.0 * np.pi * x)
        return h, hu

    init.takes_eps = True
    return CaseSpec(
        name="accuracy-eps", dim=1, x0=0.0, x1=2.0, eps=1.0, t_final=0.05,
        init=init, bathy=lambda x: 1.0 + np.sin(2.0 * np.pi * x),
        bc_sides={"left": "periodic", "right": "periodic"},
        default_nx=160, meshes=(80, 160, 320, 640),
    )


def case_perturbation_1d(eta: float) -> CaseSpec:
    """Small pulse on a quasi-stationary lake over a smooth bump; the pulse
    splits and the two fronts ride over the bump without parasitic waves."""

    def bathy(x):
        return np.where((x >= 1.4) & (x <= 1.6),
                        0.25 * (np.cos(10.0 * np.pi * (x - 1.5)) + 1.0), 0.0)

    def init(x):
        h = 1.0 - bathy(x) + np.where((x >= 1.1) & (x <= 1.2), eta, 0.0)
        return h, np.zeros_like(x)

    name = "perturb1d-big" if eta >= 0.1 else "perturb1d-small"
    return CaseSpec(
        name=name, dim=1, x0=0.0, x1=2.0, eps=EPS_GRAV, t_final=0.2,
        init=init, bathy=bathy,
        bc_sides={"left": "outflow", "right": "outflow"},
        default_nx=200,
        notes="boundary condition not stated in the source experiment; "
              "outflow extrapolation adopted",
    )


def case_dam_break() -> CaseSpec:
    """Dam break over a rectangular bump; ghost cells pinned to initial data."""

    def bathy(x):
        return np.where(np.abs(x - 750.0) <= 1500.0 / 8.0, 8.0, 0.0)

    def init(x):
        h = np.where(x <= 750.0, 20.0 - bathy(x), 15.0 - bathy(x))
        return h, np.zeros_like(x)

    return CaseSpec(
        name="dambreak", dim=1, x0=0.0, x1=1500.0, eps=EPS_GRAV, t_final=15.0,
        init=init, bathy=bathy,
        bc_sides={"left": "inflow", "right": "inflow"},
        default_nx=500,
    )


def case_lake_at_rest(moving: bool = False) -> CaseSpec:
    """Still water over a discontinuous bottom block; the moving variant
    starts from u = 1 and breaks the equilibrium."""

    def bathy(x):
        return np.where((x >= 4.0) & (x <= 8.0), 4.0, 0.0)

    def init(x):
        h = 10.0 - bathy(x)
        hu = h * 1.0 if moving else np.zeros_like(x)
        return h, hu

    return CaseSpec(
        name="lake-moving" if moving else "lake-rest",
        dim=1, x0=0.0, x1=10.0, eps=EPS_GRAV,
        t_final=0.1 if moving else 10.0,
        init=init, bathy=bathy,
        bc_sides={"left": "periodic", "right": "periodic"},
        default_nx=100,
    )


def case_multiscale_wave(alt_reading: bool = False) -> CaseSpec:
    """Long/short wave superposition at eps = 0.02 on a flat bottom.

    The short-wave term is read literally as sin(eps * 40 pi x) (wavelength
    2.5 at eps = 0.02); alt_reading=True uses the other rendering,
    eps * sin(40 pi x), so figures can disambiguate the two."""

    def sigma(x):
        return np.where((x >= 0.0) & (x <= 20.0),
                        0.5 * (1.0 - np.cos(0.1 * np.pi * x)), 0.0)

    def init(x, eps):
        if alt_reading:
            short = eps * 0.5 * sigma(x) * np.sin(40.0 * np.pi * x)
        else:
            short = 0.5 * sigma(x) * np.sin(eps * 40.0 * np.pi * x)
        H = 1.0 + short + eps * (1.0 + np.cos(eps * np.pi * x))
        u = np.sqrt(2.0) * (1.0 + np.cos(eps * np.pi * x))
        return H, H * u

    init.takes_eps = True
    return CaseSpec(
        name="multiscale-alt" if alt_reading else "multiscale",
        dim=1, x0=-51.0, x1=51.0, eps=0.02, t_final=4.1,
        init=init, bathy=lambda x: np.zeros_like(x),
        bc_sides={"left": "periodic", "right": "periodic"},
        default_nx=2040, snap_times=(0.0, 0.2, 0.5, 1.0, 2.4, 4.1),
    )


# ---------------------------------------------------------------------------
# 2D cases
# ---------------------------------------------------------------------------

def case_accuracy_2d() -> CaseSpec:
    """Well-prepared smooth 2D benchmark over a sin/cos bottom."""

    def bathy(x, y):
        return np.sin(2.0 * np.pi * x) + np.cos(2.0 * np.pi * y) + 2.0

    def init(x, y, eps):
        sc = np.sin(2.0 * np.pi * x) * np.cos(2.0 * np.pi * y)
        h = 10.0 - bathy(x, y) + eps * eps * sc
        hu = sc
        hv = -np.cos(2.0 * np.pi * x) * np.sin(2.0 * np.pi * y)
        return h, hu, hv

    init.takes_eps = True
    return CaseSpec(
        name="accuracy2d", dim=2, x0=0.0, x1=1.0, y0=0.0, y1=1.0,
        eps=1.0, t_final=0.05, init=init, bathy=bathy,
        bc_sides={"left": "periodic", "right": "periodic",
                  "bottom": "periodic", "top": "periodic"},
        default_nx=64, default_ny=64, meshes=(16, 32, 64, 128, 256),
    )


def case_perturbation_2d() -> CaseSpec:
    """Thin pulse travelling over an elliptical hump."""

    def bathy(x, y):
        return 0.8 * np.exp(-5.0 * (x - 0.9) ** 2 - 50.0 * (y - 0.5) ** 2)

    def init(x, y):
        h = 1.0 - bathy(x, y) + np.where((x >= 0.05) & (x <= 0.15), 0.01, 0.0)
        return h, np.zeros_like(h), np.zeros_like(h)

    return CaseSpec(
        name="perturb2d", dim=2, x0=0.0, x1=2.0, y0=0.0, y1=1.0,
        eps=EPS_GRAV, t_final=0.6, init=init, bathy=bathy,
        bc_sides={"left": "outflow", "right": "outflow",
                  "bottom": "periodic", "top": "periodic"},
        default_nx=200, default_ny=100,
        snap_times=(0.12, 0.24, 0.36, 0.48, 0.6),
    )


VORTEX_GAMMA = 8.0
VORTEX_OMEGA = 4.0 * np.pi


def _vortex_k(xi):
    return (2.0 * np.cos(xi) + 2.0 * xi * np.sin(xi) + np.cos(2.0 * xi) / 8.0
            + xi * np.sin(2.0 * xi) / 4.0 + 0.75 * xi * xi)


def case_traveling_vortex(nonflat: bool = False) -> CaseSpec:
    """Vortex advected at background speed 2; surface deviation from 110
    scales as eps^2.  The nonflat variant adds a Gaussian ridge in x."""

    om = VORTEX_OMEGA
    gam = VORTEX_GAMMA

    def bathy(x, y):
        if nonflat:
            return np.exp(-5.0 * (x - 1.0) ** 2)
        return np.zeros(np.broadcast(x, y).shape)

    def init(x, y, eps):
        rc = np.sqrt((x - 0.5) ** 2 + (y - 0.5) ** 2)
        inside = om * rc <= np.pi
        H = 110.0 + np.where(
            inside, (eps * gam / om) ** 2 * (_vortex_k(om * rc) - _vortex_k(np.pi)), 0.0)
        amp = gam * (1.0 + np.cos(om * rc))
        u = 2.0 + np.where(inside, amp * (0.5 - y), 0.0)
        v = np.where(inside, amp * (x - 0.5), 0.0)
        h = H - bathy(x, y)
        return h, h * u, h * v

    init.takes_eps = True
    return CaseSpec(
        name="vortex-bump" if nonflat else "vortex",
        dim=2, x0=0.0, x1=2.0, y0=0.0, y1=1.0,
        eps=0.05, t_final=1.0, init=init, bathy=bathy,
        bc_sides={"left": "periodic", "right": "periodic",
                  "bottom": "periodic", "top": "periodic"},
        default_nx=200, default_ny=100,
        snap_times=(0.0, 0.3, 0.6, 1.0) if nonflat else (),
    )


CASES: dict[str, Callable[[], CaseSpec]] = {
    "accuracy1d": case_accuracy_1d,
    "accuracy-eps": case_accuracy_eps_1d,
    "perturb1d-big": lambda: case_perturbation_1d(0.2),
    "perturb1d-small": lambda: case_perturbation_1d(0.001),
    "dambreak": case_dam_break,
    "lake-rest": lambda: case_lake_at_rest(False),
    "lake-moving": lambda: case_lake_at_rest(True),
    "multiscale": lambda: case_multiscale_wave(False),
    "multiscale-alt": lambda: case_multiscale_wave(True),
    "accuracy2d": case_accuracy_2d,
    "perturb2d": case_perturbation_2d,
    "vortex": lambda: case_traveling_vortex(False),
    "vortex-bump": lambda: case_traveling_vortex(True),
}


def get_case(name: str) -> CaseSpec:
    try:
        return CASES[name]()
    except KeyError:
        raise ConfigError(f"unknown case {name!r}; known: {', '.join(sorted(CASES))}")

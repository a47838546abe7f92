"""Property suites runnable from the CLI: the discrete counterparts of the
scheme's guarantees (equilibrium preservation, conservation, asymptotic
decay, tableau integrity, determinism), each printed as one PASS/FAIL line.
"""

from __future__ import annotations

import numpy as np

from .cases import build, case_accuracy_eps_1d, get_case
from .grid import (
    Bathymetry,
    BoundarySpec,
    FlowParams,
    Grid,
    State,
    fill_ghosts,
    spatial_mean,
)
from .imex import SI_IMEX_443_PRINTED, advance_to, si_imex_443


def _check(name: str, ok: bool, detail: str = "") -> bool:
    mark = "PASS" if ok else "FAIL"
    extra = f"  ({detail})" if detail else ""
    print(f"[{mark}] {name}{extra}")
    return ok


def _random_lake(nx: int, smooth: bool, seed: int) -> tuple:
    """H = const, zero momentum over a randomized bottom."""
    rng = np.random.default_rng(seed)
    grid = Grid(1, nx, x0=0.0, x1=1.0)
    if smooth:
        amps = rng.uniform(-0.2, 0.2, size=3)

        def bfun(x):
            out = 0.5 + np.zeros_like(x)
            for k, a in enumerate(amps, start=1):
                out = out + a * np.sin(2.0 * np.pi * k * x)
            return out
    else:
        edges = np.sort(rng.uniform(0.1, 0.9, size=4))
        levels = rng.uniform(0.0, 0.9, size=5)

        def bfun(x):
            out = np.full_like(x, levels[0])
            for e, lv in zip(edges, levels[1:]):
                out = np.where(x >= e, lv, out)
            return out

    bc = BoundarySpec.periodic(1)
    bathy = Bathymetry.from_callable(grid, bfun, bc)
    st = State(grid, 2.0 - bathy.b, grid.new_full(), None)
    fill_ghosts(st, bathy, bc)
    return grid, st, bathy, bc


def suite_well_balance(quick: bool = False) -> bool:
    ok = True
    steps = 3 if quick else 10
    for scheme in ("imex3", "explicit-ref", "first-order"):
        for smooth in (True, False):
            for eps in (0.5, 1e-2):
                grid, st, bathy, bc, = _random_lake(64, smooth, seed=7 if smooth else 11)
                params = FlowParams(eps=eps)
                H0 = spatial_mean(st.h + bathy.b, grid)
                dt0 = 0.2 * grid.dx / np.sqrt(2.0 * max(1.0, 1.0 / eps ** 2))
                st1, _ = advance_to(st, bathy, steps * dt0, scheme, params, bc,
                                    fixed_dt=dt0)
                devH = float(np.max(np.abs(grid.interior(st1.h + bathy.b) - H0)))
                devM = float(np.max(np.abs(grid.interior(st1.hu))))
                label = f"well-balance {scheme} {'smooth' if smooth else 'step'} eps={eps:g}"
                ok &= _check(label, devH <= 1e-12 and devM <= 1e-12,
                             f"|H-H0|={devH:.2e} |hu|={devM:.2e}")
    return ok


def suite_conservation(quick: bool = False) -> bool:
    ok = True
    t_final = 0.005 if quick else 0.02
    for scheme in ("imex3", "first-order", "explicit-ref"):
        spec = get_case("accuracy1d")
        g, st, bathy, bc, params = build(spec, nx=80)
        _, stats = advance_to(st, bathy, t_final, scheme, params, bc)
        ok &= _check(f"mass conservation {scheme}",
                     stats.mass_drift_rel <= 1e-12,
                     f"drift={stats.mass_drift_rel:.2e}")
    return ok


def suite_ap_decay(quick: bool = False) -> bool:
    eps_list = (1e-2, 1e-3, 1e-4)
    nx = 64 if quick else 128
    devs = []
    for eps in eps_list:
        spec = case_accuracy_eps_1d()
        g, st, bathy, bc, params = build(spec, nx=nx, eps=eps)
        dt = 0.2 * g.dx / 4.0
        st1, _ = advance_to(st, bathy, dt, "imex3", params, bc, fixed_dt=dt)
        H = g.interior(st1.h + bathy.b)
        devs.append(float(np.max(np.abs(H - np.mean(H)))))
    slope = np.polyfit(np.log(eps_list), np.log(devs), 1)[0]
    return _check("asymptotic surface decay O(eps^2)", slope >= 1.8,
                  f"slope={slope:.2f}")


def suite_tableau() -> bool:
    tb = si_imex_443()
    tb.validate()
    printed = SI_IMEX_443_PRINTED
    worst = 0.0
    for ours, ref in ((tb.Atil, printed["Atil"]), (tb.A, printed["A"])):
        worst = max(worst, float(np.max(np.abs(ours - np.asarray(ref)))))
    worst = max(worst, float(np.max(np.abs(tb.b - np.asarray(printed["b"])))))
    worst = max(worst, float(np.max(np.abs(tb.ctil - np.asarray(printed["ctil"])))))
    worst = max(worst, float(np.max(np.abs(tb.c - np.asarray(printed["c"])))))
    ok = worst <= 1e-12
    ok &= bool(np.all(tb.b == tb.A[-1]))
    ok &= bool(np.all(tb.btil == tb.b))
    return _check("SI-IMEX(4,4,3) tableau integrity", ok,
                  f"max printed-entry deviation {worst:.2e}")


def suite_determinism() -> bool:
    outs = []
    for _ in range(2):
        spec = get_case("lake-moving")
        g, st, bathy, bc, params = build(spec, nx=50)
        st1, _ = advance_to(st, bathy, 0.01, "imex3", params, bc)
        outs.append((st1.h.tobytes(), st1.hu.tobytes()))
    ok = outs[0] == outs[1]
    return _check("bitwise reproducibility of repeated runs", ok)


def run_suite(quick: bool = False) -> bool:
    ok = suite_tableau()
    ok &= suite_well_balance(quick)
    ok &= suite_conservation(quick)
    ok &= suite_ap_decay(quick)
    ok &= suite_determinism()
    print("suite:", "all checks passed" if ok else "FAILURES present")
    return ok

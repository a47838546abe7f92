"""Command-line front end: run cases, convergence studies, scheme
comparisons and the property suite.

Snapshot files are plain CSV with one header line and 17-significant-digit
floats ("x[,y],h,hu[,hv],b,H"), so they round-trip bit-faithfully.  Every
run also writes summary.json with step counts, mass drift and extrema; all
output except the wall-time entries is byte-deterministic across repeated
identical invocations.

Exit codes: 0 success, 2 configuration error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cases import CASES, CaseSpec, build, get_case
from .grid import Bathymetry, ConfigError, Grid, SolverError, State, spatial_mean, total_mass
from .imex import SCHEMES, advance_to, si_imex_443
from . import proofs

SNAP_FMT = "%.17g"


@dataclass
class RunConfig:
    case: str
    scheme: str = "imex3"
    nx: int | None = None
    ny: int | None = None
    eps: float | None = None
    cfl: float = 0.2
    t_final: float | None = None
    accuracy_mode: bool = False
    out: str | None = None
    snap_times: tuple = ()

    def validate(self) -> None:
        if self.case not in CASES:
            raise ConfigError(f"unknown case {self.case!r}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        spec = get_case(self.case)
        if spec.dim == 1 and self.ny is not None:
            raise ConfigError("--ny is only valid for 2D cases")

    def out_dir(self) -> Path:
        return Path(self.out or f"out_{self.case}_{self.scheme}")


@dataclass
class ConvergenceReport:
    """Self-convergence table: pair errors attributed to the finer mesh."""

    case: str
    field_name: str
    meshes: list
    errors: list = field(default_factory=list)    # len(meshes) - 1
    orders: list = field(default_factory=list)    # len(meshes) - 2

    def rows(self):
        out = []
        for k, n in enumerate(self.meshes[1:]):
            order = self.orders[k - 1] if k >= 1 else None
            out.append((n, self.errors[k], order))
        return out

    def write_csv(self, path: Path) -> None:
        with open(path, "w") as f:
            f.write("n,l1_error,order\n")
            for n, err, order in self.rows():
                otxt = "" if order is None else f"{order:.3f}"
                f.write(f"{n},{err:.6e},{otxt}\n")


# ---------------------------------------------------------------------------
# snapshot and summary files
# ---------------------------------------------------------------------------

def write_snapshot(path: Path, grid: Grid, state: State, bathy: Bathymetry) -> None:
    g = grid
    h = g.interior(state.h)
    hu = g.interior(state.hu)
    b = g.interior(bathy.b)
    lines = []
    if g.dim == 1:
        lines.append("x,h,hu,b,H")
        x = g.xc()
        for i in range(g.nx):
            vals = (x[i], h[i], hu[i], b[i], h[i] + b[i])
            lines.append(",".join(SNAP_FMT % v for v in vals))
    else:
        lines.append("x,y,h,hu,hv,b,H")
        hv = g.interior(state.hv)
        x = g.xc()
        y = g.yc()
        for i in range(g.nx):
            for j in range(g.ny):
                vals = (x[i], y[j], h[i, j], hu[i, j], hv[i, j], b[i, j],
                        h[i, j] + b[i, j])
                lines.append(",".join(SNAP_FMT % v for v in vals))
    path.write_text("\n".join(lines) + "\n")


def read_snapshot(path: Path):
    """Snapshot file -> (header list, column dict of float arrays)."""
    with open(path) as f:
        header = f.readline().strip().split(",")
        data = np.loadtxt(f, delimiter=",", ndmin=2)
    return header, {name: data[:, k] for k, name in enumerate(header)}


def _snap_name(t: float) -> str:
    return f"snap_t{t:.6f}.csv"


# ---------------------------------------------------------------------------
# verbs
# ---------------------------------------------------------------------------

def run(config: RunConfig) -> dict:
    """Run one case, write snapshots plus summary.json, return the summary."""
    config.validate()
    spec = get_case(config.case)
    g, st, bathy, bc, params = build(
        spec, nx=config.nx, ny=config.ny, eps=config.eps, cfl=config.cfl,
        accuracy_mode=config.accuracy_mode)
    t_final = spec.t_final if config.t_final is None else config.t_final
    snap_times = config.snap_times or spec.snap_times

    out_dir = config.out_dir()
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    def on_snapshot(t, cur):
        name = _snap_name(t)
        write_snapshot(out_dir / name, g, cur, bathy)
        written.append(name)

    st, stats = advance_to(st, bathy, t_final, config.scheme, params, bc,
                           snap_times=snap_times, on_snapshot=on_snapshot)
    final_name = _snap_name(t_final)
    if final_name not in written:
        write_snapshot(out_dir / final_name, g, st, bathy)
        written.append(final_name)

    H = g.interior(st.h + bathy.b)
    max_abs_hu = float(np.max(np.abs(g.interior(st.hu))))
    if st.hv is not None:
        max_abs_hu = max(max_abs_hu, float(np.max(np.abs(g.interior(st.hv)))))
    summary = {
        "case": config.case,
        "scheme": config.scheme,
        "nx": g.nx,
        "ny": g.ny if g.dim == 2 else None,
        "eps": params.eps,
        "cfl": params.cfl,
        "accuracy_mode": config.accuracy_mode,
        "t_final": t_final,
        "steps": stats.steps,
        "wall_time_s": stats.wall_time,
        "mass_initial": stats.mass_initial,
        "mass_final": stats.mass_final,
        "mass_drift_rel": stats.mass_drift_rel,
        "min_h": stats.min_h,
        "max_h": stats.max_h,
        "max_abs_momentum": max_abs_hu,
        "max_abs_surface_deviation": float(np.max(np.abs(H - spatial_mean(st.h + bathy.b, g)))),
        "elliptic_iterations": stats.elliptic_iterations,
        "snapshots": written,
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(f"{config.case} [{config.scheme}] N={g.nx}{'x%d' % g.ny if g.dim == 2 else ''} "
          f"T={t_final:g}: {stats.steps} steps, mass drift {stats.mass_drift_rel:.2e}, "
          f"min h {stats.min_h:.6g}, wall {stats.wall_time:.2f}s")
    return summary


# ---------------------------------------------------------------------------
# restriction of fine solutions to coarse points
# ---------------------------------------------------------------------------

#: 6th-order midpoint interpolation weights for the half-cell-shifted grid
MIDPOINT6 = np.array([3.0, -25.0, 150.0, 150.0, -25.0, 3.0]) / 256.0


def restrict_halving_1d(fine: np.ndarray, periodic: bool) -> np.ndarray:
    """Fine (2N) interior values -> coarse (N) points.  Cell-centered grids
    put each coarse point exactly between two fine points; 6th-order midpoint
    interpolation keeps restriction error below the scheme's order."""
    n2 = fine.size
    if n2 % 2:
        raise ConfigError("halving restriction needs an even fine mesh")
    n = n2 // 2
    out = np.empty(n)
    for i in range(n):
        idx = np.arange(2 * i - 2, 2 * i + 4)
        if periodic:
            vals = fine[idx % n2]
        else:
            if idx[0] < 0 or idx[-1] >= n2:
                out[i] = 0.5 * (fine[max(2 * i, 0)] + fine[min(2 * i + 1, n2 - 1)])
                continue
            vals = fine[idx]
        out[i] = float(np.dot(MIDPOINT6, vals))
    return out


def restrict_1d(fine: np.ndarray, factor: int, periodic: bool) -> np.ndarray:
    """Restriction by any factor 2^a * odd: odd parts subsample exactly
    (centers coincide), each factor-2 part interpolates."""
    out = fine
    f = factor
    while f % 2 == 0:
        out = restrict_halving_1d(out, periodic)
        f //= 2
    if f > 1:
        if out.size % f:
            raise ConfigError("restriction factor does not divide the mesh")
        out = out[(f - 1) // 2::f]
    return out


def restrict_halving_2d(fine: np.ndarray, periodic: bool) -> np.ndarray:
    tmp = np.stack([restrict_halving_1d(fine[:, j], periodic)
                    for j in range(fine.shape[1])], axis=1)
    return np.stack([restrict_halving_1d(tmp[i, :], periodic)
                     for i in range(tmp.shape[0])], axis=0)


def _mesh_solution(task):
    """One convergence run; top-level so mesh workers can be forked."""
    case_name, n, eps, cfl, accuracy_mode, t_final, scheme, field_name = task
    spec = get_case(case_name)
    g, st, bathy, bc, params = build(
        spec, nx=n, ny=n if spec.dim == 2 else None, eps=eps, cfl=cfl,
        accuracy_mode=accuracy_mode)
    tf = spec.t_final if t_final is None else t_final
    st, _ = advance_to(st, bathy, tf, scheme, params, bc)
    return g.interior(getattr(st, field_name)).copy()


def converge(config: RunConfig, mesh_list, field_name: str = "hu",
             parallel_meshes: bool = False) -> ConvergenceReport:
    """Self-convergence study on strictly doubling meshes.

    The L1 pair error ||u_N - restrict(u_2N)||_1 is attributed to the finer
    mesh; observed orders are log2 ratios of consecutive pair errors.
    parallel_meshes runs the meshes in worker processes (results identical
    to the sequential mode; only wall time changes).
    """
    config.validate()
    meshes = [int(n) for n in mesh_list]
    for a, b in zip(meshes, meshes[1:]):
        if b != 2 * a:
            raise ConfigError("convergence meshes must double: got "
                              f"{a} -> {b}")
    spec = get_case(config.case)
    periodic = spec.bc_sides["left"] == "periodic"
    if not periodic:
        raise ConfigError("self-convergence restriction requires a periodic case")

    tasks = [(config.case, n, config.eps, config.cfl, config.accuracy_mode,
              config.t_final, config.scheme, field_name) for n in meshes]
    if parallel_meshes and len(meshes) > 1:
        import multiprocessing as mp
        order = sorted(range(len(meshes)), key=lambda k: -meshes[k])
        nproc = min(len(meshes), mp.cpu_count())
        with mp.get_context("fork").Pool(nproc) as pool:
            done = pool.map(_mesh_solution, [tasks[k] for k in order], chunksize=1)
        arrs: list = [None] * len(meshes)
        for k, arr in zip(order, done):
            arrs[k] = arr
    else:
        arrs = [_mesh_solution(t) for t in tasks]
    solutions = [(n, spec.grid(n, n if spec.dim == 2 else None), arr)
                 for n, arr in zip(meshes, arrs)]

    report = ConvergenceReport(config.case, field_name, meshes)
    for (n_c, g_c, coarse), (n_f, _, fine) in zip(solutions, solutions[1:]):
        if spec.dim == 1:
            fine_on_coarse = restrict_halving_1d(fine, periodic=True)
            cell = g_c.dx
        else:
            fine_on_coarse = restrict_halving_2d(fine, periodic=True)
            cell = g_c.dx * g_c.dy
        err = float(np.sum(np.abs(fine_on_coarse - coarse))) * cell
        report.errors.append(err)
    for e_coarse, e_fine in zip(report.errors, report.errors[1:]):
        if e_fine > 0.0 and e_coarse > 0.0:
            report.orders.append(float(np.log2(e_coarse / e_fine)))
        else:
            report.orders.append(float("nan"))
    return report


def compare_steps(case_name: str, eps_list, nx: int | None = None,
                  ny: int | None = None, t_final: float | None = None) -> list[dict]:
    """imex3 vs explicit-ref step counts (and informational wall times)."""
    spec = get_case(case_name)
    rows = []
    for eps in eps_list:
        row = {"eps": float(eps)}
        for scheme in ("imex3", "explicit-ref"):
            g, st, bathy, bc, params = build(spec, nx=nx, ny=ny, eps=float(eps))
            tf = spec.t_final if t_final is None else t_final
            st, stats = advance_to(st, bathy, tf, scheme, params, bc)
            key = "imex" if scheme == "imex3" else "explicit"
            row[f"{key}_steps"] = stats.steps
            row[f"{key}_wall_s"] = stats.wall_time
        row["step_ratio"] = row["explicit_steps"] / max(row["imex_steps"], 1)
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

def _parse_config_file(path: str) -> dict:
    """Line-oriented key=value text; '#' starts a comment."""
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"bad config line (expected key=value): {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


_BOOL_TRUE = {"1", "true", "yes", "on"}


def _coerce(key: str, val):
    if val is None or not isinstance(val, str):
        return val
    if key in ("nx", "ny"):
        return int(val)
    if key in ("eps", "cfl", "tfinal"):
        return float(val)
    if key == "accuracy_mode":
        return val.lower() in _BOOL_TRUE
    if key == "snap_times":
        return tuple(float(s) for s in val.split(",") if s.strip())
    return val


def _make_run_config(args) -> RunConfig:
    cfg = {}
    if getattr(args, "config", None):
        cfg.update(_parse_config_file(args.config))
    for key in ("case", "scheme", "nx", "ny", "eps", "cfl", "tfinal",
                "accuracy_mode", "out", "snap_times"):
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = flag
    cfg = {k: _coerce(k, v) for k, v in cfg.items()}
    if "case" not in cfg:
        raise ConfigError("a case must be given (--case or config file)")
    snap = cfg.get("snap_times") or ()
    return RunConfig(
        case=cfg["case"], scheme=cfg.get("scheme", "imex3"),
        nx=cfg.get("nx"), ny=cfg.get("ny"), eps=cfg.get("eps"),
        cfl=cfg.get("cfl", 0.2), t_final=cfg.get("tfinal"),
        accuracy_mode=bool(cfg.get("accuracy_mode", False)),
        out=cfg.get("out"), snap_times=tuple(snap))


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--case", help="case id, e.g. " + ", ".join(sorted(CASES)))
    p.add_argument("--scheme", choices=SCHEMES, default=None)
    p.add_argument("--nx", type=int)
    p.add_argument("--ny", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--cfl", type=float)
    p.add_argument("--tfinal", type=float)
    p.add_argument("--accuracy-mode", dest="accuracy_mode",
                   action="store_const", const=True, default=None)
    p.add_argument("--out")
    p.add_argument("--snap-times", dest="snap_times",
                   help="comma-separated snapshot times")
    p.add_argument("--config", help="key=value config file; flags override")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="stillwater",
        description="Well-balanced semi-implicit shallow water solver")
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run one case and write snapshots")
    _add_common(p_run)

    p_conv = sub.add_parser("converge", help="self-convergence study")
    _add_common(p_conv)
    p_conv.add_argument("--meshes", help="comma-separated doubling mesh list")
    p_conv.add_argument("--field", default="hu", choices=("h", "hu", "hv"))
    p_conv.add_argument("--parallel-meshes", dest="parallel_meshes",
                        action="store_true",
                        help="run meshes in worker processes")

    p_cmp = sub.add_parser("compare", help="imex3 vs explicit-ref step counts")
    _add_common(p_cmp)
    p_cmp.add_argument("--eps-list", dest="eps_list",
                       help="comma-separated Froude numbers")

    p_suite = sub.add_parser("suite", help="run the property suites")
    p_suite.add_argument("--quick", action="store_true",
                         help="shorter runs for smoke checking")

    args = parser.parse_args(argv)
    try:
        if args.verb == "run":
            run(_make_run_config(args))
            return 0
        if args.verb == "converge":
            config = _make_run_config(args)
            if config.t_final is None and not config.accuracy_mode:
                config.accuracy_mode = True
            spec = get_case(config.case)
            meshes = ([int(s) for s in args.meshes.split(",")]
                      if args.meshes else list(spec.meshes[:4] or (40, 80, 160)))
            report = converge(config, meshes, args.field,
                              parallel_meshes=args.parallel_meshes)
            out_dir = config.out_dir()
            out_dir.mkdir(parents=True, exist_ok=True)
            report.write_csv(out_dir / "convergence.csv")
            for n, err, order in report.rows():
                otxt = "--" if order is None else f"{order:.2f}"
                print(f"N={n:5d}  L1={err:.4e}  order={otxt}")
            return 0
        if args.verb == "compare":
            config = _make_run_config(args)
            eps_list = ([float(s) for s in args.eps_list.split(",")]
                        if args.eps_list else [1.0, 0.05, 0.01])
            rows = compare_steps(config.case, eps_list, nx=config.nx,
                                 ny=config.ny, t_final=config.t_final)
            out_dir = config.out_dir()
            out_dir.mkdir(parents=True, exist_ok=True)
            with open(out_dir / "compare.csv", "w") as f:
                f.write("eps,imex_steps,explicit_steps,step_ratio,"
                        "imex_wall_s,explicit_wall_s\n")
                for r in rows:
                    f.write(f"{r['eps']:g},{r['imex_steps']},{r['explicit_steps']},"
                            f"{r['step_ratio']:.2f},{r['imex_wall_s']:.3f},"
                            f"{r['explicit_wall_s']:.3f}\n")
            for r in rows:
                print(f"eps={r['eps']:<8g} imex {r['imex_steps']:>7d} steps  "
                      f"explicit {r['explicit_steps']:>8d} steps  "
                      f"ratio {r['step_ratio']:.1f}")
            return 0
        if args.verb == "suite":
            ok = proofs.run_suite(quick=args.quick)
            return 0 if ok else 3
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except SolverError as err:
        print(f"solver failure: {err}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line driver: `solve`, `sweep`, and `verify`.

Run configurations are flat INI-style files with sections (see
parse_config for the schema).  Exit codes: 0 success with all invariant
checks passing, 1 configuration or snapshot errors, 2 invariant failures,
3 solver non-convergence.  MCSVORTEX_THREADS (default 1) caps the thread
fan-out of independent diagnostic checks.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import diagnostics
from .background import VortexConfig, compute_u0
from .errors import (
    BoundsViolation,
    ConfigError,
    MCSVortexError,
    NoConvergence,
    QTooSmall,
    SnapshotError,
)
from .grid import GridSpec, sup_norm
from .nonlinearity import model_from_name
from .snapshots import read_solution, write_solution
from .solver import ProblemSpec, SolutionBundle, q_sweep, solve_coupled

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_CHECK_FAILED = 2
EXIT_NO_CONVERGENCE = 3


@dataclass
class RunConfig:
    """Validated contents of one configuration file."""

    model_name: str
    s: float | None
    table: tuple | None
    points: list  # [(x, y, multiplicity), ...]
    sigma_cells: float
    N: int
    q: float | None
    q_list: list | None
    newton_tol: float
    krylov_tol: float
    max_newton_iters: int
    bound_tol: float | None
    out_dir: str

    def build_spec(self, q: float) -> ProblemSpec:
        grid = GridSpec(self.N)
        vortices = VortexConfig(
            points=tuple((x, y) for x, y, _ in self.points),
            multiplicities=tuple(m for _, _, m in self.points),
            sigma=self.sigma_cells * grid.h,
        )
        model = model_from_name(self.model_name, self.s, self.table)
        return ProblemSpec(
            model=model,
            vortices=vortices,
            q=q,
            grid=grid,
            newton_tol=self.newton_tol,
            krylov_tol=self.krylov_tol,
            max_newton_iters=self.max_newton_iters,
            bound_tol=self.bound_tol,
        )


def _load_table(path: Path) -> tuple:
    try:
        data = np.loadtxt(path, comments="#")
    except OSError as exc:
        raise ConfigError(f"[model] table: cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"[model] table: malformed numeric data: {exc}") from exc
    if data.ndim != 2 or data.shape[1] != 2:
        raise ConfigError("[model] table: need two columns (t, f)")
    return data[:, 0], data[:, 1]


def parse_config(path) -> RunConfig:
    """Parse and validate a run configuration.

    Schema (key = value, '#' comments, values may continue onto indented
    lines):

        [model]    name (u1 | cp1 | custom), s (optional), table (custom)
        [vortices] points (one "x y multiplicity" triple per line), sigma
                   (units of h, default 4, >= 2)
        [grid]     N (even, >= 8)
        [solver]   q or q_list, newton_tol, krylov_tol, max_newton_iters,
                   bound_tol (all tolerances optional)
        [output]   dir (default "out")
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    def get(section, key, default=None):
        if parser.has_option(section, key):
            return parser.get(section, key).strip()
        return default

    def get_float(section, key, default=None):
        raw = get(section, key)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key}: not a number: {raw!r}") from exc

    model_name = get("model", "name")
    if model_name not in ("u1", "cp1", "custom"):
        raise ConfigError(
            f"[model] name must be one of u1 | cp1 | custom, got {model_name!r}"
        )
    s = get_float("model", "s")
    table = None
    if model_name == "custom":
        table_path = get("model", "table")
        if table_path is None or s is None:
            raise ConfigError("[model] custom model needs both 'table' and 's'")
        table = _load_table(path.parent / table_path)

    points = []
    raw_points = get("vortices", "points", "")
    for lineno, line in enumerate(raw_points.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ConfigError(
                f"[vortices] points line {lineno}: expected 'x y multiplicity', got {line!r}"
            )
        try:
            x, y, m = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ConfigError(f"[vortices] points line {lineno}: {exc}") from exc
        if not (0.0 <= x < 1.0 and 0.0 <= y < 1.0):
            raise ConfigError(
                f"[vortices] points line {lineno}: ({x}, {y}) outside [0,1)^2"
            )
        if m < 1:
            raise ConfigError(
                f"[vortices] points line {lineno}: multiplicity must be >= 1"
            )
        points.append((x, y, m))
    sigma_cells = get_float("vortices", "sigma", 4.0)
    if sigma_cells < 2.0:
        raise ConfigError(f"[vortices] sigma must be >= 2 grid cells, got {sigma_cells}")

    raw_n = get("grid", "N")
    if raw_n is None:
        raise ConfigError("[grid] N is required")
    try:
        n_grid = int(raw_n)
        GridSpec(n_grid)
    except ValueError as exc:
        raise ConfigError(f"[grid] N: {exc}") from exc

    q = get_float("solver", "q")
    q_list = None
    raw_q_list = get("solver", "q_list")
    if raw_q_list is not None:
        try:
            q_list = [float(tok) for tok in raw_q_list.split()]
        except ValueError as exc:
            raise ConfigError(f"[solver] q_list: {exc}") from exc
        if any(v <= 0.0 for v in q_list):
            raise ConfigError("[solver] q_list entries must be positive")
        if any(b <= a for a, b in zip(q_list, q_list[1:])):
            raise ConfigError("[solver] q_list must be ascending")
    if q is None and q_list is None:
        raise ConfigError("[solver] needs q or q_list")
    if q is not None and q <= 0.0:
        raise ConfigError(f"[solver] q must be positive, got {q}")

    cfg = RunConfig(
        model_name=model_name,
        s=s,
        table=table,
        points=points,
        sigma_cells=sigma_cells,
        N=n_grid,
        q=q,
        q_list=q_list,
        newton_tol=get_float("solver", "newton_tol", 1e-6),
        krylov_tol=get_float("solver", "krylov_tol", 1e-10),
        max_newton_iters=int(get_float("solver", "max_newton_iters", 60)),
        bound_tol=get_float("solver", "bound_tol"),
        out_dir=get("output", "dir", "out"),
    )
    try:  # surface model/vortex validation errors as config errors
        cfg.build_spec(q if q is not None else q_list[0])
    except (ValueError, MCSVortexError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def _thread_count() -> int:
    raw = os.environ.get("MCSVORTEX_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _print_reports(reports, stream=sys.stdout) -> None:
    width = max(len(r.name) for r in reports)
    for r in reports:
        if r.status == "not_applicable":
            line = f"{r.name:<{width}}  NOT_APPLICABLE"
        else:
            line = (
                f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL'}  "
                f"disc={r.abs_discrepancy:.17e}  rel={r.rel_discrepancy:.17e}  "
                f"tol={r.tolerance:.3e} ({r.tol_kind})"
            )
        print(line, file=stream)


def cmd_solve(args) -> int:
    try:
        cfg = parse_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if cfg.q is None:
        print("config error: [solver] solve needs a single q", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = Path(args.out or cfg.out_dir)
    spec = cfg.build_spec(cfg.q)
    try:
        bundle = solve_coupled(spec)
    except (NoConvergence, QTooSmall) as exc:
        _write_failure(out_dir, spec, exc)
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except BoundsViolation as exc:
        _write_failure(out_dir, spec, exc)
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    reports = diagnostics.all_reports(bundle, threads=_thread_count())
    write_solution(out_dir, bundle, reports, model_table=cfg.table)
    print(f"converged in {bundle.newton_iters} Newton steps")
    print(f"energy = {bundle.energy_value:.17e}")
    for name, value in bundle.residual_norms.items():
        print(f"residual {name} = {value:.17e}")
    _print_reports(reports)
    print(f"artifacts written to {out_dir}")
    return EXIT_OK if all(not r.failed for r in reports) else EXIT_CHECK_FAILED


def _write_failure(out_dir: Path, spec: ProblemSpec, exc: Exception) -> None:
    import json

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    record = {
        "format": "mcsvortex-failure",
        "error": type(exc).__name__,
        "message": str(exc),
        "model": spec.model.name,
        "q": spec.q,
        "N": spec.grid.N,
    }
    with (out_dir / "failure.json").open("w") as handle:
        json.dump(record, handle, indent=2)
        handle.write("\n")


def cmd_sweep(args) -> int:
    try:
        cfg = parse_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if cfg.q_list is None or len(cfg.q_list) < 2:
        print(
            "config error: [solver] sweep needs q_list with >= 2 ascending entries",
            file=sys.stderr,
        )
        return EXIT_CONFIG
    out_dir = Path(args.out or cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    spec = cfg.build_spec(cfg.q_list[0])
    try:
        table = q_sweep(spec, cfg.q_list)
    except (NoConvergence, QTooSmall) as exc:
        # the shared limit solve failed: no row can be produced
        _write_failure(out_dir, spec, exc)
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    table_path = out_dir / "sweep.tsv"
    table.write(table_path)
    print(f"sweep table written to {table_path}")
    for row in table.rows:
        print(
            f"q={row.q:g}  status={row.status}  d_v={row.d_v:.17e}"
            if row.status == "converged"
            else f"q={row.q:g}  status={row.status}  ({row.message})"
        )
    statuses = {row.status for row in table.rows}
    if statuses & {"no_convergence", "q_too_small", "error"}:
        return EXIT_NO_CONVERGENCE
    if "bounds_violation" in statuses:
        return EXIT_CHECK_FAILED
    return EXIT_OK


def bundle_from_snapshot(path) -> tuple[SolutionBundle, dict]:
    """Rebuild a SolutionBundle from stored fields and metadata."""
    meta, fields = read_solution(path)
    grid = GridSpec(int(meta["grid"]["N"]))
    vx = meta["vortices"]
    vortices = VortexConfig(
        points=tuple((float(x), float(y)) for x, y in vx["points"]),
        multiplicities=tuple(int(m) for m in vx["multiplicities"]),
        sigma=float(vx["sigma"]),
    )
    table = None
    if "table" in meta["model"]:
        ts, fs = meta["model"]["table"]
        table = (np.asarray(ts), np.asarray(fs))
    model = model_from_name(
        meta["model"]["name"], meta["model"].get("s"), table
    )
    tol = meta.get("tolerances", {})
    spec = ProblemSpec(
        model=model,
        vortices=vortices,
        q=float(meta["q"]),
        grid=grid,
        newton_tol=float(tol.get("newton_tol", 1e-8)),
        krylov_tol=float(tol.get("krylov_tol", 1e-10)),
        max_newton_iters=int(tol.get("max_newton_iters", 60)),
        bound_tol=tol.get("bound_tol"),
    )
    background = compute_u0(vortices, grid)
    if sup_norm(background.u0 - fields["u0"]) > 1e-10:
        raise SnapshotError(
            f"{path}: stored u0 does not match its vortex configuration"
        )
    bundle = SolutionBundle(
        spec=spec,
        background=background,
        u=fields["u"],
        v=fields["v"],
        w=fields["w"],
        residual_norms=dict(meta.get("residual_norms", {})),
        newton_iters=int(meta.get("newton_iters", 0)),
        energy_value=float(meta.get("energy", np.nan)),
    )
    return bundle, meta


def cmd_verify(args) -> int:
    any_failed = False
    threads = _thread_count()
    for target in args.snapshots:
        try:
            bundle, _ = bundle_from_snapshot(target)
        except (SnapshotError, MCSVortexError, ValueError, KeyError) as exc:
            print(f"snapshot error: {target}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        reports = diagnostics.all_reports(bundle, threads=threads)
        print(f"== {target}")
        _print_reports(reports)
        any_failed |= any(r.failed for r in reports)
    return EXIT_CHECK_FAILED if any_failed else EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mcsvortex",
        description="Spectral solver and verification harness for "
        "Maxwell-Chern-Simons vortex systems on the unit torus.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve at a single coupling")
    p_solve.add_argument("--config", required=True)
    p_solve.add_argument("--out", default=None)
    p_solve.set_defaults(fn=cmd_solve)

    p_sweep = sub.add_parser("sweep", help="warm-started sweep over q_list")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out", default=None)
    p_sweep.set_defaults(fn=cmd_sweep)

    p_verify = sub.add_parser("verify", help="re-check stored snapshots")
    p_verify.add_argument("snapshots", nargs="+")
    p_verify.set_defaults(fn=cmd_verify)

    args = parser.parse_args(argv)
    return args.fn(args)


def entrypoint() -> None:  # console-script shim
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()

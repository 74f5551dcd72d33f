"""Field snapshots and the solve summary record.

Snapshot layout (all little-endian):

    bytes 0..7    magic b"TVFIELD1"
    uint32        format version (currently 1)
    uint32        N, grid points per axis
    N*N float64   field values, row-major

A solve directory holds one snapshot per field (u.fld, v.fld, w.fld,
u0.fld) next to a self-describing solution.json carrying the problem data,
residuals, and every invariant report, so stored results can be re-verified
without the original config file.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import SnapshotError
from .grid import GridSpec, ScalarField

MAGIC = b"TVFIELD1"
VERSION = 1

FIELD_FILES = ("u", "v", "w", "u0")


def write_field(path, field: ScalarField) -> None:
    path = Path(path)
    with path.open("wb") as handle:
        handle.write(MAGIC)
        handle.write(struct.pack("<II", VERSION, field.grid.N))
        handle.write(field.values.astype("<f8").tobytes(order="C"))


def read_field(path, grid: GridSpec | None = None) -> ScalarField:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise SnapshotError(f"cannot read snapshot {path}: {exc}") from exc
    header = struct.calcsize("<II")
    if len(blob) < len(MAGIC) + header or blob[: len(MAGIC)] != MAGIC:
        raise SnapshotError(f"{path} is not a field snapshot (bad magic)")
    version, n = struct.unpack_from("<II", blob, len(MAGIC))
    if version != VERSION:
        raise SnapshotError(f"{path}: unsupported snapshot version {version}")
    payload = blob[len(MAGIC) + header :]
    if len(payload) != 8 * n * n:
        raise SnapshotError(f"{path}: truncated payload for N={n}")
    values = np.frombuffer(payload, dtype="<f8").reshape(n, n).astype(float)
    if grid is None:
        grid = GridSpec(n)
    elif grid.N != n:
        raise SnapshotError(f"{path}: grid N={n} does not match expected N={grid.N}")
    try:
        return ScalarField(grid, values)
    except ValueError as exc:
        raise SnapshotError(f"{path}: {exc}") from exc


def write_solution(out_dir, bundle, reports, model_table=None) -> Path:
    """Write field snapshots plus solution.json; returns the json path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    spec = bundle.spec
    cfg = spec.vortices
    fields = {
        "u": bundle.u,
        "v": bundle.v,
        "w": bundle.w,
        "u0": bundle.background.u0,
    }
    for name, field in fields.items():
        write_field(out_dir / f"{name}.fld", field)
    meta = {
        "format": "mcsvortex-solution",
        "version": VERSION,
        "model": {"name": spec.model.name, "s": spec.model.s},
        "vortices": {
            "points": [list(p) for p in cfg.points],
            "multiplicities": list(cfg.multiplicities),
            "sigma": cfg.sigma,
        },
        "grid": {"N": spec.grid.N},
        "q": spec.q,
        "tolerances": {
            "newton_tol": spec.newton_tol,
            "krylov_tol": spec.krylov_tol,
            "max_newton_iters": spec.max_newton_iters,
            "bound_tol": spec.resolved_bound_tol(),
        },
        "residual_norms": bundle.residual_norms,
        "newton_iters": bundle.newton_iters,
        "energy": bundle.energy_value,
        "reports": [r.to_dict() for r in reports],
        "fields": {name: f"{name}.fld" for name in fields},
    }
    if model_table is not None:
        ts, fs = model_table
        meta["model"]["table"] = [list(map(float, ts)), list(map(float, fs))]
    path = out_dir / "solution.json"
    with path.open("w") as handle:
        json.dump(meta, handle, indent=2)
        handle.write("\n")
    return path


def locate_solution(path) -> Path:
    path = Path(path)
    if path.is_dir():
        path = path / "solution.json"
    elif path.suffix == ".fld":
        path = path.parent / "solution.json"
    if not path.is_file():
        raise SnapshotError(f"no solution.json found at or beside {path}")
    return path


def read_solution(path) -> tuple[dict, dict]:
    """Load (metadata, fields) from a solve directory or solution.json path."""
    json_path = locate_solution(path)
    try:
        meta = json.loads(json_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SnapshotError(f"cannot parse {json_path}: {exc}") from exc
    if meta.get("format") != "mcsvortex-solution":
        raise SnapshotError(f"{json_path} is not a solution record")
    try:
        n = int(meta["grid"]["N"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SnapshotError(f"{json_path}: missing grid data") from exc
    grid = GridSpec(n)
    fields = {}
    for name, rel in meta.get("fields", {}).items():
        fields[name] = read_field(json_path.parent / rel, grid)
    missing = set(FIELD_FILES) - set(fields)
    if missing:
        raise SnapshotError(f"{json_path}: missing field snapshots {sorted(missing)}")
    return meta, fields

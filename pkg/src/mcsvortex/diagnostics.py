"""Executable versions of the theory's identities and bounds, plus
convergence metrics against the limit profile.

Every check is a deterministic, read-only function of a solution bundle
that returns an InvariantReport; failures are reported, never thrown.
Identities that involve near-core gradients get tolerance 1e-4 (quadrature
of the mollified cores dominates), pure quadrature identities 1e-6..1e-8.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import GridMismatch
from .grid import ScalarField, grad_squared, integrate, laplacian, sobolev_norm
from .solver import LimitSolution, SolutionBundle, _Workspace

FOUR_PI = 4.0 * np.pi


@dataclass(frozen=True)
class InvariantReport:
    name: str
    lhs: object
    rhs: object
    abs_discrepancy: float
    rel_discrepancy: float
    tolerance: float
    tol_kind: str  # "relative" | "absolute"
    status: str  # "pass" | "fail" | "not_applicable"
    details: dict = dc_field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    @property
    def failed(self) -> bool:
        return self.status == "fail"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "abs_discrepancy": self.abs_discrepancy,
            "rel_discrepancy": self.rel_discrepancy,
            "tolerance": self.tolerance,
            "tol_kind": self.tol_kind,
            "status": self.status,
            "details": self.details,
        }


def _make_report(
    name: str,
    lhs,
    rhs,
    abs_disc: float,
    scale: float,
    tolerance: float,
    tol_kind: str,
    details: dict | None = None,
) -> InvariantReport:
    rel = abs_disc / scale if scale > 0.0 else abs_disc
    disc = rel if tol_kind == "relative" else abs_disc
    return InvariantReport(
        name=name,
        lhs=lhs,
        rhs=rhs,
        abs_discrepancy=float(abs_disc),
        rel_discrepancy=float(rel),
        tolerance=float(tolerance),
        tol_kind=tol_kind,
        status="pass" if disc <= tolerance else "fail",
        details=details or {},
    )


def _state(bundle: SolutionBundle) -> tuple[_Workspace, dict]:
    ws = _Workspace(bundle.grid, bundle.model, bundle.background, bundle.q)
    return ws, ws.state(bundle.u.values)


def check_bounds(bundle: SolutionBundle) -> InvariantReport:
    """Pointwise bounds f(0) <= f(e^{u*}) <= s and f(0) <= v <= s,
    with bound_tol slack for the mollified discretization."""
    _, st = _state(bundle)
    model = bundle.model
    f0, s = model.f0, model.s
    fe_min, fe_max = float(st["f"].min()), float(st["f"].max())
    v_min, v_max = bundle.v.min(), bundle.v.max()
    worst = max(f0 - fe_min, fe_max - s, f0 - v_min, v_max - s, 0.0)
    return _make_report(
        "pointwise_bounds",
        lhs=(fe_min, fe_max, v_min, v_max),
        rhs=(f0, s),
        abs_disc=worst,
        scale=abs(s - f0),
        tolerance=bundle.spec.resolved_bound_tol(),
        tol_kind="absolute",
        details={
            "f_e_min": fe_min,
            "f_e_max": fe_max,
            "v_min": v_min,
            "v_max": v_max,
            "f0": f0,
            "s": s,
        },
    )


def check_flux(bundle: SolutionBundle) -> InvariantReport:
    """Flux quantization: integral(c*(s-v)) = q*integral(v - f) = 4*pi*n,
    both integrals obtained by integrating the two equations."""
    _, st = _state(bundle)
    grid, q, n = bundle.grid, bundle.q, bundle.background.n
    h2 = grid.h**2
    i1 = h2 * float(np.sum(st["c"] * (bundle.model.s - bundle.v.values)))
    i2 = q * h2 * float(np.sum(bundle.v.values - st["f"]))
    target = FOUR_PI * n
    abs_disc = max(abs(i1 - target), abs(i2 - target))
    tol_kind = "relative" if n > 0 else "absolute"
    return _make_report(
        "flux_quantization",
        lhs=(i1, i2),
        rhs=target,
        abs_disc=abs_disc,
        scale=abs(target),
        tolerance=1e-6 if n > 0 else 1e-8,
        tol_kind=tol_kind,
        details={"lhs_gap": abs(i1 - i2)},
    )


def check_identity(bundle: SolutionBundle) -> InvariantReport:
    """Gradient-energy identity:
    integral(|grad v|^2) + q^2 integral((v-f)^2)
      = integral((s-v)(f'' e^{u*} + f') e^{u*}|grad u*|^2)
      + 4 pi integral((s-v) c source),
    the last term carrying the mollified cores."""
    ws, st = _state(bundle)
    grid, q = bundle.grid, bundle.q
    h2 = grid.h**2
    s = bundle.model.s
    v = bundle.v.values
    lhs = integrate(grad_squared(bundle.v)) + q * q * h2 * float(
        np.sum((v - st["f"]) ** 2)
    )
    wg = ws.weighted_gradsq(st)
    w2 = (st["fpp"] * st["t"] + st["fp"]) * wg
    rhs = h2 * float(
        np.sum((s - v) * w2) + FOUR_PI * np.sum((s - v) * st["c"] * ws.source)
    )
    n = bundle.background.n
    tol_kind = "relative" if n > 0 else "absolute"
    return _make_report(
        "gradient_energy_identity",
        lhs=lhs,
        rhs=rhs,
        abs_disc=abs(lhs - rhs),
        scale=max(abs(lhs), abs(rhs)),
        tolerance=1e-4 if n > 0 else 1e-10,
        tol_kind=tol_kind,
    )


def check_gradu(bundle: SolutionBundle) -> InvariantReport:
    """Weighted gradient identity:
    integral(e^{u*}|grad u*|^2) = q integral(e^{u*}(v-f)) - 4 pi integral(e^{u*} source).
    Reports the common (q-uniformly bounded) value; the uncorrected
    right-hand side is kept in the details."""
    ws, st = _state(bundle)
    h2 = bundle.grid.h**2
    q = bundle.q
    a = h2 * float(np.sum(ws.weighted_gradsq(st)))
    b_dirac = q * h2 * float(np.sum(st["t"] * (bundle.v.values - st["f"])))
    b = b_dirac - FOUR_PI * h2 * float(np.sum(st["t"] * ws.source))
    n = bundle.background.n
    tol_kind = "relative" if n > 0 else "absolute"
    return _make_report(
        "weighted_gradient_identity",
        lhs=a,
        rhs=b,
        abs_disc=abs(a - b),
        scale=max(abs(a), abs(b)),
        tolerance=1e-6 if n > 0 else 1e-10,
        tol_kind=tol_kind,
        details={"rhs_uncorrected": b_dirac, "ratio": a / b if b != 0.0 else np.nan},
    )


def _torus_distance(a: tuple[float, float], b: tuple[float, float]) -> float:
    dx = abs(a[0] - b[0])
    dy = abs(a[1] - b[1])
    dx = min(dx, 1.0 - dx)
    dy = min(dy, 1.0 - dy)
    return float(np.hypot(dx, dy))


def check_max_location(bundle: SolutionBundle) -> InvariantReport:
    """v attains its maximum away from every vortex core (distance > 5 sigma).
    Not applicable when n = 0 (v is constant)."""
    cfg = bundle.background.config
    if cfg.n == 0:
        return InvariantReport(
            name="max_location",
            lhs=None,
            rhs=None,
            abs_discrepancy=0.0,
            rel_discrepancy=0.0,
            tolerance=0.0,
            tol_kind="absolute",
            status="not_applicable",
            details={"reason": "no vortices: v is constant"},
        )
    grid = bundle.grid
    idx = np.unravel_index(int(np.argmax(bundle.v.values)), bundle.v.values.shape)
    argmax = (float(grid.X[idx]), float(grid.Y[idx]))
    dist = min(_torus_distance(argmax, p) for p in cfg.points)
    threshold = 5.0 * cfg.sigma
    return _make_report(
        "max_location",
        lhs=dist,
        rhs=threshold,
        abs_disc=max(0.0, threshold - dist),
        scale=threshold,
        tolerance=0.0,
        tol_kind="absolute",
        details={"argmax": argmax, "min_core_distance": dist},
    )


def residual_reports(bundle: SolutionBundle) -> list[InvariantReport]:
    """PDE residuals of the stored fields plus the w-definition identity."""
    _, st = _state(bundle)
    grid, q, n = bundle.grid, bundle.q, bundle.background.n
    tol = bundle.spec.newton_tol
    u, v, w = bundle.u, bundle.v, bundle.w

    res_a = -laplacian(u).values - q * (v.values - st["f"]) + FOUR_PI * n
    res_b = -laplacian(v).values - q * (
        st["c"] * (bundle.model.s - v.values) - q * (v.values - st["f"])
    )
    w_gap = float(np.abs(w.values - q * (v.values - st["f"])).max()) / q

    def l2(arr):
        return float(grid.h * np.sqrt(np.sum(arr * arr)))

    return [
        _make_report(
            "residual_first_equation",
            lhs=l2(res_a), rhs=0.0, abs_disc=l2(res_a), scale=1.0,
            tolerance=tol, tol_kind="absolute",
        ),
        _make_report(
            "residual_second_equation",
            lhs=l2(res_b), rhs=0.0, abs_disc=l2(res_b), scale=1.0,
            tolerance=tol, tol_kind="absolute",
        ),
        _make_report(
            "w_definition",
            lhs=w_gap, rhs=0.0, abs_disc=w_gap, scale=1.0,
            tolerance=1e-12, tol_kind="absolute",
        ),
    ]


def all_reports(bundle: SolutionBundle, threads: int = 1) -> list[InvariantReport]:
    """Every invariant report for one bundle, in a fixed order."""
    checks = (check_bounds, check_flux, check_identity, check_gradu, check_max_location)
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            reports = list(pool.map(lambda fn: fn(bundle), checks))
    else:
        reports = [fn(bundle) for fn in checks]
    return reports + residual_reports(bundle)


@dataclass(frozen=True)
class MetricsRow:
    """Sup-norm and Sobolev distances between one solve and the limit."""

    d_eu: float
    d_v: float
    d_w: float
    h_u: tuple[float, float, float]
    h_v: tuple[float, float, float]


def convergence_metrics(bundle: SolutionBundle, limit: LimitSolution) -> MetricsRow:
    if bundle.grid != limit.grid:
        raise GridMismatch("bundle and limit solution live on different grids")
    if bundle.background.config != limit.background.config:
        raise GridMismatch("bundle and limit solution use different vortex data")
    model = bundle.model
    grid = bundle.grid

    e_star = np.exp(bundle.u_star.values)
    e_lim = np.exp(limit.u_star.values)
    f_lim, fp_lim, _ = model._eval_arrays(e_lim)
    w_lim = fp_lim * e_lim * (model.s - f_lim)

    d_eu = float(np.abs(e_star - e_lim).max())
    d_v = float(np.abs(bundle.v.values - f_lim).max())
    d_w = float(np.abs(bundle.w.values - w_lim).max())
    du = bundle.u - limit.u_inf
    dv = ScalarField(grid, bundle.v.values - f_lim)
    return MetricsRow(
        d_eu=d_eu,
        d_v=d_v,
        d_w=d_w,
        h_u=tuple(sobolev_norm(du, k) for k in (0, 1, 2)),
        h_v=tuple(sobolev_norm(dv, k) for k in (0, 1, 2)),
    )


@dataclass(frozen=True)
class SweepRow:
    q: float
    status: str  # converged | no_convergence | q_too_small | bounds_violation
    message: str = ""
    d_eu: float = np.nan
    d_v: float = np.nan
    d_w: float = np.nan
    h_u: tuple = (np.nan, np.nan, np.nan)
    h_v: tuple = (np.nan, np.nan, np.nan)
    sob_u: tuple = (np.nan, np.nan, np.nan)
    sob_v: tuple = (np.nan, np.nan, np.nan)
    gradu_value: float = np.nan
    flux_rel_err: float = np.nan
    energy: float = np.nan
    genmcsb_residual: float = np.nan
    newton_iters: int = 0

    @classmethod
    def failed(cls, q: float, exc: Exception) -> "SweepRow":
        from .errors import BoundsViolation, NoConvergence, QTooSmall

        status = {
            NoConvergence: "no_convergence",
            QTooSmall: "q_too_small",
            BoundsViolation: "bounds_violation",
        }.get(type(exc), "error")
        return cls(q=q, status=status, message=str(exc))


_TSV_COLUMNS = (
    "q status d_eu d_v d_w h0_u h1_u h2_u h0_v h1_v h2_v "
    "sob0_u sob1_u sob2_u sob0_v sob1_v sob2_v "
    "gradu flux_rel_err energy genmcsb_residual newton_iters message"
).split()


@dataclass(frozen=True)
class ConvergenceTable:
    """Sweep rows keyed by q (ascending), with run provenance metadata."""

    meta: dict
    rows: list

    def row_values(self, row: SweepRow) -> list:
        return [
            row.q, row.status, row.d_eu, row.d_v, row.d_w,
            *row.h_u, *row.h_v, *row.sob_u, *row.sob_v,
            row.gradu_value, row.flux_rel_err, row.energy,
            row.genmcsb_residual, row.newton_iters, row.message,
        ]

    def to_tsv(self) -> str:
        def fmt(x) -> str:
            if isinstance(x, float):
                return f"{x:.17e}"
            return str(x)

        lines = [f"# {key} = {value}" for key, value in self.meta.items()]
        lines.append("\t".join(_TSV_COLUMNS))
        for row in self.rows:
            lines.append("\t".join(fmt(x) for x in self.row_values(row)))
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        with open(path, "w") as handle:
            handle.write(self.to_tsv())

"""Coupled-system solver: Newton-Krylov on the fourth-order variational
equation for the regular part u, recovery of v and w, the energy
functional, the large-coupling limit equation, and coupling sweeps.

The first equation is solved for v exactly (recover_v), which reduces the
coupled system to a single fourth-order equation in u that is the L2
gradient of the energy functional.  With mollified vortex sources the
exact-Dirac calculus leaves a core-localized vestige (e^{u*} no longer
annihilates the sources); the energy carries the compensating term
(4 pi / q) * integral(source * f(e^{u*})) and the gradient uses
(Laplacian(u) - 4 pi n) in its bracket so that stationarity is exactly
equivalent to the mollified two-field system.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.sparse.linalg import LinearOperator, minres

from .background import BackgroundData, VortexConfig, compute_u0
from .errors import BoundsViolation, NoConvergence, QTooSmall
from .grid import GridSpec, ScalarField, laplacian
from .nonlinearity import NonlinearityModel

FOUR_PI = 4.0 * np.pi


@dataclass(frozen=True)
class ProblemSpec:
    """Everything that determines one solve."""

    model: NonlinearityModel
    vortices: VortexConfig
    q: float
    grid: GridSpec
    # Default newton_tol respects the float64 evaluation floor of the
    # fourth-order residual (~eps * |k|_max^4 / q), which exceeds 1e-7 at
    # N = 256; tighter values are attainable on coarser grids / larger q.
    newton_tol: float = 1e-6
    krylov_tol: float = 1e-10
    max_newton_iters: int = 60
    bound_tol: float | None = None

    def __post_init__(self):
        if self.q <= 0.0:
            raise ValueError(f"coupling q must be positive, got {self.q}")

    def resolved_bound_tol(self) -> float:
        """Default slack 1e-6 + 10*sigma^2: mollification perturbs the
        maximum-principle bounds at O(sigma^2)."""
        if self.bound_tol is not None:
            return self.bound_tol
        return 1e-6 + 10.0 * self.vortices.sigma**2


@dataclass(frozen=True)
class SolutionBundle:
    """Converged (u, v, w) triple with background and diagnostics."""

    spec: ProblemSpec
    background: BackgroundData
    u: ScalarField
    v: ScalarField
    w: ScalarField
    residual_norms: dict
    newton_iters: int
    energy_value: float

    @property
    def q(self) -> float:
        return self.spec.q

    @property
    def model(self) -> NonlinearityModel:
        return self.spec.model

    @property
    def grid(self) -> GridSpec:
        return self.spec.grid

    @property
    def u_star(self) -> ScalarField:
        return self.background.u0 + self.u


@dataclass(frozen=True)
class LimitSolution:
    """Regular part of the large-coupling limit profile."""

    model: NonlinearityModel
    background: BackgroundData
    u_inf: ScalarField
    residual_norm: float
    newton_iters: int

    @property
    def grid(self) -> GridSpec:
        return self.background.grid

    @property
    def u_star(self) -> ScalarField:
        return self.background.u0 + self.u_inf


class _Workspace:
    """Per-solve scratch: raw-array assemblies sharing one background."""

    def __init__(
        self,
        grid: GridSpec,
        model: NonlinearityModel,
        bg: BackgroundData,
        q: float,
        forcing: ScalarField | None = None,
    ):
        self.grid = grid
        self.model = model
        self.bg = bg
        self.q = q
        self.n = bg.n
        self.exp_u0 = bg.exp_u0.values
        self.weight = bg.weight.values
        self.source = bg.source.values
        self.gx0 = bg.grad_exp_u0[0].values
        self.gy0 = bg.grad_exp_u0[1].values
        self.k2 = grid.k2
        self.forcing = None if forcing is None else forcing.values

    # -- pointwise state ---------------------------------------------------

    def state(self, u: np.ndarray) -> dict:
        eu = np.exp(u)
        t = self.exp_u0 * eu
        f, fp, fpp = self.model._eval_arrays(t)
        return {"u": u, "eu": eu, "t": t, "f": f, "fp": fp, "fpp": fpp, "c": fp * t}

    def grad_u(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        uh = np.fft.fft2(u)
        ux = np.real(np.fft.ifft2(self.grid._ikx * uh))
        uy = np.real(np.fft.ifft2(self.grid._iky * uh))
        return ux, uy

    def weighted_gradsq(self, st: dict) -> np.ndarray:
        """e^{u*} |grad u*|^2 assembled from the smooth background weight:
        e^u * weight + 2 e^u grad(e^{u0}).grad(u) + t |grad u|^2."""
        ux, uy = self.grad_u(st["u"])
        return (
            st["eu"] * self.weight
            + 2.0 * st["eu"] * (self.gx0 * ux + self.gy0 * uy)
            + st["t"] * (ux * ux + uy * uy)
        )

    # -- energy and gradient -----------------------------------------------

    def energy(self, u: np.ndarray) -> float:
        q = self.q
        with np.errstate(over="ignore", invalid="ignore"):
            eu = np.exp(u)
            t = self.exp_u0 * eu
            if not np.all(np.isfinite(t)):
                return np.inf
            f, fp, _ = self.model._eval_arrays(t)
            uh = np.fft.fft2(u)
            lap_u = np.real(np.fft.ifft2(-self.k2 * uh))
            ux = np.real(np.fft.ifft2(self.grid._ikx * uh))
            uy = np.real(np.fft.ifft2(self.grid._iky * uh))
            wg = (
                eu * self.weight
                + 2.0 * eu * (self.gx0 * ux + self.gy0 * uy)
                + t * (ux * ux + uy * uy)
            )
            h2 = self.grid.h**2
            total = (
                0.5 / q**2 * np.sum(lap_u**2)
                + 0.5 * np.sum(ux * ux + uy * uy)
                + (1.0 / q) * np.sum(fp * wg)
                + 0.5 * np.sum((f - self.model.s) ** 2)
                + FOUR_PI * self.n * np.sum(u)
                + (FOUR_PI / q) * np.sum(self.source * f)
            )
            if self.forcing is not None:
                total -= np.sum(self.forcing * u)
            total *= h2
        return float(total) if np.isfinite(total) else np.inf

    def gradient(self, u: np.ndarray, st: dict | None = None) -> np.ndarray:
        q = self.q
        st = st or self.state(u)
        uh = np.fft.fft2(u)
        lap_u = np.real(np.fft.ifft2(-self.k2 * uh))
        bilap_u = np.real(np.fft.ifft2(self.k2 * self.k2 * uh))
        lap_f = np.real(np.fft.ifft2(-self.k2 * np.fft.fft2(st["f"])))
        r = (
            bilap_u / q**2
            - lap_u
            - (lap_f + st["c"] * (lap_u - FOUR_PI * self.n)) / q
            + st["c"] * (st["f"] - self.model.s)
            + FOUR_PI * self.n
        )
        if self.forcing is not None:
            r = r - self.forcing
        return r

    def hessian_operator(self, u: np.ndarray, st: dict) -> LinearOperator:
        """Frechet derivative of the gradient at the frozen state."""
        q = self.q
        k2 = self.k2
        c = st["c"]
        cp = (st["fpp"] * st["t"] + st["fp"]) * st["t"]  # d c / d u
        lap_u = np.real(np.fft.ifft2(-k2 * np.fft.fft2(u)))
        V = (
            -cp * (lap_u - FOUR_PI * self.n) / q
            + cp * (st["f"] - self.model.s)
            + c * st["fp"] * st["t"]
        )
        N = self.grid.N

        def matvec(z: np.ndarray) -> np.ndarray:
            phi = z.reshape(N, N)
            ph = np.fft.fft2(phi)
            lap_phi = np.real(np.fft.ifft2(-k2 * ph))
            bilap_phi = np.real(np.fft.ifft2(k2 * k2 * ph))
            lap_cphi = np.real(np.fft.ifft2(-k2 * np.fft.fft2(c * phi)))
            out = (
                bilap_phi / q**2
                - lap_phi
                - (lap_cphi + c * lap_phi) / q
                + V * phi
            )
            return out.ravel()

        nn = N * N
        return LinearOperator((nn, nn), matvec=matvec, dtype=float)

    def coupled_preconditioner(self, st: dict) -> LinearOperator:
        """Exact spectral inverse of q^{-2} Lap^2 - Lap + lambda, with
        lambda = max(1, inf f' * inf e^{u*}) frozen for this Newton step."""
        lam = max(1.0, float(st["fp"].min()) * float(st["t"].min()))
        symbol = self.k2 * self.k2 / self.q**2 + self.k2 + lam
        N = self.grid.N

        def matvec(z: np.ndarray) -> np.ndarray:
            return np.real(
                np.fft.ifft2(np.fft.fft2(z.reshape(N, N)) / symbol)
            ).ravel()

        nn = N * N
        return LinearOperator((nn, nn), matvec=matvec, dtype=float)


def coefficient_fields(
    u: ScalarField, bg: BackgroundData, model: NonlinearityModel, q: float
):
    """Coefficient fields of the triangular form.

    Returns (c, F_q, G_q) where c = f'(e^{u*}) e^{u*},
    F_q = f(e^{u*}) + (s/q) c, and G_q is a callable of v producing

        c (s - v) + (1/q)(f''(e^{u*}) e^{u*} + f'(e^{u*})) e^{u*}|grad u*|^2
                  + (4 pi / q) c * source,

    the last term being the mollified-source compensation that exact Dirac
    masses would annihilate.
    """
    ws = _Workspace(u.grid, model, bg, q)
    st = ws.state(u.values)
    grid = u.grid
    c = ScalarField(grid, st["c"])
    f_q = ScalarField(grid, st["f"] + (model.s / q) * st["c"])
    wg = ws.weighted_gradsq(st)
    w2 = (st["fpp"] * st["t"] + st["fp"]) * wg

    def g_q(v: ScalarField) -> ScalarField:
        return ScalarField(
            grid,
            st["c"] * (model.s - v.values)
            + w2 / q
            + (FOUR_PI / q) * st["c"] * ws.source,
        )

    return c, f_q, g_q


def recover_v(
    u: ScalarField, bg: BackgroundData, model: NonlinearityModel, q: float
) -> ScalarField:
    """v = (-Laplacian(u) + 4 pi n)/q + f(e^{u0+u}); makes the first
    equation an identity by construction."""
    t = ScalarField(u.grid, bg.exp_u0.values * np.exp(u.values))
    f, _, _ = model.eval_field(t)
    lap_u = laplacian(u)
    return ScalarField(
        u.grid, (-lap_u.values + FOUR_PI * bg.n) / q + f.values
    )


def energy(
    u: ScalarField,
    spec: ProblemSpec,
    background: BackgroundData | None = None,
    forcing: ScalarField | None = None,
) -> float:
    """Value of the variational functional at u."""
    bg = background or compute_u0(spec.vortices, spec.grid)
    ws = _Workspace(spec.grid, spec.model, bg, spec.q, forcing)
    return ws.energy(u.values)


def energy_gradient(
    u: ScalarField,
    spec: ProblemSpec,
    background: BackgroundData | None = None,
    forcing: ScalarField | None = None,
) -> ScalarField:
    """L2 gradient of the energy: the fourth-order equation's left side."""
    bg = background or compute_u0(spec.vortices, spec.grid)
    ws = _Workspace(spec.grid, spec.model, bg, spec.q, forcing)
    return ScalarField(spec.grid, ws.gradient(u.values))


def initial_guess(bg: BackgroundData, model: NonlinearityModel) -> ScalarField:
    """Vortex-profile ansatz: e^{u0+u} = f^{-1}(s) * 2 e^{u0}/(1 + e^{u0}),
    which dips to zero at the cores and is exact when there are none."""
    t_far = model.inverse(model.s)
    vals = np.log(t_far) + np.log(2.0) - np.log1p(bg.exp_u0.values)
    return ScalarField(bg.grid, vals)


def _l2(grid: GridSpec, values: np.ndarray) -> float:
    return float(grid.h * np.sqrt(np.sum(values * values)))


def _minres_direction(
    H: LinearOperator, M: LinearOperator, rhs: np.ndarray, rtol: float, maxiter: int
) -> np.ndarray:
    sol, _ = minres(H, rhs, rtol=rtol, maxiter=maxiter, M=M)
    return sol


def solve_coupled(
    spec: ProblemSpec,
    init: ScalarField | None = None,
    background: BackgroundData | None = None,
    forcing: ScalarField | None = None,
) -> SolutionBundle:
    """Newton-Krylov solve of the coupled system for the given coupling.

    Newton runs on the energy gradient with MINRES inner solves
    preconditioned by the exact spectral inverse of
    q^{-2} Lap^2 - Lap + lambda.  Globalization backtracks on the residual
    norm: the solutions are saddle points of the energy (which is unbounded
    below along constant shifts), so energy descent cannot drive the line
    search, while Newton directions are always descent directions for the
    residual norm when the inner solve is accurate.  Converges when the L2
    residual of the second equation (q times the fourth-order residual) is
    below newton_tol.  On convergence v is recovered from the first
    equation and w = q(v - f(e^{u0+u})) is formed by definition.

    Raises QTooSmall if q <= sup|c| at some iterate, NoConvergence if the
    iteration or its line search stalls, and BoundsViolation if the
    converged state breaks the pointwise bounds by more than bound_tol.
    """
    grid, model, q = spec.grid, spec.model, spec.q
    bg = background or compute_u0(spec.vortices, spec.grid)
    ws = _Workspace(grid, model, bg, q, forcing)

    if init is None:
        try:
            init = solve_limit(spec, background=bg).u_inf
        except NoConvergence:
            init = initial_guess(bg, model)
    u = np.array(init.values, dtype=float)

    def try_state(vals: np.ndarray) -> dict | None:
        with np.errstate(over="ignore", invalid="ignore"):
            t = ws.exp_u0 * np.exp(vals)
        if not np.all(np.isfinite(t)):
            return None
        return ws.state(vals)

    res0 = None
    iters = 0
    st = ws.state(u)
    for iters in range(1, spec.max_newton_iters + 1):
        c_inf = float(np.abs(st["c"]).max())
        if q <= c_inf:
            raise QTooSmall(
                f"q={q} <= sup|c|={c_inf:.6g}: zeroth-order coefficient not positive"
            )
        r = ws.gradient(u, st)
        res_b = q * _l2(grid, r)  # residual of the second equation
        if res_b <= spec.newton_tol:
            break
        if res0 is None:
            res0 = res_b
        inner_rtol = float(np.clip(1e-3 * res_b / res0, spec.krylov_tol, 1e-4))
        H = ws.hessian_operator(u, st)
        M = ws.coupled_preconditioner(st)
        delta = _minres_direction(H, M, -r.ravel(), inner_rtol, 400).reshape(
            grid.N, grid.N
        )
        alpha = 1.0
        accepted = False
        while alpha >= 1e-12:
            trial = u + alpha * delta
            st_trial = try_state(trial)
            if st_trial is not None:
                res_trial = q * _l2(grid, ws.gradient(trial, st_trial))
                if res_trial <= (1.0 - 1e-4 * alpha) * res_b:
                    u, st, accepted = trial, st_trial, True
                    break
            alpha *= 0.5
        if not accepted:
            raise NoConvergence(iters, res_b, what="Newton line search")
    else:
        st = ws.state(u)
        res_b = q * _l2(grid, ws.gradient(u, st))
        if res_b > spec.newton_tol:
            raise NoConvergence(spec.max_newton_iters, res_b, what="Newton")

    u_field = ScalarField(grid, u)
    v = recover_v(u_field, bg, model, q)
    st = ws.state(u)
    w = ScalarField(grid, q * (v.values - st["f"]))
    if forcing is None:
        _check_pointwise_bounds(st, v, model, spec.resolved_bound_tol())

    lap_v = laplacian(v)
    res_a = -laplacian(u_field).values - q * (v.values - st["f"]) + FOUR_PI * bg.n
    res_bv = -lap_v.values - q * (
        st["c"] * (model.s - v.values) - q * (v.values - st["f"])
    )
    residuals = {
        "genmcsa": _l2(grid, res_a),
        "genmcsb": _l2(grid, res_bv),
        "fourth_order": _l2(grid, ws.gradient(u, st)),
    }
    return SolutionBundle(
        spec=spec,
        background=bg,
        u=u_field,
        v=v,
        w=w,
        residual_norms=residuals,
        newton_iters=iters,
        energy_value=ws.energy(u),
    )


def _check_pointwise_bounds(
    st: dict, v: ScalarField, model: NonlinearityModel, bound_tol: float
) -> None:
    f0, s = model.f0, model.s
    worst = max(
        f0 - float(st["f"].min()),
        float(st["f"].max()) - s,
        f0 - v.min(),
        v.max() - s,
    )
    if worst > bound_tol:
        raise BoundsViolation(
            f"pointwise bounds violated by {worst:.3e} > bound_tol={bound_tol:.3e} "
            "(discretization failure: refine the grid or enlarge sigma)"
        )


def solve_limit(
    spec: ProblemSpec, background: BackgroundData | None = None
) -> LimitSolution:
    """Newton solve of the limit equation for the regular part:
    -Laplacian(u) = f'(e^{u0+u}) e^{u0+u} (s - f(e^{u0+u})) - 4 pi n.

    The coupling q in spec is ignored.  Damped Newton with backtracking on
    the residual norm (the variational merit is unbounded below along
    constant shifts, so it cannot drive a line search).
    """
    grid, model = spec.grid, spec.model
    bg = background or compute_u0(spec.vortices, spec.grid)
    n = bg.n
    exp_u0 = bg.exp_u0.values
    k2 = grid.k2
    s = model.s
    N = grid.N
    nn = N * N

    def state(u: np.ndarray) -> dict:
        with np.errstate(over="ignore", invalid="ignore"):
            t = exp_u0 * np.exp(u)
        if not np.all(np.isfinite(t)):
            return {"t": None}
        f, fp, fpp = model._eval_arrays(t)
        return {"t": t, "f": f, "fp": fp, "fpp": fpp, "c": fp * t}

    def residual(u: np.ndarray, st: dict) -> np.ndarray:
        lap_u = np.real(np.fft.ifft2(-k2 * np.fft.fft2(u)))
        return -lap_u - st["c"] * (s - st["f"]) + FOUR_PI * n

    u = initial_guess(bg, model).values.copy()
    iters = 0
    res_norm = np.inf
    for iters in range(1, spec.max_newton_iters + 1):
        st = state(u)
        r = residual(u, st)
        res_norm = _l2(grid, r)
        if res_norm <= spec.newton_tol:
            break
        cp = (st["fpp"] * st["t"] + st["fp"]) * st["t"]
        V = -cp * (s - st["f"]) + st["c"] * st["fp"] * st["t"]
        lam = max(1.0, float(V.min()))
        symbol = k2 + lam

        def matvec(z: np.ndarray) -> np.ndarray:
            phi = z.reshape(N, N)
            lap_phi = np.real(np.fft.ifft2(-k2 * np.fft.fft2(phi)))
            return (-lap_phi + V * phi).ravel()

        def prec(z: np.ndarray) -> np.ndarray:
            return np.real(np.fft.ifft2(np.fft.fft2(z.reshape(N, N)) / symbol)).ravel()

        H = LinearOperator((nn, nn), matvec=matvec, dtype=float)
        M = LinearOperator((nn, nn), matvec=prec, dtype=float)
        inner_rtol = float(np.clip(1e-4 * res_norm, spec.krylov_tol, 1e-4))
        delta = _minres_direction(H, M, -r.ravel(), inner_rtol, 400).reshape(N, N)
        alpha = 1.0
        accepted = False
        while alpha >= 1e-12:
            trial = u + alpha * delta
            st_trial = state(trial)
            if st_trial["t"] is not None:
                res_trial = _l2(grid, residual(trial, st_trial))
                if res_trial <= (1.0 - 1e-4 * alpha) * res_norm:
                    u, accepted = trial, True
                    break
            alpha *= 0.5
        if not accepted:
            raise NoConvergence(iters, res_norm, what="limit-equation line search")
    else:
        st = state(u)
        res_norm = _l2(grid, residual(u, st))
        if res_norm > spec.newton_tol:
            raise NoConvergence(spec.max_newton_iters, res_norm, what="limit equation")

    return LimitSolution(
        model=model,
        background=bg,
        u_inf=ScalarField(grid, u),
        residual_norm=res_norm,
        newton_iters=iters,
    )


def q_sweep(spec: ProblemSpec, q_list) -> "ConvergenceTable":
    """Warm-started solves over ascending couplings, measured against the
    limit profile.  Per-entry solver failures become marked rows rather
    than exceptions.

    Rows are reported in ascending q but solved in descending order: the
    limit profile is the infinite-coupling endpoint of the branch, so the
    homotopy walks from the largest q (closest to the limit) downward,
    warm-starting each solve from its larger-q neighbor.
    """
    from . import diagnostics
    from .grid import sobolev_norm

    q_list = [float(q) for q in q_list]
    if any(b <= a for a, b in zip(q_list, q_list[1:])):
        raise ValueError("q_list must be strictly ascending")
    if any(q <= 0.0 for q in q_list):
        raise ValueError("q_list entries must be positive")

    bg = compute_u0(spec.vortices, spec.grid)
    limit = solve_limit(spec, background=bg)
    rows = []
    u_prev = limit.u_inf
    for q in reversed(q_list):
        sub = replace(spec, q=q)
        try:
            bundle = solve_coupled(sub, init=u_prev, background=bg)
        except (NoConvergence, QTooSmall, BoundsViolation) as exc:
            rows.append(diagnostics.SweepRow.failed(q, exc))
            continue
        u_prev = bundle.u
        metrics = diagnostics.convergence_metrics(bundle, limit)
        gradu = diagnostics.check_gradu(bundle)
        flux = diagnostics.check_flux(bundle)
        rows.append(
            diagnostics.SweepRow(
                q=q,
                status="converged",
                message="",
                d_eu=metrics.d_eu,
                d_v=metrics.d_v,
                d_w=metrics.d_w,
                h_u=metrics.h_u,
                h_v=metrics.h_v,
                sob_u=tuple(sobolev_norm(bundle.u, k) for k in (0, 1, 2)),
                sob_v=tuple(sobolev_norm(bundle.v, k) for k in (0, 1, 2)),
                gradu_value=float(gradu.lhs),
                flux_rel_err=float(flux.rel_discrepancy),
                energy=bundle.energy_value,
                genmcsb_residual=bundle.residual_norms["genmcsb"],
                newton_iters=bundle.newton_iters,
            )
        )
    rows.reverse()
    meta = {
        "model": spec.model.name,
        "s": spec.model.s,
        "n": spec.vortices.n,
        "sigma": spec.vortices.sigma,
        "N": spec.grid.N,
        "newton_tol": spec.newton_tol,
        "krylov_tol": spec.krylov_tol,
        "bound_tol": spec.resolved_bound_tol(),
    }
    return diagnostics.ConvergenceTable(meta=meta, rows=rows)

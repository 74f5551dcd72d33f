"""Why some parameter choices cannot hold a vortex on the unit torus.

Integrating the two equations over the closed surface gives the exact
constraints

    q * integral(v - f(e^{u*})) = 4*pi*n,
    integral(f'(e^{u*}) e^{u*} (s - v)) = 4*pi*n,

and the pointwise bounds f(0) <= v <= s, e^{u*} <= f^{-1}(s) cap the second
integrand.  On a unit-measure torus the nonlinearity must therefore satisfy

    capacity := max_t f'(t) t (s - f(t)) >= 4*pi*n

(the limit-equation form; the finite-q system is slightly tighter).  For
the linear model f(t) = t this reads s^2/4 >= 4*pi*n; for the rational
model f(t) = (t-1)/(t+1) the capacity never exceeds (s+1)/2 < 1, so it can
never carry a vortex here.  The script evaluates the capacity line and
demonstrates both a solvable and an unsolvable instance.
"""

import numpy as np

from mcsvortex import (
    GridSpec,
    NoConvergence,
    ProblemSpec,
    VortexConfig,
    cp1_model,
    solve_limit,
    u1_model,
)


def capacity(model, t_max=60.0):
    t = np.linspace(0.0, t_max, 200001)
    f, fp, _ = model._eval_arrays(t)
    return float(np.max(fp * t * (model.s - f)))


print(f"flux demand for one vortex: 4*pi = {4 * np.pi:.4f}\n")
for model in (u1_model(1.0), u1_model(9.0), cp1_model(0.5), cp1_model(0.99)):
    cap = capacity(model)
    verdict = "can hold a vortex" if cap > 4 * np.pi else "cannot hold a vortex"
    print(f"  {model.name} with s = {model.s:4g}: capacity = {cap:8.4f}  -> {verdict}")

grid = GridSpec(64)
vortices = VortexConfig(points=((0.5, 0.5),), multiplicities=(1,), sigma=4 * grid.h)

print("\nlimit-equation solves, one vortex:")
for model in (u1_model(9.0), u1_model(1.0)):
    spec = ProblemSpec(
        model=model, vortices=vortices, q=1.0, grid=grid, max_newton_iters=30
    )
    try:
        limit = solve_limit(spec)
        print(
            f"  s = {model.s:4g}: converged, residual {limit.residual_norm:.2e} "
            f"({limit.newton_iters} steps)"
        )
    except NoConvergence as exc:
        print(f"  s = {model.s:4g}: {exc} (capacity below the flux demand)")

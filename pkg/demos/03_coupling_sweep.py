"""Sweep the coupling upward and watch the solutions collapse onto the
limit profile of the reduced single equation.

The sweep solves at each q (warm-started along the branch from the limit
profile) and measures sup-norm distances: d_eu for the field magnitude,
d_v for the matter potential against f(e^{u_limit}), d_w for the stiff
combination q(v - f) against its limiting value.  All three shrink roughly
like 1/q, while Sobolev norms of the iterates stay bounded: no blow-up in
the coupling.
"""

from mcsvortex import GridSpec, ProblemSpec, VortexConfig, q_sweep, u1_model

grid = GridSpec(96)
vortices = VortexConfig(points=((0.5, 0.5),), multiplicities=(1,), sigma=4 * grid.h)
spec = ProblemSpec(model=u1_model(9.0), vortices=vortices, q=10.0, grid=grid)

table = q_sweep(spec, [10.0, 20.0, 40.0, 80.0, 160.0])

print(f"{'q':>6}  {'d_eu':>10}  {'d_v':>10}  {'d_w':>10}  {'q*d_v':>8}  {'H2(u)':>8}")
for row in table.rows:
    print(
        f"{row.q:6g}  {row.d_eu:10.3e}  {row.d_v:10.3e}  {row.d_w:10.3e}"
        f"  {row.q * row.d_v:8.3f}  {row.sob_u[2]:8.3f}"
    )

print("\nq*d_v staying O(1) is the first-order signature of the collapse;")
print("the table above is what `mcsvortex sweep` writes as TSV.")

"""
Boundary probes
===============

Numerical looks at the kernel inequalities: the weak-Lebesgue integrals
near the critical exponent, the 3G constant, and the behaviour of
solutions driven by Dirac masses pushed to the boundary.
"""

# %%
from nonlocal_semilinear import (
    Domain,
    GreenKernel,
    SemilinearProblem,
    WeightedMeasure,
    assemble,
    check_3g,
    check_marcinkiewicz_uniform,
    critical_exponent,
    make_graded_grid,
    nonexistence_probe,
    normalize,
)
from nonlocal_semilinear.verify import probe_points_toward

I = Domain.interval()
rfl = GreenKernel.rfl(0.25, I)
grid = make_graded_grid(I, 256)
op = assemble(rfl, grid)
pstar = critical_exponent(rfl.params)
deltas = [1e-1, 1e-2, 1e-3]
probes = probe_points_toward(1.0, deltas, I)

# %%
# Below p* the integrals stay put; above it they grow as delta(y) -> 0, but
# only like delta(y)**(-(N + gamma - 2s)(q - p*)), which is slow near p*.
for f in (0.9, 1.1, 1.5, 2.0):
    vals = check_marcinkiewicz_uniform(rfl, grid, f * pstar, rfl.gamma, probes)
    print(f"q = {f} p*: " + "  ".join(f"{v:.4g}" for v in vals), f" growth {vals[-1] / vals[0]:.3g}")

# %%
for seed in (0, 1):
    print("3G constant, seed", seed, check_3g(rfl, grid, 10_000, seed))

# %%
# At a fixed source strength, supercritical data near the boundary lose
# their solutions while subcritical ones keep them.
mu = normalize(WeightedMeasure.dirac(0.5), rfl.gamma)
for p in (pstar + 0.2, 0.9 * pstar):
    for row in nonexistence_probe(SemilinearProblem(op, p, 0.15, mu), 1.0, deltas):
        print(f"p={row.p:.3f} delta={row.delta_y:g} integral={row.integral:.4g} {row.solve_status}")

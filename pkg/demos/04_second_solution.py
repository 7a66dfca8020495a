"""
Mountain-pass branch
====================

Below lam* a second, larger solution exists.  It is found as a
mountain-pass critical point of the energy J(v) for v = u - u_min.
"""

# %%
import numpy as np

from nonlocal_semilinear import (
    Domain,
    GreenKernel,
    SemilinearProblem,
    WeightedMeasure,
    assemble,
    bifurcation_sweep,
    lambda_star,
    make_graded_grid,
    minimal_solution,
    normalize,
    second_solution,
)

I = Domain.interval()
rfl = GreenKernel.rfl(0.25, I)
op = assemble(rfl, make_graded_grid(I, 256))
mu = normalize(WeightedMeasure.dirac(0.5), rfl.gamma)
template = SemilinearProblem(op, 1.5, 0.0, mu)
lam_star = lambda_star(template)

# %%
prob = template.with_lambda(0.5 * lam_star)
u_min = minimal_solution(prob).u
rep = second_solution(prob, u_min)
print("status:", rep.status, "sweeps:", rep.iterations, "residual:", rep.residual)
print("mountain-pass level J:", rep.extras["J"], "smallest gap u~ - u_min:", rep.extras["min_gap"])

# %%
# The minimal branch shrinks to zero with lam; the second branch does not.
for row in bifurcation_sweep(template, lam_star * np.array([0.05, 0.1, 0.3, 0.5, 0.7, 0.9])):
    print(f"lam={row['lambda']:.4f}  |u_min|={row['norm_minimal']:.4f}  |u~|={row['norm_second']:.4f}")

"""
Minimal solutions and the extremal parameter
============================================

Solve u = G[u**p] + lam G[mu] for a normalized Dirac mass by monotone
iteration, locate the extremal lam* by bisection, and follow the stability
index along the minimal branch.
"""

# %%
import numpy as np

from nonlocal_semilinear import (
    Domain,
    GreenKernel,
    SemilinearProblem,
    WeightedMeasure,
    assemble,
    critical_exponent,
    lambda_star,
    make_graded_grid,
    minimal_solution,
    normalize,
    stability_index,
)

I = Domain.interval()
rfl = GreenKernel.rfl(0.25, I)
op = assemble(rfl, make_graded_grid(I, 256))
mu = normalize(WeightedMeasure.dirac(0.5), rfl.gamma)

# p must stay below p* = 5/3 for the a priori estimate behind T(lam).
p = 1.5
print("p* =", critical_exponent(rfl.params))
problem = SemilinearProblem(op, p, 0.0, mu)
print("self-improving constant c_p =", problem.c_p)

# %%
lam_star = lambda_star(problem)
print("lambda* ~", lam_star)

# %%
# Each minimal solution sits above lam G[mu]; while the scalar bound T(lam)
# exists (lam below the peak of t - c_p t**p) it also sits below T(lam) G[mu].
for f in (0.25, 0.5, 0.75, 0.99, 1.01):
    prob = problem.with_lambda(f * lam_star)
    rep = minimal_solution(prob)
    sigma = stability_index(op, rep.u, p) if rep.converged else float("nan")
    print(f"{f:5.2f} lam*: {rep.status:9s} iters={rep.iterations:6d} "
          f"max u={np.max(rep.u):.4g} T={prob.T} sandwich={rep.sandwich_ok} sigma={sigma:.4f}")

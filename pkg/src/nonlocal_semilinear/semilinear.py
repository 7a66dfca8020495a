"""Semilinear problem ``u = G[u**p] + lam * G[mu]`` on a grid.

The minimal solution is the limit of the monotone iteration started at
``lam * G[mu]``.  It exists for ``lam`` up to an extremal value ``lam*``,
which is located by bisection.  Below ``lam*`` a second solution
``u_min + v`` is found as a mountain-pass critical point of

    J(v) = 1/2 <v, v>_H - sum_i w_i H(u_min_i, v_i)

where ``<u, v>_H = v^T A^{-1} u`` is the energy inner product of the
discrete operator.  The nonlinearity uses

    h(a, b) = (a + b+)**p - a**p,
    H(a, b) = ((a + b+)**(p+1) - a**(p+1)) / (p+1) - a**p b+.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy import linalg, optimize

from .errors import BracketError, PreconditionError, SearchError
from .greenop import DiscreteGreenOperator, apply_to_measure, weighted_lp_norm
from .kernel import critical_exponent
from .measure import WeightedMeasure, weighted_norm
from .spectral import base_eigen, stability_index

log = logging.getLogger(__name__)

LOWER_SLACK = 1e-8


@dataclass(frozen=True, eq=False)
class SemilinearProblem:
    """Data of the fixed-point problem; ``lam`` may be 0 for the trivial case."""

    gop: DiscreteGreenOperator
    p: float
    lam: float
    mu: WeightedMeasure
    tol: float = 1e-10
    max_iter: int = 200_000
    divergence_cap: float | None = None

    def __post_init__(self) -> None:
        if not self.p > 1:
            raise PreconditionError(f"exponent p must exceed 1, got {self.p}")
        if self.lam < 0:
            raise PreconditionError("lambda must be nonnegative")
        if not self.mu.is_nonnegative:
            raise PreconditionError("the solver only accepts nonnegative measures")
        norm = weighted_norm(self.mu, self.gop.kernel.gamma, self.gop.grid)
        if abs(norm - 1.0) > 1e-10:
            raise PreconditionError(f"measure must have unit weighted norm, got {norm}")

    def with_lambda(self, lam: float) -> "SemilinearProblem":
        new = replace(self, lam=float(lam))
        # share the expensive cached quantities
        for key in ("G_mu", "c_p"):
            if key in self.__dict__:
                new.__dict__[key] = self.__dict__[key]
        return new

    @cached_property
    def G_mu(self) -> np.ndarray:
        return apply_to_measure(self.gop, self.mu)

    @cached_property
    def c_p(self) -> float | None:
        """Self-improving constant at ``q = p`` (only defined below ``p*``)."""
        if self.p >= critical_exponent(self.gop.kernel.params):
            return None
        return self_improve_constant(self.gop, self.mu, self.p, _U=self.G_mu)

    @property
    def T(self) -> float | None:
        if self.c_p is None or self.lam == 0:
            return None
        return supersolution_scale(self.p, self.c_p, self.lam)

    def cap(self) -> float:
        if self.divergence_cap is not None:
            return self.divergence_cap
        T = self.T
        base = 1e3
        if T is not None:
            base = max(base, 1e3 * T * float(np.max(self.G_mu)))
        return base


@dataclass(eq=False)
class SolveReport:
    """Outcome of a solve; ``u`` holds node values."""

    u: np.ndarray
    status: str
    iterations: int
    residual: float
    sandwich_ok: bool
    bound_constant: float
    lam: float = 0.0
    p: float = 0.0
    monotone: bool = True
    T: float | None = None
    extras: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def to_dict(self, grid, gamma: float) -> dict:
        finite = bool(np.all(np.isfinite(self.u)))
        return {
            "status": self.status,
            "iterations": self.iterations,
            "residual": self.residual,
            "lambda": self.lam,
            "p": self.p,
            "norms": {
                "Linf": float(np.max(np.abs(self.u))) if finite else math.inf,
                "Lp_weighted": weighted_lp_norm(self.u, grid, self.p, gamma) if finite else math.inf,
            },
            "sandwich_ok": self.sandwich_ok,
            "bound_constant": self.bound_constant,
        }

    def to_json(self, grid, gamma: float) -> str:
        return json.dumps(self.to_dict(grid, gamma))


# -- scalar supersolution scale ------------------------------------------------

def supersolution_scale(p: float, c_p: float, lam: float) -> float | None:
    """Smallest positive root of ``t = c_p t**p + lam``, or ``None`` if there is none.

    A root exists exactly when ``lam <= k(t0)``, where ``k(t) = t - c_p t**p``
    peaks at ``t0 = (p c_p)**(1/(1-p))``.
    """
    if not (p > 1 and c_p > 0 and lam > 0):
        raise PreconditionError("need p > 1, c_p > 0 and lambda > 0")
    t0 = (p * c_p) ** (1.0 / (1.0 - p))
    k0 = t0 - c_p * t0**p
    if lam > k0:
        return None
    if lam == k0:
        return t0
    f = lambda t: t - c_p * t**p - lam
    return optimize.brentq(f, 0.0, t0, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def self_improve_constant(gop: DiscreteGreenOperator, mu: WeightedMeasure, q: float,
                          _U: np.ndarray | None = None) -> float:
    """Best constant in ``G[(G mu)**q] <= C G mu`` over the nodes."""
    pstar = critical_exponent(gop.kernel.params)
    if not 1 <= q < pstar:
        raise PreconditionError(f"need 1 <= q < p* = {pstar:.6g}, got q = {q}")
    U = apply_to_measure(gop, mu) if _U is None else _U
    if np.any(U <= 0):
        raise PreconditionError("G[mu] must be positive at every node")
    return float(np.max((gop @ U**q) / U))


# -- minimal branch -------------------------------------------------------------

def residual(problem: SemilinearProblem, u) -> float:
    """``max_i |u - G[u**p] - lam G[mu]|``."""
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise PreconditionError("residual is defined for u >= 0")
    return float(np.max(np.abs(u - problem.gop @ u**problem.p - problem.lam * problem.G_mu)))


def check_solution_bounds(u, gop: DiscreteGreenOperator, mu: WeightedMeasure,
                          lam: float, G_mu: np.ndarray | None = None) -> tuple[bool, float]:
    """Lower bound ``u >= lam G[mu]`` and the constant ``max u / (G[mu] + 1)``."""
    U = apply_to_measure(gop, mu) if G_mu is None else G_mu
    u = np.asarray(u, dtype=float)
    lower_ok = bool(np.all(u >= lam * U - LOWER_SLACK))
    return lower_ok, float(np.max(u / (U + 1.0)))


def minimal_solution(problem: SemilinearProblem, keep_history: bool = False) -> SolveReport:
    """Monotone iteration ``u_{n+1} = G[u_n**p] + lam G[mu]`` from ``u_0 = lam G[mu]``.

    Converged when the relative sup-norm update is below ``tol`` and the
    returned iterate's residual is below ``tol``.  Diverged once the
    sup-norm passes the divergence cap.
    """
    gop, p, lam = problem.gop, problem.p, problem.lam
    U = problem.G_mu
    src = lam * U
    cap = problem.cap()
    u = src.copy()
    monotone = True
    history = [u.copy()] if keep_history else None
    status = "max_iter"
    it = 0
    for it in range(1, problem.max_iter + 1):
        new = gop @ u**p + src
        step = new - u
        d = float(np.max(np.abs(step)))
        top = float(np.max(new))
        if np.min(step) < -1e-12 * (1.0 + top):
            monotone = False
        if not np.isfinite(top) or top > cap:
            status = "diverged"
            u = new
            break
        if d / (1.0 + top) < problem.tol and d <= problem.tol:
            status = "converged"
            break
        u = new
        if keep_history:
            history.append(u.copy())
    if status == "converged":
        res = d
    elif np.all(np.isfinite(u)):
        res = float(np.max(np.abs(u - gop @ u**p - src)))
    else:
        res = math.inf
    T = problem.T
    if status == "converged":
        lower_ok, C = check_solution_bounds(u, gop, problem.mu, lam, U)
        upper_ok = T is None or bool(np.all(u <= T * U + LOWER_SLACK))
        sandwich = lower_ok and upper_ok
    else:
        sandwich, C = False, math.inf
    rep = SolveReport(u, status, it, res, sandwich, C, lam, p, monotone, T)
    if keep_history:
        rep.extras["history"] = history
    return rep


def lambda_upper_bound(gop: DiscreteGreenOperator, mu: WeightedMeasure, p: float,
                       lambda1: float, phi1) -> float:
    """``lam~ = lambda1**(p/(p-1)) * int G[phi1] dx / int G[phi1] dmu``.

    The second integral is ``sum_i w_i phi1_i G[mu]_i`` by symmetry of the
    kernel, which keeps the bound exact for the discrete problem.
    """
    phi1 = np.asarray(phi1, dtype=float)
    w = gop.grid.weights
    num = float(np.sum(w * (gop @ phi1)))
    den = float(np.sum(w * phi1 * apply_to_measure(gop, mu)))
    return lambda1 ** (p / (p - 1.0)) * num / den


def _converges(problem: SemilinearProblem, lam: float) -> bool:
    return minimal_solution(problem.with_lambda(lam)).status == "converged"


def lambda_star(template: SemilinearProblem, bracket: tuple[float, float | None] = (0.0, None),
                rtol: float = 1e-3) -> float:
    """Bisect for the largest ``lam`` whose minimal iteration converges.

    The upper end defaults to :func:`lambda_upper_bound`.  Stops once the
    bracket width drops below ``rtol`` times the current upper end.
    """
    lo, hi = bracket
    if hi is None:
        pair = base_eigen(template.gop, 1)[0]
        hi = lambda_upper_bound(template.gop, template.mu, template.p, pair.value, pair.vector)
    lo, hi = float(lo), float(hi)
    if not 0 <= lo < hi:
        raise BracketError(f"invalid bracket ({lo}, {hi})")
    if lo > 0 and not _converges(template, lo):
        raise BracketError("the minimal iteration does not converge at the lower end")
    if _converges(template, hi):
        raise BracketError("the minimal iteration converges at the upper end")
    while hi - lo >= rtol * hi:
        mid = 0.5 * (lo + hi)
        if _converges(template, mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# -- mountain pass -------------------------------------------------------------------

def h_fun(a, b, p: float):
    bp = np.maximum(b, 0.0)
    return (a + bp) ** p - a**p


def H_fun(a, b, p: float):
    bp = np.maximum(b, 0.0)
    return ((a + bp) ** (p + 1.0) - a ** (p + 1.0)) / (p + 1.0) - a**p * bp


class EnergyFunctional:
    """``J`` and its gradients for a fixed minimal solution ``u``."""

    def __init__(self, gop: DiscreteGreenOperator, u, p: float):
        self.gop = gop
        self.u = np.asarray(u, dtype=float)
        self.p = p
        self.w = gop.grid.weights
        self._chol = linalg.cho_factor(gop.matrix)

    def h_inner(self, f, g) -> float:
        """``<f, g>_H = g^T A^{-1} f``."""
        return float(np.dot(g, linalg.cho_solve(self._chol, f)))

    def h_norm(self, f) -> float:
        return math.sqrt(max(self.h_inner(f, f), 0.0))

    def J(self, v) -> float:
        v = np.asarray(v, dtype=float)
        return 0.5 * self.h_inner(v, v) - float(np.sum(self.w * H_fun(self.u, v, self.p)))

    def h_gradient(self, v) -> np.ndarray:
        """Gradient in the energy inner product: ``v - G[h(u, v)]``."""
        return v - self.gop @ h_fun(self.u, v, self.p)

    def directional_derivative(self, v, xi) -> float:
        """``<G^{-1} v - h(u, v), xi>_w`` with a dense solve for ``G^{-1} v``."""
        Ginv_v = self.gop.solve(v)
        return float(np.sum(self.w * (Ginv_v - h_fun(self.u, v, self.p)) * xi))

    def residual_map(self, v) -> np.ndarray:
        return self.h_gradient(v)


def _ray_max(energy: EnergyFunctional, d: np.ndarray, t_end: float, npts: int = 41):
    """Maximize ``t -> J(t d)`` on ``[0, t_end]`` from a sampled path plus a bounded refine."""
    ts = np.linspace(0.0, t_end, npts)
    vals = np.array([energy.J(t * d) for t in ts])
    k = int(np.argmax(vals))
    a = ts[max(k - 1, 0)]
    b = ts[min(k + 1, npts - 1)]
    res = optimize.minimize_scalar(lambda t: -energy.J(t * d), bounds=(a, b), method="bounded",
                                   options={"xatol": 1e-12 * max(b, 1.0)})
    t_star = float(res.x) if -res.fun >= vals[k] else float(ts[k])
    return t_star, energy.J(t_star * d), vals


def second_solution(problem: SemilinearProblem, u_min, grad_tol: float = 1e-6,
                    max_sweeps: int = 5000, npts: int = 41, polish: bool = True,
                    stability_margin: float = 1e-3) -> SolveReport:
    """Mountain-pass solution ``u_min + v`` of the semilinear problem.

    Each sweep maximizes ``J`` along the segment from 0 through the current
    peak, then takes a steepest-descent step ``v <- v - alpha * grad_H J``
    from the peak (``-grad_H J = G[h] - v`` needs no linear solve).  Stops
    when the energy-norm gradient is below ``grad_tol``.  With
    ``polish=True`` a few Newton steps on ``v = G[h(u, v)]`` follow, which
    leave the critical point unchanged but shrink the residual to round-off.
    """
    gop, p = problem.gop, problem.p
    u_min = np.asarray(u_min, dtype=float)
    sigma = stability_index(gop, u_min, p)
    if not sigma > 1.0 + stability_margin:
        raise PreconditionError(f"minimal solution is not stable enough (sigma = {sigma:.6g})")
    energy = EnergyFunctional(gop, u_min, p)

    e = problem.G_mu / energy.h_norm(problem.G_mu)
    t_big = 1.0
    for _ in range(80):
        if energy.J(t_big * e) < 0:
            break
        t_big *= 2.0
    else:
        raise SearchError("no negative-energy endpoint found along G[mu]")

    d = e
    t_end = t_big
    v = None
    gnorm = math.inf
    sweeps = 0
    alpha = 1.0
    level = math.inf
    for sweeps in range(1, max_sweeps + 1):
        while energy.J(t_end * d) >= 0:
            t_end *= 2.0
        t_star, level_new, _ = _ray_max(energy, d, t_end, npts)
        v = t_star * d
        t_end = 2.0 * t_star
        g = energy.h_gradient(v)
        gnorm = energy.h_norm(g)
        if gnorm < grad_tol:
            break
        # backtrack when the peak level fails to decrease
        if level_new > level + 1e-14 * abs(level):
            alpha *= 0.5
        level = level_new
        v_next = v - alpha * g
        d = v_next / energy.h_norm(v_next)
    status = "converged" if gnorm < grad_tol else "max_iter"

    newton_steps = 0
    if polish and status == "converged":
        for newton_steps in range(1, 31):
            F = energy.h_gradient(v)
            if np.max(np.abs(F)) < 1e-13 * (1.0 + np.max(np.abs(v))):
                break
            a = p * (u_min + np.maximum(v, 0.0)) ** (p - 1.0) * (v > 0)
            jac = np.eye(gop.n) - gop.operator_matrix * a[None, :]
            v = v - np.linalg.solve(jac, F)

    J_level = energy.J(v)
    v_clip = np.maximum(v, 0.0)
    u_tilde = u_min + v_clip
    res = residual(problem, u_tilde)
    lower_ok, C = check_solution_bounds(u_tilde, gop, problem.mu, problem.lam, problem.G_mu)
    rep = SolveReport(u_tilde, status, sweeps, res, lower_ok, C, problem.lam, p, True, None)
    rep.extras.update(
        v=v_clip, J=J_level, grad_norm=gnorm, sigma=sigma, newton_steps=newton_steps,
        min_gap=float(np.min(v_clip)),
    )
    return rep


def bifurcation_sweep(template: SemilinearProblem, lambdas) -> list[dict]:
    """Minimal and mountain-pass sup-norms along a list of ``lam`` values."""
    rows = []
    for lam in lambdas:
        prob = template.with_lambda(lam)
        mins = minimal_solution(prob)
        row = {"lambda": float(lam), "norm_minimal": math.nan, "norm_second": math.nan}
        if mins.converged:
            row["norm_minimal"] = float(np.max(mins.u))
            try:
                sec = second_solution(prob, mins.u)
                if sec.converged:
                    row["norm_second"] = float(np.max(sec.u))
            except (PreconditionError, SearchError) as exc:
                log.warning("no second solution at lambda=%g: %s", lam, exc)
        rows.append(row)
    return rows

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonlocal_semilinear import (
    BracketError,
    EnergyFunctional,
    PreconditionError,
    SemilinearProblem,
    WeightedMeasure,
    base_eigen,
    bifurcation_sweep,
    check_solution_bounds,
    critical_exponent,
    lambda_star,
    lambda_upper_bound,
    minimal_solution,
    residual,
    second_solution,
    self_improve_constant,
    supersolution_scale,
)
from nonlocal_semilinear.semilinear import H_fun, h_fun


# -- scalar scale ------------------------------------------------------------------------

def test_supersolution_scale_examples():
    assert supersolution_scale(2.0, 1.0, 0.1875) == pytest.approx(0.25, rel=1e-14)
    assert supersolution_scale(2.0, 1.0, 0.3) is None
    assert supersolution_scale(2.0, 1.0, 1e-9) / 1e-9 == pytest.approx(1.0, rel=1e-6)
    with pytest.raises(PreconditionError):
        supersolution_scale(1.0, 1.0, 0.1)


@settings(max_examples=80, deadline=None)
@given(st.floats(1.05, 4.0), st.floats(0.1, 5.0), st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_supersolution_scale_is_an_increasing_root(p, c, f1, f2):
    t0 = (p * c) ** (1 / (1 - p))
    kmax = t0 - c * t0**p
    l1, l2 = sorted((f1 * kmax, f2 * kmax))
    T1, T2 = supersolution_scale(p, c, l1), supersolution_scale(p, c, l2)
    assert T1 == pytest.approx(c * T1**p + l1, rel=1e-10)
    assert 0 < T1 <= t0 and T1 <= T2 * (1 + 1e-12)


def test_h_and_H():
    a = np.array([0.5, 1.0, 2.0])
    assert not np.any(h_fun(a, -1.0, 2.0))
    assert not np.any(H_fun(a, -1.0, 2.0))
    b = 0.3
    # H is the antiderivative of h in b
    eps = 1e-6
    num = (H_fun(a, b + eps, 2.5) - H_fun(a, b - eps, 2.5)) / (2 * eps)
    np.testing.assert_allclose(num, h_fun(a, b, 2.5), rtol=1e-8)


# -- problem validation ---------------------------------------------------------------

def test_problem_validation(rfl256, center_mu):
    with pytest.raises(PreconditionError):
        SemilinearProblem(rfl256, 1.0, 0.1, center_mu)
    with pytest.raises(PreconditionError):
        SemilinearProblem(rfl256, 1.5, -0.1, center_mu)
    with pytest.raises(PreconditionError):
        SemilinearProblem(rfl256, 1.5, 0.1, WeightedMeasure.dirac(0.5))
    with pytest.raises(PreconditionError):
        SemilinearProblem(rfl256, 1.5, 0.1, WeightedMeasure(((0.5, -1.0), (0.3, 2.0))))


# -- self-improving constant ---------------------------------------------------------

def test_self_improve_constant(rfl256, center_mu):
    pstar = critical_exponent(rfl256.kernel.params)
    c1 = self_improve_constant(rfl256, center_mu, 1.0)
    assert 0 < c1 < np.inf
    mid = self_improve_constant(rfl256, center_mu, 0.5 * (1 + pstar))
    top = self_improve_constant(rfl256, center_mu, 0.99 * pstar)
    assert top > mid > c1
    with pytest.raises(PreconditionError):
        self_improve_constant(rfl256, center_mu, pstar)


# -- minimal branch ------------------------------------------------------------------------

def test_zero_lambda(template256):
    rep = minimal_solution(template256)
    assert rep.converged and rep.iterations == 1
    assert not np.any(rep.u)


def test_small_lambda_sandwich(template256, lam_star256):
    prob = template256.with_lambda(0.1 * lam_star256)
    assert prob.T is not None
    rep = minimal_solution(prob, keep_history=True)
    assert rep.converged and rep.sandwich_ok and rep.monotone
    assert rep.residual <= prob.tol
    assert residual(prob, rep.u) <= 10 * prob.tol
    U = prob.G_mu
    assert np.all(rep.u >= prob.lam * U - 1e-8)
    assert np.all(rep.u <= prob.T * U + 1e-8)
    hist = rep.extras["history"]
    assert all(np.all(b >= a) for a, b in zip(hist, hist[1:]))


def test_upper_bound_and_divergence(template256, lam_star256):
    pair = base_eigen(template256.gop, 1)[0]
    mu, p = template256.mu, template256.p
    bound = lambda_upper_bound(template256.gop, mu, p, pair.value, pair.vector)
    assert 0 < bound < np.inf
    assert lambda_upper_bound(template256.gop, mu, p, pair.value, 2 * pair.vector) == pytest.approx(bound, rel=1e-12)
    assert lam_star256 <= bound
    assert minimal_solution(template256.with_lambda(2 * bound)).status == "diverged"


def test_lambda_star_brackets_transition(template256, lam_star256):
    assert minimal_solution(template256.with_lambda(lam_star256 * 0.99)).converged
    assert minimal_solution(template256.with_lambda(lam_star256 * 1.01)).status == "diverged"
    with pytest.raises(BracketError):
        lambda_star(template256, (0.0, 0.5 * lam_star256))


def test_minimal_branch_is_increasing_in_lambda(template256, lam_star256):
    us = [minimal_solution(template256.with_lambda(f * lam_star256)).u for f in (0.2, 0.5, 0.8)]
    assert np.all(us[1] >= us[0]) and np.all(us[2] >= us[1])


def test_residual_of_zero(template256):
    prob = template256.with_lambda(0.05)
    assert residual(prob, np.zeros(prob.gop.n)) == pytest.approx(0.05 * np.max(prob.G_mu))
    with pytest.raises(PreconditionError):
        residual(prob, -np.ones(prob.gop.n))


def test_bound_constant_is_lambda_uniform(template256, lam_star256):
    # C vanishes like lam as lam -> 0, so uniformity means one bound for the whole
    # sweep; the scaled constant C / lam stays within a factor 2
    fracs = (0.1, 0.3, 0.6, 0.9)
    consts = []
    for f in fracs:
        prob = template256.with_lambda(f * lam_star256)
        rep = minimal_solution(prob)
        ok, C = check_solution_bounds(rep.u, prob.gop, prob.mu, prob.lam)
        assert ok
        consts.append(C)
    assert np.all(np.diff(consts) > 0) and np.isfinite(consts[-1])
    scaled = np.array(consts) / (np.array(fracs) * lam_star256)
    assert scaled.max() / scaled.min() < 2


def test_bound_constant_of_linear_shape(template256):
    lam = 0.1
    U = template256.G_mu
    ok, C = check_solution_bounds(lam * U, template256.gop, template256.mu, lam)
    assert ok and C <= lam * U.max() / (U.min() + 1)


def test_report_json(template256, lam_star256):
    prob = template256.with_lambda(0.3 * lam_star256)
    rep = minimal_solution(prob)
    data = json.loads(rep.to_json(prob.gop.grid, prob.gop.kernel.gamma))
    assert set(data) == {"status", "iterations", "residual", "lambda", "p", "norms", "sandwich_ok",
                         "bound_constant"}
    assert set(data["norms"]) == {"Linf", "Lp_weighted"}


# -- mountain pass ----------------------------------------------------------------------------

def test_second_solution(template256, lam_star256):
    prob = template256.with_lambda(0.5 * lam_star256)
    mins = minimal_solution(prob)
    rep = second_solution(prob, mins.u)
    v = rep.extras["v"]
    assert rep.converged
    assert rep.residual <= 1e-4
    assert np.max(v) > 10 * prob.tol
    assert np.all(rep.u > mins.u)
    assert rep.extras["J"] > 0
    ok, C = check_solution_bounds(rep.u, prob.gop, prob.mu, prob.lam)
    assert ok and np.isfinite(C)


def test_second_solution_needs_a_stable_minimal_solution(template256):
    prob = template256.with_lambda(0.05)
    with pytest.raises(PreconditionError):
        second_solution(prob, np.full(prob.gop.n, 50.0))


def test_energy_gradient_routes_agree(template256, lam_star256):
    prob = template256.with_lambda(0.4 * lam_star256)
    u = minimal_solution(prob).u
    E = EnergyFunctional(prob.gop, u, prob.p)
    rng = np.random.default_rng(7)
    for _ in range(3):
        v = np.abs(rng.standard_normal(prob.gop.n)) * prob.G_mu
        xi = rng.standard_normal(prob.gop.n)
        a = E.h_inner(E.h_gradient(v), xi)
        b = E.directional_derivative(v, xi)
        assert a == pytest.approx(b, rel=1e-8)


def test_bifurcation_sweep(template256, lam_star256):
    rows = bifurcation_sweep(template256, [0.2 * lam_star256, 0.6 * lam_star256])
    assert [r["lambda"] for r in rows] == pytest.approx([0.2 * lam_star256, 0.6 * lam_star256])
    for r in rows:
        assert r["norm_second"] > r["norm_minimal"] > 0

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonlocal_semilinear import ConfigurationError, Domain, DomainError, boundary_distance, make_graded_grid
from nonlocal_semilinear.domain import graded_unit_edges


def test_boundary_distance_examples():
    I = Domain.interval()
    assert boundary_distance(I, 0.3) == pytest.approx(0.3)
    assert boundary_distance(I, 0.5) == pytest.approx(0.5)
    assert boundary_distance(Domain.ball((0.0, 0.0), 1.0, 2), (0.6, 0.0)) == pytest.approx(0.4)


@pytest.mark.parametrize("x", [0.0, 1.0, -0.2, 1.5])
def test_boundary_distance_rejects_boundary_and_outside(x):
    with pytest.raises(DomainError):
        boundary_distance(Domain.interval(), x)


def test_domain_invariants():
    with pytest.raises(DomainError):
        Domain.interval(1.0, 0.0)
    with pytest.raises(DomainError):
        Domain.ball((0, 0), -1.0, 2)
    with pytest.raises(DomainError):
        Domain.ball((0, 0, 0, 0), 1.0, 4)


def test_uniform_grid_matches_midpoint_rule():
    g = make_graded_grid(Domain.interval(), 4, 1.0)
    np.testing.assert_allclose(g.x, [0.125, 0.375, 0.625, 0.875])
    np.testing.assert_allclose(g.weights, 0.25)


def test_too_few_nodes_and_bad_grading():
    with pytest.raises(ConfigurationError):
        make_graded_grid(Domain.interval(), 3)
    with pytest.raises(ConfigurationError):
        make_graded_grid(Domain.interval(), 16, 0.5)


@pytest.mark.parametrize("domain", [Domain.interval(), Domain.interval(-2.0, 3.0),
                                    Domain.ball((0.0, 0.0), 1.5, 2), Domain.ball((0.0, 0.0, 0.0), 1.0, 3)])
@pytest.mark.parametrize("grading", [1.0, 2.0, 3.0])
def test_weights_sum_to_volume(domain, grading):
    g = make_graded_grid(domain, 32, grading, n_angular=8)
    assert abs(g.weights.sum() - domain.volume) <= 1e-8 * domain.volume
    assert np.all(g.weights > 0) and np.all(g.deltas > 0)


def test_graded_grid_is_symmetric_and_clusters_at_the_ends():
    g = make_graded_grid(Domain.interval(), 8, 2.0)
    np.testing.assert_allclose(g.x, 1.0 - g.x[::-1], atol=1e-15)
    assert np.all(np.diff(g.x) > 0)
    assert g.widths[0] < g.widths[3]
    edges = graded_unit_edges(8, 2.0)
    assert edges[0] == 0.0 and edges[-1] == 1.0


def test_ball_grid_is_deterministic():
    D = Domain.ball((0.0, 0.0), 1.0, 2)
    a, b = make_graded_grid(D, 12, 2.0), make_graded_grid(D, 12, 2.0)
    np.testing.assert_array_equal(a.nodes, b.nodes)


def test_midpoint_convergence_order():
    f = lambda x: np.exp(x) * np.cos(3 * x)
    exact = (np.exp(1) * (np.cos(3) + 3 * np.sin(3)) - 1) / 10
    errs = []
    for n in (16, 32, 64, 128):
        g = make_graded_grid(Domain.interval(), n, 1.0)
        errs.append(abs(g.integrate(f(g.x)) - exact))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 1.9)


def test_grid_csv_columns():
    g = make_graded_grid(Domain.interval(), 8, 2.0)
    lines = g.to_csv().strip().splitlines()
    assert lines[0] == "index,x0,weight,delta"
    assert len(lines) == 9


@settings(max_examples=100, deadline=None)
@given(st.floats(0.001, 0.999), st.floats(0.001, 0.999))
def test_boundary_distance_is_lipschitz_on_interval(x, y):
    I = Domain.interval()
    assert abs(boundary_distance(I, x) - boundary_distance(I, y)) <= abs(x - y) + 1e-15


@settings(max_examples=100, deadline=None)
@given(st.tuples(st.floats(-0.7, 0.7), st.floats(-0.7, 0.7)),
       st.tuples(st.floats(-0.7, 0.7), st.floats(-0.7, 0.7)))
def test_boundary_distance_is_lipschitz_on_disc(x, y):
    D = Domain.ball((0.0, 0.0), 1.0, 2)
    gap = abs(boundary_distance(D, x) - boundary_distance(D, y))
    assert gap <= np.hypot(x[0] - y[0], x[1] - y[1]) + 1e-12


def test_scalar_point_on_disk_is_rejected():
    dom = Domain.ball([0.0, 0.0], 1.0, 2)
    with pytest.raises(DomainError):
        boundary_distance(dom, 0.5)

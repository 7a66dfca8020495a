import json
import math

import numpy as np
import pytest
from scipy import linalg

from nonlocal_semilinear import (
    DegenerateInputError,
    base_eigen,
    minimal_solution,
    stability_index,
    weighted_first_eigenvalue,
)
from nonlocal_semilinear.spectral import eigen_report_json, phi_delta_comparability


def dense_eigenvalues(op, k):
    """Independent route: eigenvalues of the symmetric matrix W^1/2 A W^1/2."""
    sw = np.sqrt(op.weights)
    nu = linalg.eigh(sw[:, None] * op.matrix * sw[None, :], eigvals_only=True)
    return 1.0 / nu[::-1][:k]


def test_sfl_eigenvalues_match_series(sfl512):
    pairs = base_eigen(sfl512, 3)
    for n, pair in enumerate(pairs, start=1):
        assert pair.value == pytest.approx((n * math.pi) ** 0.5, rel=1e-2)


def test_power_iteration_matches_dense_solver(rfl256, sfl256):
    for op in (rfl256, sfl256):
        vals = [p.value for p in base_eigen(op, 3)]
        np.testing.assert_allclose(vals, dense_eigenvalues(op, 3), rtol=1e-9)


def test_eigenvectors(rfl256):
    pairs = base_eigen(rfl256, 3)
    w = rfl256.weights
    assert np.all(pairs[0].vector > 0)
    vals = [p.value for p in pairs]
    assert vals[0] > 0 and np.all(np.diff(vals) > 0)
    gram = np.array([[np.sum(w * a.vector * b.vector) for b in pairs] for a in pairs])
    np.testing.assert_allclose(gram, np.eye(3), atol=1e-6)
    assert not any(p.flagged_tie for p in pairs)


def test_first_eigenfunction_comparable_to_boundary_power(rfl128, rfl256):
    ratios = []
    for op in (rfl128, rfl256):
        phi = base_eigen(op, 1)[0].vector
        ratios.append(phi_delta_comparability(phi, op.grid.deltas, op.kernel.gamma))
    assert max(ratios) < 100
    assert abs(ratios[1] - ratios[0]) / ratios[0] < 0.1


def test_weighted_eigenvalue_with_unit_weight(rfl256):
    lam1 = base_eigen(rfl256, 1)[0].value
    sigma, phi = weighted_first_eigenvalue(rfl256, np.ones(rfl256.n))
    assert sigma == pytest.approx(lam1, rel=1e-8)
    assert np.sum(phi**2 * rfl256.weights) == pytest.approx(1.0, rel=1e-12)


def test_weighted_eigenvalue_scaling_and_support(rfl256):
    a = 1.0 + rfl256.grid.x
    s1, phi = weighted_first_eigenvalue(rfl256, a)
    s2, _ = weighted_first_eigenvalue(rfl256, 2 * a)
    assert s2 == pytest.approx(s1 / 2, rel=1e-9)
    half = np.where(rfl256.grid.x < 0.5, a, 0.0)
    s_half, _ = weighted_first_eigenvalue(rfl256, half)
    assert s_half > s1
    residual = phi - s1 * (rfl256 @ (a * phi))
    assert np.max(np.abs(residual)) <= 1e-8 * np.max(np.abs(phi))


def test_degenerate_weight(rfl256):
    with pytest.raises(DegenerateInputError):
        weighted_first_eigenvalue(rfl256, np.zeros(rfl256.n))
    assert stability_index(rfl256, np.zeros(rfl256.n), 1.5) == math.inf


def test_stability_index_blows_up_for_small_lambda(template256, lam_star256):
    sig = [stability_index(template256.gop, minimal_solution(template256.with_lambda(f * lam_star256)).u, 1.5)
           for f in (1e-4, 1e-2, 0.5)]
    assert sig[0] > sig[1] > sig[2] > 1
    assert sig[0] > 100


def test_eigen_report_json(rfl128):
    data = json.loads(eigen_report_json(rfl128, 2))
    assert set(data) == {"k", "values", "phi1_delta_comparability"}
    assert data["k"] == 2 and len(data["values"]) == 2


def test_clustered_eigenvalues_on_the_disk():
    from nonlocal_semilinear import Domain, GreenKernel, assemble, make_graded_grid

    dom = Domain.ball([0.0, 0.0], 1.0, 2)
    op = assemble(GreenKernel.rfl(0.75, dom), make_graded_grid(dom, 8, 2.0, 8))
    pairs = base_eigen(op, 3)
    ref = dense_eigenvalues(op, 3)
    # the second and third eigenvalues agree to about 1e-5 on a rotation-symmetric grid
    assert abs(ref[2] - ref[1]) < 1e-4 * ref[1]
    np.testing.assert_allclose([p.value for p in pairs], ref, rtol=1e-9)
    w = op.weights
    gram = np.array([[np.sum(w * a.vector * b.vector) for b in pairs] for a in pairs])
    np.testing.assert_allclose(gram, np.eye(3), atol=1e-8)


def test_k_larger_than_grid_is_rejected(rfl128):
    with pytest.raises(ValueError):
        base_eigen(rfl128, 129)

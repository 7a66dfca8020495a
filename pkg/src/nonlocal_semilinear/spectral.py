"""Eigenpairs of the operator through its discrete Green operator.

If ``G`` is the Green operator, its eigenvalues ``nu_n`` give the eigenvalues
``lambda_n = 1 / nu_n`` of the operator itself.  Everything here uses power
iteration in a weighted inner product; only small Ritz problems are solved
densely.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, NumericalError
from .greenop import DiscreteGreenOperator

RQ_TOL = 1e-12
RESIDUAL_TOL = 1e-10
MAX_ITER = 100_000


@dataclass(frozen=True, eq=False)
class EigenPair:
    value: float
    vector: np.ndarray
    iterations: int = 0
    flagged_tie: bool = False


def _power(apply, inner, v0, deflate=None):
    """Power iteration for the dominant eigenpair of a self-adjoint map.

    Stops once the Rayleigh quotient stagnates to ``RQ_TOL`` and the
    eigen-residual is below ``RESIDUAL_TOL`` relative to the eigenvalue.
    """
    v = v0 / math.sqrt(inner(v0, v0))
    rq_old = np.inf
    for it in range(1, MAX_ITER + 1):
        if deflate is not None:
            v = deflate(v)
            v = v / math.sqrt(inner(v, v))
        mv = apply(v)
        if deflate is not None:
            mv = deflate(mv)
        rq = inner(mv, v)
        res = np.max(np.abs(mv - rq * v)) / max(abs(rq), 1e-300) / np.max(np.abs(v))
        norm = math.sqrt(inner(mv, mv))
        if norm == 0:
            raise NumericalError("power iteration collapsed to zero")
        stagnated = abs(rq - rq_old) <= RQ_TOL * abs(rq)
        if stagnated and res <= RESIDUAL_TOL:
            return rq, mv / norm, it
        rq_old = rq
        v = mv / norm
    raise NumericalError("power iteration did not converge")


def base_eigen(gop: DiscreteGreenOperator, k: int = 1, guard: int = 4) -> list[EigenPair]:
    """First ``k`` eigenpairs ``(lambda_n, phi_n)`` with increasing ``lambda_n``.

    Block power iteration on ``k + guard`` vectors with a Rayleigh-Ritz step
    in the weighted inner product.  The guard vectors keep clustered or
    repeated eigenvalues (symmetric domains) from stalling convergence.
    Vectors are normalized so that ``sum_i w_i phi_i**2 = 1`` and ``phi_1 > 0``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = gop.n
    m = min(k + guard, n)
    if k > n:
        raise ValueError(f"k={k} exceeds the number of nodes {n}")
    # B = W^(1/2) A W^(1/2) is symmetric and similar to the map f -> G f
    sw = np.sqrt(gop.grid.weights)
    B = sw[:, None] * gop.matrix * sw[None, :]
    rng = np.random.default_rng(0)
    start = rng.standard_normal((n, m))
    start[:, 0] = sw
    Q, _ = np.linalg.qr(start)
    nu_old = np.full(k, np.inf)
    for it in range(1, MAX_ITER + 1):
        Q, _ = np.linalg.qr(B @ Q)
        BQ = B @ Q
        nu, S = np.linalg.eigh(Q.T @ BQ)
        order = np.argsort(nu)[::-1]
        nu, S = nu[order], S[:, order]
        Q, BQ = Q @ S, BQ @ S
        top = nu[:k]
        res = np.max(np.linalg.norm(BQ[:, :k] - Q[:, :k] * top, axis=0) / np.abs(top))
        if np.all(np.abs(top - nu_old) <= RQ_TOL * np.abs(top)) and res <= RESIDUAL_TOL:
            break
        nu_old = top
    else:
        raise NumericalError("block power iteration did not converge")
    if np.any(top <= 0):
        raise NumericalError("Green operator has a nonpositive leading eigenvalue")

    out: list[EigenPair] = []
    for j in range(k):
        vec = Q[:, j] / sw
        if j == 0:
            vec = vec if vec.sum() > 0 else -vec
            if np.any(vec <= 0):
                raise NumericalError("first eigenvector is not strictly positive")
        else:
            vec = vec if vec[np.argmax(np.abs(vec))] > 0 else -vec
        value = 1.0 / float(top[j])
        tie = bool(out) and abs(value - out[-1].value) < 1e-10 * out[-1].value
        out.append(EigenPair(value, vec, it, tie))
    return out


def weighted_first_eigenvalue(gop: DiscreteGreenOperator, a) -> tuple[float, np.ndarray]:
    """Principal eigenvalue ``sigma`` of ``phi = sigma G[a phi]``.

    ``sigma = 1 / rho`` with ``rho`` the spectral radius of ``v -> G[a v]``,
    which is self-adjoint for ``<f, g> = sum_i a_i w_i f_i g_i``.  The
    returned ``phi`` is nonnegative with ``sum_i a_i phi_i**2 w_i = 1``.
    """
    a = np.asarray(a, dtype=float)
    if np.any(a < 0):
        raise ValueError("weight must be nonnegative")
    if not np.any(a > 0):
        raise DegenerateInputError("weight vanishes identically")
    w = gop.grid.weights
    aw = a * w
    inner = lambda f, g: float(np.sum(aw * f * g))
    apply = lambda v: gop.matrix @ (aw * v)
    # start from G[a] so the start vector has positive a-weighted norm
    v0 = apply(np.ones(gop.n))
    rho, phi, _ = _power(apply, inner, v0)
    phi = np.abs(phi) / math.sqrt(inner(phi, phi))
    return 1.0 / rho, phi


def stability_index(gop: DiscreteGreenOperator, u, p: float) -> float:
    """``sigma`` for the weight ``p u**(p-1)``; ``inf`` when ``u`` vanishes."""
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise ValueError("stability index needs u >= 0")
    a = p * u ** (p - 1.0)
    if not np.any(a > 0):
        return math.inf
    sigma, _ = weighted_first_eigenvalue(gop, a)
    return sigma


def phi_delta_comparability(phi, deltas, gamma: float) -> float:
    """``max(phi / delta**gamma) / min(phi / delta**gamma)``."""
    r = np.asarray(phi) / np.asarray(deltas) ** gamma
    return float(np.max(r) / np.min(r))


def eigen_report(gop: DiscreteGreenOperator, k: int = 3) -> dict:
    pairs = base_eigen(gop, k)
    comp = phi_delta_comparability(pairs[0].vector, gop.grid.deltas, gop.kernel.gamma)
    return {"k": k, "values": [p.value for p in pairs], "phi1_delta_comparability": comp}


def eigen_report_json(gop: DiscreteGreenOperator, k: int = 3) -> str:
    return json.dumps(eigen_report(gop, k))

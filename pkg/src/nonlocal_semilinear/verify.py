"""Numerical certificates for Green-kernel inequalities.

* :func:`check_marcinkiewicz_uniform` evaluates ``int (G(x,y)/d(y)**gamma)**q d(x)**alpha dx``
  for probe points ``y`` approaching the boundary.  Below the critical
  exponent the values stay bounded.
* :func:`check_3g` samples the constant in
  ``G(x,y) G(y,z) / G(x,z) <= C (|x-y|**(2s-N) + |y-z|**(2s-N))``.
* :func:`nonexistence_probe` pairs the lower-bound integral
  ``int (lam G[mu_n])**p d**gamma`` with the minimal-solution status for
  unit-norm Dirac masses pushed toward the boundary.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace

import numpy as np

from .domain import Grid
from .errors import PreconditionError
from .greenop import DiscreteGreenOperator
from .kernel import GreenKernel
from .measure import boundary_concentrated_dirac
from .semilinear import SemilinearProblem, minimal_solution


def _power_cell_integral(lo, hi, y, kappa):
    """``int_lo^hi |x - y|**kappa dx`` for ``kappa > -1`` (vectorized over cells)."""
    e = kappa + 1.0
    with np.errstate(invalid="ignore"):
        left = np.where(y <= lo, (hi - y) ** e - (lo - y) ** e, 0.0)
        right = np.where(y >= hi, (y - lo) ** e - (y - hi) ** e, 0.0)
        inside = np.where((y > lo) & (y < hi), (y - lo) ** e + (hi - y) ** e, 0.0)
    return (left + right + inside) / e


def local_subgrid(grid: Grid, y: float, refine: int = 4, cells: int = 3):
    """Cells of a 1D grid with those within ``cells`` of ``y`` split ``refine`` times.

    Returns ``(nodes, weights, lo, hi)`` where ``lo``/``hi`` are sub-cell edges.
    """
    edges = grid.edges
    owner = int(np.clip(np.searchsorted(edges, y) - 1, 0, grid.n - 1))
    near = np.zeros(grid.n, dtype=bool)
    near[max(owner - cells, 0):owner + cells + 1] = True
    lo_list, hi_list = [], []
    for i in range(grid.n):
        if near[i] and refine > 1:
            sub = np.linspace(edges[i], edges[i + 1], refine + 1)
            lo_list.append(sub[:-1])
            hi_list.append(sub[1:])
        else:
            lo_list.append(edges[i:i + 1])
            hi_list.append(edges[i + 1:i + 2])
    lo = np.concatenate(lo_list)
    hi = np.concatenate(hi_list)
    return 0.5 * (lo + hi), hi - lo, lo, hi


def probe_integral(kernel: GreenKernel, grid: Grid, y: float, q: float, alpha: float,
                   refine: int = 4, cells: int = 3, singular_weights: bool = True) -> float:
    """``int (G(x, y) / d(y)**gamma)**q d(x)**alpha dx`` on a locally refined grid.

    With ``singular_weights`` the midpoint weight of every cell is replaced by
    the exact cell integral of ``|x - y|**(q (2s-N))`` divided by its midpoint
    value, which captures the integrable peak at ``x = y``.
    """
    if grid.N != 1:
        raise PreconditionError("probe integrals are implemented on 1D grids")
    if q < 1:
        raise PreconditionError("q must be >= 1")
    dom = kernel.domain
    dy = float(dom.distance_unchecked(y))
    x, w, lo, hi = local_subgrid(grid, y, refine, cells)
    x = np.where(x == y, x + 1e-9 * w, x)
    dx = dom.distance_unchecked(x)
    vals = (np.asarray(kernel.evaluate(x, y)) / dy**kernel.gamma) ** q * dx**alpha
    if singular_weights:
        kappa = q * kernel.params.beta
        w = _power_cell_integral(lo, hi, y, kappa) / np.abs(x - y) ** kappa
    return float(np.sum(vals * w))


def check_marcinkiewicz_uniform(kernel: GreenKernel, grid: Grid, q: float, alpha: float,
                                probe_points, refine: int = 4, cells: int = 3,
                                singular_weights: bool = True) -> list[float]:
    """Probe integral at every point of ``probe_points``."""
    return [probe_integral(kernel, grid, float(y), q, alpha, refine, cells, singular_weights)
            for y in probe_points]


def probe_points_toward(boundary_point: float, deltas, domain) -> list[float]:
    """Points at the given distances from an endpoint, along the inward normal."""
    lo = domain.center_point[0] - domain.ball_radius
    hi = domain.center_point[0] + domain.ball_radius
    if boundary_point == hi:
        return [hi - d for d in deltas]
    if boundary_point == lo:
        return [lo + d for d in deltas]
    raise PreconditionError("boundary_point must be an endpoint of the interval")


def check_3g(kernel: GreenKernel, grid: Grid, samples: int = 10_000, seed: int = 0) -> float:
    """Largest sampled ``G(x,y) G(y,z) / (G(x,z) (|x-y|**b + |y-z|**b))``, ``b = 2s - N``.

    Node triples are drawn with a seeded generator; triples with any pair
    closer than the larger of the two cell widths are discarded.
    """
    if samples < 100:
        raise PreconditionError("need at least 100 samples")
    rng = np.random.default_rng(seed)
    nodes, widths = grid.nodes, grid.widths
    kept: list[np.ndarray] = []
    total = 0
    while total < samples:
        idx = rng.integers(0, grid.n, size=(2 * (samples - total) + 16, 3))

        def far(a, b):
            d = np.linalg.norm(nodes[idx[:, a]] - nodes[idx[:, b]], axis=-1)
            return d >= np.maximum(widths[idx[:, a]], widths[idx[:, b]])

        ok = far(0, 1) & far(1, 2) & far(0, 2)
        good = idx[ok][: samples - total]
        kept.append(good)
        total += len(good)
    tri = np.concatenate(kept)
    x, y, z = nodes[tri[:, 0]], nodes[tri[:, 1]], nodes[tri[:, 2]]
    b = kernel.params.beta
    rxy = np.linalg.norm(x - y, axis=-1)
    ryz = np.linalg.norm(y - z, axis=-1)
    quot = kernel.evaluate(x, y) * kernel.evaluate(y, z) / kernel.evaluate(x, z)
    return float(np.max(quot / (rxy**b + ryz**b)))


@dataclass(frozen=True)
class ProbeRow:
    p: float
    delta_y: float
    integral: float
    solve_status: str


def nonexistence_probe(template: SemilinearProblem, boundary_point: float = 1.0,
                       delta_sequence=(1e-1, 1e-2, 1e-3), refine: int = 4) -> list[ProbeRow]:
    """Lower-bound integrals and solve outcomes for boundary-concentrated Diracs.

    ``template`` supplies the operator, ``p``, ``lam`` and solver settings;
    its measure is replaced for each distance ``d`` by the unit-norm datum
    ``d**(-gamma) Dirac(y)`` with ``y`` at distance ``d`` from
    ``boundary_point``.  Any solution satisfies ``u >= lam G[mu]``, so
    ``int (lam G[mu])**p d**gamma`` bounds ``int u**p d**gamma`` from below.
    """
    gop, p, lam = template.gop, template.p, template.lam
    kernel = gop.kernel
    gamma = kernel.gamma
    rows = []
    for d, y in zip(delta_sequence, probe_points_toward(boundary_point, delta_sequence, kernel.domain)):
        integral = lam**p * probe_integral(kernel, gop.grid, y, p, gamma, refine)
        mu = boundary_concentrated_dirac(y, gamma, kernel.domain)
        status = minimal_solution(replace(template, mu=mu)).status
        rows.append(ProbeRow(float(p), float(d), float(integral), status))
    return rows


def rows_to_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for r in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()

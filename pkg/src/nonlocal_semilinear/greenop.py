"""Nystrom discretization of the Green operator and grid-function norms.

The operator acts on a grid function ``f`` by

    (G f)_i = sum_j A_ij w_j f_j

where ``A_ij = G(x_i, x_j)`` off the diagonal.  The diagonal entry replaces
the (infinite) kernel value using a fitted local model
``c_i |x_i - y|**(2s-N)`` whose singular part is integrated exactly, see
:func:`assemble`.
``A`` is symmetric, so the operator is self-adjoint for the inner product
``<f, g>_w = sum_i w_i f_i g_i``.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .domain import Grid
from .errors import DomainError
from .kernel import GreenKernel
from .measure import WeightedMeasure

_MAGIC = b"NLGO"


@dataclass(frozen=True, eq=False)
class DiscreteGreenOperator:
    """Symmetric kernel matrix ``A`` together with its grid and kernel."""

    matrix: np.ndarray
    grid: Grid
    kernel: GreenKernel

    def __post_init__(self) -> None:
        self.matrix.setflags(write=False)

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def weights(self) -> np.ndarray:
        return self.grid.weights

    @property
    def operator_matrix(self) -> np.ndarray:
        """Matrix ``M_ij = A_ij w_j`` of the map ``f -> G f``."""
        return self.matrix * self.grid.weights[None, :]

    def __matmul__(self, f):
        return apply_to_function(self, f)

    def solve(self, g: np.ndarray) -> np.ndarray:
        """Return ``f`` with ``G f = g`` (dense direct solve)."""
        return np.linalg.solve(self.operator_matrix, np.asarray(g, dtype=float))

    def inner(self, f, g) -> float:
        return float(np.sum(self.grid.weights * np.asarray(f) * np.asarray(g)))

    def kernel_row(self, y) -> np.ndarray:
        """``G(x_i, y)`` at every node for an off-grid point ``y``."""
        y = _nudge_off_nodes(self.grid, self.grid.domain.as_points(y))
        return np.asarray(self.kernel.evaluate(self.grid.nodes, y), dtype=float)

    def dump(self, path: str | Path) -> None:
        """Write the kernel matrix as row-major little-endian float64 with a JSON header."""
        header = json.dumps(
            {"n": self.n, "family": self.kernel.family, "s": self.kernel.s,
             "gamma": self.kernel.gamma},
            sort_keys=True,
        ).encode()
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<I", len(header)))
            fh.write(header)
            fh.write(np.ascontiguousarray(self.matrix, dtype="<f8").tobytes())


def load_matrix(path: str | Path) -> tuple[dict, np.ndarray]:
    """Read a file written by :meth:`DiscreteGreenOperator.dump`."""
    raw = Path(path).read_bytes()
    if raw[:4] != _MAGIC:
        raise ValueError("not a Green operator dump")
    (hlen,) = struct.unpack("<I", raw[4:8])
    header = json.loads(raw[8:8 + hlen])
    n = header["n"]
    mat = np.frombuffer(raw[8 + hlen:], dtype="<f8").reshape(n, n).copy()
    return header, mat


def _unit_ball_volume(N: int) -> float:
    return math.pi ** (N / 2.0) / math.gamma(N / 2.0 + 1.0)


def _self_cell_integrals(grid: Grid, beta: float) -> np.ndarray:
    """``int_{cell i} |x_i - y|**beta dy`` for every node."""
    if grid.N == 1 and grid.edges is not None:
        x = grid.x
        left = x - grid.edges[:-1]
        right = grid.edges[1:] - x
        return (left ** (beta + 1.0) + right ** (beta + 1.0)) / (beta + 1.0)
    # equal-volume ball around the node
    N = grid.N
    rad = (grid.weights / _unit_ball_volume(N)) ** (1.0 / N)
    sphere = N * _unit_ball_volume(N)
    return sphere * rad ** (beta + N) / (beta + N)


def _domain_integrals(grid: Grid, beta: float) -> np.ndarray:
    """``int_Omega |x_i - y|**beta dy`` for every node of a 1D grid."""
    a, b = grid.edges[0], grid.edges[-1]
    x = grid.x
    return ((x - a) ** (beta + 1.0) + (b - x) ** (beta + 1.0)) / (beta + 1.0)


def _fit_singular_plus_constant(A, dist, beta, k: int = 4):
    """Least-squares fit of ``G(x_i, y) ~ c_i |x_i - y|**beta + d_i`` on the k nearest nodes."""
    n = A.shape[0]
    nearest = np.argsort(dist, axis=1, kind="stable")[:, :k]
    r = np.arange(n)[:, None]
    basis = np.stack([dist[r, nearest] ** beta, np.ones((n, k))], axis=-1)
    ata = np.einsum("nki,nkj->nij", basis, basis)
    atb = np.einsum("nki,nk->ni", basis, A[r, nearest])
    sol = np.linalg.solve(ata, atb[..., None])[..., 0]
    return sol[:, 0], sol[:, 1]


def assemble(kernel: GreenKernel, grid: Grid, diagonal: str = "subtract") -> DiscreteGreenOperator:
    """Build the Nystrom matrix for ``kernel`` on ``grid``.

    Off the diagonal ``A_ij = G(x_i, x_j)``.  Near ``x_i`` the kernel behaves
    like ``c_i |x_i - y|**(2s-N)``, with ``c_i`` fitted from the two nearest
    off-diagonal entries.  The diagonal is chosen from that local model:

    ``"cell"``
        ``A_ii w_i`` is the exact integral of the model over cell ``i``.
    ``"subtract"`` (1D only, the default)
        ``A_ii w_i`` is the exact integral of the model over the whole
        interval minus its midpoint sum over the other cells (singularity
        subtraction), plus the constant part of a local model
        ``c_i |x_i - y|**(2s-N) + d_i`` fitted on the four nearest nodes.
        This also corrects the midpoint error of the neighbouring cells,
        which dominates the cell-only rule.
    """
    if diagonal not in ("cell", "subtract"):
        raise ValueError(f"unknown diagonal rule {diagonal!r}")
    if grid.domain != kernel.domain:
        raise DomainError("grid and kernel live on different domains")
    n = grid.n
    beta = kernel.params.beta
    i, j = np.triu_indices(n, k=1)
    vals = np.asarray(kernel.evaluate(grid.nodes[i], grid.nodes[j]), dtype=float)
    A = np.zeros((n, n))
    A[i, j] = vals
    A[j, i] = vals

    dist = np.linalg.norm(grid.nodes[:, None, :] - grid.nodes[None, :, :], axis=-1)
    np.fill_diagonal(dist, np.inf)
    rows = np.arange(n)
    if diagonal == "subtract" and grid.N == 1:
        c, d = _fit_singular_plus_constant(A, dist, beta)
        with np.errstate(divide="ignore"):
            model = dist**beta
        np.fill_diagonal(model, 0.0)
        local = _domain_integrals(grid, beta) - model @ grid.weights
        A[rows, rows] = c * local / grid.weights + d
    else:
        nearest = np.argsort(dist, axis=1, kind="stable")[:, :2]
        r = rows[:, None]
        c = np.mean(A[r, nearest] / dist[r, nearest] ** beta, axis=1)
        A[rows, rows] = c * _self_cell_integrals(grid, beta) / grid.weights
    return DiscreteGreenOperator(A, grid, kernel)


def apply_to_function(gop: DiscreteGreenOperator, f) -> np.ndarray:
    """``(G f)_i = sum_j A_ij w_j f_j``."""
    f = np.asarray(f, dtype=float)
    if f.shape[0] != gop.n:
        raise DomainError(f"grid function has {f.shape[0]} values, grid has {gop.n} nodes")
    wf = gop.grid.weights * f if f.ndim == 1 else gop.grid.weights[:, None] * f
    return gop.matrix @ wf


def _nudge_off_nodes(grid: Grid, pts: np.ndarray) -> np.ndarray:
    """Move any point sitting exactly on a node a tiny step toward the center."""
    pts = np.array(pts, dtype=float, copy=True)
    flat = pts.reshape(-1, grid.N)
    centre = grid.domain.center_point
    for k, p in enumerate(flat):
        hit = np.flatnonzero(np.all(grid.nodes == p, axis=1))
        if hit.size:
            step = 1e-9 * grid.widths[hit[0]]
            direction = centre - p
            norm = np.linalg.norm(direction)
            if norm == 0:
                direction, norm = np.eye(grid.N)[0], 1.0
            flat[k] = p + step * direction / norm
    return flat.reshape(pts.shape)


def apply_to_measure(gop: DiscreteGreenOperator, mu: WeightedMeasure) -> np.ndarray:
    """``G[mu]`` at the nodes: kernel columns for atoms, ``G f`` for the density."""
    out = np.zeros(gop.n)
    if mu.atoms:
        locs = _nudge_off_nodes(gop.grid, mu.atom_locations())
        for y, m in zip(locs, mu.atom_masses()):
            if m != 0:
                out += m * np.asarray(gop.kernel.evaluate(gop.grid.nodes, y), dtype=float)
    if mu.density is not None:
        out += apply_to_function(gop, mu.density)
    return out


def weighted_lp_norm(u, grid: Grid, p: float = 2.0, alpha: float = 0.0) -> float:
    """``(sum_i |u_i|**p delta_i**alpha w_i)**(1/p)``."""
    if p < 1:
        raise ValueError("p must be >= 1")
    u = np.abs(np.asarray(u, dtype=float))
    top = float(np.max(u)) if u.size else 0.0
    if top == 0 or not np.isfinite(top):
        return top
    # scale out the maximum so that u**p neither underflows nor overflows
    return top * float(np.sum((u / top) ** p * grid.deltas**alpha * grid.weights) ** (1.0 / p))


def marcinkiewicz_norm(u, grid: Grid, q: float, alpha: float = 0.0) -> float:
    """Weak-``L^q`` quasi-norm ``sup_t t * meas{|u| >= t}**(1/q)``.

    The measure is ``delta**alpha dx``; the supremum is attained at one of the
    data values, so only those are tried.
    """
    if not q > 1:
        raise ValueError("q must be > 1")
    a = np.abs(np.asarray(u, dtype=float))
    m = grid.deltas**alpha * grid.weights
    order = np.argsort(a, kind="stable")
    a_sorted, m_sorted = a[order], m[order]
    tail = np.concatenate([np.cumsum(m_sorted[::-1])[::-1], [0.0]])
    first = np.searchsorted(a_sorted, a_sorted, side="left")
    vals = a_sorted * tail[first] ** (1.0 / q)
    return float(np.max(vals)) if vals.size else 0.0


def trace_quotient(u, kernel: GreenKernel, grid: Grid, epsilon: float) -> float:
    """``(1/eps) * sum_{delta_i < eps} (u_i / W_i) w_i`` (boundary-layer average of ``u/W``)."""
    if not 0 < epsilon < float(np.max(grid.deltas)):
        raise ValueError("epsilon must lie in (0, max delta)")
    u = np.asarray(u, dtype=float)
    mask = grid.deltas < epsilon
    W = np.asarray(kernel.weight(grid.nodes[mask]), dtype=float)
    return float(np.sum(u[mask] / W * grid.weights[mask]) / epsilon)

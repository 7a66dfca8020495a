"""Model domains, boundary distance and graded quadrature grids.

Two domain shapes are supported: an interval ``(a, b)`` and a Euclidean ball
in dimension 1, 2 or 3.  A :class:`Grid` is a quadrature rule whose nodes are
strictly interior and cluster toward the boundary, which is where the kernel
weights ``delta**gamma`` and ``delta**(2s - gamma - 1)`` vary fastest.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DomainError

MIN_NODES = 4


@dataclass(frozen=True)
class Domain:
    """A bounded model domain.

    Use :meth:`interval` or :meth:`ball` rather than the raw constructor.
    """

    kind: str
    N: int
    a: float = 0.0
    b: float = 1.0
    center: tuple[float, ...] = (0.0,)
    radius: float = 1.0

    def __post_init__(self) -> None:
        if self.kind == "interval":
            if not self.a < self.b:
                raise DomainError(f"interval needs a < b, got ({self.a}, {self.b})")
            if self.N != 1:
                raise DomainError("an interval has N = 1")
        elif self.kind == "ball":
            if self.N not in (1, 2, 3):
                raise DomainError(f"ball dimension must be 1, 2 or 3, got {self.N}")
            if not self.radius > 0:
                raise DomainError("ball radius must be positive")
            if len(self.center) != self.N:
                raise DomainError("ball center has the wrong dimension")
        else:
            raise DomainError(f"unknown domain kind {self.kind!r}")

    @classmethod
    def interval(cls, a: float = 0.0, b: float = 1.0) -> "Domain":
        return cls("interval", 1, a=float(a), b=float(b))

    @classmethod
    def ball(cls, center=None, radius: float = 1.0, N: int = 1) -> "Domain":
        if center is None:
            center = (0.0,) * N
        center = tuple(float(c) for c in np.atleast_1d(center))
        return cls("ball", int(N), center=center, radius=float(radius))

    # -- geometry ---------------------------------------------------------
    @property
    def center_point(self) -> np.ndarray:
        if self.kind == "interval":
            return np.array([0.5 * (self.a + self.b)])
        return np.asarray(self.center, dtype=float)

    @property
    def ball_radius(self) -> float:
        """Radius of the domain viewed as a ball (an interval is a 1-ball)."""
        if self.kind == "interval":
            return 0.5 * (self.b - self.a)
        return self.radius

    @property
    def volume(self) -> float:
        R = self.ball_radius
        return {1: 2.0 * R, 2: np.pi * R**2, 3: 4.0 / 3.0 * np.pi * R**3}[self.N]

    def as_points(self, x) -> np.ndarray:
        """Coerce ``x`` to an array of shape ``(..., N)``.

        In 1D a scalar or an array of scalars is accepted.
        """
        x = np.asarray(x, dtype=float)
        if self.N == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        if x.ndim == 0 or x.shape[-1] != self.N:
            raise DomainError(f"points must have {self.N} coordinates")
        return x

    def distance_unchecked(self, x) -> np.ndarray:
        """Signed distance to the boundary (positive inside), no validation."""
        pts = self.as_points(x)
        if self.kind == "interval":
            t = pts[..., 0]
            return np.minimum(t - self.a, self.b - t)
        r = np.linalg.norm(pts - self.center_point, axis=-1)
        return self.radius - r

    def contains(self, x) -> np.ndarray:
        return self.distance_unchecked(x) > 0


def boundary_distance(domain: Domain, point) -> np.ndarray | float:
    """Distance from ``point`` (or an array of points) to the boundary.

    Raises :class:`DomainError` if any point is on or outside the boundary.
    """
    d = domain.distance_unchecked(point)
    if np.any(~(d > 0)):
        raise DomainError("point is not strictly inside the domain")
    return float(d) if np.ndim(d) == 0 else d


def graded_unit_edges(n: int, grading: float) -> np.ndarray:
    """Cell edges on ``[0, 1]`` clustered like ``t**grading`` at both ends."""
    t = np.linspace(0.0, 1.0, n + 1)
    left = 0.5 * np.abs(2.0 * t) ** grading
    right = 1.0 - 0.5 * np.abs(2.0 * (1.0 - t)) ** grading
    edges = np.where(t <= 0.5, left, right)
    edges[0], edges[-1] = 0.0, 1.0
    if n % 2 == 0:
        edges[n // 2] = 0.5
    return edges


def radial_edges(n: int, grading: float, radius: float) -> np.ndarray:
    """Radial cell edges on ``[0, R]`` clustered toward ``r = R``."""
    t = np.linspace(0.0, 1.0, n + 1)
    edges = radius * (1.0 - (1.0 - t) ** grading)
    edges[-1] = radius
    return edges


@dataclass(frozen=True, eq=False)
class Grid:
    """Quadrature nodes, weights and boundary distances on a domain.

    ``nodes`` has shape ``(n, N)``.  ``widths`` is a characteristic cell size
    per node (the cell length in 1D).  ``edges`` is only set in 1D.
    """

    domain: Domain
    nodes: np.ndarray
    weights: np.ndarray
    deltas: np.ndarray
    widths: np.ndarray
    grading: float
    edges: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        for arr in (self.nodes, self.weights, self.deltas, self.widths):
            arr.setflags(write=False)
        if self.edges is not None:
            self.edges.setflags(write=False)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def N(self) -> int:
        return self.domain.N

    @property
    def x(self) -> np.ndarray:
        """Node coordinates as a flat array (1D grids only)."""
        if self.N != 1:
            raise DomainError("flat coordinates only exist on 1D grids")
        return self.nodes[:, 0]

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, np.asarray(f, dtype=float)))

    def to_csv(self, path: str | Path | None = None) -> str:
        """Write ``index, x0[, x1, x2], weight, delta`` rows; return the text."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["index", *[f"x{k}" for k in range(self.N)], "weight", "delta"])
        for i in range(self.n):
            writer.writerow(
                [i, *[repr(float(c)) for c in self.nodes[i]],
                 repr(float(self.weights[i])), repr(float(self.deltas[i]))]
            )
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def make_graded_grid(domain: Domain, n: int = 256, grading: float = 2.0,
                     n_angular: int = 16) -> Grid:
    """Build a graded composite-midpoint grid.

    In 1D there are ``n`` cells whose edges cluster like ``t**grading`` toward
    both endpoints; each node is the midpoint of its cell and the weight is
    the cell length.  On a 2- or 3-ball, ``n`` is the number of radial
    shells (graded toward the sphere) and ``n_angular`` the number of equal
    angular sectors; weights are exact cell volumes.
    """
    if int(n) != n or n < MIN_NODES:
        raise ConfigurationError(f"grid needs at least {MIN_NODES} nodes, got {n}")
    if not grading >= 1:
        raise ConfigurationError(f"grading must be >= 1, got {grading}")
    n = int(n)
    grading = float(grading)

    if domain.N == 1:
        c = domain.center_point[0]
        R = domain.ball_radius
        edges = (c - R) + 2.0 * R * graded_unit_edges(n, grading)
        mids = 0.5 * (edges[:-1] + edges[1:])
        widths = np.diff(edges)
        nodes = mids[:, None]
        deltas = np.minimum(mids - edges[0], edges[-1] - mids)
        return Grid(domain, nodes, widths.copy(), deltas, widths, grading, edges=edges)

    if n_angular < 4:
        raise ConfigurationError("ball grids need at least 4 angular sectors")
    R = domain.radius
    re = radial_edges(n, grading, R)
    rm = 0.5 * (re[:-1] + re[1:])
    dr = np.diff(re)
    c = domain.center_point
    if domain.N == 2:
        th = np.linspace(0.0, 2.0 * np.pi, n_angular + 1)
        thm = 0.5 * (th[:-1] + th[1:])
        dth = 2.0 * np.pi / n_angular
        r_g, t_g = np.meshgrid(rm, thm, indexing="ij")
        vol = 0.5 * (re[1:] ** 2 - re[:-1] ** 2)[:, None] * dth * np.ones_like(t_g)
        nodes = np.stack([r_g * np.cos(t_g), r_g * np.sin(t_g)], axis=-1).reshape(-1, 2)
        width = np.maximum(dr[:, None], rm[:, None] * dth) * np.ones_like(t_g)
    else:
        n_polar = max(2, n_angular // 2)
        th = np.linspace(0.0, np.pi, n_polar + 1)
        ph = np.linspace(0.0, 2.0 * np.pi, n_angular + 1)
        thm = 0.5 * (th[:-1] + th[1:])
        phm = 0.5 * (ph[:-1] + ph[1:])
        dcos = np.cos(th[:-1]) - np.cos(th[1:])
        dph = 2.0 * np.pi / n_angular
        r_g, t_g, p_g = np.meshgrid(rm, thm, phm, indexing="ij")
        vol = ((re[1:] ** 3 - re[:-1] ** 3) / 3.0)[:, None, None] * dcos[None, :, None] * dph
        vol = vol * np.ones_like(r_g)
        nodes = np.stack(
            [r_g * np.sin(t_g) * np.cos(p_g), r_g * np.sin(t_g) * np.sin(p_g), r_g * np.cos(t_g)],
            axis=-1,
        ).reshape(-1, 3)
        width = np.maximum(dr[:, None, None], rm[:, None, None] * np.pi / n_polar) * np.ones_like(r_g)
    nodes = nodes + c
    weights = vol.reshape(-1)
    deltas = (R - np.repeat(rm, weights.size // n)).copy()
    return Grid(domain, nodes, weights, deltas, width.reshape(-1).copy(), grading,
                meta={"n_radial": n, "n_angular": n_angular})

"""Green kernels, the two-sided comparison kernel and exponent arithmetic.

Two operator families are available:

* ``RFL`` -- the restricted fractional Laplacian on a ball (an interval is a
  1-ball).  Its Green function has the classical Riesz closed form, and its
  boundary exponent is ``gamma = s``.
* ``SFL`` -- the spectral fractional Laplacian on an interval, whose Green
  function is the eigen-series ``sum_n lambda_n**(-s) phi_n(x) phi_n(y)`` of
  the Dirichlet Laplacian.  Its boundary exponent is ``gamma = 1``.

Every kernel is compared against

    K(x, y) = |x-y|**(2s-N) * min(d(x)/|x-y|, 1)**gamma * min(d(y)/|x-y|, 1)**gamma

where ``d`` is the distance to the boundary.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .domain import Domain, Grid
from .errors import (
    AssumptionError,
    DomainError,
    SingularityError,
    UnsupportedError,
)

FAMILIES = ("RFL", "SFL", "comparison")


@dataclass(frozen=True)
class KernelParams:
    """Order ``s``, boundary exponent ``gamma`` and dimension ``N``."""

    s: float
    gamma: float
    N: int

    def __post_init__(self) -> None:
        s, g, N = self.s, self.gamma, self.N
        if not 0 < s <= 1:
            raise AssumptionError(f"s must lie in (0, 1], got {s}")
        if not 0 < g <= 1:
            raise AssumptionError(f"gamma must lie in (0, 1], got {g}")
        if int(N) != N or N < 1:
            raise AssumptionError(f"N must be a positive integer, got {N}")
        if not N > 2 * s:
            raise AssumptionError(f"kernel assumption violated: need N > 2s, got N={N}, s={s}")
        if g < s - 0.5 - 1e-14:
            raise AssumptionError(
                f"kernel assumption violated: need gamma >= s - 1/2, got gamma={g}, s={s}"
            )

    @property
    def beta(self) -> float:
        """Exponent of the interior singularity, ``2s - N``."""
        return 2.0 * self.s - self.N

    def to_dict(self) -> dict:
        return {"s": self.s, "gamma": self.gamma, "N": self.N}


# -- exponent arithmetic ------------------------------------------------------

def critical_exponent(params: KernelParams) -> float:
    """``p* = (N + gamma) / (N + gamma - 2s)``."""
    N, g, s = params.N, params.gamma, params.s
    return (N + g) / (N + g - 2.0 * s)


def marcinkiewicz_exponent(params: KernelParams, alpha: float) -> float:
    """Weak-Lebesgue exponent ``(N + alpha) / (N + gamma - 2s)`` of the Green operator."""
    N, g, s = params.N, params.gamma, params.s
    if not alpha > g - 2.0 * s:
        raise AssumptionError(f"alpha must exceed gamma - 2s = {g - 2 * s}, got {alpha}")
    return (N + alpha) / (N + g - 2.0 * s)


def dimension_threshold(params: KernelParams) -> float:
    """Dimension above which the stability theory applies (``N >= N_{s,gamma}``)."""
    s, g = params.s, params.gamma
    if g < 2.0 * s:
        return 4.0 * s
    return 4.0 * s * (1.0 + g) - g


def satisfies_dimension_condition(params: KernelParams) -> bool:
    return params.N >= dimension_threshold(params) - 1e-12


# -- pointwise helpers ----------------------------------------------------------

def _pair(domain: Domain, x, y):
    px = domain.as_points(x)
    py = domain.as_points(y)
    dx = domain.distance_unchecked(px)
    dy = domain.distance_unchecked(py)
    if np.any(~(dx > 0)) or np.any(~(dy > 0)):
        raise DomainError("kernel arguments must be strictly inside the domain")
    r = np.linalg.norm(px - py, axis=-1)
    if np.any(r == 0):
        raise SingularityError("kernel evaluated on the diagonal x = y")
    return px, py, dx, dy, r


def _scalar_or_array(v):
    v = np.asarray(v, dtype=float)
    return float(v) if v.ndim == 0 else v


def comparison_kernel(x, y, params: KernelParams, domain: Domain):
    """Evaluate the two-sided comparison kernel ``K(x, y)``."""
    _, _, dx, dy, r = _pair(domain, x, y)
    g = params.gamma
    val = r**params.beta * np.minimum(dx / r, 1.0) ** g * np.minimum(dy / r, 1.0) ** g
    return _scalar_or_array(val)


def boundary_weight(x, params: KernelParams, domain: Domain):
    """Boundary normalization weight ``W = d**(2s - gamma - 1)``.

    On the borderline ``gamma = s - 1/2`` the weight carries the extra factor
    ``1 + |ln d|``.
    """
    d = domain.distance_unchecked(x)
    if np.any(~(d > 0)):
        raise DomainError("point is not strictly inside the domain")
    s, g = params.s, params.gamma
    w = d ** (2.0 * s - g - 1.0)
    if abs(g - (s - 0.5)) < 1e-12:
        w = w * (1.0 + np.abs(np.log(d)))
    return _scalar_or_array(w)


# -- restricted fractional Laplacian on a ball --------------------------------

def rfl_constant(N: int, s: float) -> float:
    """Normalization ``Gamma(N/2) / (4**s pi**(N/2) Gamma(s)**2)``."""
    return math.gamma(N / 2.0) / (4.0**s * math.pi ** (N / 2.0) * math.gamma(s) ** 2)


def _rfl_rho(domain: Domain, dx, dy, r):
    R = domain.ball_radius
    # R^2 - |x - c|^2 = d (2R - d), written this way to keep digits near the boundary
    return (dx * (2.0 * R - dx)) * (dy * (2.0 * R - dy)) / (R * R * r * r)


def _rfl_inner_quad(rho: float, s: float, N: int) -> float:
    """``int_0^rho t**(s-1) (1+t)**(-N/2) dt`` by adaptive quadrature."""
    f = lambda t: (1.0 + t) ** (-N / 2.0)
    if rho <= 1.0:
        val, _ = integrate.quad(f, 0.0, rho, weight="alg", wvar=(s - 1.0, 0.0),
                                epsabs=1e-13, epsrel=1e-12, limit=200)
        return val
    head, _ = integrate.quad(f, 0.0, 1.0, weight="alg", wvar=(s - 1.0, 0.0),
                             epsabs=1e-13, epsrel=1e-12, limit=200)
    g = lambda t: t ** (s - 1.0) * (1.0 + t) ** (-N / 2.0)
    tail, _ = integrate.quad(g, 1.0, rho, epsabs=1e-13, epsrel=1e-12, limit=400)
    return head + tail


def green_rfl_ball(x, y, params: KernelParams, domain: Domain, method: str = "beta"):
    """Green function of the restricted fractional Laplacian on a ball.

    ``G = kappa |x-y|**(2s-N) * int_0^rho t**(s-1) (1+t)**(-N/2) dt`` with
    ``rho = (R^2-|x|^2)(R^2-|y|^2) / (R^2 |x-y|^2)`` (ball centred at 0).

    ``method="beta"`` evaluates the inner integral as a regularized
    incomplete beta function (substituting ``u = t / (1 + t)``), which is
    vectorized and accurate to a few ulps.  ``method="quad"`` uses adaptive
    Gauss-Kronrod quadrature point by point and serves as a cross-check.
    """
    if domain.kind not in ("interval", "ball"):
        raise UnsupportedError("RFL Green function is only available on balls")
    s, N = params.s, params.N
    if N != domain.N:
        raise AssumptionError("kernel dimension does not match the domain")
    _, _, dx, dy, r = _pair(domain, x, y)
    rho = _rfl_rho(domain, dx, dy, r)
    if method == "beta":
        a, b = s, N / 2.0 - s
        inner = special.beta(a, b) * special.betainc(a, b, rho / (1.0 + rho))
    elif method == "quad":
        inner = np.vectorize(lambda q: _rfl_inner_quad(q, s, N))(rho)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _scalar_or_array(rfl_constant(N, s) * r**params.beta * inner)


def rfl_torsion(x, params: KernelParams, domain: Domain):
    """Closed form of ``int G(x, y) dy`` for the RFL on a ball.

    Equal to ``Gamma(N/2) / (4**s Gamma(1+s) Gamma(N/2+s)) (R^2-|x|^2)**s``;
    used as an independent check of the kernel normalization.
    """
    s, N = params.s, params.N
    d = domain.distance_unchecked(x)
    R = domain.ball_radius
    c = math.gamma(N / 2.0) / (4.0**s * math.gamma(1.0 + s) * math.gamma(N / 2.0 + s))
    return _scalar_or_array(c * (d * (2.0 * R - d)) ** s)


# -- spectral fractional Laplacian on an interval -----------------------------

_N_COS_TERMS = 48


def _cos_series_coefficients(nu: float) -> tuple[float, np.ndarray]:
    """Coefficients of ``C_nu(theta) = sum_n cos(n theta) / n**nu`` near 0.

    For ``0 < theta <= pi`` and ``nu`` not an odd integer,

        C_nu(theta) = Gamma(1-nu) sin(pi nu / 2) theta**(nu-1)
                      + sum_k a_k (theta / 2 pi)**(2k)

    with ``a_0 = zeta(nu)`` and, by the functional equation of zeta,
    ``a_k = 2 (2 pi)**(nu-1) sin(pi nu/2) zeta(2k+1-nu) Gamma(2k+1-nu) / (2k)!``.
    """
    k = np.arange(1, _N_COS_TERMS)
    sin_half = math.sin(math.pi * nu / 2.0)
    log_ratio = special.gammaln(2 * k + 1 - nu) - special.gammaln(2 * k + 1)
    ak = 2.0 * (2.0 * math.pi) ** (nu - 1.0) * sin_half * special.zeta(2 * k + 1 - nu) * np.exp(log_ratio)
    a = np.concatenate([[special.zeta(nu)], ak])
    sing = math.gamma(1.0 - nu) * sin_half
    return sing, a


def cosine_series(nu: float, theta):
    """Exact value of ``sum_{n>=1} cos(n theta) / n**nu`` for ``0 < nu <= 2``.

    ``theta`` must avoid multiples of ``2 pi`` when ``nu <= 1`` (the series
    diverges there).
    """
    theta = np.abs(np.asarray(theta, dtype=float))
    theta = np.mod(theta, 2.0 * np.pi)
    theta = np.minimum(theta, 2.0 * np.pi - theta)
    if nu == 2.0:
        return np.pi**2 / 6.0 - np.pi * theta / 2.0 + theta**2 / 4.0
    if nu == 1.0:
        with np.errstate(divide="ignore"):
            return -np.log(2.0 * np.sin(theta / 2.0))
    sing, a = _cos_series_coefficients(nu)
    u = (theta / (2.0 * np.pi)) ** 2
    poly = np.zeros_like(u)
    for c in a[::-1]:
        poly = poly * u + c
    with np.errstate(divide="ignore"):
        return sing * theta ** (nu - 1.0) + poly


def _unit_coordinates(x, y, domain: Domain | None):
    if domain is None:
        domain = Domain.interval(0.0, 1.0)
    if domain.kind != "interval" and not (domain.kind == "ball" and domain.N == 1):
        raise UnsupportedError("the SFL series is only implemented on intervals")
    lo = domain.center_point[0] - domain.ball_radius
    L = 2.0 * domain.ball_radius
    xi = (domain.as_points(x)[..., 0] - lo) / L
    eta = (domain.as_points(y)[..., 0] - lo) / L
    if np.any((xi <= 0) | (xi >= 1) | (eta <= 0) | (eta >= 1)):
        raise DomainError("SFL arguments must be strictly inside the interval")
    return xi, eta, L


def green_sfl_exact(x, y, params: KernelParams, domain: Domain | None = None):
    """Limit of the SFL eigen-series, summed in closed form.

    Uses ``2 sin(a) sin(b) = cos(a-b) - cos(a+b)`` so that the kernel is
    ``pi**(-2s) [C_2s(pi (x-y)) - C_2s(pi (x+y))]`` on ``(0, 1)``, rescaled
    by ``L**(2s-1)`` on an interval of length ``L``.
    """
    xi, eta, L = _unit_coordinates(x, y, domain)
    if np.any(xi == eta):
        raise SingularityError("kernel evaluated on the diagonal x = y")
    nu = 2.0 * params.s
    th_minus = np.pi * np.abs(xi - eta)
    # distance of x + y to the nearest even integer, computed from the gaps
    th_plus = np.pi * np.minimum(xi + eta, (1.0 - xi) + (1.0 - eta))
    val = np.pi ** (-nu) * (cosine_series(nu, th_minus) - cosine_series(nu, th_plus))
    return _scalar_or_array(L ** (nu - 1.0) * val)


def _cosine_remainder(nu: float, theta: float, m: int) -> float:
    """``sum_{n>=m} cos(n theta) / n**nu`` via its Mellin integral.

    Uses ``n**(-nu) = Gamma(nu)**(-1) int_0^inf t**(nu-1) e**(-n t) dt`` and
    sums the geometric series under the integral.  Valid for ``theta`` away
    from multiples of ``2 pi``.
    """

    def f(t: float) -> float:
        w = math.exp(-t)
        num = math.cos(m * theta) - w * math.cos((m - 1) * theta)
        den = 1.0 - 2.0 * w * math.cos(theta) + w * w
        return math.exp(-m * t) * num / den

    top = 60.0 / m
    split = min(max(abs(math.sin(theta / 2.0)), 1e-12), top)
    head, _ = integrate.quad(f, 0.0, split, weight="alg", wvar=(nu - 1.0, 0.0),
                             epsabs=1e-15, epsrel=1e-12, limit=400)
    g = lambda t: t ** (nu - 1.0) * f(t)
    tail, _ = integrate.quad(g, split, top, epsabs=1e-15, epsrel=1e-12, limit=400)
    return (head + tail) / math.gamma(nu)


def sfl_partial_sum(x, y, s: float, truncation: int) -> np.ndarray:
    """Compensated partial sum ``sum_{n<=M} (n pi)**(-2s) 2 sin(n pi x) sin(n pi y)``.

    Coordinates are on ``(0, 1)``.  Neumaier summation runs over ``n`` in a
    fixed order, independently for each pair.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    total = np.zeros(x.shape)
    comp = np.zeros(x.shape)
    for n in range(1, int(truncation) + 1):
        term = (n * np.pi) ** (-2.0 * s) * 2.0 * np.sin(n * np.pi * x) * np.sin(n * np.pi * y)
        t = total + term
        big = np.abs(total) >= np.abs(term)
        comp += np.where(big, (total - t) + term, (term - t) + total)
        total = t
    return total + comp


def green_sfl(x, y, params: KernelParams, truncation: int = 2000,
              domain: Domain | None = None):
    """SFL Green function from its eigen-series.

    The first ``truncation`` modes are summed explicitly with compensated
    summation.  For off-diagonal pairs the remainder ``n > truncation`` is
    added through an exact integral representation, because the plain
    partial sums only converge like ``truncation**(-2s)``.  On the diagonal
    the series diverges, so the partial sum itself is returned.
    """
    if int(truncation) != truncation or truncation < 1:
        raise ValueError("truncation must be a positive integer")
    xi, eta, L = _unit_coordinates(x, y, domain)
    nu = 2.0 * params.s
    head = sfl_partial_sum(xi, eta, params.s, truncation)
    xi_b, eta_b = np.broadcast_arrays(xi, eta)
    rem = np.zeros(head.shape)
    m = int(truncation) + 1
    it = np.nditer([xi_b, eta_b, rem], op_flags=[["readonly"], ["readonly"], ["writeonly"]])
    for a, b, out in it:
        a, b = float(a), float(b)
        if a == b:
            out[...] = 0.0
            continue
        th_m = math.pi * abs(a - b)
        th_p = math.pi * min(a + b, (1.0 - a) + (1.0 - b))
        out[...] = math.pi ** (-nu) * (_cosine_remainder(nu, th_m, m) - _cosine_remainder(nu, th_p, m))
    return _scalar_or_array(L ** (nu - 1.0) * (head + rem))


# -- kernel objects ---------------------------------------------------------------

@dataclass(frozen=True)
class GreenKernel:
    """An evaluable symmetric kernel bound to a domain.

    ``sfl_truncation=None`` evaluates the SFL series in closed form; an
    integer routes through :func:`green_sfl` with that many explicit modes.
    The ``comparison`` family evaluates ``K`` itself and is handy for
    self-checks.
    """

    family: str
    domain: Domain
    params: KernelParams
    sfl_truncation: int | None = None

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        p = self.params
        if p.N != self.domain.N:
            raise AssumptionError("kernel dimension does not match the domain")
        if self.family == "RFL" and abs(p.gamma - p.s) > 1e-14:
            raise AssumptionError("the RFL kernel has boundary exponent gamma = s")
        if self.family == "SFL":
            if abs(p.gamma - 1.0) > 1e-14:
                raise AssumptionError("the SFL kernel has boundary exponent gamma = 1")
            if p.N != 1:
                raise UnsupportedError("the SFL kernel is only implemented on intervals")

    @classmethod
    def rfl(cls, s: float, domain: Domain | None = None) -> "GreenKernel":
        domain = domain or Domain.interval(0.0, 1.0)
        return cls("RFL", domain, KernelParams(s, s, domain.N))

    @classmethod
    def sfl(cls, s: float, domain: Domain | None = None,
            truncation: int | None = None) -> "GreenKernel":
        domain = domain or Domain.interval(0.0, 1.0)
        return cls("SFL", domain, KernelParams(s, 1.0, 1), truncation)

    @property
    def s(self) -> float:
        return self.params.s

    @property
    def gamma(self) -> float:
        return self.params.gamma

    def evaluate(self, x, y):
        """Kernel value at ``(x, y)``; arrays broadcast over leading axes."""
        if self.family == "RFL":
            return green_rfl_ball(x, y, self.params, self.domain)
        if self.family == "SFL":
            if self.sfl_truncation is None:
                return green_sfl_exact(x, y, self.params, self.domain)
            return green_sfl(x, y, self.params, self.sfl_truncation, self.domain)
        return comparison_kernel(x, y, self.params, self.domain)

    __call__ = evaluate

    def comparison(self, x, y):
        return comparison_kernel(x, y, self.params, self.domain)

    def weight(self, x):
        return boundary_weight(x, self.params, self.domain)

    def describe(self) -> dict:
        out = {"family": self.family, **self.params.to_dict()}
        if self.family == "SFL":
            out["truncation"] = self.sfl_truncation
        return out


# -- comparability scan ---------------------------------------------------------

@dataclass(frozen=True)
class ScanResult:
    family: str
    s: float
    gamma: float
    N: int
    n: int
    c_lower: float
    c_upper: float

    @property
    def ratio(self) -> float:
        return self.c_upper / self.c_lower

    def to_json(self) -> str:
        return json.dumps(
            {"family": self.family, "s": self.s, "gamma": self.gamma, "N": self.N,
             "n": self.n, "c_lower": self.c_lower, "c_upper": self.c_upper},
            sort_keys=False,
        )


def kernel_estimate_scan(kernel: GreenKernel, grid: Grid) -> ScanResult:
    """Min and max of ``G / K`` over all off-diagonal node pairs."""
    if grid.domain != kernel.domain:
        raise DomainError("grid and kernel live on different domains")
    i, j = np.triu_indices(grid.n, k=1)
    xi, xj = grid.nodes[i], grid.nodes[j]
    ratio = kernel.evaluate(xi, xj) / kernel.comparison(xi, xj)
    p = kernel.params
    return ScanResult(kernel.family, p.s, p.gamma, p.N, grid.n,
                      float(np.min(ratio)), float(np.max(ratio)))

"""Quadrature-grade mean sojourn times for FB, the truncated FIFO waiting
time, the SRPT baseline and a Chebyshev bound on the scaled FB tail."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dist import ServiceDistribution
from .errors import DomainError, FBError
from .numerics import QuadratureSpec, integrate

_INF = math.inf


@dataclass(frozen=True)
class TrafficPoint:
    """An M/GI/1 operating point: arrival rate, load and service law."""

    dist: ServiceDistribution
    lam: float
    rho: float

    def __post_init__(self):
        if not (0.0 <= self.rho < 1.0):
            raise DomainError(f"load must lie in [0, 1), got {self.rho!r}")
        if not math.isclose(self.lam * self.dist.mean, self.rho, rel_tol=1e-12, abs_tol=1e-300):
            raise DomainError("lam and rho are inconsistent with E[B]")

    @classmethod
    def from_rho(cls, dist: ServiceDistribution, rho: float) -> "TrafficPoint":
        rho = float(rho)
        if not (0.0 <= rho < 1.0):
            raise DomainError(f"load must lie in [0, 1), got {rho!r}")
        return cls(dist, rho / dist.mean, rho)

    @classmethod
    def from_lambda(cls, dist: ServiceDistribution, lam: float) -> "TrafficPoint":
        lam = float(lam)
        if not lam >= 0:
            raise DomainError("arrival rate must be non-negative")
        rho = lam * dist.mean
        if rho >= 1.0:
            raise DomainError(f"unstable: load {rho!r} >= 1")
        return cls(dist, lam, rho)

    def one_minus_rho_x(self, x):
        """1 - rho_x computed as (1 - rho) + rho Ḡ(x), without cancellation."""
        return (1.0 - self.rho) + self.rho * self.dist.eq_ccdf(x)

    def rho_x(self, x):
        return self.rho * self.dist.eq_cdf(x)

    def critical_size(self) -> float:
        """x* = G⁻¹(rho), where the truncated load departs from the full load."""
        return float(self.dist.g_inverse(self.rho)) if self.rho > 0 else 0.0


def _default_spec():
    return QuadratureSpec(abs_tol=1e-300, rel_tol=1e-10, max_subdivisions=4000)


def _size_points(tp: TrafficPoint):
    """Breakpoints that keep panels away from the peak of the size integrand."""
    if tp.rho <= 0:
        return ()
    xs = tp.critical_size()
    pts = [xs]
    xr = tp.dist.x_right
    for k in (0.25, 0.5, 2.0, 4.0, 16.0):
        if math.isinf(xr):
            pts.append(xs * k)
        else:
            pts.append(xr - (xr - xs) * k)
    return tuple(p for p in pts if 0 < p < xr)


def _integrate_dx(dist: ServiceDistribution, fn, points=(), spec=None) -> float:
    """∫₀^{x_R} fn(x) dx in log coordinates (log x, or log(x_R - x) when bounded)."""
    spec = spec or _default_spec()
    xr = dist.x_right
    cuts = sorted(set(p for p in tuple(points) + dist.kinks if 0 < p < xr and math.isfinite(p)))
    if math.isinf(xr):
        def g(s):
            sc = np.clip(s, -700.0, 700.0)
            x = np.exp(sc)
            with np.errstate(over="ignore", invalid="ignore"):
                val = fn(x) * x
            return np.where(np.abs(s) >= 700.0, 0.0, np.nan_to_num(val, nan=0.0, posinf=0.0))
        val, _ = integrate(g, -_INF, _INF, spec, points=[math.log(p) for p in cuts])
    else:
        def g(s):
            e = np.exp(np.maximum(s, -700.0))
            return np.where(s <= -700.0, 0.0, fn(xr - e) * e)
        val, _ = integrate(g, -_INF, math.log(xr), spec, points=[math.log(xr - p) for p in cuts])
    return val


def mean_sojourn_fb_of_size(tp: TrafficPoint, x):
    """E[T(x)] = x/(1 - rho_x) + lam m2(x) / (2 (1 - rho_x)²)."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise DomainError("job size must be non-negative")
    d = tp.one_minus_rho_x(xa)
    if np.any(d <= 0):
        raise FBError("truncated load reached 1")
    out = xa / d + tp.lam * tp.dist.m2(xa) / (2.0 * d * d)
    return float(out) if np.ndim(out) == 0 else out


def mean_waiting_fifo_trunc(tp: TrafficPoint, x):
    """Pollaczek-Khinchine mean of the waiting time with sizes B∧x."""
    x = float(x)
    if x < 0:
        raise DomainError("truncation level must be non-negative")
    if tp.lam == 0:
        return 0.0
    if x >= tp.dist.x_right:
        return tp.lam * tp.dist.second_moment / (2.0 * (1.0 - tp.rho))
    d = tp.one_minus_rho_x(x)
    return tp.lam * tp.dist.m2(x) / (2.0 * d)


def mean_sojourn_fb(tp: TrafficPoint, spec: QuadratureSpec | None = None) -> float:
    """E[T] = ∫ E[T(x)] dF(x); atoms are summed exactly."""
    if tp.lam == 0:
        return tp.dist.mean
    return tp.dist.expect(lambda x: mean_sojourn_fb_of_size(tp, x),
                          points=_size_points(tp), spec=spec or _default_spec())


def mean_sojourn_fb_alt(tp: TrafficPoint, spec: QuadratureSpec | None = None) -> float:
    """Same quantity via integration by parts: a log term plus two dx-integrals."""
    d = tp.dist
    if tp.lam == 0:
        return d.mean
    lam, rho = tp.lam, tp.rho
    log_term = d.mean * (-math.log1p(-rho)) / rho

    def second(x):
        fb = d._ccdf(x)
        om = tp.one_minus_rho_x(x)
        return 2.0 * lam * x * fb * fb / (om * om)

    def third(x):
        fb = d._ccdf(x)
        om = tp.one_minus_rho_x(x)
        return lam * lam * d._m2(x) * fb * fb / om ** 3

    pts = _size_points(tp)
    spec = spec or _default_spec()
    return log_term + _integrate_dx(d, second, pts, spec) + _integrate_dx(d, third, pts, spec)


def _one_minus_rho_srpt(tp: TrafficPoint, x):
    """1 - lam ∫₀ˣ t dF(t) = (1 - rho) + rho Ḡ(x) + lam x F̄(x)."""
    return tp.one_minus_rho_x(x) + tp.lam * x * tp.dist.ccdf(x)


def _atom_mass_at(d: ServiceDistribution, x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for loc, mass in d.atoms:
        out = out + np.where(x == loc, mass, 0.0)
    return out


def mean_sojourn_srpt_of_size(tp: TrafficPoint, x: float) -> float:
    """SRPT mean response time of a size-x job (ties served in arrival order)."""
    x = float(x)
    d = tp.dist
    if x < 0:
        raise DomainError("job size must be non-negative")
    if tp.lam == 0:
        return x
    pts = [p for p in d.kinks if 0 < p < x]
    residence, _ = integrate(lambda t: 1.0 / _one_minus_rho_srpt(tp, t), 0.0, x, _default_spec(), points=pts)
    om = _one_minus_rho_srpt(tp, x)
    om_minus = om + tp.lam * x * float(_atom_mass_at(d, x))
    return residence + tp.lam * d.m2(x) / (2.0 * om * om_minus)


def mean_sojourn_srpt(tp: TrafficPoint, spec: QuadratureSpec | None = None) -> float:
    """SRPT mean response time, E over dF of the size-x formula.

    The residence part ∫₀ˣ dt/(1 - rho(t)) is integrated against dF by
    swapping the order of integration, giving ∫ F̄(t)/(1 - rho(t)) dt.
    """
    d = tp.dist
    if tp.lam == 0:
        return d.mean
    spec = spec or _default_spec()
    pts = _size_points(tp)
    residence = _integrate_dx(d, lambda t: d._ccdf(t) / _one_minus_rho_srpt(tp, t), pts, spec)

    def waiting(x):
        om = _one_minus_rho_srpt(tp, x)
        om_minus = om + tp.lam * x * _atom_mass_at(d, x)
        return tp.lam * d._m2(x) / (2.0 * om * om_minus)

    return residence + d.expect(waiting, points=pts, spec=spec)


def chebyshev_tail_bound(tp: TrafficPoint, x: float, y: float) -> float:
    """Chebyshev bound on P((1 - rho)² T(x) > y) from the busy-period representation.

    Returns 1 when the centred threshold is non-positive (vacuous regime).
    """
    x = float(x)
    y = float(y)
    if x <= 0 or y < 0:
        raise DomainError("need x > 0 and y >= 0")
    if tp.rho == 0:
        raise DomainError("scaled tail is undefined at zero load")
    d = tp.dist
    rx = tp.rho_x(x)
    om_x = tp.one_minus_rho_x(x)
    scale = (1.0 - tp.rho) ** 2
    tm = d.truncated_mean(x)
    e1 = d.m2(x) / (2.0 * tm)
    e2 = d.truncated_moment(3.0, x) / (3.0 * tm)
    base = om_x * y / scale - x - rx / om_x * e1
    if base <= 0:
        return 1.0
    num = (rx / om_x) ** 2 * e1 ** 2 + rx / om_x * e2 + 2.0 * rx * e1 * y / scale
    return min(1.0, num / base ** 2)

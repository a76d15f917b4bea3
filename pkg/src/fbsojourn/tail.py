"""Limiting objects for the scaled FB sojourn-time tail.

The kernel f(t) = 2√(t/π) - 2t e^t erfc(√t) has Laplace transform
1/(√q (√q + 1)²).  Mixing its rescalings g(t, ν) against the weight
8ν((1-ν)/ν)^p / r gives the density g* of the scaled residual sojourn time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytic import TrafficPoint
from .dist import ServiceDistribution
from .errors import DomainError, UnsupportedRegimeError
from .numerics import (QuadratureSpec, erfcx, find_root_increasing, gamma_fn, integrate,
                       integrate_endpoint_singular)

_SQRT_PI = math.sqrt(math.pi)
# past this point the asymptotic series is more accurate than the difference form
_SERIES_FROM = 60.0

_INNER = QuadratureSpec(abs_tol=1e-300, rel_tol=1e-11, max_subdivisions=2000)


@dataclass(frozen=True)
class TailParams:
    """Constants of the limiting tail: index p, E[B*] and r = Γ(2-p)Γ(1+p)."""

    p_H: float
    eq_mean: float
    r_H: float

    def __post_init__(self):
        if not (0 < self.p_H < 2):
            raise DomainError("p must lie in (0, 2)")
        if not self.eq_mean > 0:
            raise DomainError("E[B*] must be positive")
        if not self.r_H > 0:
            raise DomainError("r must be positive")
        ref = gamma_fn(2.0 - self.p_H) * gamma_fn(1.0 + self.p_H)
        if abs(self.r_H - ref) > 1e-10 * max(1.0, ref):
            raise DomainError(f"r={self.r_H!r} violates r = Γ(2-p)Γ(1+p) = {ref!r}")

    @classmethod
    def from_p(cls, p: float, eq_mean: float = 1.0) -> "TailParams":
        return cls(p, eq_mean, gamma_fn(2.0 - p) * gamma_fn(1.0 + p))

    @classmethod
    def from_dist(cls, d: ServiceDistribution) -> "TailParams":
        H = d.mda_info()
        if H.p_H is None or H.r_H is None:
            raise UnsupportedRegimeError(f"no limiting tail for class {H.label}")
        return cls(H.p_H, d.eq_mean, H.r_H)


def _f_array(t: np.ndarray) -> np.ndarray:
    if t.size and t.min() > 0 and t.max() < _SERIES_FROM:
        rt = np.sqrt(t)
        return 2.0 * rt / _SQRT_PI - 2.0 * t * erfcx(rt)
    out = np.zeros_like(t)
    small = (t > 0) & (t < _SERIES_FROM)
    ts = t[small]
    rt = np.sqrt(ts)
    out[small] = 2.0 * rt / _SQRT_PI - 2.0 * ts * erfcx(rt)
    big = t >= _SERIES_FROM
    if np.any(big):
        tb = t[big]
        # (2√t/√π) Σ_{n≥1} (-1)^{n+1} (2n-1)!! / (2t)^n
        term = np.ones_like(tb)
        acc = np.zeros_like(tb)
        for n in range(1, 40):
            term = term * (2 * n - 1) / (2.0 * tb)
            acc += term if n % 2 else -term
        out[big] = 2.0 * np.sqrt(tb) / _SQRT_PI * acc
    return out


def f_kernel(t):
    """f(t) = 2√(t/π) - 2t erfcx(√t), the inverse transform of q^{-1/2}(√q+1)^{-2}."""
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("f_kernel needs t >= 0")
    out = _f_array(np.atleast_1d(arr).astype(float))
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def _g_array(t, nu, c):
    scale = 4.0 * c * nu * nu
    with np.errstate(over="ignore", divide="ignore"):
        s = t / scale
    live = s < 800.0  # e^{-s} f(s) underflows beyond this
    sl = np.where(live, s, 0.0)
    with np.errstate(under="ignore"):
        val = np.exp(-sl) * _f_array(np.atleast_1d(sl)).reshape(np.shape(sl)) / scale
    return np.where(live, val, 0.0)


def g_kernel(t, nu, eq_mean: float = 1.0):
    """g(t, ν) = e^{-s} f(s)/(4cν²) with s = t/(4cν²) and c = E[B*]."""
    t_arr = np.asarray(t, dtype=float)
    nu_arr = np.asarray(nu, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("g_kernel needs t >= 0")
    if np.any(nu_arr <= 0) or np.any(nu_arr > 1):
        raise DomainError("g_kernel needs ν in (0, 1]")
    if not eq_mean > 0:
        raise DomainError("E[B*] must be positive")
    t_b, nu_b = np.broadcast_arrays(t_arr, nu_arr)
    out = _g_array(t_b.astype(float), nu_b.astype(float), eq_mean)
    return float(out) if out.ndim == 0 else out


def _weight(nu, p):
    return 8.0 * nu * ((1.0 - nu) / nu) ** p


def g_star(t, params: TailParams):
    """Density of the limiting scaled residual sojourn time.

    Diverges like t^{-p/2} as t ↓ 0; at t = 0 the defining integral is 0.
    """
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("g_star needs t >= 0")
    vals = [_g_star_scalar(float(v), params) for v in np.atleast_1d(arr)]
    return float(vals[0]) if arr.ndim == 0 else np.array(vals).reshape(arr.shape)


def _g_star_scalar(t: float, prm: TailParams) -> float:
    if t == 0.0:
        return 0.0
    c, p = prm.eq_mean, prm.p_H
    rt = math.sqrt(t)

    # substitute ν = √t w so the t^{-p/2} blow-up near 0 factors out
    def h(w):
        # Gauss-Kronrod nodes are interior, so 0 < w < 1/√t and every factor is finite
        s = 1.0 / (4.0 * c * w * w)
        live = s < 800.0
        sc = np.where(live, s, 1.0)
        val = 2.0 / c * np.exp(-sc) * _f_array(sc) * (1.0 - rt * w) ** p / w ** (1.0 + p)
        return np.where(live, val, 0.0)

    w_top = 1.0 / rt
    w1 = 1.0 / (2.0 * math.sqrt(c))
    pts = [v for v in (w_top / 2, w1 / 4, w1 / 2, w1, 2 * w1, 4 * w1, 16 * w1) if 0 < v < w_top]
    with np.errstate(over="ignore"):  # w^(1+p) = inf at huge w is the right limit
        val, _ = integrate(h, 0.0, w_top, _INNER, points=pts)
    return val * t ** (-p / 2.0) / prm.r_H


def g_star_mass(params: TailParams, tol: float = 1e-12) -> float:
    """∫₀^∞ g*(t) dt, integrated in log t up to a certified cut-off T*.

    Beyond T* the remaining mass is at most 4 e^{-T*/(4c)} sup f, and
    sup f < 1/2.
    """
    c = params.eq_mean
    t_cut = 4.0 * c * math.log(2.0 / tol)
    spec = QuadratureSpec(abs_tol=tol, rel_tol=1e-10, max_subdivisions=500)
    val, _ = integrate(lambda u: np.array([_g_star_scalar(math.exp(v), params) * math.exp(v)
                                           for v in np.atleast_1d(u)]),
                       -math.inf, math.log(t_cut), spec, points=[math.log(c)])
    return val


def _nu_integral(h, p):
    """∫₀¹ h(ν) dν where h ~ ν^{1-p} at 0; geometric shells handle the left end."""
    spec = QuadratureSpec(abs_tol=1e-15, rel_tol=1e-12, max_subdivisions=2000)
    right, _ = integrate(h, 0.5, 1.0, spec)
    if p >= 1:
        left, _ = integrate_endpoint_singular(h, 0.0, 0.5, spec, side="left")
    else:
        left, _ = integrate(h, 0.0, 0.5, spec)
    return left + right


def laplace_residual(q: float, params: TailParams) -> float:
    """Limiting Laplace transform of the scaled residual sojourn time at q."""
    q = float(q)
    if not q >= 0:
        raise DomainError("q must be non-negative")
    c, p = params.eq_mean, params.p_H

    def h(nu):
        root = np.sqrt(1.0 + 4.0 * c * q * nu * nu)
        return _weight(nu, p) / (root * (root + 1.0) ** 2)

    return _nu_integral(h, p) / params.r_H


def ttail_limit(q: float, params: TailParams) -> float:
    """Limit of P((1-rho)² T > e(q)) / F̄(G⁻¹(rho)) for an independent Exp(q) time."""
    q = float(q)
    if not q >= 0:
        raise DomainError("q must be non-negative")
    if q == 0:
        return 0.0
    c, p = params.eq_mean, params.p_H

    def h(nu):
        root = np.sqrt(1.0 + 4.0 * c * q * nu * nu)
        return 8.0 * c * q * nu / (root * (root + 1.0) ** 2) * ((1.0 - nu) / nu) ** p

    return _nu_integral(h, p)


def phi_limit(nu, q, eq_mean: float = 1.0):
    """Positive root s of s/ν + E[B*] s² = q, written without cancellation."""
    nu_arr = np.asarray(nu, dtype=float)
    q_arr = np.asarray(q, dtype=float)
    if np.any(nu_arr <= 0) or np.any(nu_arr > 1):
        raise DomainError("phi_limit needs ν in (0, 1]")
    if np.any(q_arr < 0):
        raise DomainError("phi_limit needs q >= 0")
    out = 2.0 * q_arr * nu_arr / (np.sqrt(1.0 + 4.0 * eq_mean * q_arr * nu_arr ** 2) + 1.0)
    return float(out) if np.ndim(out) == 0 else out


def x_rho_nu(tp: TrafficPoint, nu: float) -> float:
    """Size level at which (1 - rho)/(1 - rho_x) = ν."""
    rho = tp.rho
    if not (1.0 - rho < nu <= 1.0):
        raise DomainError(f"ν must lie in (1 - rho, 1], got {nu!r}")
    if nu == 1.0:
        return tp.dist.x_right
    tail = (1.0 - rho) / rho * (1.0 - nu) / nu
    return float(tp.dist.g_inverse(1.0 - tail))


def laplace_exponent(tp: TrafficPoint, x: float, s: float) -> float:
    """ψ(x, rho, s) = s/(1-rho) - lam/(1-rho)² (1 - E[e^{-(1-rho)s(B∧x)}]).

    Evaluated as s/(1-rho) [(1 - rho_x) + lam ∫₀ˣ (1 - e^{-θt}) F̄(t) dt],
    θ = (1-rho)s, which avoids subtracting nearly equal terms.
    """
    s = float(s)
    x = float(x)
    if s < 0:
        raise DomainError("s must be non-negative")
    if x < 0:
        raise DomainError("x must be non-negative")
    if s == 0:
        return 0.0
    d = tp.dist
    gap = 1.0 - tp.rho
    theta = gap * s
    hi = min(x, d.x_right)
    pts = [p for p in d.kinks if 0 < p < hi]
    if math.isinf(hi):
        scale = max(1.0 / theta, d.mean)
        pts.append(scale)
    spec = QuadratureSpec(abs_tol=1e-300, rel_tol=1e-13, max_subdivisions=2000)
    extra, _ = integrate(lambda t: -np.expm1(-theta * t) * d._ccdf(t), 0.0, hi, spec, points=pts)
    om = gap if math.isinf(hi) else tp.one_minus_rho_x(hi)
    return s / gap * (om + tp.lam * extra)


def phi_numeric(tp: TrafficPoint, x: float, q: float) -> float:
    """Right inverse of s ↦ ψ(x, rho, s), found by bracketing and bisection."""
    q = float(q)
    if q < 0:
        raise DomainError("q must be non-negative")
    if q == 0:
        return 0.0
    psi = lambda s: laplace_exponent(tp, x, s)
    hi = 1.0
    while psi(hi) < q:
        hi *= 2.0
    return find_root_increasing(psi, q, 0.0, hi, tol=0.0)

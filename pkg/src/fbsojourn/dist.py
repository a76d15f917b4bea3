"""Service-time distribution families and their derived functionals.

Every family exposes the survival function F̄, the truncated moments
E[B∧x] and E[(B∧x)²], the equilibrium (stationary-excess) law G with its
complement and right inverse, the equilibrium failure rate h*, extreme-value
metadata and samplers.  Methods accept scalars or numpy arrays.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, ClassVar

import numpy as np
from scipy import special

from .errors import DomainError, InfiniteMomentError, UnsupportedRegimeError
from .numerics import QuadratureSpec, find_root_increasing, integrate

_INF = math.inf
_SQRT2 = math.sqrt(2.0)

MDA_KINDS = ("Frechet", "Gumbel", "Weibull", "AtomAtEndpoint", "InfiniteVarianceRV")


def eq5_constant(kind: str, alpha: float | None = None) -> float:
    """Limit constant r(H) for a finite-variance extreme-value class."""
    if kind == "Gumbel" or kind == "AtomAtEndpoint":
        return 1.0
    if kind == "Frechet":
        if alpha is None or not alpha > 2:
            raise UnsupportedRegimeError("Frechet constant needs alpha > 2")
        theta = math.pi / (alpha - 1.0)
        return theta / math.sin(theta) * alpha / (alpha - 1.0)
    if kind == "Weibull":
        if alpha is None or not alpha > 0:
            raise UnsupportedRegimeError("Weibull constant needs alpha > 0")
        theta = math.pi / (alpha + 1.0)
        return theta / math.sin(theta) * alpha / (alpha + 1.0)
    raise UnsupportedRegimeError(f"no limit constant for class {kind}")


def tail_index_p(kind: str, alpha: float | None = None) -> float:
    if kind == "Gumbel":
        return 1.0
    if kind == "Frechet":
        return alpha / (alpha - 1.0)
    if kind == "Weibull":
        return alpha / (alpha + 1.0)
    raise UnsupportedRegimeError(f"no tail index for class {kind}")


@dataclass(frozen=True)
class MdaInfo:
    """Extreme-value class of a service law plus the constants keyed on it."""

    kind: str
    alpha: float | None = None
    p_H: float | None = None
    r_H: float | None = None
    atom_mass: float | None = None

    def __post_init__(self):
        if self.kind not in MDA_KINDS:
            raise DomainError(f"unknown MDA class {self.kind!r}")

    @property
    def label(self) -> str:
        if self.kind == "AtomAtEndpoint":
            return f"AtomAtEndpoint(p={self.atom_mass:g})"
        if self.alpha is not None:
            return f"{self.kind}({self.alpha:g})"
        return self.kind


def _mda(kind, alpha=None, atom_mass=None):
    if kind == "InfiniteVarianceRV":
        return MdaInfo(kind, alpha=alpha)
    if kind == "AtomAtEndpoint":
        return MdaInfo(kind, r_H=1.0, atom_mass=atom_mass)
    return MdaInfo(kind, alpha=alpha, p_H=tail_index_p(kind, alpha), r_H=eq5_constant(kind, alpha))


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)):
        raise DomainError("argument must not be NaN")
    return arr


def _nonneg(x):
    arr = _as_array(x)
    if np.any(arr < 0):
        raise DomainError("time argument must be non-negative")
    return arr


def _ret(arr):
    arr = np.asarray(arr, dtype=float)
    return float(arr) if arr.ndim == 0 else arr


def _phibar(z):
    return 0.5 * special.erfc(z / _SQRT2)


def _phi(z):
    return 0.5 * special.erfc(-z / _SQRT2)


_TAIL_SPEC = QuadratureSpec(abs_tol=1e-300, rel_tol=1e-12, max_subdivisions=500)


class ServiceDistribution:
    """Base class. Subclasses are frozen dataclasses implementing the
    underscore methods on float arrays with x ≥ 0."""

    family: ClassVar[str] = ""

    # ---- moments and support -------------------------------------------------
    @property
    def mean(self) -> float:
        raise NotImplementedError

    @property
    def second_moment(self) -> float:
        raise NotImplementedError

    @property
    def eq_mean(self) -> float:
        """E[B*] = E[B²]/(2E[B])."""
        m2 = self.second_moment
        if not math.isfinite(m2):
            raise InfiniteMomentError(f"{self.spec_string()} has infinite second moment")
        return m2 / (2.0 * self.mean)

    @property
    def x_right(self) -> float:
        return _INF

    @property
    def x_left(self) -> float:
        """Left end of the support of F."""
        return 0.0

    @property
    def atoms(self) -> tuple:
        """Point masses as ((location, mass), ...)."""
        return ()

    @property
    def kinks(self) -> tuple:
        """Points where F̄ is not smooth (excluding 0 and the right endpoint)."""
        return ()

    def mda_info(self) -> MdaInfo:
        raise NotImplementedError

    def spec_string(self) -> str:
        raise NotImplementedError

    def __str__(self):
        return self.spec_string()

    # ---- public functionals --------------------------------------------------
    def ccdf(self, x):
        return _ret(self._ccdf(_nonneg(x)))

    def cdf(self, x):
        return _ret(1.0 - self._ccdf(_nonneg(x)))

    def pdf(self, x):
        """Density of the absolutely continuous part."""
        return _ret(self._pdf(_nonneg(x)))

    def truncated_mean(self, x):
        """E[B∧x] = ∫₀ˣ F̄(t) dt."""
        return _ret(self._tm(_nonneg(x)))

    def m2(self, x):
        """E[(B∧x)²] = 2∫₀ˣ t F̄(t) dt."""
        return _ret(self._m2(_nonneg(x)))

    def truncated_moment(self, k: float, x: float) -> float:
        """E[(B∧x)^k] = k∫₀ˣ t^(k-1) F̄(t) dt, by quadrature."""
        if not k > 0:
            raise DomainError("moment order must be positive")
        x = float(_nonneg(x))
        if x == 0.0:
            return 0.0
        hi = min(x, self.x_right)
        pts = [p for p in self.kinks if 0 < p < hi]
        val, _ = integrate(lambda t: k * t ** (k - 1.0) * self._ccdf(t), 0.0, hi, points=pts)
        if x > hi:
            val = self.raw_moment(k)
        return val

    def raw_moment(self, k: float) -> float:
        return self.expect(lambda t: t ** k)

    def eq_cdf(self, x):
        """G(x) = E[B∧x]/E[B]."""
        return _ret(1.0 - self._eq_ccdf(_nonneg(x)))

    def eq_ccdf(self, x):
        """Ḡ(x), evaluated directly rather than as 1 - G to keep tail precision."""
        return _ret(self._eq_ccdf(_nonneg(x)))

    def g_inverse(self, u):
        """Right inverse of G: inf{x : G(x) ≥ u}."""
        arr = _as_array(u)
        if np.any(arr < 0) or np.any(arr > 1):
            raise DomainError("g_inverse needs u in [0, 1)")
        if np.any(arr == 1) and math.isinf(self.x_right):
            raise DomainError("g_inverse(1) is infinite for unbounded support")
        if arr.ndim == 0:
            return float(self._g_inverse_scalar(float(arr)))
        return np.array([self._g_inverse_scalar(float(v)) for v in arr.ravel()]).reshape(arr.shape)

    def failure_rate_eq(self, x):
        """h*(x) = F̄(x)/(E[B]Ḡ(x)), the reciprocal mean residual life."""
        arr = _nonneg(x)
        if np.any(arr >= self.x_right):
            raise DomainError("failure_rate_eq needs x below the right endpoint")
        return _ret(self._h_eq(arr))

    def expect(self, h: Callable, points=(), spec: QuadratureSpec | None = None) -> float:
        """E[h(B)]: atoms summed exactly, continuous part by quadrature.

        Unbounded support is integrated in s = log x, bounded support in
        s = log(x_R - x), so that breakpoints near either end are resolved.
        """
        spec = spec or QuadratureSpec(abs_tol=1e-13, rel_tol=1e-11, max_subdivisions=4000)
        total = 0.0
        for loc, mass in self.atoms:
            total += mass * float(np.asarray(h(np.array([loc])))[0])
        cont = 1.0 - sum(m for _, m in self.atoms)
        if cont <= 0:
            return total
        lo = self.x_left
        xr = self.x_right
        cuts = set(p for p in tuple(points) + self.kinks if lo < p < xr and math.isfinite(p))
        if math.isinf(xr):
            def integrand(s):
                sc = np.clip(s, -700.0, 700.0)
                x = np.exp(sc)
                w = self._pdf(x) * x
                with np.errstate(over="ignore", invalid="ignore"):
                    val = np.where(w == 0.0, 0.0, h(x) * w)
                return np.where(np.abs(s) >= 700.0, 0.0, val)
            a = math.log(lo) if lo > 0 else -_INF
            pts = [math.log(p) for p in cuts]
            val, _ = integrate(integrand, a, _INF, spec, points=pts)
        else:
            def integrand(s):
                e = np.exp(np.maximum(s, -700.0))
                val = h(xr - e) * self._pdf(xr - e) * e
                return np.where(s <= -700.0, 0.0, val)
            b = math.log(xr - lo)
            pts = [math.log(xr - p) for p in cuts]
            val, _ = integrate(integrand, -_INF, b, spec, points=pts)
        return total + val

    # ---- sampling ------------------------------------------------------------
    def sample(self, rng, n: int | None = None):
        """Draw from F; a scalar when n is None."""
        if n is None:
            return float(self._sample(rng, 1)[0])
        return self._sample(rng, int(n))

    def sample_eq_truncated(self, x: float, rng, n: int | None = None):
        """Draw from (B∧x)*, the law with density F̄(t)/E[B∧x] on [0, x]."""
        x = float(x)
        if not x > 0:
            raise DomainError("truncation level must be positive")
        m = 1 if n is None else int(n)
        out = self._sample_eq_trunc(min(x, self.x_right), rng.uniforms(m))
        return float(out[0]) if n is None else out

    # ---- generic fallbacks ---------------------------------------------------
    def _eq_ccdf(self, x):
        return np.maximum(0.0, 1.0 - self._tm(x) / self.mean)

    def _h_eq(self, x):
        return self._ccdf(x) / (self.mean * self._eq_ccdf(x))

    def _upper_bracket(self, target_ccdf: float) -> float:
        hi = max(self.mean, self.x_left, 1e-300) * 2.0
        while float(self._eq_ccdf(np.array(hi))) > target_ccdf:
            hi *= 2.0
            if hi > 1e300:
                raise DomainError("could not bracket G inverse")
        return hi

    def _g_inverse_scalar(self, u: float) -> float:
        if u == 0.0:
            return 0.0
        if u == 1.0:
            return self.x_right
        tail = 1.0 - u
        hi = self.x_right if math.isfinite(self.x_right) else self._upper_bracket(tail)
        return find_root_increasing(lambda t: -float(self._eq_ccdf(np.array(t))), -tail, 0.0, hi)

    def _sample_eq_trunc(self, x: float, u: np.ndarray) -> np.ndarray:
        # vectorised bisection on t ↦ E[B∧t], which is increasing on [0, x]
        if math.isinf(x):
            target = u * self.mean
            hi_val = self._upper_bracket(float(np.min(1.0 - u)))
        else:
            target = u * float(self._tm(np.array(x)))
            hi_val = x
        lo = np.zeros_like(u)
        hi = np.full_like(u, hi_val)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            below = self._tm(mid) < target
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi - lo <= 1e-14 * np.maximum(hi, 1e-300)):
                break
        return 0.5 * (lo + hi)


def _upper_tail_with_fallback(dist, x, big, small, scale_fn):
    """E[(B-x)^+] = big - small, switching to quadrature of F̄ when the
    difference loses too many digits."""
    shape = np.shape(big)
    big = np.atleast_1d(big).astype(float)
    small = np.atleast_1d(small).astype(float)
    xs = np.broadcast_to(np.atleast_1d(x), big.shape)
    out = big - small
    for i in np.flatnonzero((big > 0) & (small > 0.98 * big)):
        xi = float(xs[i])
        sc = scale_fn(xi)
        out[i], _ = integrate(lambda s: dist._ccdf(xi + sc * s) * sc, 0.0, _INF, _TAIL_SPEC)
    return np.maximum(out, 0.0).reshape(shape)


# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Exponential(ServiceDistribution):
    mu: float = 1.0
    family: ClassVar[str] = "exp"

    def __post_init__(self):
        if not self.mu > 0:
            raise DomainError("Exponential needs mu > 0")

    @property
    def mean(self):
        return 1.0 / self.mu

    @property
    def second_moment(self):
        return 2.0 / self.mu ** 2

    def spec_string(self):
        return f"exp(mu={self.mu!r})"

    def mda_info(self):
        return _mda("Gumbel")

    def _ccdf(self, x):
        return np.exp(-self.mu * x)

    def _pdf(self, x):
        return self.mu * np.exp(-self.mu * x)

    def _tm(self, x):
        return -np.expm1(-self.mu * x) / self.mu

    def _m2(self, x):
        return 2.0 / self.mu ** 2 * special.gammainc(2.0, self.mu * x)

    def _eq_ccdf(self, x):
        return np.exp(-self.mu * x)

    def _h_eq(self, x):
        return np.full_like(x, self.mu)

    def _g_inverse_scalar(self, u):
        return -math.log1p(-u) / self.mu

    def _sample(self, rng, n):
        return -np.log(rng.uniforms(n)) / self.mu

    def _sample_eq_trunc(self, x, u):
        if math.isinf(x):
            return -np.log(u) / self.mu
        # invert (1 - e^{-mu t}) = u (1 - e^{-mu x})
        return -np.log1p(u * np.expm1(-self.mu * x)) / self.mu


@dataclass(frozen=True)
class Pareto(ServiceDistribution):
    """F̄(x) = (x/x_L)^(-alpha) for x ≥ x_L."""

    alpha: float = 3.0
    xl: float = 1.0
    family: ClassVar[str] = "pareto"

    def __post_init__(self):
        if not self.alpha > 1:
            raise DomainError("Pareto needs alpha > 1 (finite mean)")
        if not self.xl > 0:
            raise DomainError("Pareto needs xl > 0")

    @property
    def mean(self):
        return self.alpha * self.xl / (self.alpha - 1.0)

    @property
    def second_moment(self):
        if self.alpha <= 2:
            return _INF
        return self.alpha * self.xl ** 2 / (self.alpha - 2.0)

    @property
    def x_left(self):
        return self.xl

    @property
    def kinks(self):
        return (self.xl,)

    def spec_string(self):
        return f"pareto(alpha={self.alpha!r},xl={self.xl!r})"

    def mda_info(self):
        if self.alpha == 2:
            raise UnsupportedRegimeError("Pareto with alpha = 2 sits on the boundary between regimes")
        if self.alpha < 2:
            return _mda("InfiniteVarianceRV", self.alpha)
        return _mda("Frechet", self.alpha)

    def _ccdf(self, x):
        with np.errstate(divide="ignore"):
            return np.where(x < self.xl, 1.0, (np.maximum(x, self.xl) / self.xl) ** -self.alpha)

    def _pdf(self, x):
        a, xl = self.alpha, self.xl
        return np.where(x < xl, 0.0, a / xl * (np.maximum(x, xl) / xl) ** (-a - 1.0))

    def _tm(self, x):
        a, xl = self.alpha, self.xl
        r = np.maximum(x, xl) / xl
        return np.where(x < xl, x, xl + xl / (a - 1.0) * (1.0 - r ** (1.0 - a)))

    def _eq_ccdf(self, x):
        a, xl = self.alpha, self.xl
        r = np.maximum(x, xl) / xl
        return np.where(x < xl, 1.0 - x / self.mean, r ** (1.0 - a) / a)

    def _h_eq(self, x):
        return np.where(x < self.xl, 1.0 / (self.mean - x), (self.alpha - 1.0) / np.maximum(x, self.xl))

    def _m2(self, x):
        a, xl = self.alpha, self.xl
        xc = np.maximum(x, xl)
        if a == 2:
            upper = xl ** 2 + 2.0 * xl ** 2 * np.log(xc / xl)
        else:
            upper = xl ** 2 + 2.0 * xl ** a * (xc ** (2.0 - a) - xl ** (2.0 - a)) / (2.0 - a)
        return np.where(x < xl, x * x, upper)

    def _g_inverse_scalar(self, u):
        a = self.alpha
        if u <= 1.0 - 1.0 / a:
            return u * self.mean
        return self.xl * (a * (1.0 - u)) ** (-1.0 / (a - 1.0))

    def _sample(self, rng, n):
        return self.xl * rng.uniforms(n) ** (-1.0 / self.alpha)

    def _sample_eq_trunc(self, x, u):
        a, xl = self.alpha, self.xl
        y = u * (self.mean if math.isinf(x) else float(self._tm(np.array(x))))
        base = np.maximum(1.0 - (y - xl) * (a - 1.0) / xl, 1e-300)
        return np.where(y < xl, y, xl * base ** (-1.0 / (a - 1.0)))


def _psi_gap(w, alpha):
    """∫₀^w ((1-v)^(-alpha) - 1) dv, accurate for small w."""
    w = np.asarray(w, dtype=float)
    out = np.empty_like(w)
    small = w < 0.1
    if np.any(small):
        ws = w[small]
        c = 1.0
        acc = np.zeros_like(ws)
        p = ws.copy()
        for n in range(1, 120):
            c *= (alpha + n - 1.0) / n
            p = p * ws
            term = c * p / (n + 1.0)
            acc += term
            if np.all(term <= 1e-17 * acc):
                break
        out[small] = acc
    if np.any(~small):
        wb = w[~small]
        if alpha == 1:
            out[~small] = -np.log1p(-wb) - wb
        else:
            out[~small] = np.expm1((1.0 - alpha) * np.log1p(-wb)) / (alpha - 1.0) - wb
    return out


@dataclass(frozen=True)
class BoundedPareto(ServiceDistribution):
    """Pareto(alpha, x_L) conditioned on B ≤ x_R."""

    alpha: float = 1.5
    xl: float = 1.0
    xr: float = 100.0
    family: ClassVar[str] = "bpareto"

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError("BoundedPareto needs alpha > 0")
        if not (0 < self.xl < self.xr < _INF):
            raise DomainError("BoundedPareto needs 0 < xl < xr < inf")

    @property
    def _k(self):
        return (self.xl / self.xr) ** self.alpha

    @property
    def _d(self):
        return -math.expm1(self.alpha * math.log(self.xl / self.xr))

    def _upper(self, x):
        # ∫_x^{x_R} F̄(t) dt for x in [x_L, x_R]
        w = 1.0 - np.clip(x, self.xl, self.xr) / self.xr
        return self.xr * self._k / self._d * _psi_gap(w, self.alpha)

    @property
    def mean(self):
        return self.xl + float(self._upper(np.array([self.xl]))[0])

    @property
    def second_moment(self):
        return float(self._m2(np.array([self.xr]))[0])

    @property
    def x_right(self):
        return self.xr

    @property
    def x_left(self):
        return self.xl

    @property
    def kinks(self):
        return (self.xl,)

    def spec_string(self):
        return f"bpareto(alpha={self.alpha!r},xl={self.xl!r},xr={self.xr!r})"

    def mda_info(self):
        return _mda("Weibull", 1.0)

    def _ccdf(self, x):
        xc = np.clip(x, self.xl, self.xr)
        mid = self._k * np.expm1(self.alpha * np.log(self.xr / xc)) / self._d
        return np.where(x < self.xl, 1.0, np.where(x >= self.xr, 0.0, mid))

    def _pdf(self, x):
        xc = np.clip(x, self.xl, self.xr)
        val = self.alpha * self.xl ** self.alpha * xc ** (-self.alpha - 1.0) / self._d
        return np.where((x < self.xl) | (x > self.xr), 0.0, val)

    def _tm(self, x):
        xa = np.atleast_1d(x)
        out = np.where(xa < self.xl, xa, self.mean - self._upper(xa))
        return out.reshape(np.shape(x))

    def _eq_ccdf(self, x):
        xa = np.atleast_1d(x)
        out = np.where(xa < self.xl, 1.0 - xa / self.mean, self._upper(xa) / self.mean)
        return out.reshape(np.shape(x))

    def _m2(self, x):
        a, xl = self.alpha, self.xl
        xc = np.clip(x, xl, self.xr)
        if a == 2:
            i2 = np.log(xc / xl)
        else:
            i2 = (xc ** (2.0 - a) - xl ** (2.0 - a)) / (2.0 - a)
        upper = xl ** 2 + 2.0 / self._d * (xl ** a * i2 - self._k * (xc * xc - xl * xl) / 2.0)
        return np.where(x < xl, x * x, upper)

    def _sample(self, rng, n):
        return self.xl * (1.0 - rng.uniforms(n) * self._d) ** (-1.0 / self.alpha)


@dataclass(frozen=True)
class Weibull(ServiceDistribution):
    """F̄(x) = exp(-mu x^beta)."""

    mu: float = 1.0
    beta: float = 1.0
    family: ClassVar[str] = "weibull"

    def __post_init__(self):
        if not (self.mu > 0 and self.beta > 0):
            raise DomainError("Weibull needs mu > 0 and beta > 0")

    @property
    def mean(self):
        return math.gamma(1.0 + 1.0 / self.beta) * self.mu ** (-1.0 / self.beta)

    @property
    def second_moment(self):
        return math.gamma(1.0 + 2.0 / self.beta) * self.mu ** (-2.0 / self.beta)

    def spec_string(self):
        return f"weibull(mu={self.mu!r},beta={self.beta!r})"

    def mda_info(self):
        return _mda("Gumbel")

    def _z(self, x):
        with np.errstate(over="ignore"):
            return self.mu * x ** self.beta

    def _ccdf(self, x):
        return np.exp(-self._z(x))

    def _pdf(self, x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.mu * self.beta * x ** (self.beta - 1.0) * np.exp(-self._z(x))

    def _tm(self, x):
        return self.mean * special.gammainc(1.0 / self.beta, self._z(x))

    def _eq_ccdf(self, x):
        return special.gammaincc(1.0 / self.beta, self._z(x))

    def _m2(self, x):
        return self.second_moment * special.gammainc(2.0 / self.beta, self._z(x))

    def _g_inverse_scalar(self, u):
        z = float(special.gammainccinv(1.0 / self.beta, 1.0 - u))
        x0 = (z / self.mu) ** (1.0 / self.beta)
        if not (math.isfinite(x0) and x0 > 0):
            return super()._g_inverse_scalar(u)
        # polish against the direct Ḡ on a tight bracket
        tail = 1.0 - u
        g = lambda t: -float(self._eq_ccdf(np.array(t)))
        lo, hi = x0 * (1 - 1e-6), x0 * (1 + 1e-6)
        if g(lo) <= -tail <= g(hi):
            return find_root_increasing(g, -tail, lo, hi)
        return super()._g_inverse_scalar(u)

    def _sample(self, rng, n):
        return (-np.log(rng.uniforms(n)) / self.mu) ** (1.0 / self.beta)


@dataclass(frozen=True)
class Gamma(ServiceDistribution):
    """Shape alpha, rate beta."""

    alpha: float = 2.0
    beta: float = 1.0
    family: ClassVar[str] = "gamma"

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise DomainError("Gamma needs alpha > 0 and beta > 0")

    @property
    def mean(self):
        return self.alpha / self.beta

    @property
    def second_moment(self):
        return self.alpha * (self.alpha + 1.0) / self.beta ** 2

    def spec_string(self):
        return f"gamma(alpha={self.alpha!r},beta={self.beta!r})"

    def mda_info(self):
        return _mda("Gumbel")

    def _ccdf(self, x):
        return special.gammaincc(self.alpha, self.beta * x)

    def _pdf(self, x):
        a, b = self.alpha, self.beta
        with np.errstate(divide="ignore", invalid="ignore"):
            logp = a * math.log(b) + (a - 1.0) * np.log(x) - b * x - special.gammaln(a)
        return np.exp(logp)

    def _tm(self, x):
        z = self.beta * x
        return self.mean * special.gammainc(self.alpha + 1.0, z) + x * special.gammaincc(self.alpha, z)

    def _eq_ccdf(self, x):
        z = self.beta * x
        big = self.mean * special.gammaincc(self.alpha + 1.0, z)
        small = x * special.gammaincc(self.alpha, z)
        up = _upper_tail_with_fallback(self, x, big, small, lambda xi: 1.0 / self.beta)
        return up / self.mean

    def _m2(self, x):
        z = self.beta * x
        return (self.second_moment * special.gammainc(self.alpha + 2.0, z)
                + x * x * special.gammaincc(self.alpha, z))

    def _sample(self, rng, n):
        return rng.generator.gamma(self.alpha, 1.0 / self.beta, n)


@dataclass(frozen=True)
class LogNormal(ServiceDistribution):
    """log B ~ Normal(mu, sigma²)."""

    mu: float = 0.0
    sigma: float = 1.0
    family: ClassVar[str] = "lognormal"

    def __post_init__(self):
        if not (math.isfinite(self.mu) and self.sigma > 0):
            raise DomainError("LogNormal needs finite mu and sigma > 0")

    @property
    def mean(self):
        return math.exp(self.mu + 0.5 * self.sigma ** 2)

    @property
    def second_moment(self):
        return math.exp(2.0 * self.mu + 2.0 * self.sigma ** 2)

    def spec_string(self):
        return f"lognormal(mu={self.mu!r},sigma={self.sigma!r})"

    def mda_info(self):
        return _mda("Gumbel")

    def _z(self, x):
        with np.errstate(divide="ignore"):
            return (np.log(x) - self.mu) / self.sigma

    def _ccdf(self, x):
        return _phibar(self._z(x))

    def _pdf(self, x):
        z = self._z(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.exp(-0.5 * z * z) / (x * self.sigma * math.sqrt(2.0 * math.pi))
        return np.where(x > 0, val, 0.0)

    def _tm(self, x):
        z = self._z(x)
        return self.mean * _phi(z - self.sigma) + x * _phibar(z)

    def _eq_ccdf(self, x):
        z = self._z(x)
        big = self.mean * _phibar(z - self.sigma)
        small = x * _phibar(z)

        def scale(xi):
            zi = (math.log(xi) - self.mu) / self.sigma if xi > 0 else 0.0
            return self.sigma * max(xi, 1e-300) / max(zi, 1.0)

        return _upper_tail_with_fallback(self, x, big, small, scale) / self.mean

    def _m2(self, x):
        z = self._z(x)
        return self.second_moment * _phi(z - 2.0 * self.sigma) + x * x * _phibar(z)

    def _sample(self, rng, n):
        return rng.generator.lognormal(self.mu, self.sigma, n)


@dataclass(frozen=True)
class Uniform(ServiceDistribution):
    """Uniform on (0, b)."""

    b: float = 1.0
    family: ClassVar[str] = "uniform"

    def __post_init__(self):
        if not self.b > 0:
            raise DomainError("Uniform needs b > 0")

    @property
    def mean(self):
        return 0.5 * self.b

    @property
    def second_moment(self):
        return self.b ** 2 / 3.0

    @property
    def x_right(self):
        return self.b

    def spec_string(self):
        return f"uniform(b={self.b!r})"

    def mda_info(self):
        return _mda("Weibull", 1.0)

    def _ccdf(self, x):
        return np.clip(1.0 - x / self.b, 0.0, 1.0)

    def _pdf(self, x):
        return np.where(x <= self.b, 1.0 / self.b, 0.0)

    def _tm(self, x):
        xc = np.minimum(x, self.b)
        return xc - xc * xc / (2.0 * self.b)

    def _eq_ccdf(self, x):
        return np.clip(1.0 - x / self.b, 0.0, 1.0) ** 2

    def _h_eq(self, x):
        return 2.0 / (self.b - x)

    def _m2(self, x):
        xc = np.minimum(x, self.b)
        return xc * xc - 2.0 * xc ** 3 / (3.0 * self.b)

    def _g_inverse_scalar(self, u):
        return self.b * (1.0 - math.sqrt(1.0 - u))

    def _sample(self, rng, n):
        return self.b * rng.uniforms(n)

    def _sample_eq_trunc(self, x, u):
        y = u * float(self._tm(np.array(x)))
        return 2.0 * y / (1.0 + np.sqrt(np.maximum(1.0 - 2.0 * y / self.b, 0.0)))


@dataclass(frozen=True)
class Deterministic(ServiceDistribution):
    """Point mass at b."""

    b: float = 1.0
    family: ClassVar[str] = "det"

    def __post_init__(self):
        if not self.b > 0:
            raise DomainError("Deterministic needs b > 0")

    @property
    def mean(self):
        return self.b

    @property
    def second_moment(self):
        return self.b ** 2

    @property
    def x_right(self):
        return self.b

    @property
    def atoms(self):
        return ((self.b, 1.0),)

    def spec_string(self):
        return f"det(b={self.b!r})"

    def mda_info(self):
        return _mda("AtomAtEndpoint", atom_mass=1.0)

    def _ccdf(self, x):
        return np.where(x < self.b, 1.0, 0.0)

    def _pdf(self, x):
        return np.zeros_like(x)

    def _tm(self, x):
        return np.minimum(x, self.b)

    def _eq_ccdf(self, x):
        return np.clip(1.0 - x / self.b, 0.0, 1.0)

    def _h_eq(self, x):
        return 1.0 / (self.b - x)

    def _m2(self, x):
        return np.minimum(x, self.b) ** 2

    def _g_inverse_scalar(self, u):
        return u * self.b

    def _sample(self, rng, n):
        return np.full(n, self.b)

    def _sample_eq_trunc(self, x, u):
        return u * min(x, self.b)


# ---------------------------------------------------------------------------
FAMILIES = {
    "exp": (Exponential, ("mu",)),
    "exponential": (Exponential, ("mu",)),
    "pareto": (Pareto, ("alpha", "xl")),
    "bpareto": (BoundedPareto, ("alpha", "xl", "xr")),
    "boundedpareto": (BoundedPareto, ("alpha", "xl", "xr")),
    "bounded_pareto": (BoundedPareto, ("alpha", "xl", "xr")),
    "weibull": (Weibull, ("mu", "beta")),
    "gamma": (Gamma, ("alpha", "beta")),
    "lognormal": (LogNormal, ("mu", "sigma")),
    "lognorm": (LogNormal, ("mu", "sigma")),
    "uniform": (Uniform, ("b",)),
    "det": (Deterministic, ("b",)),
    "deterministic": (Deterministic, ("b",)),
}

_SPEC_RE = re.compile(r"^\s*([A-Za-z_]+)\s*\((.*)\)\s*$", re.S)
_NUM_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


class DistSpecError(DomainError):
    """A textual distribution spec could not be parsed."""

    def __init__(self, message, token=None):
        super().__init__(message)
        self.token = token


def parse_dist(text: str) -> ServiceDistribution:
    """Parse ``family(param=value,...)``, e.g. ``pareto(alpha=3,xl=1)``."""
    m = _SPEC_RE.match(text)
    if not m:
        raise DistSpecError(f"malformed distribution spec {text!r}", token=text)
    name = m.group(1).lower()
    if name not in FAMILIES:
        raise DistSpecError(f"unknown family {m.group(1)!r}", token=m.group(1))
    cls, allowed = FAMILIES[name]
    kwargs = {}
    body = m.group(2).strip()
    for item in filter(None, (s.strip() for s in body.split(","))) if body else ():
        if "=" not in item:
            raise DistSpecError(f"expected param=value, got {item!r}", token=item)
        key, _, raw = (s.strip() for s in item.partition("="))
        if key not in allowed:
            raise DistSpecError(f"unknown parameter {key!r} for {name}", token=key)
        if key in kwargs:
            raise DistSpecError(f"duplicate parameter {key!r}", token=key)
        if not _NUM_RE.match(raw):
            raise DistSpecError(f"bad number {raw!r}", token=raw)
        kwargs[key] = float(raw)
    missing = [k for k in allowed if k not in kwargs]
    if missing:
        raise DistSpecError(f"missing parameter {missing[0]!r} for {name}", token=missing[0])
    return cls(**kwargs)


# thin functional wrappers
def ccdf(d: ServiceDistribution, x):
    return d.ccdf(x)


def truncated_mean(d: ServiceDistribution, x):
    return d.truncated_mean(x)


def m2(d: ServiceDistribution, x):
    return d.m2(x)


def eq_cdf(d: ServiceDistribution, x):
    return d.eq_cdf(x)


def eq_ccdf(d: ServiceDistribution, x):
    return d.eq_ccdf(x)


def g_inverse(d: ServiceDistribution, u):
    return d.g_inverse(u)


def failure_rate_eq(d: ServiceDistribution, x):
    return d.failure_rate_eq(x)


def mda_info(d: ServiceDistribution) -> MdaInfo:
    return d.mda_info()


def sample(d: ServiceDistribution, rng, n=None):
    return d.sample(rng, n)


def sample_eq_truncated(d: ServiceDistribution, x, rng, n=None):
    return d.sample_eq_truncated(x, rng, n)

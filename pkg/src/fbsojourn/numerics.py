"""Numerical kernels: adaptive Gauss-Kronrod quadrature, bisection, special
functions and counter-based random streams."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import BracketError, DomainError, QuadratureError

# 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
_XGK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208289759397,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

# Full symmetric node set on [-1, 1] and matching weights.
NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(21)
# Gauss nodes sit at odd positions of _XGK (indices 1, 3, 5, 7, 9).
for _k, _w in zip((1, 3, 5, 7, 9), _WG):
    GAUSS_WEIGHTS[_k] = _w
    GAUSS_WEIGHTS[20 - _k] = _w

_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")

    def target(self, value: float) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))


DEFAULT_SPEC = QuadratureSpec()


def _call(f, x: np.ndarray) -> np.ndarray:
    """Evaluate f on an array of abscissae, falling back to a scalar loop."""
    try:
        y = np.asarray(f(x), dtype=float)
        if y.shape == x.shape:
            return y
    except (TypeError, ValueError):
        pass
    return np.array([float(f(float(xi))) for xi in x])


def _gk21(f, a: float, b: float):
    centre = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = centre + half * NODES
    fx = _call(f, x)
    bad = ~np.isfinite(fx)
    if bad.any():
        i = int(np.argmax(bad))
        raise QuadratureError(f"integrand is not finite at x={x[i]!r}", abscissa=float(x[i]))
    resk = float(np.dot(KRONROD_WEIGHTS, fx))
    resg = float(np.dot(GAUSS_WEIGHTS, fx))
    mean = 0.5 * resk
    resabs = float(np.dot(KRONROD_WEIGHTS, np.abs(fx))) * abs(half)
    resasc = float(np.dot(KRONROD_WEIGHTS, np.abs(fx - mean))) * abs(half)
    value = resk * half
    err = abs((resk - resg) * half)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    if resabs > _TINY / (50.0 * _EPS):
        err = max(50.0 * _EPS * resabs, err)
    return value, err


def _adaptive(f, a: float, b: float, spec: QuadratureSpec, budget: int):
    """Globally adaptive bisection on a finite interval. Returns (value, err, used)."""
    value, err = _gk21(f, a, b)
    heap = [(-err, a, b, value, err)]
    total, total_err = value, err
    used = 1
    while total_err > spec.target(total):
        if used >= budget:
            raise QuadratureError(
                f"no convergence on [{a}, {b}] within {spec.max_subdivisions} subdivisions",
                value=total, err_estimate=total_err)
        _, lo, hi, v, e = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi):
            # interval exhausted at float resolution; accept it as is
            heapq.heappush(heap, (0.0, lo, hi, v, e))
            break
        v1, e1 = _gk21(f, lo, mid)
        v2, e2 = _gk21(f, mid, hi)
        heapq.heappush(heap, (-e1, lo, mid, v1, e1))
        heapq.heappush(heap, (-e2, mid, hi, v2, e2))
        used += 1
        # recompute sums periodically to avoid drift from incremental updates
        if used % 64 == 0:
            total = math.fsum(item[3] for item in heap)
            total_err = math.fsum(item[4] for item in heap)
        else:
            total += v1 + v2 - v
            total_err += e1 + e2 - e
    total = math.fsum(item[3] for item in heap)
    total_err = math.fsum(item[4] for item in heap)
    return total, total_err, used


def _map_semi_infinite(f, a: float, direction: int, transform: str):
    """Map [a, +inf) (direction=+1) or (-inf, a] (direction=-1) onto [0, 1)."""
    if transform == "rational":
        def g(u):
            # nodes that round onto u = 1 carry no weight worth keeping
            w = np.maximum(1.0 - u, 1e-300)
            out = f(a + direction * u / w) / (w * w)
            return np.where(u < 1.0, out, 0.0)
    elif transform == "tangent":
        def g(u):
            th = 0.5 * np.pi * np.minimum(u, 1.0 - 1e-16)
            out = f(a + direction * np.tan(th)) * (0.5 * np.pi) / np.cos(th) ** 2
            return np.where(u < 1.0, out, 0.0)
    else:
        raise DomainError(f"unknown transform {transform!r}")
    return g


def integrate(f, a: float, b: float, spec: QuadratureSpec = DEFAULT_SPEC,
              points=None, transform: str = "rational"):
    """Adaptive 21-point Gauss-Kronrod quadrature of f over (a, b).

    Either limit may be infinite; a semi-infinite piece uses x = a + u/(1-u)
    (or x = a + tan(pi u / 2) with ``transform="tangent"``).  ``points`` are
    interior breakpoints; no panel straddles one.  f receives numpy arrays when
    it can handle them.  Returns ``(value, err_estimate)`` and raises
    :class:`QuadratureError` on non-convergence or a non-finite integrand.
    """
    a = float(a)
    b = float(b)
    if math.isnan(a) or math.isnan(b):
        raise DomainError("integration limits must not be NaN")
    if a == b:
        return 0.0, 0.0
    if a > b:
        v, e = integrate(f, b, a, spec, points, transform)
        return -v, e
    cuts = [a]
    if points is not None:
        cuts.extend(sorted(float(p) for p in points if a < p < b and math.isfinite(p)))
    cuts.append(b)
    if math.isinf(a) and math.isinf(b) and len(cuts) == 2:
        cuts = [a, 0.0, b]

    pieces = list(zip(cuts[:-1], cuts[1:]))
    values, errs = [], []
    budget = spec.max_subdivisions
    # each piece gets the full tolerance share; total budget shared
    piece_spec = QuadratureSpec(spec.abs_tol / len(pieces), spec.rel_tol, spec.max_subdivisions)
    for lo, hi in pieces:
        if math.isinf(lo):
            g, ulo, uhi = _map_semi_infinite(f, hi, -1, transform), 0.0, 1.0
        elif math.isinf(hi):
            g, ulo, uhi = _map_semi_infinite(f, lo, +1, transform), 0.0, 1.0
        else:
            g, ulo, uhi = f, lo, hi
        try:
            v, e, used = _adaptive(g, ulo, uhi, piece_spec, max(budget, 1))
        except QuadratureError as exc:
            exc.value = math.fsum(values) + exc.value
            exc.err_estimate = math.fsum(errs) + exc.err_estimate
            raise
        budget -= used
        values.append(v)
        errs.append(e)
    return math.fsum(values), math.fsum(errs)


def integrate_endpoint_singular(f, a: float, b: float, spec: QuadratureSpec = DEFAULT_SPEC,
                                side: str = "left", shrink: float = 0.5, max_shells: int = 400,
                                points=None):
    """Integrate f over (a, b) when f has an integrable singularity at an endpoint.

    The core range is [a + d, b] (or [a, b - d]) with d = (b - a)/2; the
    remaining gap is covered by geometric shells [a + d*shrink^(k+1), a + d*shrink^k]
    until three consecutive shells fall below the tolerance.  Returns
    ``(value, err_estimate)``.
    """
    if side not in ("left", "right"):
        raise DomainError("side must be 'left' or 'right'")
    if not (0.0 < shrink < 1.0):
        raise DomainError("shrink must lie in (0, 1)")
    width = b - a
    d = 0.5 * width
    if side == "left":
        core = integrate(f, a + d, b, spec, points)
    else:
        core = integrate(f, a, b - d, spec, points)
    total, err = core
    quiet = 0
    eps = d
    last = 0.0
    for _ in range(max_shells):
        inner = eps * shrink
        if side == "left":
            lo, hi = a + inner, a + eps
        else:
            lo, hi = b - eps, b - inner
        if not lo < hi:
            break
        v, e = integrate(f, lo, hi, spec)
        total += v
        err += e
        last = abs(v)
        eps = inner
        if last <= spec.target(total):
            quiet += 1
            if quiet >= 3:
                break
        else:
            quiet = 0
    else:
        raise QuadratureError("endpoint shells did not converge", value=total, err_estimate=err + last)
    # geometric tail bound for the uncovered gap
    err += last * shrink / (1.0 - shrink)
    return total, err


def find_root_increasing(g, target: float, lo: float, hi: float, tol: float = 1e-13) -> float:
    """Smallest x in [lo, hi] with g(x) >= target, for non-decreasing g.

    Bisects until the bracket is narrower than ``max(tol, 1e-13 * |x|)``.
    """
    glo, ghi = g(lo), g(hi)
    if not (glo <= target <= ghi):
        raise BracketError(f"target {target!r} outside [g(lo), g(hi)] = [{glo!r}, {ghi!r}]")
    if glo == target:
        return lo
    while hi - lo > max(tol, 1e-13 * abs(hi)):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if g(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def erfc(x):
    """Complementary error function, 2/sqrt(pi) * int_x^inf exp(-u^2) du."""
    return special.erfc(x)


def erfcx(x):
    """Scaled complementary error function exp(x^2) * erfc(x)."""
    return special.erfcx(x)


def gamma_fn(x):
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr <= 0) or np.any(np.isnan(x_arr)):
        raise DomainError("gamma_fn requires x > 0")
    out = special.gamma(x_arr)
    return float(out) if out.ndim == 0 else out


_U64 = 1 << 64


class RandomStream:
    """Reproducible random stream keyed by (seed, stream_id).

    Backed by the counter-based Philox generator so that distinct stream ids
    give independent streams without any jumping.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        seed = int(seed)
        stream_id = int(stream_id)
        if not (0 <= seed < _U64 and 0 <= stream_id < _U64):
            raise DomainError("seed and stream_id must be unsigned 64-bit integers")
        self.seed = seed
        self.stream_id = stream_id
        key = np.array([seed, stream_id], dtype=np.uint64)
        self.generator = np.random.Generator(np.random.Philox(key=key))

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, stream_id={self.stream_id})"

    def uniforms(self, n: int) -> np.ndarray:
        # random() returns k * 2**-53; shifting by half a step keeps draws in (0, 1)
        return self.generator.random(n) + 2.0 ** -54

    def next_uniform(self) -> float:
        return float(self.generator.random()) + 2.0 ** -54

    def exponentials(self, rate: float, n: int) -> np.ndarray:
        if not rate > 0:
            raise DomainError("exponential rate must be positive")
        return -np.log(self.uniforms(n)) / rate

    def next_exponential(self, rate: float) -> float:
        if not rate > 0:
            raise DomainError("exponential rate must be positive")
        return -math.log(self.next_uniform()) / rate


def stream(seed: int, stream_id: int = 0) -> RandomStream:
    return RandomStream(seed, stream_id)

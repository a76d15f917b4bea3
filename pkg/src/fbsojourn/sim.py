"""Exact stochastic machinery for the M/GI/1 queue under FB.

The event engine groups present jobs into cohorts of equal attained service.
Under FB attained service is non-increasing in arrival order, so each cohort
is a contiguous run of arrival indices and the least-served cohort is always
the most recent one.  A segment tree over the busy period's jobs gives the
smallest remaining size in that cohort.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np

from .analytic import TrafficPoint
from .dist import ServiceDistribution
from .errors import DomainError, FBError, SimulationError
from .numerics import RandomStream
from .tail import x_rho_nu

LEVEL_TOL = 1e-12
EVENT_WALL = 10 ** 9
_CHUNK = 1 << 20
# log-spaced grid (relative to E[B]) on which the empirical ccdf is tabulated
_CCDF_DECADES = (-4, 8)
_CCDF_PER_DECADE = 20


@dataclass(frozen=True)
class SimConfig:
    """Run lengths and seed for simulate_fb."""

    warmup_jobs: int = 100_000
    measured_jobs: int = 1_000_000
    replications: int = 1
    seed: int = 1
    event_wall: int = EVENT_WALL
    workers: int = 1

    def __post_init__(self):
        if self.warmup_jobs < 0:
            raise DomainError("warmup_jobs must be non-negative")
        if self.measured_jobs < 1:
            raise DomainError("measured_jobs must be at least 1")
        if self.replications < 1:
            raise DomainError("replications must be at least 1")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.event_wall < 1 or self.workers < 1:
            raise DomainError("event_wall and workers must be positive")


@dataclass
class SojournStats:
    """Pooled sojourn statistics with busy-period (regenerative) error bars.

    ``empirical_ccdf`` is a pair of arrays (y, fraction of samples > y).
    ``exceedance`` maps each requested threshold to (estimate, std error).
    """

    n: int
    mean: float
    variance: float
    std_error: float
    empirical_ccdf: tuple
    n_busy_periods: int
    exceedance: dict = field(default_factory=dict)
    single_timestamp_periods: int = 0
    samples: np.ndarray | None = None

    @property
    def n_effective(self) -> float:
        return self.variance / self.std_error ** 2 if self.std_error > 0 else float(self.n)

    def ccdf_at(self, y: float) -> float:
        ys, ps = self.empirical_ccdf
        i = np.searchsorted(ys, y, side="right") - 1
        return 1.0 if i < 0 else float(ps[i])


# ---------------------------------------------------------------------------
# event engine


@numba.njit(cache=True, nogil=True)
def _tree_set(tree, arg, size, pos, val):
    i = pos + size
    tree[i] = val
    arg[i] = pos
    i >>= 1
    while i >= 1:
        l, r = 2 * i, 2 * i + 1
        if tree[r] < tree[l]:
            tree[i] = tree[r]
            arg[i] = arg[r]
        else:
            tree[i] = tree[l]
            arg[i] = arg[l]
        i >>= 1


@numba.njit(cache=True, nogil=True)
def _tree_argmin(tree, arg, size, lo, hi):
    # leftmost index of the minimum over [lo, hi)
    best = np.inf
    besti = -1
    l = lo + size
    r = hi + size
    while l < r:
        if l & 1:
            if tree[l] < best or (tree[l] == best and arg[l] < besti):
                best = tree[l]
                besti = arg[l]
            l += 1
        if r & 1:
            r -= 1
            if tree[r] < best or (tree[r] == best and arg[r] < besti):
                best = tree[r]
                besti = arg[r]
        l >>= 1
        r >>= 1
    return besti, best


@numba.njit(cache=True, nogil=True)
def _busy_period_starts(arr, size, tol):
    """Indices opening a busy period, from the work-conserving workload path.

    Same tie rule as the event loop: an arrival within tol (1 + t) of the
    instant the server empties opens a new period.
    """
    n = arr.shape[0]
    starts = np.empty(n + 1, dtype=np.int64)
    k = 0
    end = -np.inf
    for j in range(n):
        if j == 0 or arr[j] >= end - tol * (1.0 + end):
            starts[k] = j
            k += 1
            end = arr[j] + size[j]
        else:
            end += size[j]
    starts[k] = n
    return starts[: k + 1]


@numba.njit(cache=True, nogil=True)
def _fb_kernel(arr, size, starts, dep, tol, wall):
    """Fill dep with FB departure epochs; returns the number of events used."""
    nb = starts.shape[0] - 1
    biggest = 1
    for b in range(nb):
        biggest = max(biggest, starts[b + 1] - starts[b])
    cap = 1
    while cap < biggest:
        cap <<= 1
    tree = np.empty(2 * cap)
    arg = np.empty(2 * cap, dtype=np.int64)
    lev = np.empty(biggest + 1)
    seg = np.empty(biggest + 1, dtype=np.int64)
    cnt = np.empty(biggest + 1, dtype=np.int64)
    events = 0
    for b in range(nb):
        j0 = starts[b]
        n = starts[b + 1] - j0
        size2 = 1
        while size2 < n:
            size2 <<= 1
        for i in range(size2):
            tree[size2 + i] = size[j0 + i] if i < n else np.inf
            arg[size2 + i] = i
        for i in range(size2 - 1, 0, -1):
            l, r = 2 * i, 2 * i + 1
            if tree[r] < tree[l]:
                tree[i] = tree[r]
                arg[i] = arg[r]
            else:
                tree[i] = tree[l]
                arg[i] = arg[l]
        d = 0
        nxt = 0
        t = arr[j0]
        left = n
        while left > 0:
            events += 1
            if events > wall:
                return -1
            if d == 0:
                t = max(t, arr[j0 + nxt])
                lev[0] = 0.0
                seg[0] = nxt
                cnt[0] = 1
                d = 1
                nxt += 1
                continue
            k = cnt[d - 1]
            a = lev[d - 1]
            jm, m = _tree_argmin(tree, arg, size2, seg[d - 1], nxt)
            dt_c = k * (m - a)
            dt_m = k * (lev[d - 2] - a) if d >= 2 else np.inf
            dt_a = max(arr[j0 + nxt] - t, 0.0) if nxt < n else np.inf
            # events closer than the slack count as simultaneous; departures go first
            slack = tol * (1.0 + t)
            if dt_a < dt_c - slack and dt_a < dt_m - slack:
                lev[d - 1] = a + dt_a / k
                t += dt_a
                if lev[d - 1] <= tol:
                    cnt[d - 1] += 1
                else:
                    lev[d] = 0.0
                    seg[d] = nxt
                    cnt[d] = 1
                    d += 1
                nxt += 1
                continue
            if dt_c <= dt_m:
                t = t + dt_c
                lev[d - 1] = m
                thr = m + tol
                while True:
                    jm, v = _tree_argmin(tree, arg, size2, seg[d - 1], nxt)
                    if jm < 0 or v > thr:
                        break
                    dep[j0 + jm] = t
                    _tree_set(tree, arg, size2, jm, np.inf)
                    cnt[d - 1] -= 1
                    left -= 1
                if cnt[d - 1] == 0:
                    d -= 1
            else:
                t = t + dt_m
                lev[d - 1] = lev[d - 2]
            # merge every cohort the top has caught up with
            while d >= 2 and lev[d - 1] >= lev[d - 2] - tol:
                cnt[d - 2] += cnt[d - 1]
                d -= 1
    return events


def fb_departures(arrivals, sizes, tol: float = LEVEL_TOL, event_wall: int = EVENT_WALL):
    """Departure epochs under FB for jobs given in arrival order.

    Returns (departures, busy_period_index_per_job).
    """
    arr = np.ascontiguousarray(arrivals, dtype=float)
    siz = np.ascontiguousarray(sizes, dtype=float)
    if arr.shape != siz.shape or arr.ndim != 1:
        raise DomainError("arrivals and sizes must be 1-d arrays of equal length")
    if arr.size and (np.any(np.diff(arr) < 0) or np.any(siz <= 0)):
        raise DomainError("arrivals must be sorted and sizes positive")
    dep = np.empty_like(arr)
    if arr.size == 0:
        return dep, np.empty(0, dtype=np.int64)
    starts = _busy_period_starts(arr, siz, tol)
    if _fb_kernel(arr, siz, starts, dep, tol, event_wall) < 0:
        raise SimulationError(f"event wall of {event_wall} events exceeded")
    bp = np.repeat(np.arange(starts.size - 1), np.diff(starts))
    return dep, bp


# ---------------------------------------------------------------------------
# replication driver


def _ccdf_grid(scale: float) -> np.ndarray:
    lo, hi = _CCDF_DECADES
    return scale * np.logspace(lo, hi, (hi - lo) * _CCDF_PER_DECADE + 1)


@dataclass
class _Acc:
    """Per-replication accumulators, merged in replication order."""

    grid: np.ndarray
    thresholds: np.ndarray
    keep: bool
    y: list = field(default_factory=list)       # per busy period sum of sojourns
    c: list = field(default_factory=list)       # per busy period job count
    e: list = field(default_factory=list)       # per busy period exceedance counts
    hist: np.ndarray | None = None
    n: int = 0
    s1: float = 0.0
    shift: float = 0.0
    s2: float = 0.0
    single: int = 0
    samples: list = field(default_factory=list)

    def add(self, soj, bp_local, dep_local):
        if soj.size == 0:
            return
        if self.n == 0:
            self.shift = float(soj[0])
        z = soj - self.shift
        self.n += soj.size
        self.s1 += float(z.sum())
        self.s2 += float((z * z).sum())
        cuts = np.flatnonzero(np.diff(bp_local)) + 1
        idx = np.concatenate(([0], cuts))
        self.y.append(np.add.reduceat(soj, idx))
        self.c.append(np.diff(np.concatenate((idx, [soj.size]))))
        if self.thresholds.size:
            exc = (soj[:, None] > self.thresholds[None, :]).astype(np.int64)
            self.e.append(np.add.reduceat(exc, idx, axis=0))
        dmax = np.maximum.reduceat(dep_local, idx)
        dmin = np.minimum.reduceat(dep_local, idx)
        self.single += int(np.count_nonzero(dmax == dmin))
        h = np.searchsorted(self.grid, soj, side="left")
        counts = np.bincount(h, minlength=self.grid.size + 1)
        self.hist = counts if self.hist is None else self.hist + counts
        if self.keep:
            self.samples.append(soj.copy())


def _run_replication(tp: TrafficPoint, cfg: SimConfig, rep: int, acc: _Acc) -> _Acc:
    rng = RandomStream(cfg.seed, rep)
    d = tp.dist
    total = cfg.warmup_jobs + cfg.measured_jobs
    if tp.lam == 0:
        # no queueing: every job is served alone
        s = d.sample(rng, cfg.measured_jobs)
        acc.add(s, np.arange(s.size), np.arange(s.size, dtype=float))
        return acc
    carry_a = np.empty(0)
    carry_s = np.empty(0)
    t_last = 0.0
    generated = 0
    base = 0  # global index of carry_a[0]
    while True:
        m = _CHUNK
        gaps = rng.exponentials(tp.lam, m)
        new_a = t_last + np.cumsum(gaps)
        t_last = float(new_a[-1])
        new_s = d.sample(rng, m)
        generated += m
        a = np.concatenate((carry_a, new_a))
        s = np.concatenate((carry_s, new_s))
        starts = _busy_period_starts(a, s, LEVEL_TOL)
        cut = int(starts[-2])  # the final busy period may still grow
        done = generated >= total and cut >= total - base
        if cut > 0:
            st = starts[starts <= cut]
            if st[-1] != cut:
                st = np.append(st, cut)
            dep = np.empty(cut)
            if _fb_kernel(a[:cut], s[:cut], st, dep, LEVEL_TOL, cfg.event_wall) < 0:
                raise SimulationError(f"event wall of {cfg.event_wall} events exceeded")
            lo = max(cfg.warmup_jobs - base, 0)
            hi = min(total - base, cut)
            if hi > lo:
                bp = np.repeat(np.arange(st.size - 1), np.diff(st))
                acc.add(dep[lo:hi] - a[lo:hi], bp[lo:hi], dep[lo:hi])
        if done:
            return acc
        carry_a, carry_s = a[cut:], s[cut:]
        base += cut


def _ratio_se(y: np.ndarray, c: np.ndarray) -> float:
    b = y.size
    if b < 2:
        return math.nan
    m = y.sum() / c.sum()
    z = y - m * c
    return math.sqrt(float((z * z).sum()) / (b * (b - 1))) / (c.sum() / b)


def simulate_fb(tp: TrafficPoint, cfg: SimConfig, thresholds=(), keep_samples: bool = False) -> SojournStats:
    """Steady-state FB sojourn statistics pooled over independent replications.

    Replication i draws from RandomStream(seed, i); results are merged in
    index order, so the output does not depend on ``cfg.workers``.
    """
    if tp.rho >= 1:
        raise DomainError("unstable load")
    grid = _ccdf_grid(tp.dist.mean)
    thr = np.asarray(sorted(float(v) for v in thresholds), dtype=float)
    accs = [_Acc(grid, thr, keep_samples) for _ in range(cfg.replications)]
    if cfg.workers > 1 and cfg.replications > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as ex:
            accs = list(ex.map(lambda i: _run_replication(tp, cfg, i, accs[i]), range(cfg.replications)))
    else:
        accs = [_run_replication(tp, cfg, i, accs[i]) for i in range(cfg.replications)]
    y = np.concatenate([np.concatenate(a.y) for a in accs])
    c = np.concatenate([np.concatenate(a.c) for a in accs])
    n = int(c.sum())
    mean = float(y.sum() / n)
    # pooled variance from shifted sums
    ss = 0.0
    for a in accs:
        mu_a = a.shift + a.s1 / a.n
        ss += a.s2 - a.s1 ** 2 / a.n + a.n * (mu_a - mean) ** 2
    var = ss / (n - 1) if n > 1 else 0.0
    hist = sum(a.hist for a in accs)
    above = n - np.cumsum(hist)[:-1]
    exceed = {}
    if thr.size:
        e = np.concatenate([np.concatenate(a.e) for a in accs])
        for k, t in enumerate(thr):
            exceed[float(t)] = (float(e[:, k].sum() / n), _ratio_se(e[:, k].astype(float), c))
    return SojournStats(
        n=n, mean=mean, variance=var, std_error=_ratio_se(y, c),
        empirical_ccdf=(grid, above / n), n_busy_periods=int(c.size),
        exceedance=exceed, single_timestamp_periods=sum(a.single for a in accs),
        samples=np.concatenate([np.concatenate(a.samples) for a in accs]) if keep_samples else None,
    )


# ---------------------------------------------------------------------------
# exact samplers


def _check_trunc(tp: TrafficPoint, x: float) -> float:
    x = float(x)
    if not x > 0:
        raise DomainError("truncation level must be positive")
    if tp.rho_x(x) >= 1:
        raise DomainError("truncated load must be below 1")
    return x


def sample_waiting_trunc_many(tp: TrafficPoint, x: float, n: int, rng: RandomStream) -> np.ndarray:
    """n exact draws of the FIFO waiting time with sizes B∧x (geometric compound)."""
    x = _check_trunc(tp, x)
    if tp.lam == 0:
        return np.zeros(n)
    rx = float(tp.rho_x(min(x, tp.dist.x_right))) if math.isfinite(x) else tp.rho
    k = rng.generator.geometric(1.0 - rx, n) - 1
    tot = int(k.sum())
    out = np.zeros(n)
    if tot:
        y = tp.dist.sample_eq_truncated(x, rng, tot)
        pos = np.flatnonzero(k)
        offs = np.concatenate(([0], np.cumsum(k[pos])[:-1]))
        out[pos] = np.add.reduceat(y, offs)
    return out


def sample_waiting_trunc(tp: TrafficPoint, x: float, rng: RandomStream) -> float:
    """One exact draw of W_x."""
    return float(sample_waiting_trunc_many(tp, x, 1, rng)[0])


def sample_sojourn_fb_of_size_many(tp: TrafficPoint, x: float, n: int, rng: RandomStream,
                                   event_wall: int = EVENT_WALL) -> np.ndarray:
    """n draws of T(x) as the time for the B∧x workload started at W_x + x to empty."""
    x = _check_trunc(tp, x)
    w = sample_waiting_trunc_many(tp, x, n, rng)
    if tp.lam == 0:
        return np.full(n, x)
    return _busy_drain(w + x, tp, x, rng, event_wall)


def _busy_drain(start, tp, x, rng, event_wall):
    out = np.empty_like(start)
    block = 4096
    gaps = rng.exponentials(tp.lam, block)
    sz = np.minimum(tp.dist.sample(rng, block), x)
    p = 0
    events = 0
    for i, v in enumerate(start):
        t_end = float(v)
        clock = 0.0
        while True:
            if p == block:
                gaps = rng.exponentials(tp.lam, block)
                sz = np.minimum(tp.dist.sample(rng, block), x)
                p = 0
            clock += gaps[p]
            if clock >= t_end:
                p += 1
                break
            t_end += sz[p]
            p += 1
            events += 1
            if events > event_wall:
                raise SimulationError(f"event wall of {event_wall} events exceeded")
        out[i] = t_end
    return out


def sample_sojourn_fb_of_size(tp: TrafficPoint, x: float, rng: RandomStream) -> float:
    return float(sample_sojourn_fb_of_size_many(tp, x, 1, rng)[0])


# ---------------------------------------------------------------------------
# statistics


def empirical_ks(samples, cdf) -> float:
    """sup |F_n - F|, comparing left limits as well so atoms are handled exactly."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise DomainError("KS distance needs at least one sample")
    u, first = np.unique(x, return_index=True)
    last = np.concatenate((first[1:], [n]))
    f_at = np.asarray(cdf(u), dtype=float)
    f_left = np.asarray(cdf(np.nextafter(u, -np.inf)), dtype=float)
    d = max(np.max(np.abs(last / n - f_at)), np.max(np.abs(first / n - f_left)))
    return float(min(max(d, 0.0), 1.0))


def check_w_to_exp(dist: ServiceDistribution, nu: float, rho: float, n: int, seed: int):
    """KS distance of (1-rho)W at level x_rho^ν to the Exponential law with mean ν E[B*].

    ν = 1 means no truncation.
    """
    if n < 1:
        raise DomainError("need at least one sample")
    tp = TrafficPoint.from_rho(dist, rho)
    if not (1.0 - rho < nu <= 1.0):
        raise DomainError(f"ν must lie in (1 - rho, 1], got {nu!r}")
    x = x_rho_nu(tp, nu) if nu < 1 else math.inf
    target = nu * dist.eq_mean
    rng = RandomStream(seed, 0)
    w = (1.0 - rho) * sample_waiting_trunc_many(tp, x, int(n), rng)
    ks = empirical_ks(w, lambda t: -np.expm1(-np.maximum(t, 0.0) / target))
    return ks, target


def scaled_tail(stats: SojournStats, tp: TrafficPoint, ys, r_H: float) -> dict:
    """P((1-rho)²T > y)/(r E[B*] F̄(G⁻¹(rho))) with standard errors, per y.

    The thresholds y/(1-rho)² must have been requested in simulate_fb.
    """
    d = tp.dist
    norm = r_H * d.eq_mean * float(d.ccdf(tp.critical_size()))
    out = {}
    for y in ys:
        key = float(y) / (1.0 - tp.rho) ** 2
        hit = [k for k in stats.exceedance if math.isclose(k, key, rel_tol=1e-9)]
        if not hit:
            raise FBError(f"threshold {key!r} was not tracked")
        p, se = stats.exceedance[hit[0]]
        out[float(y)] = (float(p / norm), float(se / norm))
    return out


__all__ = [
    "SimConfig", "SojournStats", "fb_departures", "simulate_fb", "sample_waiting_trunc",
    "sample_waiting_trunc_many", "sample_sojourn_fb_of_size", "sample_sojourn_fb_of_size_many",
    "empirical_ks", "check_w_to_exp", "scaled_tail", "LEVEL_TOL", "EVENT_WALL",
]

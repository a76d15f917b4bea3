"""Closed-form heavy-traffic asymptotics of the FB mean sojourn time."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .analytic import TrafficPoint
from .dist import (Exponential, Gamma, LogNormal, MdaInfo, Pareto,
                   ServiceDistribution, Weibull, eq5_constant)
from .errors import DomainError, UnsupportedRegimeError

REGIME_KINDS = ("FiniteVarianceRate", "LogRate", "AtomRate")


@dataclass(frozen=True)
class AsymptoticRegime:
    """Which growth rate applies, and the constant multiplying it."""

    kind: str
    leading_constant: float
    rate_description: str

    def __post_init__(self):
        if self.kind not in REGIME_KINDS:
            raise DomainError(f"unknown regime {self.kind!r}")


def r_of(H: MdaInfo) -> float:
    """Limit constant r(H); 1 for the Gumbel class and for an endpoint atom."""
    if H.kind == "InfiniteVarianceRV":
        raise UnsupportedRegimeError("infinite-variance laws follow the logarithmic regime")
    if H.kind == "Frechet":
        if H.alpha is None or H.alpha <= 2:
            raise UnsupportedRegimeError("Frechet class needs alpha > 2 for a finite limit")
        theta = math.pi / (H.alpha - 1.0)
        if math.sin(theta) <= 0:
            raise UnsupportedRegimeError(f"pole of the limit constant at alpha={H.alpha!r}")
    return eq5_constant(H.kind, H.alpha)


def regime_of(d: ServiceDistribution) -> AsymptoticRegime:
    H = d.mda_info()
    if H.kind == "InfiniteVarianceRV":
        a = H.alpha
        return AsymptoticRegime("LogRate", a / (2.0 - a) * d.mean, "log(1/(1-rho))")
    if H.kind == "AtomAtEndpoint":
        return AsymptoticRegime("AtomRate", H.atom_mass * d.eq_mean, "1/(1-rho)^2")
    return AsymptoticRegime("FiniteVarianceRate", r_of(H) * d.eq_mean, "Fbar(G^-1(rho))/(1-rho)^2")


def growth_functional(tp: TrafficPoint) -> float:
    """F̄(G⁻¹(rho))/(1 - rho)², the divergence rate of the finite-variance regime."""
    d = tp.dist
    x = tp.critical_size()
    return d.ccdf(x) / (1.0 - tp.rho) ** 2


def growth_functional_hazard(tp: TrafficPoint) -> float:
    """Equivalent form E[B] h*(G⁻¹(rho))/(1 - rho)."""
    d = tp.dist
    x = tp.critical_size()
    return d.mean * d.failure_rate_eq(x) / (1.0 - tp.rho)


def asymptotic_mean_fb(tp: TrafficPoint) -> float:
    """Leading-order heavy-traffic approximation of E[T] under FB."""
    d = tp.dist
    reg = regime_of(d)
    if reg.kind == "LogRate":
        return reg.leading_constant * -math.log1p(-tp.rho)
    if reg.kind == "AtomRate":
        return reg.leading_constant / (1.0 - tp.rho) ** 2
    return reg.leading_constant * growth_functional(tp)


def asymptotic_mean_pareto(alpha: float, xl: float, rho: float) -> float:
    """Closed forms for pure Pareto service in both variance regimes."""
    if not (alpha > 1 and alpha != 2):
        raise DomainError("alpha must lie in (1, 2) or (2, inf)")
    if not xl > 0:
        raise DomainError("xl must be positive")
    if not 0 <= rho < 1:
        raise DomainError("rho must lie in [0, 1)")
    if alpha < 2:
        mean = alpha * xl / (alpha - 1.0)
        return alpha / (2.0 - alpha) * mean * -math.log1p(-rho)
    theta = math.pi / (alpha - 1.0)
    second = alpha * xl ** 2 / (alpha - 2.0)
    return (theta / (2.0 * math.sin(theta)) * second * alpha ** (alpha / (alpha - 1.0))
            / (xl * (1.0 - rho) ** ((alpha - 2.0) / (alpha - 1.0))))


def gumbel_table_mean(tp: TrafficPoint) -> float:
    """Tabulated Gumbel-class forms for Exponential, Weibull, Gamma and LogNormal."""
    d = tp.dist
    rho = tp.rho
    if not 0 < rho < 1:
        raise DomainError("rho must lie in (0, 1)")
    gap = 1.0 - rho
    L = -math.log1p(-rho)
    e2 = d.second_moment
    if isinstance(d, Exponential):
        return e2 * d.mu / (2.0 * gap)
    if isinstance(d, Weibull):
        return d.beta * d.mu ** (1.0 / d.beta) * e2 / (2.0 * gap * L ** (1.0 / d.beta - 1.0))
    if isinstance(d, Gamma):
        return e2 * d.beta / (2.0 * gap)
    if isinstance(d, LogNormal):
        if rho < 0.99:
            raise UnsupportedRegimeError("the LogNormal form is only evaluated for rho >= 0.99")
        s, m = d.sigma, d.mu
        root = math.sqrt(2.0 * L)
        norming = math.exp(m + s * (root - (math.log(4.0 * math.pi) + math.log(L)) / (2.0 * root)))
        return math.exp(-s * s) * e2 * math.sqrt(L) / (s * math.sqrt(2.0) * gap * norming)
    raise UnsupportedRegimeError(f"no tabulated form for {d.spec_string()}")


def srpt_ratio_asymptotic(tp: TrafficPoint) -> float:
    """Limit of E[T_FB]/E[T_SRPT] for Pareto and Weibull service."""
    d = tp.dist
    if isinstance(d, Pareto):
        a = d.alpha
        if a == 2:
            raise UnsupportedRegimeError("no ratio limit at alpha = 2")
        return a * a if a < 2 else a ** (a / (a - 1.0))
    if isinstance(d, Weibull):
        return d.beta * -math.log1p(-tp.rho)
    raise UnsupportedRegimeError(f"no FB/SRPT ratio limit for {d.spec_string()}")


__all__ = [
    "AsymptoticRegime", "r_of", "regime_of", "growth_functional", "growth_functional_hazard",
    "asymptotic_mean_fb", "asymptotic_mean_pareto", "gumbel_table_mean", "srpt_ratio_asymptotic",
]

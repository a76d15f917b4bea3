import math

import numpy as np
import pytest

from fbsojourn.analytic import TrafficPoint, mean_sojourn_fb
from fbsojourn.asymptotics import (asymptotic_mean_fb, asymptotic_mean_pareto, growth_functional,
                                   growth_functional_hazard, gumbel_table_mean, r_of, regime_of,
                                   srpt_ratio_asymptotic)
from fbsojourn.dist import (BoundedPareto, Deterministic, Exponential, Gamma, LogNormal, MdaInfo,
                            Pareto, Uniform, Weibull, eq5_constant)
from fbsojourn.errors import DomainError, UnsupportedRegimeError
from fbsojourn.numerics import gamma_fn

GRID = (0.9, 0.99, 0.999, 0.9999)


def _H(kind, alpha=None):
    p = {"Frechet": lambda a: a / (a - 1), "Weibull": lambda a: a / (a + 1), "Gumbel": lambda a: 1.0}[kind](alpha)
    return MdaInfo(kind, alpha, p, eq5_constant(kind, alpha))


def test_r_examples():
    assert r_of(_H("Gumbel")) == 1.0
    assert r_of(_H("Frechet", 3.0)) == pytest.approx(3 * math.pi / 4, rel=1e-15)
    assert r_of(_H("Weibull", 1.0)) == pytest.approx(math.pi / 4, rel=1e-15)


@pytest.mark.parametrize("H", [_H("Frechet", a) for a in (2.5, 3.0, 5.0)]
                         + [_H("Weibull", a) for a in (0.5, 1.0, 2.0)] + [_H("Gumbel")])
def test_r_identity(H):
    assert abs(r_of(H) - gamma_fn(2 - H.p_H) * gamma_fn(1 + H.p_H)) <= 1e-10


def test_r_rejects_infinite_variance():
    with pytest.raises(UnsupportedRegimeError):
        r_of(MdaInfo("InfiniteVarianceRV", 1.5))


def test_regimes():
    assert regime_of(Exponential(1.0)).kind == "FiniteVarianceRate"
    assert regime_of(Pareto(1.5, 1.0)).kind == "LogRate"
    assert regime_of(Pareto(1.5, 1.0)).leading_constant == pytest.approx(9.0)
    assert regime_of(Deterministic(1.0)).kind == "AtomRate"


def test_growth_examples():
    assert growth_functional(TrafficPoint.from_rho(Exponential(1.0), 0.99)) == pytest.approx(100.0, rel=1e-12)
    assert growth_functional(TrafficPoint.from_rho(Pareto(3.0, 1.0), 0.97)) == pytest.approx(30.0, rel=1e-12)


@pytest.mark.parametrize("d", [Exponential(1.0), Pareto(3.0, 1.0), Weibull(1.0, 2.0), Gamma(2.0, 1.0),
                               LogNormal(0.0, 1.0), Uniform(1.0), BoundedPareto(1.5, 1.0, 100.0)])
@pytest.mark.parametrize("rho", GRID)
def test_growth_forms_agree(d, rho):
    tp = TrafficPoint.from_rho(d, rho)
    assert growth_functional(tp) == pytest.approx(growth_functional_hazard(tp), rel=1e-10)


def test_asymptotic_mean_examples():
    assert asymptotic_mean_fb(TrafficPoint.from_rho(Exponential(1.0), 0.99)) == pytest.approx(100.0, rel=1e-12)
    rho = 1 - math.exp(-1)
    assert asymptotic_mean_fb(TrafficPoint.from_rho(Pareto(1.5, 1.0), rho)) == pytest.approx(9.0, rel=1e-12)
    assert asymptotic_mean_fb(TrafficPoint.from_rho(Deterministic(1.0), 0.99)) == pytest.approx(5000.0, rel=1e-10)


def test_pareto_closed_forms():
    assert asymptotic_mean_pareto(3.0, 1.0, 0.9999) == pytest.approx(
        math.pi / 4 * 3 * 3 ** 1.5 * 100, rel=1e-12)
    assert asymptotic_mean_pareto(3.0, 1.0, 0.9999) == pytest.approx(1224.32, abs=0.01)
    assert asymptotic_mean_pareto(1.5, 1.0, 1 - math.exp(-1)) == pytest.approx(9.0, rel=1e-12)
    for a in (1.5, 3.0):
        tp = TrafficPoint.from_rho(Pareto(a, 1.0), 0.999)
        v = asymptotic_mean_pareto(a, 1.0, 0.999)
        assert abs(v - asymptotic_mean_fb(tp)) <= 1e-9 * v
    with pytest.raises(DomainError):
        asymptotic_mean_pareto(2.0, 1.0, 0.5)


def test_table_rows():
    assert gumbel_table_mean(TrafficPoint.from_rho(Exponential(1.0), 0.99)) == pytest.approx(100.0, rel=1e-12)
    assert gumbel_table_mean(TrafficPoint.from_rho(Weibull(1.0, 2.0), 1 - math.exp(-1))) == pytest.approx(math.e, rel=1e-12)
    assert gumbel_table_mean(TrafficPoint.from_rho(Gamma(2.0, 1.0), 0.99)) == pytest.approx(300.0, rel=1e-12)
    assert gumbel_table_mean(TrafficPoint.from_rho(LogNormal(0.0, 1.0), 0.999)) > 0
    with pytest.raises(UnsupportedRegimeError):
        gumbel_table_mean(TrafficPoint.from_rho(LogNormal(0.0, 1.0), 0.9))
    with pytest.raises(UnsupportedRegimeError):
        gumbel_table_mean(TrafficPoint.from_rho(Pareto(3.0, 1.0), 0.9))


def test_srpt_ratio_limits():
    assert srpt_ratio_asymptotic(TrafficPoint.from_rho(Pareto(1.5, 1.0), 0.9)) == 2.25
    assert srpt_ratio_asymptotic(TrafficPoint.from_rho(Pareto(3.0, 1.0), 0.9)) == pytest.approx(5.196152422706632)
    assert srpt_ratio_asymptotic(TrafficPoint.from_rho(Weibull(1.0, 2.0), 1 - math.exp(-1))) == pytest.approx(2.0)


# Θ-bounds of exact mean over growth functional, recorded per family on GRID
THETA_BOUNDS = {
    "exp": (Exponential(1.0), 0.99, 1.01),
    "pareto3": (Pareto(3.0, 1.0), 0.9, 2.5),
    "weibull2": (Weibull(1.0, 2.0), 0.45, 0.6),
    "weibull.5": (Weibull(1.0, 0.5), 6.0, 8.0),
    "gamma": (Gamma(2.0, 1.0), 1.3, 1.6),
    "lognormal": (LogNormal(0.0, 1.0), 2.3, 3.3),
    "uniform": (Uniform(1.0), 0.23, 0.33),
    "bpareto": (BoundedPareto(1.5, 1.0, 100.0), 3.6, 8.5),
    "det": (Deterministic(1.0), 0.45, 0.6),
}


@pytest.mark.parametrize("name", THETA_BOUNDS)
def test_theta_bounded(name):
    d, lo, hi = THETA_BOUNDS[name]
    for rho in GRID:
        tp = TrafficPoint.from_rho(d, rho)
        r = mean_sojourn_fb(tp) / growth_functional(tp)
        assert lo <= r <= hi, (rho, r)


def test_ratio_convergence_pareto3():
    err = [abs(mean_sojourn_fb(tp) / asymptotic_mean_fb(tp) - 1)
           for tp in (TrafficPoint.from_rho(Pareto(3.0, 1.0), r) for r in GRID)]
    assert all(a > b for a, b in zip(err, err[1:]))


def test_ratio_exponential_is_one():
    # the ratio is identically 1 for exponential sizes, so only roundoff remains
    for rho in GRID:
        tp = TrafficPoint.from_rho(Exponential(1.0), rho)
        assert abs(mean_sojourn_fb(tp) / asymptotic_mean_fb(tp) - 1) <= 1e-10


def test_hazard_trends():
    p = [Pareto(3.0, 1.0).failure_rate_eq(Pareto(3.0, 1.0).g_inverse(r)) for r in GRID]
    d = [Deterministic(1.0).failure_rate_eq(Deterministic(1.0).g_inverse(r)) for r in GRID]
    assert all(a > b for a, b in zip(p, p[1:])) and p[-1] < 0.05
    assert all(a < b for a, b in zip(d, d[1:])) and d[-1] > 1e3

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from fbsojourn.errors import BracketError, DomainError, QuadratureError
from fbsojourn.numerics import (QuadratureSpec, RandomStream, erfc, erfcx, find_root_increasing,
                                gamma_fn, integrate, integrate_endpoint_singular, stream)
from fbsojourn.tail import f_kernel

TIGHT = QuadratureSpec(abs_tol=1e-13, rel_tol=1e-12)


def test_polynomial_is_exact():
    v, e = integrate(lambda x: x, 0.0, 1.0)
    assert v == pytest.approx(0.5, abs=1e-15)
    assert e <= 1e-12


def test_exponential_tail():
    v, _ = integrate(lambda t: np.exp(-t), 0.0, math.inf)
    assert v == pytest.approx(1.0, abs=1e-12)


def test_kernel_transform_at_one():
    v, _ = integrate(lambda t: np.exp(-t) * f_kernel(t), 0.0, math.inf)
    assert abs(v - 0.25) <= 1e-8


def test_two_semi_infinite_maps_agree():
    a, _ = integrate(lambda t: np.exp(-t), 0.0, math.inf, TIGHT, transform="rational")
    b, _ = integrate(lambda t: np.exp(-t), 0.0, math.inf, TIGHT, transform="tangent")
    assert abs(a - b) <= 1e-10


def test_error_estimate_within_target():
    spec = QuadratureSpec(abs_tol=1e-10, rel_tol=1e-10)
    v, e = integrate(np.cos, 0.0, 10.0, spec)
    assert e <= spec.target(v)
    assert v == pytest.approx(math.sin(10.0), abs=1e-12)


def test_doubly_infinite_gaussian():
    v, _ = integrate(lambda x: np.exp(-x * x), -math.inf, math.inf)
    assert v == pytest.approx(math.sqrt(math.pi), rel=1e-12)


def test_breakpoints_handle_kink():
    v, _ = integrate(lambda x: np.abs(x - 0.3), 0.0, 1.0, points=[0.3])
    assert v == pytest.approx(0.5 * 0.09 + 0.5 * 0.49, abs=1e-15)


def test_reversed_limits_negate():
    v, _ = integrate(np.exp, 1.0, 0.0)
    assert v == pytest.approx(-(math.e - 1.0), rel=1e-13)


def test_nan_integrand_names_abscissa():
    with pytest.raises(QuadratureError) as info:
        integrate(lambda x: np.where(x > 0.5, np.nan, 1.0), 0.0, 1.0)
    assert info.value.abscissa > 0.5


def test_non_convergence_carries_estimate():
    spec = QuadratureSpec(abs_tol=1e-14, rel_tol=1e-14, max_subdivisions=3)
    with pytest.raises(QuadratureError) as info:
        integrate(lambda x: np.sin(1.0 / x), 1e-3, 1.0, spec)
    assert math.isfinite(info.value.value)


def test_endpoint_singularity():
    # ∫₀¹ x^{-1/2} log(1/x) dx = 4
    v, _ = integrate_endpoint_singular(lambda x: x ** -0.5 * -np.log(x), 0.0, 1.0,
                                       QuadratureSpec(1e-12, 1e-12))
    assert v == pytest.approx(4.0, rel=1e-9)


def test_bad_spec_rejected():
    with pytest.raises(DomainError):
        QuadratureSpec(abs_tol=0.0)
    with pytest.raises(DomainError):
        QuadratureSpec(max_subdivisions=0)


poly = st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=6)


@given(poly, poly, st.floats(-3, 3), st.floats(-3, 3))
def test_linearity(p, q, alpha, beta):
    f = np.polynomial.Polynomial(p)
    g = np.polynomial.Polynomial(q)
    lhs, e1 = integrate(lambda x: alpha * f(x) + beta * g(x), -1.0, 2.0)
    a, e2 = integrate(f, -1.0, 2.0)
    b, e3 = integrate(g, -1.0, 2.0)
    tol = abs(alpha) * e2 + abs(beta) * e3 + e1 + 1e-12 * (1 + abs(lhs))
    assert abs(lhs - (alpha * a + beta * b)) <= tol


def test_root_examples():
    assert find_root_increasing(lambda x: x, 0.5, 0.0, 1.0) == pytest.approx(0.5, abs=1e-13)
    g = lambda x: -math.expm1(-x)
    assert find_root_increasing(g, 1 - math.exp(-2), 0.0, 10.0) == pytest.approx(2.0, abs=1e-12)
    # G of Pareto(3, 1)
    G = lambda x: x / 1.5 if x < 1 else 1 - x ** -2 / 3
    assert find_root_increasing(G, 0.97, 0.0, 100.0) == pytest.approx(10 / 3, rel=1e-12)


def test_root_out_of_bracket():
    with pytest.raises(BracketError):
        find_root_increasing(lambda x: x, 2.0, 0.0, 1.0)


@given(st.floats(-5, 5), st.floats(0.1, 5))
def test_root_inverts_affine(c, slope):
    target = 0.3
    x = find_root_increasing(lambda x: slope * (x - c), target, c - 100, c + 100)
    assert x == pytest.approx(c + target / slope, abs=1e-10)


def test_erfc_values():
    assert erfc(0.0) == 1.0
    assert abs(erfc(1.0) - 0.157299207050) <= 1e-10


@pytest.mark.parametrize("x", [0.5, 1.0, 2.0])
def test_erfc_continued_fraction_lower_bound(x):
    bound = math.exp(-x * x) / (x * math.sqrt(math.pi)) * (1 - (x * x + 1.5) / (2 * x ** 4 + 6 * x * x + 1.5))
    assert erfc(x) >= bound


@pytest.mark.parametrize("x", [0.1, 1.0, 5.0])
def test_erfc_reflection(x):
    assert abs(erfc(x) + erfc(-x) - 2.0) <= 1e-12


@given(st.floats(-5, 25))
def test_erfcx_scaling(x):
    ref = erfc(x)
    assert erfcx(x) * math.exp(-x * x) == pytest.approx(ref, rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("x", [0.3, 3.0, 30.0, 3000.0])
def test_erfcx_against_mpmath(x):
    ref = float(mp.exp(mp.mpf(x) ** 2) * mp.erfc(x))
    assert erfcx(x) == pytest.approx(ref, rel=1e-13)


def test_gamma_values():
    assert gamma_fn(1.0) == 1.0
    assert gamma_fn(4.0) == pytest.approx(6.0, rel=1e-15)
    assert abs(gamma_fn(0.5) - math.sqrt(math.pi)) <= 1e-12
    with pytest.raises(DomainError):
        gamma_fn(0.0)


def test_stream_replays():
    a = stream(7, 3).uniforms(1000)
    b = stream(7, 3).uniforms(1000)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, stream(7, 4).uniforms(1000))


def test_uniforms_open_interval():
    u = RandomStream(1, 0).uniforms(10 ** 6)
    assert u.min() > 0.0 and u.max() < 1.0


def test_exponential_mean():
    r = RandomStream(2, 0)
    draws = np.array([r.next_exponential(2.0) for _ in range(10 ** 4)] + list(r.exponentials(2.0, 10 ** 6 - 10 ** 4)))
    assert abs(draws.mean() - 0.5) <= 3 * 0.5 / 1e3


def test_distinct_streams_uncorrelated():
    a = RandomStream(5, 0).uniforms(10 ** 5)
    b = RandomStream(5, 1).uniforms(10 ** 5)
    assert abs(np.corrcoef(a, b)[0, 1]) < 4 / math.sqrt(1e5)


def test_exponential_rate_checked():
    with pytest.raises(DomainError):
        RandomStream(1, 0).next_exponential(0.0)

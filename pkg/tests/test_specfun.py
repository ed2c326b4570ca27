import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fapchan.errors import DomainError, ParameterError
from fapchan.specfun import BesselOrder, bessel_k, bessel_k_scaled, e1_scaled, expint_ei

mpmath.mp.dps = 40


def k_oracle(nu, x):
    return float(mpmath.besselk(nu, x))


@pytest.mark.parametrize("nu, x, expected", [
    (1.5, 1.0, 0.9221370088957891),
    (0.5, 2.0, math.sqrt(math.pi) / 2 * math.exp(-2.0)),
    (2.5, 1.0, 3.227479531135262),
    (1.0, 1.0, 0.6019072301972346),
])
def test_bessel_k_examples(nu, x, expected):
    assert bessel_k(nu, x) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("twice", range(0, 22))
def test_bessel_k_matches_mpmath_over_range(twice):
    xs = np.logspace(-8, math.log10(700), 60)
    got = bessel_k_scaled(BesselOrder(twice), xs)
    want = np.array([float(mpmath.besselk(twice / 2, x) * mpmath.exp(x)) for x in xs])
    assert np.max(np.abs(got / want - 1)) < 1e-10


def test_small_argument_limit_of_k1():
    x = np.array([1e-8, 1e-6, 1e-4])
    assert np.allclose(x * bessel_k(1, x), 1.0, rtol=1e-7, atol=0)


def test_k32_elementary_form():
    x = np.logspace(-4, 2, 200)
    ref = math.sqrt(math.pi / 2) * np.exp(-x) * (1 + x) / x ** 1.5
    assert np.max(np.abs(bessel_k(1.5, x) / ref - 1)) <= 1e-14


@pytest.mark.parametrize("nu", [1.5, 2.5, 4.5, 9.5])
def test_recurrence_self_consistency(nu):
    x = np.logspace(-2, math.log10(50), 80)
    lhs = bessel_k(nu + 1, x)
    rhs = bessel_k(nu - 1, x) + (2 * nu / x) * bessel_k(nu, x)
    assert np.max(np.abs(lhs / rhs - 1)) <= 1e-13


@pytest.mark.parametrize("nu", [0, 0.5, 1, 1.5, 3, 10.5])
def test_bessel_k_decreasing(nu):
    x = np.logspace(-3, 2.5, 400)
    vals = bessel_k(nu, x)
    assert np.all(np.diff(vals) < 0)


def test_underflow_flag():
    val, flag = bessel_k(1.5, 800.0, return_underflow=True)
    assert val == 0.0 and flag
    val, flag = bessel_k(1.5, 10.0, return_underflow=True)
    assert val > 0 and not flag


@pytest.mark.parametrize("bad", [0.0, -1.0, np.nan, np.inf])
def test_bessel_k_domain(bad):
    with pytest.raises(DomainError):
        bessel_k(1.5, bad)


def test_bessel_order_validation():
    with pytest.raises(ParameterError):
        BesselOrder(-1)
    with pytest.raises(ParameterError):
        BesselOrder.from_nu(0.3)
    assert BesselOrder.for_dimension(2).nu == 1.5
    assert BesselOrder(3).is_half_integer


@pytest.mark.parametrize("x, expected", [(-1.0, -0.21938393439552027), (-2.0, -0.04890051070806112)])
def test_ei_examples(x, expected):
    assert expint_ei(x) == pytest.approx(expected, rel=1e-12)


def test_ei_matches_mpmath():
    xs = -np.logspace(-6, 2.8, 300)
    got = expint_ei(xs)
    want = np.array([float(mpmath.ei(x)) for x in xs])
    assert np.max(np.abs(got / want - 1)) <= 1e-12


def test_ei_limits():
    assert expint_ei(-np.inf) == 0.0
    assert expint_ei(-800.0) <= 0.0
    with pytest.raises(DomainError):
        expint_ei(0.0)
    with pytest.raises(DomainError):
        expint_ei(1.0)


@given(st.floats(min_value=-700, max_value=-1e-6), st.floats(min_value=1e-3, max_value=10))
def test_ei_negative_and_decreasing(x, dx):
    # Ei'(x) = e^x / x < 0 on the negative axis
    a = expint_ei(x)
    assert a < 0
    if x + dx < 0:
        assert expint_ei(x + dx) < a


@pytest.mark.parametrize("x", [0.5, 1.0, 3.0])
def test_scaled_e1_derivative(x):
    # d/dx [e^x E1(x)] = e^x E1(x) - 1/x
    h = 1e-5
    fd = (e1_scaled(x + h) - e1_scaled(x - h)) / (2 * h)
    assert fd == pytest.approx(e1_scaled(x) - 1 / x, abs=1e-6)


@settings(max_examples=200)
@given(st.floats(min_value=1e-6, max_value=600))
def test_scaled_k_never_underflows(x):
    val = bessel_k_scaled(1.5, x)
    assert np.isfinite(val) and val > 0

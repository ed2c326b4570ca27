import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from fapchan.acceptance import _fd_gradient, _fd_hessian
from fapchan.channel import VdfapParams, vdfap_pdf
from fapchan.errors import DimensionError, StabilityError
from fapchan.spectral import (convolve_params, vdfap_cf, vdfap_cf_gradient, vdfap_cf_hessian,
                              vdfap_moments)
from fapchan.validate import cf_by_quadrature, second_moment_quadrature

P = VdfapParams(-1.0, 1.0, 2)
drift = st.floats(0.05, 5.0).map(lambda x: -x)
dist = st.floats(0.05, 5.0)


def test_cf_examples():
    assert vdfap_cf([0.0, 0.0], P) == 1.0
    assert vdfap_cf([math.sqrt(3), 0.0], P) == pytest.approx(math.exp(-1), rel=1e-15)
    # Cauchy limit: exp(-lam |w|)
    tiny = VdfapParams(-1e-12, 1.0, 2)
    assert vdfap_cf([1.0, 0.0], tiny) == pytest.approx(math.exp(-1), rel=1e-10)


def test_gradient_examples():
    assert np.all(vdfap_cf_gradient([0.0, 0.0], P) == 0)
    g = vdfap_cf_gradient([math.sqrt(3), 0.0], P)
    assert g == pytest.approx([-math.exp(-1) / 2 * math.sqrt(3), 0.0], abs=1e-15)
    assert g[0] == pytest.approx(-0.3186, abs=1e-4)


def test_hessian_at_origin():
    h = vdfap_cf_hessian([0.0, 0.0], P)
    assert np.allclose(h, -np.eye(2))
    h3 = vdfap_cf_hessian(np.zeros(3), VdfapParams(-2.0, 3.0, 3))
    assert np.allclose(h3, -1.5 * np.eye(3))


@settings(max_examples=60, deadline=None)
# |u| >= 0.25 keeps the fourth derivative, and with it the FD truncation error, moderate
@given(st.floats(0.25, 5.0).map(lambda x: -x), dist, st.integers(1, 3), st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_gradient_and_hessian_match_finite_differences(u, lam, d, w):
    p = VdfapParams(u, lam, d)
    w = np.array(w[:d])
    fd_g = _fd_gradient(lambda x: vdfap_cf(x, p), w)
    assert np.max(np.abs(vdfap_cf_gradient(w, p) - fd_g)) < 1e-6
    hess = vdfap_cf_hessian(w, p)
    assert np.allclose(hess, hess.T, atol=0, rtol=0)
    fd_h = _fd_hessian(lambda x: vdfap_cf(x, p), w)
    assert np.max(np.abs(hess - fd_h)) < 1e-5 * max(1.0, np.max(np.abs(hess)))


def test_vectorized_cf():
    w = np.random.default_rng(0).normal(size=(5, 4, 2))
    assert vdfap_cf(w, P).shape == (5, 4)
    assert vdfap_cf_gradient(w, P).shape == (5, 4, 2)
    assert vdfap_cf_hessian(w, P).shape == (5, 4, 2, 2)


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        vdfap_cf([1.0, 2.0, 3.0], P)
    with pytest.raises(DimensionError):
        vdfap_cf_hessian([1.0], P)


@settings(max_examples=100)
@given(drift, dist, st.floats(1e-3, 50))
def test_cf_bounded_and_decreasing(u, lam, r):
    p = VdfapParams(u, lam, 2)
    a = vdfap_cf([r, 0.0], p)
    b = vdfap_cf([r * 1.5, 0.0], p)
    assert 0 < b < a < 1


@pytest.mark.parametrize("u, lam, d, corr", [(-1.0, 1.0, 2, 1.0), (-2.0, 3.0, 1, 1.5), (-0.5, 0.2, 3, 0.4)])
def test_moments(u, lam, d, corr):
    m = vdfap_moments(VdfapParams(u, lam, d))
    assert np.all(m.mean == 0)
    assert np.allclose(m.correlation, corr * np.eye(d), rtol=1e-14)
    assert m.second_moment == pytest.approx(corr * d, rel=1e-14)


@pytest.mark.parametrize("u, lam, d", [(-1.0, 1.0, 2), (-2.0, 3.0, 1), (-0.3, 0.5, 2)])
def test_second_moment_by_quadrature(u, lam, d):
    p = VdfapParams(u, lam, d)
    assert second_moment_quadrature(p) == pytest.approx(vdfap_moments(p).second_moment, rel=1e-3)


@pytest.mark.parametrize("d", [1, 2])
@pytest.mark.parametrize("w", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("u, lam", [(-1.0, 1.0), (-2.0, 0.5)])
def test_fourier_consistency(d, w, u, lam):
    p = VdfapParams(u, lam, d)
    val, trunc = cf_by_quadrature(w, p)
    omega = np.zeros(d)
    omega[0] = w
    assert trunc < 1e-4
    assert val == pytest.approx(vdfap_cf(omega, p), abs=1e-3)


def test_convolve_params():
    a = VdfapParams(-1.0, 1.0)
    b = VdfapParams(-1.0, 2.0)
    assert convolve_params(a, b) == VdfapParams(-1.0, 3.0)
    with pytest.raises(StabilityError):
        convolve_params(a, VdfapParams(-2.0, 1.0))
    with pytest.raises(StabilityError):
        convolve_params(a, VdfapParams(-1.0, 1.0, d=1))


@settings(max_examples=100)
@given(drift, dist, dist, dist, st.lists(st.floats(-5, 5), min_size=2, max_size=2))
def test_semigroup(u, l1, l2, l3, w):
    a, b, c = (VdfapParams(u, lam) for lam in (l1, l2, l3))
    left = convolve_params(convolve_params(a, b), c)
    right = convolve_params(a, convolve_params(b, c))
    assert left.lam == pytest.approx(right.lam, rel=1e-15)
    assert convolve_params(a, b).lam == convolve_params(b, a).lam
    prod = vdfap_cf(w, a) * vdfap_cf(w, b)
    assert prod == pytest.approx(vdfap_cf(w, convolve_params(a, b)), rel=1e-14, abs=1e-300)


def test_uncorrelated_but_dependent():
    p = VdfapParams(-1.0, 1.0, 2)

    def marginal(x):
        return integrate.quad(lambda y: vdfap_pdf([x, y], p), -np.inf, np.inf)[0]

    joint = vdfap_pdf([1.0, 1.0], p)
    assert abs(joint - marginal(1.0) ** 2) > 1e-3
    off = vdfap_moments(p).correlation
    assert off[0, 1] == 0.0

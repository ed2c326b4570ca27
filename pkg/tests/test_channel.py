import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from fapchan.acceptance import explicit_density, _plane_mass
from fapchan.channel import (PlanarChannelParams, SphereQuery, VdfapParams, absorption_mass, cauchy_pdf,
                             fap_logpdf_plane, fap_pdf_line_physical, fap_pdf_plane, sphere_angular_density,
                             vdfap_pdf)
from fapchan.errors import DimensionError, DomainError, ParameterError


def test_vertical_drift_peak():
    p = PlanarChannelParams(2, [0, 0, -1], 1)
    assert fap_pdf_plane([0, 0], p) == pytest.approx(1 / math.pi, rel=1e-12)
    assert vdfap_pdf([0, 0], VdfapParams(-1, 1)) == pytest.approx(1 / math.pi, rel=1e-12)


def test_zero_drift_is_cauchy():
    p = PlanarChannelParams(2, [0, 0, 0], 1)
    assert fap_pdf_plane([0, 0], p) == pytest.approx(1 / (2 * math.pi), rel=1e-14)
    assert fap_pdf_plane(0.0, PlanarChannelParams(1, [0, 0], 1)) == pytest.approx(1 / math.pi, rel=1e-14)
    n = np.array([[0.3, -1.2], [4.0, 2.0]])
    assert np.allclose(fap_pdf_plane(n, p), cauchy_pdf(n, 1, 2), rtol=1e-14)


def test_small_drift_approaches_cauchy():
    n = np.array([[0.5, 0.5], [2.0, -1.0]])
    near = fap_pdf_plane(n, PlanarChannelParams(2, [0, 0, -1e-9], 1.0))
    assert np.allclose(near, cauchy_pdf(n, 1.0, 2), rtol=1e-7)
    # on either side of the switch the two branches agree
    a = fap_pdf_plane([0.1, 0], PlanarChannelParams(2, [0, 0, -0.99e-8], 1.0))
    b = fap_pdf_plane([0.1, 0], PlanarChannelParams(2, [0, 0, -1.01e-8], 1.0))
    assert a == pytest.approx(b, rel=1e-7)


def test_line_receiver_physical_units():
    # v2 = -1680 um/s with D = 840 um^2/s gives u = -1
    val = fap_pdf_line_physical(0.0, 0.0, -1680.0, 840.0, 1.0)
    assert val == pytest.approx(1 / math.pi * special.k1(1.0) * math.e, rel=1e-12)
    assert val == pytest.approx(0.5208037, abs=1e-6)


def test_far_tail_underflows_to_zero():
    p = PlanarChannelParams(2, [0, 0, -1], 1)
    assert fap_pdf_plane([1000.0, 0.0], p) == 0.0
    assert np.isfinite(fap_logpdf_plane([1000.0, 0.0], p))


@settings(max_examples=300, deadline=None)
@given(
    st.lists(st.floats(-3, 3), min_size=3, max_size=3),
    st.floats(0.1, 5),
    st.lists(st.floats(-5, 5), min_size=2, max_size=2),
)
def test_general_matches_explicit_2d(u, lam, n):
    p = PlanarChannelParams(2, u, lam)
    if p.u_norm * math.hypot(math.hypot(*n), lam) < 1e-8:
        return
    assert fap_pdf_plane(n, p) == pytest.approx(float(explicit_density(n, p)), rel=1e-12)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=2, max_size=2), st.floats(0.1, 5), st.floats(-5, 5))
def test_general_matches_explicit_1d(u, lam, n):
    p = PlanarChannelParams(1, u, lam)
    if p.u_norm < 1e-6:
        return
    assert fap_pdf_plane(n, p) == pytest.approx(float(explicit_density(n, p)), rel=1e-12)


@pytest.mark.parametrize("d", [1, 2])
@pytest.mark.parametrize("u_vert, lam", [(-1.0, 1.0), (-0.5, 0.25), (1.0, 1.0), (0.0, 4.0)])
def test_normalization(d, u_vert, lam):
    p = PlanarChannelParams(d, (0.0,) * d + (u_vert,), lam)
    assert _plane_mass(p) == pytest.approx(absorption_mass(p), abs=1e-6)


def test_defective_mass():
    p = PlanarChannelParams(2, [0, 0, 1], 1)
    assert absorption_mass(p) == pytest.approx(math.exp(-2))
    assert absorption_mass(PlanarChannelParams(2, [0, 0, -1], 1)) == 1.0


def test_tilted_mass_in_3d_receiver():
    # d = 3 mass by radial quadrature, drift purely vertical (radial symmetry)
    p = PlanarChannelParams(3, [0, 0, 0, -1.5], 0.7)

    def integrand(r):
        return 4 * math.pi * r * r * fap_pdf_plane([r, 0, 0], p)

    mass = sum(integrate.quad(integrand, a, b, limit=200)[0] for a, b in [(0, 1), (1, 10), (10, 60)])
    assert mass == pytest.approx(1.0, abs=1e-8)


def test_drift_skews_density():
    p = PlanarChannelParams(2, [2, -3, -1], 1)
    ahead = fap_pdf_plane([0.2, -0.3], p)
    behind = fap_pdf_plane([-0.2, 0.3], p)
    assert ahead > behind


def test_vectorized_shapes():
    p = PlanarChannelParams(2, [0, 0, -1], 1)
    grid = np.zeros((4, 5, 2))
    assert fap_pdf_plane(grid, p).shape == (4, 5)
    p1 = PlanarChannelParams(1, [0, -1], 1)
    assert fap_pdf_plane(np.linspace(-1, 1, 7), p1).shape == (7,)


def test_parameter_errors():
    with pytest.raises(ParameterError):
        PlanarChannelParams(2, [0, 0, -1], 0)
    with pytest.raises(DimensionError):
        PlanarChannelParams(2, [0, -1], 1)
    with pytest.raises(ParameterError):
        VdfapParams(0.0, 1.0)
    with pytest.raises(DimensionError):
        fap_pdf_plane([1, 2, 3], PlanarChannelParams(2, [0, 0, -1], 1))
    with pytest.raises(DomainError):
        fap_pdf_plane([np.nan, 0], PlanarChannelParams(2, [0, 0, -1], 1))
    with pytest.raises(ParameterError):
        PlanarChannelParams.from_physical(2, [0, 0, -1], -840, 1)


def test_sphere_kernel_poles():
    north = sphere_angular_density(SphereQuery(1, 2, 0, 0, 0, 0))
    south = sphere_angular_density(SphereQuery(1, 2, 0, 0, math.pi, 0))
    assert north == pytest.approx(3 / (4 * math.pi), rel=1e-12)
    assert south == pytest.approx(3 / (4 * math.pi * 27), rel=1e-12)


@pytest.mark.parametrize("r", [1.5, 2.0, 5.0])
def test_sphere_kernel_total_mass(r):
    def inner(theta0):
        return sphere_angular_density(SphereQuery(1, r, 0.3, 0.1, theta0, 0.1)) * math.sin(theta0)

    # rotate so the source sits at the pole: integrate over angle from the source
    def polar(theta0):
        return sphere_angular_density(SphereQuery(1, r, 0, 0, theta0, 0)) * math.sin(theta0)

    mass = 2 * math.pi * integrate.quad(polar, 0, math.pi)[0]
    assert mass == pytest.approx(1 / r, rel=1e-10)
    normed = 2 * math.pi * integrate.quad(
        lambda t: sphere_angular_density(SphereQuery(1, r, 0, 0, t, 0), normalized=True) * math.sin(t), 0, math.pi)[0]
    assert normed == pytest.approx(1.0, rel=1e-10)
    assert inner(0.3) > inner(2.5)


def test_sphere_source_inside_rejected():
    with pytest.raises(DomainError):
        SphereQuery(1, 0.5, 0, 0, 0, 0)

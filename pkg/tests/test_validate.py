import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fapchan.channel import PlanarChannelParams, VdfapParams, fap_pdf_plane
from fapchan.errors import DomainError, NormalizationError, ParameterError
from fapchan.mcsim import DensityGrid, FapSampleSet, GridAxis, SimConfig, sample_vdfap_exact
from fapchan.validate import (compare_density, ks_critical, ks_radial, ks_radial_report, moment_test,
                              radial_cdf, weak_stability_test)

AXES = (GridAxis(-3, 3, 30), GridAxis(-3, 3, 30))


def theory_grid(params, M=10_000):
    probe = DensityGrid(AXES, np.zeros((30, 30)), M=M)
    return DensityGrid(AXES, fap_pdf_plane(probe.centers(), params), M=M)


def test_identical_grid_has_zero_error():
    p = PlanarChannelParams(2, (0.5, 0.0, -1.0), 1.0)
    rep = compare_density(theory_grid(p), p)
    assert rep.max_abs_err == 0.0 and rep.tv_distance == 0.0
    assert rep.passed
    assert rep.thresholds["max_abs_err"] == pytest.approx(0.05)
    assert rep.details["empirical_mode"] == rep.details["theory_mode"]


def test_wrong_lambda_fails():
    truth = PlanarChannelParams(2, (0.0, 0.0, -1.0), 1.0)
    wrong = PlanarChannelParams(2, (0.0, 0.0, -1.0), 1.5)
    rep = compare_density(theory_grid(truth, M=100_000), wrong)
    assert rep.passed is False
    assert rep.max_abs_err > rep.thresholds["max_abs_err"]


def test_compare_density_errors():
    p = PlanarChannelParams(2, (0.0, 0.0, -1.0), 1.0)
    g = theory_grid(p)
    rel = DensityGrid(AXES, g.values, normalization="relative-frequency", M=10)
    with pytest.raises(NormalizationError):
        compare_density(rel, p)
    with pytest.raises(ParameterError):
        compare_density(DensityGrid(AXES, g.values), p)
    with pytest.raises(ParameterError):
        compare_density(g, PlanarChannelParams(1, (0.0, -1.0), 1.0))


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 5).map(lambda x: -x), st.floats(0.1, 5), st.sampled_from([1, 2, 3]))
def test_radial_cdf_limits(u, lam, d):
    p = VdfapParams(u, lam, d)
    r = np.array([0.0, lam, 10 * lam, lam + 60 / -u])
    F = radial_cdf(r, p)
    assert F[0] == 0.0
    assert np.all(np.diff(F) >= 0)
    assert F[-1] == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("u, lam", [(-1.0, 1.0), (-0.3, 2.0), (-4.0, 0.5)])
def test_radial_cdf_closed_form_d2(u, lam):
    # for d = 2, P(|N| <= r) = 1 - lam e^{|u|(lam - rho)} / rho with rho = sqrt(lam^2 + r^2)
    p = VdfapParams(u, lam, 2)
    r = np.linspace(0, 8 * lam, 41)
    rho = np.hypot(lam, r)
    exact = 1 - lam * np.exp(-u * (lam - rho)) / rho
    assert np.allclose(radial_cdf(r, p), exact, atol=1e-12)


def test_radial_cdf_rejects_negative():
    with pytest.raises(DomainError):
        radial_cdf([-1.0], VdfapParams(-1.0, 1.0))


def test_ks_exact_samples_pass_and_wrong_params_fail():
    p = VdfapParams(-1.0, 1.0, 2)
    s = sample_vdfap_exact(p, 5000, seed=4)
    assert ks_radial_report(s, p).passed
    bad = ks_radial_report(s, VdfapParams(-1.0, 1.3, 2))
    assert bad.passed is False
    assert bad.ks_statistic > bad.thresholds["ks_critical"]


def test_ks_low_power():
    p = VdfapParams(-1.0, 1.0, 2)
    rep = ks_radial_report(sample_vdfap_exact(p, 1, seed=4), p)
    assert rep.passed is None and rep.low_power
    empty = FapSampleSet(np.zeros((0, 2)), 0, 0, None, 0.0)
    with pytest.raises(ParameterError):
        ks_radial(empty, p)


def test_ks_critical():
    assert ks_critical(100, 0.05) == pytest.approx(0.1358, abs=1e-4)


def test_weak_stability():
    rep = weak_stability_test(-1.0, 1.0, 2.0, 2, 4000, seed=5)
    assert rep.passed
    assert rep.details["lambda"] == 3.0


def test_weak_stability_fault():
    rep = weak_stability_test(-2.0, 1.0, 2.0, 2, 4000, seed=5, u2=-1.0, reference_u=-1.5)
    assert rep.passed is False


def test_moment_test_pass_and_shift():
    p = VdfapParams(-1.0, 1.0, 2)
    s = sample_vdfap_exact(p, 20_000, seed=6)
    assert moment_test(s, p).passed
    shifted = FapSampleSet(s.samples + [0.1, 0.0], s.absorbed, 0, p, 0.0)
    assert moment_test(shifted, p).passed is False
    assert moment_test(s, VdfapParams(-1.0, 1.2, 2)).passed is False


def test_moment_test_refuses_zero_drift():
    cfg = SimConfig(3, 0.5, 1e-3, 1.0, 10, 0, u=(0.0, 0.0, 0.0))
    s = FapSampleSet(np.zeros((10, 2)), 10, 0, cfg, 0.0)
    with pytest.raises(DomainError):
        moment_test(s, VdfapParams(-1.0, 1.0, 2))
    with pytest.raises(DomainError):
        moment_test(s, PlanarChannelParams(2, (0.0, 0.0, 0.0), 1.0))


def test_report_to_dict():
    p = PlanarChannelParams(2, (0.0, 0.0, -1.0), 1.0)
    d = compare_density(theory_grid(p), p).to_dict()
    assert set(d) >= {"max_abs_err", "rmse", "tv_distance", "ks_statistic", "passed", "thresholds"}
    assert math.isfinite(d["rmse"])


def test_weak_stability_vanishing_second_summand():
    rep = weak_stability_test(-1.0, 1.0, 1e-9, 2, 4000, seed=8)
    assert rep.passed

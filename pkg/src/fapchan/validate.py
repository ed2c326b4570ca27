"""Theory-versus-simulation comparisons with explicit, configurable thresholds."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate, special

from .channel import PlanarChannelParams, VdfapParams, fap_pdf_plane, vdfap_radial_logpdf
from .errors import DomainError, NormalizationError, ParameterError
from .mcsim import DensityGrid, FapSampleSet, SimConfig, sample_vdfap_exact

DEFAULT_K = 5.0
DEFAULT_ALPHA = 0.01
MIN_KS_SAMPLES = 50
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


@dataclass
class FitReport:
    """Metrics plus verdict; ``passed`` is None when the sample is too small to judge."""

    max_abs_err: float = 0.0
    rmse: float = 0.0
    tv_distance: float = 0.0
    ks_statistic: float = 0.0
    passed: Optional[bool] = None
    thresholds: dict = field(default_factory=dict)
    low_power: bool = False
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def compare_density(empirical: DensityGrid, params: PlanarChannelParams, k: float = DEFAULT_K,
                    M: Optional[int] = None) -> FitReport:
    """Grid error between a density histogram and ``fap_pdf_plane`` at the cell centers.

    Passes iff ``max_abs_err <= k / sqrt(M)``; ``M`` defaults to the grid's own count.
    Total variation is half the L1 distance over the grid cells.
    """
    if empirical.normalization != "density":
        raise NormalizationError("compare_density needs a grid with density normalization")
    if empirical.d != params.d:
        raise ParameterError(f"grid has d={empirical.d}, params have d={params.d}")
    M = empirical.M if M is None else M
    if M is None or M <= 0:
        raise ParameterError("compare_density needs a positive trajectory count M")
    theory = fap_pdf_plane(empirical.centers(), params)
    diff = np.asarray(empirical.values) - theory
    max_abs = float(np.max(np.abs(diff)))
    threshold = k / math.sqrt(M)
    peak_emp = np.unravel_index(int(np.argmax(empirical.values)), empirical.values.shape)
    peak_th = np.unravel_index(int(np.argmax(theory)), theory.shape)
    centers = empirical.centers()
    return FitReport(
        max_abs_err=max_abs,
        rmse=float(np.sqrt(np.mean(diff * diff))),
        tv_distance=float(0.5 * np.sum(np.abs(diff)) * empirical.cell_volume),
        ks_statistic=0.0,
        passed=bool(max_abs <= threshold),
        thresholds={"k": k, "M": int(M), "max_abs_err": threshold},
        details={
            "empirical_mode": centers[peak_emp].tolist(),
            "theory_mode": centers[peak_th].tolist(),
            "out_of_grid": empirical.out_of_grid,
        },
    )


def _surface(d: int) -> float:
    """Area of the unit sphere in R^d (2 for d = 1, 2 pi for d = 2)."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def radial_cdf(r, params: VdfapParams) -> np.ndarray:
    """``P(|N| <= r)`` by Gauss-Legendre quadrature of the radial density.

    The points are sorted and the integral is accumulated piece by piece, with
    extra breakpoints every ``lam / 4`` so no piece is long compared to the
    density's scale.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or not np.all(np.isfinite(r)):
        raise DomainError("radii must be finite and >= 0")
    flat = r.ravel()
    if flat.size == 0:
        return np.zeros_like(r)
    top = float(flat.max())
    step = params.lam / 4.0
    extra = np.arange(0.0, top, step) if top > 0 else np.zeros(1)
    knots = np.unique(np.concatenate([[0.0], extra, flat]))
    lo, hi = knots[:-1], knots[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    t = mid[:, None] + half[:, None] * _GL_NODES
    d = params.d
    vals = t ** (d - 1) * np.exp(vdfap_radial_logpdf(t, params))
    pieces = half * (vals @ _GL_WEIGHTS)
    cdf = np.concatenate([[0.0], np.cumsum(pieces)]) * _surface(d)
    out = cdf[np.searchsorted(knots, flat)]
    return np.minimum(out, 1.0).reshape(r.shape)


def ks_critical(M: int, alpha: float = DEFAULT_ALPHA) -> float:
    """Asymptotic one-sample KS critical value ``sqrt(-ln(alpha/2)/2) / sqrt(M)``."""
    return math.sqrt(-math.log(alpha / 2.0) / 2.0) / math.sqrt(M)


def ks_radial(samples: FapSampleSet, params: VdfapParams) -> float:
    """One-sample KS statistic of the sample radii against the VDFAP radial CDF."""
    if samples.absorbed == 0:
        raise ParameterError("ks_radial needs at least one sample")
    if samples.d != params.d:
        raise ParameterError(f"samples have d={samples.d}, params have d={params.d}")
    radii = np.sort(np.linalg.norm(samples.samples, axis=1))
    n = radii.size
    F = radial_cdf(radii, params)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n), 0.0))


def ks_radial_report(samples: FapSampleSet, params: VdfapParams, alpha: float = DEFAULT_ALPHA) -> FitReport:
    """KS statistic with verdict at level ``alpha``; below 50 samples no verdict is given."""
    stat = ks_radial(samples, params)
    n = samples.absorbed
    crit = ks_critical(n, alpha)
    low = n < MIN_KS_SAMPLES
    return FitReport(
        ks_statistic=stat,
        passed=None if low else bool(stat <= crit),
        thresholds={"alpha": alpha, "ks_critical": crit, "n": n},
        low_power=low,
    )


def weak_stability_test(u: float, lam1: float, lam2: float, d: int, M: int, seed: int,
                        u2: Optional[float] = None, reference_u: Optional[float] = None,
                        alpha: float = DEFAULT_ALPHA) -> FitReport:
    """Is ``N1 + N2`` distributed as VDFAP(u, lam1 + lam2)?

    ``N1 ~ VDFAP(u, lam1)`` and ``N2 ~ VDFAP(u2, lam2)`` (``u2`` defaults to ``u``)
    are drawn independently; the sum is KS-tested against
    VDFAP(``reference_u``, lam1 + lam2) with ``reference_u`` defaulting to ``u``.
    The two optional drifts exist to run the mismatched-drift fault case.
    """
    u2 = u if u2 is None else u2
    ref = u if reference_u is None else reference_u
    p1 = VdfapParams(u, lam1, d)
    p2 = VdfapParams(u2, lam2, d)
    target = VdfapParams(ref, p1.lam + p2.lam, d)
    n1 = sample_vdfap_exact(p1, M, seed, stream=1)
    n2 = sample_vdfap_exact(p2, M, seed, stream=2)
    total = FapSampleSet(n1.samples + n2.samples, M, 0, config_echo=target, wall_time=n1.wall_time + n2.wall_time)
    report = ks_radial_report(total, target, alpha)
    report.details = {"u1": u, "u2": u2, "reference_u": ref, "lambda": target.lam}
    return report


def moment_test(samples: FapSampleSet, params: VdfapParams, z_max: float = 3.0) -> FitReport:
    """z-tests of each coordinate mean against 0 and of mean ``|N|^2`` against ``lam d / |u|``."""
    if not isinstance(params, VdfapParams):
        raise DomainError("moment_test needs VdfapParams; without vertical drift the second moment is infinite")
    echo = samples.config_echo
    if isinstance(echo, SimConfig) and echo.normalized_drift[-1] >= 0:
        raise DomainError("samples come from a run without drift towards the receiver; second moment is infinite")
    n = samples.absorbed
    if n < 2:
        raise ParameterError("moment_test needs at least two samples")
    x = samples.samples
    z_mean = x.mean(axis=0) / (x.std(axis=0, ddof=1) / math.sqrt(n))
    sq = np.sum(x * x, axis=1)
    target = params.lam * params.d / params.abs_u
    z_sq = (sq.mean() - target) / (sq.std(ddof=1) / math.sqrt(n))
    worst = float(max(np.max(np.abs(z_mean)), abs(z_sq)))
    return FitReport(
        passed=bool(worst < z_max),
        thresholds={"z_max": z_max},
        details={"z_mean": z_mean.tolist(), "z_second_moment": float(z_sq),
                 "second_moment": float(sq.mean()), "expected_second_moment": target},
    )


def cf_by_quadrature(omega_norm: float, params: VdfapParams, n_sd: float = 12.0) -> tuple[float, float]:
    """Fourier transform of ``vdfap_pdf`` at ``|omega|`` by radial quadrature.

    d = 1 uses a cosine-weighted rule, d = 2 the Hankel form ``2 pi int r f(r) J0(w r) dr``.
    The range is cut at ``n_sd`` standard deviations, ``n_sd sqrt(lam / |u|)``;
    returns ``(value, truncation)`` where ``truncation`` is the probability mass
    beyond the cut, which bounds the error from cutting.
    """
    d = params.d
    if d not in (1, 2):
        raise ParameterError(f"cf_by_quadrature supports d in {{1, 2}}, got d={d}")
    R = n_sd * math.sqrt(params.lam / params.abs_u)

    def f(r):
        return math.exp(vdfap_radial_logpdf(r, params))

    w = float(omega_norm)
    if d == 1:
        if w == 0.0:
            val = 2.0 * integrate.quad(f, 0.0, R, limit=400, epsabs=1e-12)[0]
        else:
            val = 2.0 * integrate.quad(f, 0.0, R, weight="cos", wvar=w, limit=400, epsabs=1e-12)[0]
    else:
        pts = np.arange(1, int(R / params.lam) + 1) * params.lam
        val = 2.0 * math.pi * integrate.quad(lambda r: r * f(r) * special.j0(w * r), 0.0, R,
                                             points=pts[pts < R], limit=400, epsabs=1e-12)[0]
    tail = 1.0 - float(radial_cdf(np.array([R]), params)[0])
    return val, max(tail, 0.0)


def second_moment_quadrature(params: VdfapParams) -> float:
    """``E|N|^2 = S_{d-1} int_0^inf r^{d+1} f(r) dr`` by adaptive quadrature."""
    d = params.d

    def h(r):
        return r ** (d + 1) * math.exp(vdfap_radial_logpdf(r, params))

    scale = params.lam / params.abs_u
    edges = [0.0, params.lam] + [params.lam + scale * 2.0 ** k for k in range(0, 12)]
    edges = sorted(set(edges))
    total = sum(integrate.quad(h, a, b, limit=200, epsabs=0.0, epsrel=1e-12)[0] for a, b in zip(edges[:-1], edges[1:]))
    total += integrate.quad(h, edges[-1], np.inf, limit=200)[0]
    return _surface(d) * total

"""Closed-form first-arrival-position (FAP) densities.

Geometry: the transmitter sits at height ``lam`` above an absorbing hyperplane
receiver in ``D = d + 1`` dimensions.  A molecule drifts with normalized drift
``u = v / sigma^2`` (``sigma^2 = 2 D_coef``) and the FAP noise ``n`` is its
d-dimensional landing offset.  For arbitrary drift

    f(n) = 2 lam ||u||^((d+1)/2) / (2 pi)^((d+1)/2) * exp(u_par . n - u_D lam)
           * K_{(d+1)/2}(||u|| rho) / rho^((d+1)/2),     rho = sqrt(|n|^2 + lam^2)

which degenerates to the multivariate Cauchy law as ``u -> 0``.  Densities are
evaluated in log space so far tails underflow gracefully instead of producing
``0 * inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError, ParameterError
from .specfun import BesselOrder, bessel_k_scaled

# Below this value of ||u|| rho the Bessel form is replaced by the Cauchy limit.
ZERO_DRIFT_SWITCH = 1e-8


def _as_drift(u, d: int) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(u, dtype=float))
    if arr.ndim != 1:
        raise DimensionError(f"drift must be a vector, got shape {arr.shape}")
    if arr.size != d + 1:
        raise DimensionError(f"drift for d={d} needs {d + 1} components, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("drift components must be finite")
    return arr


def _check_d(d) -> int:
    if isinstance(d, bool) or not isinstance(d, (int, np.integer)) or d < 1:
        raise ParameterError(f"d must be a positive integer, got {d!r}")
    return int(d)


def _check_lam(lam) -> float:
    lam = float(lam)
    if not math.isfinite(lam) or lam <= 0:
        raise ParameterError(f"lambda must be finite and > 0, got {lam}")
    return lam


@dataclass(frozen=True)
class PlanarChannelParams:
    """Planar receiver with arbitrary drift.

    ``u`` has ``d + 1`` entries, the last one being the component normal to the
    receiver (negative = towards it).  Units: ``u`` in 1/um, ``lam`` in um.
    """

    d: int
    u: tuple
    lam: float

    def __post_init__(self):
        d = _check_d(self.d)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "u", tuple(float(c) for c in _as_drift(self.u, d)))
        object.__setattr__(self, "lam", _check_lam(self.lam))

    @property
    def u_vec(self) -> np.ndarray:
        return np.asarray(self.u, dtype=float)

    @property
    def u_par(self) -> np.ndarray:
        return self.u_vec[:-1]

    @property
    def u_vert(self) -> float:
        return self.u[-1]

    @property
    def u_norm(self) -> float:
        return float(np.linalg.norm(self.u_vec))

    @classmethod
    def from_physical(cls, d: int, v, D_coef: float, lam: float) -> "PlanarChannelParams":
        """Build from drift velocity ``v`` (um/s) and diffusion coefficient (um^2/s)."""
        D_coef = float(D_coef)
        if not math.isfinite(D_coef) or D_coef <= 0:
            raise ParameterError(f"D_coef must be > 0, got {D_coef}")
        v = _as_drift(v, _check_d(d))
        return cls(d, tuple(v / (2.0 * D_coef)), lam)


@dataclass(frozen=True)
class VdfapParams:
    """Vertically drifted FAP law: ``u_par = 0``, vertical drift ``u < 0`` towards the receiver."""

    u: float
    lam: float
    d: int = 2

    def __post_init__(self):
        u = float(self.u)
        if not math.isfinite(u) or u >= 0:
            raise ParameterError(f"VDFAP needs a finite drift u < 0, got {u}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "lam", _check_lam(self.lam))
        object.__setattr__(self, "d", _check_d(self.d))

    @property
    def abs_u(self) -> float:
        return -self.u

    def planar(self) -> PlanarChannelParams:
        return PlanarChannelParams(self.d, (0.0,) * self.d + (self.u,), self.lam)


@dataclass(frozen=True)
class SphereQuery:
    """Source at ``(r, theta, phi)`` outside a sphere of radius ``R``; evaluation at ``(theta0, phi0)``."""

    R: float
    r: float
    theta: float
    phi: float
    theta0: float
    phi0: float

    def __post_init__(self):
        if not (math.isfinite(self.R) and self.R > 0):
            raise ParameterError(f"sphere radius must be > 0, got {self.R}")
        if not (math.isfinite(self.r) and self.r > self.R):
            raise DomainError(f"source must lie outside the sphere (r > R), got r={self.r}, R={self.R}")


def _points(n, d: int) -> np.ndarray:
    pts = np.asarray(n, dtype=float)
    if d == 1 and (pts.ndim == 0 or pts.shape[-1] != 1):
        pts = pts[..., None]
    if pts.ndim == 0 or pts.shape[-1] != d:
        raise DimensionError(f"points must have trailing dimension {d}, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise DomainError("evaluation points must be finite")
    return pts


def _squeeze(out: np.ndarray, n, d: int):
    shape = np.shape(n)
    if d == 1 and (len(shape) == 0 or shape[-1] != 1):
        out = out.reshape(shape)
    return float(out) if np.ndim(out) == 0 else out


def _log_cauchy(r2: np.ndarray, lam: float, d: int) -> np.ndarray:
    k = 0.5 * (d + 1)
    return math.lgamma(k) - k * math.log(math.pi) + math.log(lam) - k * np.log(r2 + lam * lam)


def fap_logpdf_plane(n, params: PlanarChannelParams):
    """Natural log of :func:`fap_pdf_plane` (finite far into the tails)."""
    d, lam = params.d, params.lam
    pts = _points(n, d)
    r2 = np.sum(pts * pts, axis=-1)
    rho = np.sqrt(r2 + lam * lam)
    s = params.u_norm
    arg = s * rho
    k = 0.5 * (d + 1)
    out = np.array(_log_cauchy(r2, lam, d), dtype=float)
    bessel = arg >= ZERO_DRIFT_SWITCH
    if np.any(bessel):
        a = arg[bessel]
        tilt = pts[bessel] @ params.u_par - params.u_vert * lam
        out[bessel] = (
            math.log(2.0 * lam)
            + k * math.log(s / (2.0 * math.pi))
            + tilt
            - a
            + np.log(bessel_k_scaled(BesselOrder.for_dimension(d), a))
            - k * np.log(rho[bessel])
        )
    return _squeeze(out, n, d)


def fap_pdf_plane(n, params: PlanarChannelParams):
    """FAP density (um^-d) on a planar receiver for arbitrary drift.

    ``n`` is a d-vector or an array of shape ``(..., d)`` (for ``d = 1`` a plain
    scalar/array is accepted too).  When ``||u|| rho < 1e-8`` the zero-drift
    Cauchy form is used.  For ``u_D > 0`` the law is defective: it integrates to
    :func:`absorption_mass`, not 1.
    """
    out = np.exp(fap_logpdf_plane(n, params))
    return float(out) if np.ndim(out) == 0 else out


def fap_pdf_line_physical(xi, x1, v2: float, D_coef: float, lam: float):
    """Line receiver (d = 1) with vertical drift only, in physical units.

    ``v2`` is the vertical drift velocity (um/s), ``D_coef`` the diffusion coefficient
    (um^2/s); converted once via ``u = v / (2 D_coef)``.
    """
    params = PlanarChannelParams.from_physical(1, [0.0, v2], D_coef, lam)
    return fap_pdf_plane(np.asarray(xi, dtype=float) - np.asarray(x1, dtype=float), params)


def vdfap_logpdf(n, params: VdfapParams):
    return fap_logpdf_plane(n, params.planar())


def vdfap_pdf(n, params: VdfapParams):
    """VDFAP density ``2 lam (|u|/sqrt(2 pi))^(d+1) e^{lam |u|} K_{(d+1)/2}(|u| rho) / (|u| rho)^((d+1)/2)``."""
    return fap_pdf_plane(n, params.planar())


def vdfap_radial_logpdf(r, params: VdfapParams):
    """Log density as a function of ``|n|`` (the VDFAP law is radially symmetric)."""
    r = np.asarray(r, dtype=float)
    pts = np.zeros(r.shape + (params.d,))
    pts[..., 0] = r
    out = fap_logpdf_plane(pts, params.planar())
    return float(out) if np.ndim(out) == 0 else out


def cauchy_pdf(n, lam: float, d: int):
    """Multivariate Cauchy density with location 0 and scale ``lam``."""
    d = _check_d(d)
    lam = _check_lam(lam)
    pts = _points(n, d)
    out = np.exp(_log_cauchy(np.sum(pts * pts, axis=-1), lam, d))
    return _squeeze(np.asarray(out), n, d)


def sphere_angular_density(q: SphereQuery, normalized: bool = False) -> float:
    """Hitting-position kernel on a sphere for a zero-drift source outside it.

    Raw kernel: ``(R / 4 pi) (r^2 - R^2) / (r^2 - 2 r R kappa + R^2)^(3/2)`` with
    ``kappa`` the cosine of the angle between source and evaluation directions.
    Integrated against ``sin(theta0) dtheta0 dphi0`` it gives the hitting
    probability ``R / r``.  With ``normalized=True`` it is divided by that mass,
    giving the density conditional on absorption.
    """
    kappa = (math.cos(q.theta) * math.cos(q.theta0)
             + math.sin(q.theta) * math.sin(q.theta0) * math.cos(q.phi - q.phi0))
    R, r = q.R, q.r
    value = (R / (4.0 * math.pi)) * (r * r - R * R) / (r * r - 2.0 * r * R * kappa + R * R) ** 1.5
    if normalized:
        value /= R / r
    return value


def absorption_mass(params: PlanarChannelParams) -> float:
    """Total mass of the FAP law, ``exp(-2 max(u_D, 0) lam)``.

    Drift pointing away from the receiver lets molecules escape for good.
    """
    return math.exp(-2.0 * max(params.u_vert, 0.0) * params.lam)

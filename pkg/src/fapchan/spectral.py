"""Characteristic function of the VDFAP law and what follows from it.

``Phi(w) = exp(-lam (sqrt(|w|^2 + u^2) - |u|))``.  The law is radially symmetric,
so the CF is real.  Moments come from derivatives at ``w = 0``; the product rule
for CFs gives closure under convolution at fixed drift.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import VdfapParams
from .errors import DimensionError, DomainError, StabilityError


@dataclass(frozen=True)
class MomentSummary:
    mean: np.ndarray
    correlation: np.ndarray
    second_moment: float


def _omega(omega, d: int) -> np.ndarray:
    w = np.asarray(omega, dtype=float)
    if d == 1 and (w.ndim == 0 or w.shape[-1] != 1):
        w = w[..., None]
    if w.ndim == 0 or w.shape[-1] != d:
        raise DimensionError(f"omega must have trailing dimension {d}, got shape {np.shape(omega)}")
    if not np.all(np.isfinite(w)):
        raise DomainError("omega must be finite")
    return w


def _root(w: np.ndarray, params: VdfapParams) -> np.ndarray:
    return np.sqrt(np.sum(w * w, axis=-1) + params.u * params.u)


def vdfap_cf(omega, params: VdfapParams):
    """CF of VDFAP(u, lam) at ``omega`` (d-vector or ``(..., d)`` array); values in (0, 1]."""
    w = _omega(omega, params.d)
    root = _root(w, params)
    # root - |u| written to avoid cancellation when |w| << |u|
    w2 = np.sum(w * w, axis=-1)
    out = np.exp(-params.lam * w2 / (root + params.abs_u))
    return float(out) if np.ndim(out) == 0 else out


def vdfap_cf_gradient(omega, params: VdfapParams) -> np.ndarray:
    """``-lam Phi(w) w / sqrt(|w|^2 + u^2)``; zero at the origin."""
    w = _omega(omega, params.d)
    phi = np.asarray(vdfap_cf(w, params))
    root = _root(w, params)
    return (-params.lam * phi / root)[..., None] * w


def vdfap_cf_hessian(omega, params: VdfapParams) -> np.ndarray:
    """Analytic Hessian of the CF; equals ``-(lam / |u|) I`` at the origin."""
    w = _omega(omega, params.d)
    lam = params.lam
    phi = np.asarray(vdfap_cf(w, params))
    root = _root(w, params)
    eye = np.eye(params.d)
    diag = (-lam * phi / root)[..., None, None] * eye
    outer = w[..., :, None] * w[..., None, :]
    rank1 = (lam * phi * (1.0 + lam * root) / root**3)[..., None, None] * outer
    return diag + rank1


def vdfap_moments(params: VdfapParams) -> MomentSummary:
    """Mean 0, correlation ``(lam/|u|) I_d``, second moment ``lam d / |u|``."""
    d = params.d
    origin = np.zeros(d)
    mean = -1j * vdfap_cf_gradient(origin, params)
    corr = -vdfap_cf_hessian(origin, params)
    return MomentSummary(
        mean=np.real(mean),
        correlation=corr,
        second_moment=float(np.trace(corr)),
    )


def convolve_params(a: VdfapParams, b: VdfapParams) -> VdfapParams:
    """Law of ``N_a + N_b`` for independent VDFAP draws sharing drift and dimension.

    Raises :class:`StabilityError` when the drifts or dimensions differ, since the
    sum then leaves the family.
    """
    if a.d != b.d:
        raise StabilityError(f"dimension mismatch: {a.d} vs {b.d}")
    if a.u != b.u:
        raise StabilityError(f"weak stability needs equal drift, got u={a.u} and u={b.u}")
    return VdfapParams(a.u, a.lam + b.lam, a.d)

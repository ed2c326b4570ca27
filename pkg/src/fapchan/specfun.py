"""Modified Bessel functions of the second kind and the exponential integral.

Only the pieces the channel formulas need are provided:

* ``K_nu(x)`` for integer and half-integer ``nu`` and real ``x > 0``.  Half-integer
  orders start from the elementary forms of ``K_1/2`` and ``K_3/2``; integer orders
  start from ``K_0`` and ``K_1``.  Everything above is reached by the upward
  recurrence ``K_{nu+1} = K_{nu-1} + (2 nu / x) K_nu``, which is stable for ``K``.
* ``Ei(x)`` for ``x < 0`` (equivalently ``-E_1(-x)``).

All functions accept scalars or numpy arrays and are pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError, ParameterError

EULER_GAMMA = 0.57721566490153286061

# K_0/K_1 switch from the ascending series to quadrature at this argument.
_SERIES_SPLIT = 2.0
_SERIES_TERMS = 25

# Trapezoid rule for e^x K_nu(x) = int_0^inf exp(-x (cosh t - 1)) cosh(nu t) dt.
# The integrand is cut where the exponent reaches -_TRAP_CUT; the node spacing
# shrinks like 1/sqrt(x) with the integrand's width, so the (exponentially small)
# discretization error stays below double precision for every x >= 2.
_TRAP_CUT = 60.0
_TRAP_NODES = 80
_TRAP_FRAC = np.linspace(0.0, 1.0, _TRAP_NODES)
_TRAP_W = np.ones(_TRAP_NODES)
_TRAP_W[0] = 0.5

# E_1 switches from the power series to the continued fraction above this.
_EI_SPLIT = 1.0
_EI_SERIES_TERMS = 30
_CF_MAXIT = 1000
_CF_EPS = 1e-16
_FPMIN = 1e-300

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class BesselOrder:
    """Order ``nu = twice_order / 2`` of ``K_nu``; integers and half-integers only."""

    twice_order: int

    def __post_init__(self):
        if isinstance(self.twice_order, bool) or not isinstance(self.twice_order, (int, np.integer)):
            raise ParameterError(f"twice_order must be an integer, got {self.twice_order!r}")
        if self.twice_order < 0:
            raise ParameterError(f"twice_order must be non-negative, got {self.twice_order}")

    @property
    def nu(self) -> float:
        return self.twice_order / 2.0

    @property
    def is_half_integer(self) -> bool:
        return self.twice_order % 2 == 1

    @classmethod
    def from_nu(cls, nu: float) -> "BesselOrder":
        twice = 2.0 * float(nu)
        if not np.isfinite(twice) or twice != round(twice):
            raise ParameterError(f"order must be an integer or half-integer, got {nu}")
        return cls(int(round(twice)))

    @classmethod
    def for_dimension(cls, d: int) -> "BesselOrder":
        """Order ``(d + 1) / 2`` used by the d-dimensional FAP density."""
        return cls(int(d) + 1)


def _as_order(order) -> BesselOrder:
    if isinstance(order, BesselOrder):
        return order
    return BesselOrder.from_nu(order)


def _check_positive(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise DomainError("bessel_k requires finite x > 0")
    return x


def _k01_series(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unscaled K_0 and K_1 from the ascending series (small x)."""
    y = 0.25 * x * x
    log_half = np.log(0.5 * x)
    t0 = np.ones_like(x)  # y^k / (k!)^2
    t1 = np.ones_like(x)  # y^k / (k! (k+1)!)
    i0 = np.zeros_like(x)
    s0 = np.zeros_like(x)
    i1 = np.zeros_like(x)
    s1 = np.zeros_like(x)
    harmonic = 0.0
    for k in range(_SERIES_TERMS):
        harmonic_next = harmonic + 1.0 / (k + 1)
        i0 += t0
        s0 += t0 * harmonic
        i1 += t1
        # psi(k+1) + psi(k+2) = -2 gamma + H_k + H_{k+1}
        s1 += t1 * (harmonic + harmonic_next - 2.0 * EULER_GAMMA)
        t0 = t0 * y / ((k + 1.0) ** 2)
        t1 = t1 * y / ((k + 1.0) * (k + 2.0))
        harmonic = harmonic_next
    k0 = -(log_half + EULER_GAMMA) * i0 + s0
    k1 = 1.0 / x + log_half * (0.5 * x * i1) - 0.25 * x * s1
    return k0, k1


def _k01_scaled_quadrature(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """e^x K_0(x) and e^x K_1(x) by the trapezoid rule; accurate for x >= 2."""
    t_max = np.arccosh(1.0 + _TRAP_CUT / x)
    step = t_max / (_TRAP_NODES - 1)
    t = np.multiply.outer(t_max, _TRAP_FRAC)
    damp = np.exp(-x[:, None] * (np.cosh(t) - 1.0)) * _TRAP_W
    k0 = step * damp.sum(axis=1)
    k1 = step * (damp * np.cosh(t)).sum(axis=1)
    return k0, k1


def _seed_scaled(order: BesselOrder, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """e^x K at the two lowest orders of the order's ladder (nu0, nu0 + 1)."""
    if order.is_half_integer:
        k_half = np.sqrt(np.pi / (2.0 * x))
        return k_half, k_half * (1.0 + 1.0 / x)
    k0 = np.empty_like(x)
    k1 = np.empty_like(x)
    small = x < _SERIES_SPLIT
    if np.any(small):
        xs = x[small]
        a, b = _k01_series(xs)
        scale = np.exp(xs)
        k0[small] = a * scale
        k1[small] = b * scale
    if np.any(~small):
        a, b = _k01_scaled_quadrature(x[~small])
        k0[~small] = a
        k1[~small] = b
    return k0, k1


def bessel_k_scaled(order, x: ArrayLike) -> ArrayLike:
    """Exponentially scaled ``e^x K_nu(x)``.

    Never underflows for large ``x``; the density code works with this form so that
    far tails survive in log space.
    """
    order = _as_order(order)
    xa = _check_positive(x)
    flat = np.atleast_1d(xa).ravel()
    lo, hi = _seed_scaled(order, flat)
    nu = 0.5 if order.is_half_integer else 0.0
    if order.twice_order < 2:
        out = lo
    else:
        # Walk lo=K_nu, hi=K_{nu+1} up to the requested order.
        while nu + 1.0 < order.nu:
            lo, hi = hi, lo + (2.0 * (nu + 1.0) / flat) * hi
            nu += 1.0
        out = hi
    out = out.reshape(np.shape(xa))
    return float(out) if np.ndim(xa) == 0 else out


def bessel_k(order, x: ArrayLike, *, return_underflow: bool = False):
    """Modified Bessel function of the second kind ``K_nu(x)``.

    Parameters
    ----------
    order : BesselOrder or float
        Integer or half-integer order.
    x : float or array
        Strictly positive argument.
    return_underflow : bool
        When set, return ``(value, underflow)`` where ``underflow`` marks entries whose
        true value is below the smallest normal double and was flushed to 0.

    Raises
    ------
    DomainError
        If any ``x <= 0`` or is not finite.
    """
    xa = _check_positive(x)
    scaled = np.asarray(bessel_k_scaled(order, xa))
    with np.errstate(under="ignore"):
        value = scaled * np.exp(-xa)
    underflow = value < np.finfo(float).tiny
    value = np.where(underflow, 0.0, value)
    if np.ndim(xa) == 0:
        value = float(value)
        underflow = bool(underflow)
    if return_underflow:
        return value, underflow
    return value


def _e1_series(z: np.ndarray) -> np.ndarray:
    # E_1(z) = -gamma - ln z - sum_{k>=1} (-z)^k / (k k!)
    total = np.zeros_like(z)
    term = np.ones_like(z)
    for k in range(1, _EI_SERIES_TERMS + 1):
        term = term * (-z) / k
        total += term / k
    return -EULER_GAMMA - np.log(z) - total


def _e1_scaled_cf(z: np.ndarray) -> np.ndarray:
    """e^z E_1(z) by the modified Lentz continued fraction (z > 1)."""
    b = z + 1.0
    c = np.full_like(z, 1.0 / _FPMIN)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(z.shape, dtype=bool)
    for i in range(1, _CF_MAXIT + 1):
        a = -float(i * i)
        b = b + 2.0
        d_new = 1.0 / (a * d + b)
        c_new = b + a / c
        delta = c_new * d_new
        d = np.where(active, d_new, d)
        c = np.where(active, c_new, c)
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) >= _CF_EPS
        if not active.any():
            break
    return h


def e1_scaled(z: ArrayLike) -> ArrayLike:
    """``e^z E_1(z)`` for ``z > 0``; equals ``-e^z Ei(-z)`` and stays O(1/z) for large z."""
    za = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(za)) or np.any(za <= 0):
        raise DomainError("e1_scaled requires finite z > 0")
    flat = np.atleast_1d(za).ravel()
    out = np.empty_like(flat)
    small = flat <= _EI_SPLIT
    if np.any(small):
        out[small] = _e1_series(flat[small]) * np.exp(flat[small])
    if np.any(~small):
        out[~small] = _e1_scaled_cf(flat[~small])
    out = out.reshape(za.shape)
    return float(out) if za.ndim == 0 else out


def expint_ei(x: ArrayLike) -> ArrayLike:
    """Exponential integral ``Ei(x) = -int_{-x}^inf e^{-t}/t dt`` on the negative axis.

    Raises
    ------
    DomainError
        For ``x >= 0``; the positive axis is not needed here.
    """
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa) | np.isneginf(xa)) or np.any(xa >= 0):
        raise DomainError("expint_ei is only defined here for x < 0")
    z = -np.atleast_1d(xa).ravel()
    out = np.zeros_like(z)
    finite = np.isfinite(z)
    small = finite & (z <= _EI_SPLIT)
    large = finite & ~small
    if np.any(small):
        out[small] = -_e1_series(z[small])
    if np.any(large):
        with np.errstate(under="ignore"):
            out[large] = -_e1_scaled_cf(z[large]) * np.exp(-z[large])
    # Ei(-inf) = 0 from below
    out[~finite] = -0.0
    out = out.reshape(xa.shape)
    return float(out) if xa.ndim == 0 else out

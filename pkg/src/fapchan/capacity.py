"""Capacity bounds for the additive VDFAP noise channel under ``E||X||^2 <= P``.

Lower bound: feeding VDFAP(u, lam') input gives VDFAP(u, lam + lam') output, so
``C >= sup_{0 < lam' <= |u| P / d} h(lam + lam') - h(lam)``.
Upper bound: the output second moment is ``Q = P + lam d / |u|``, and the Gaussian
maximizes entropy at fixed second moment, so
``C <= (d/2) log(2 pi e Q / d) - h(lam)``.
All internal values are nats; bits are a presentation conversion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import optimize

from .channel import VdfapParams
from .entropy import entropy_quadrature, g, h0, vdfap_entropy_2d
from .errors import FapError, ParameterError
from .specfun import expint_ei

BITS_PER_NAT = math.log2(math.e)
UNITS = ("nats", "bits")


@dataclass(frozen=True)
class CapacityQuery:
    d: int
    u: float
    lam: float
    P: float

    def __post_init__(self):
        if isinstance(self.d, bool) or not isinstance(self.d, (int, np.integer)) or self.d < 1:
            raise ParameterError(f"d must be a positive integer, got {self.d!r}")
        for name, val in (("u", self.u), ("lambda", self.lam), ("P", self.P)):
            if not math.isfinite(float(val)):
                raise ParameterError(f"{name} must be finite, got {val}")
        if self.u >= 0:
            raise ParameterError(f"u must be < 0, got {self.u}")
        if self.lam <= 0:
            raise ParameterError(f"lambda must be > 0, got {self.lam}")
        if self.P <= 0:
            raise ParameterError(f"P must be > 0, got {self.P}")
        object.__setattr__(self, "d", int(self.d))
        for name in ("u", "lam", "P"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def abs_u(self) -> float:
        return -self.u


@dataclass(frozen=True)
class CapacityResult:
    lower: float
    upper: float
    units: str = "nats"

    def to(self, units: str) -> "CapacityResult":
        if units not in UNITS:
            raise ParameterError(f"units must be one of {UNITS}, got {units!r}")
        if units == self.units:
            return self
        f = BITS_PER_NAT if units == "bits" else 1.0 / BITS_PER_NAT
        return CapacityResult(self.lower * f, self.upper * f, units)


def _need_d(q: CapacityQuery, allowed) -> None:
    if q.d not in allowed:
        raise ParameterError(f"d={q.d} not supported here (allowed: {sorted(allowed)})")


def lower_bound_2d(q: CapacityQuery) -> float:
    """``h0(|u|(lam + |u| P / 2)) - h0(|u| lam)`` nats."""
    _need_d(q, {2})
    a = q.abs_u
    return h0(a * (q.lam + a * q.P / 2.0)) - h0(a * q.lam)


def lower_bound_2d_expanded(q: CapacityQuery) -> float:
    """Same bound written out term by term with plain ``Ei`` and exponentials.

    Independent evaluation route for the closed form; valid while ``e^{|u| lam2}``
    stays finite (``|u| lam2 < ~700``).
    """
    _need_d(q, {2})
    a = q.abs_u
    lam2 = q.lam + a * q.P / 2.0

    def bracket(lam):
        s = a * lam
        return s * math.exp(s) * (math.e * expint_ei(-1.0 - s) - 3.0 * expint_ei(-s))

    return (2.0 * math.log(lam2 / q.lam) - math.log((1.0 + a * lam2) / (1.0 + a * q.lam))
            - bracket(lam2) + bracket(q.lam))


def upper_bound_2d(q: CapacityQuery) -> float:
    """``log(P/(2 lam^2) + 1/(lam|u|)) + log(1 + lam|u|) - 2 + lam|u| e^{lam|u|}(e Ei(-1-lam|u|) - 3 Ei(-lam|u|))``."""
    _need_d(q, {2})
    s = q.abs_u * q.lam
    if s < 700.0:
        tail = s * math.exp(s) * (math.e * expint_ei(-1.0 - s) - 3.0 * expint_ei(-s))
    else:
        # e^s overflows; the bracket equals -g(s)
        tail = -g(s)
    return math.log(q.P / (2.0 * q.lam ** 2) + 1.0 / s) + math.log1p(s) - 2.0 + tail


@lru_cache(maxsize=4096)
def _entropy(d: int, u: float, lam: float) -> float:
    if d == 2:
        return vdfap_entropy_2d(u, lam)
    return entropy_quadrature(VdfapParams(u, lam, d))


def lower_bound_general(q: CapacityQuery, rtol: float = 1e-6) -> float:
    """``sup_{0 < lam' <= |u| P / d} h(lam + lam') - h(lam)`` nats, d in {1, 2}.

    For d = 2 the objective is increasing in ``lam'`` so the sup is the endpoint.
    For d = 1 no such monotonicity is available, so a bounded scalar search runs
    over the interval and the better of its optimum and the endpoint is kept.
    """
    _need_d(q, {1, 2})
    hi = q.abs_u * q.P / q.d
    base = _entropy(q.d, q.u, q.lam)
    at_end = _entropy(q.d, q.u, q.lam + hi) - base
    if q.d == 2:
        return at_end
    res = optimize.minimize_scalar(
        lambda lp: -(_entropy(q.d, q.u, q.lam + lp) - base),
        bounds=(0.0, hi),
        method="bounded",
        options={"xatol": rtol * hi},
    )
    return max(at_end, -float(res.fun))


def upper_bound_general(q: CapacityQuery) -> float:
    """``(d/2) log(2 pi e (P/d + lam/|u|)) - h(VDFAP(u, lam))`` nats, d in {1, 2}."""
    _need_d(q, {1, 2})
    second = q.P / q.d + q.lam / q.abs_u
    return 0.5 * q.d * math.log(2.0 * math.pi * math.e * second) - _entropy(q.d, q.u, q.lam)


def capacity_bounds(q: CapacityQuery, units: str = "nats") -> CapacityResult:
    """Both bounds; closed forms for d = 2, general route otherwise."""
    if q.d == 2:
        res = CapacityResult(lower_bound_2d(q), upper_bound_2d(q))
    else:
        res = CapacityResult(lower_bound_general(q), upper_bound_general(q))
    return res.to(units)


@dataclass(frozen=True)
class SweepRow:
    x: float
    lower: float
    upper: float
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def gap(self) -> float:
        return self.upper - self.lower


SWEEP_VARS = ("P", "lambda", "u")


def sweep_points(lo: float, hi: float, steps: int, open_lo: bool) -> np.ndarray:
    """Sample points on ``[lo, hi]``; when ``open_lo`` the first sits half a step above ``lo``
    and the last lands on ``hi``."""
    if steps < 2:
        raise ParameterError(f"steps must be >= 2, got {steps}")
    if not hi > lo:
        raise ParameterError(f"need lo < hi, got [{lo}, {hi}]")
    if open_lo:
        step = (hi - lo) / (steps - 0.5)
        return lo + step * (0.5 + np.arange(steps))
    return np.linspace(lo, hi, steps)


def capacity_sweep(vary: str, lo: float, hi: float, steps: int, fixed: CapacityQuery,
                   units: str = "nats") -> list[SweepRow]:
    """Vary one of ``P``, ``lambda`` or ``u`` with the others taken from ``fixed``.

    For ``u`` the range is given in magnitudes ``|u|``; the drift is ``-x``.
    A sample outside the domain yields a row with ``error`` set and NaN bounds.
    """
    if vary not in SWEEP_VARS:
        raise ParameterError(f"vary must be one of {SWEEP_VARS}, got {vary!r}")
    if units not in UNITS:
        raise ParameterError(f"units must be one of {UNITS}, got {units!r}")
    xs = sweep_points(float(lo), float(hi), int(steps), open_lo=float(lo) == 0.0)
    return [sweep_row(vary, float(x), fixed, units) for x in xs]


def sweep_row(vary: str, x: float, fixed: CapacityQuery, units: str = "nats") -> SweepRow:
    """One sweep sample; domain errors are captured in the row rather than raised."""
    try:
        if vary == "P":
            q = CapacityQuery(fixed.d, fixed.u, fixed.lam, x)
        elif vary == "lambda":
            q = CapacityQuery(fixed.d, fixed.u, x, fixed.P)
        else:
            q = CapacityQuery(fixed.d, -x, fixed.lam, fixed.P)
        res = capacity_bounds(q, units)
        return SweepRow(x, res.lower, res.upper)
    except FapError as exc:
        return SweepRow(x, math.nan, math.nan, str(exc))

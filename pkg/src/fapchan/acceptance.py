"""Acceptance criteria as runnable checks.

Each ``criterion_N`` returns ``(passed, detail)``; :func:`run_all` times them,
applies the runtime budget and prints one line per criterion.  Oracles used
here come from scipy or from plain series, never from the functions under test.
"""

from __future__ import annotations

import contextlib
import io
import math
import os
import shutil
import sys
import tempfile
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate, special

from .capacity import (BITS_PER_NAT, CapacityQuery, capacity_sweep, lower_bound_2d, lower_bound_2d_expanded,
                       upper_bound_2d, upper_bound_general)
from .channel import PlanarChannelParams, VdfapParams, absorption_mass, fap_pdf_plane, vdfap_pdf
from .entropy import entropy_quadrature, entropy_tail_integral, g, h0, h0_derivatives, vdfap_entropy_2d
from .mcsim import GridAxis, SimConfig, build_histogram, sample_vdfap_exact, simulate_fap, WORKERS_ENV
from .specfun import BesselOrder, bessel_k, expint_ei
from .spectral import vdfap_cf, vdfap_cf_gradient, vdfap_cf_hessian, vdfap_moments
from .validate import cf_by_quadrature, compare_density, second_moment_quadrature, weak_stability_test

ACCEPTANCE_SEED = 20240611


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    runtime: float
    budget: float

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"[{verdict}] criterion {self.number:2d} {self.title} ({self.runtime:.1f}s / {self.budget:.0f}s): {self.detail}"


def _rel(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.abs(b)))


def ei_series_oracle(x: float) -> float:
    """``Ei(x) = gamma + ln|x| + sum_k x^k / (k k!)`` summed with fsum until terms vanish."""
    terms = [0.57721566490153286061, math.log(abs(x))]
    term = 1.0
    for k in range(1, 200):
        term *= x / k
        terms.append(term / k)
        if abs(term) < 1e-30:
            break
    return math.fsum(terms)


# ---------------------------------------------------------------- 1


def criterion_1():
    x = np.logspace(-4, 2, 200)
    elementary = math.sqrt(math.pi / 2.0) * np.exp(-x) * (1.0 + x) / x ** 1.5
    err_k = _rel(bessel_k(BesselOrder(3), x), elementary)
    err_ei = max(abs(expint_ei(v) - ei_series_oracle(v)) / abs(ei_series_oracle(v)) for v in (-1.0, -2.0))
    ok = err_k <= 1e-14 and err_ei <= 1e-12
    return ok, f"K_3/2 max rel err {err_k:.2e} (<=1e-14), Ei rel err {err_ei:.2e} (<=1e-12)"


# ---------------------------------------------------------------- 2

_THETA = np.linspace(0.0, 2.0 * math.pi, 256, endpoint=False)


def _plane_mass(params: PlanarChannelParams) -> float:
    """Integral of the density over R^d (d = 1 on the line, d = 2 in polar coordinates)."""
    lam = params.lam
    edges = [0.0] + [lam * 2.0 ** k for k in range(-2, 14)]
    if params.d == 1:
        def f(r):
            return fap_pdf_plane(r, params) + fap_pdf_plane(-r, params)
    else:
        ct, st = np.cos(_THETA), np.sin(_THETA)

        def f(r):
            pts = np.stack([r * ct, r * st], axis=-1)
            return r * 2.0 * math.pi * float(np.mean(fap_pdf_plane(pts, params)))
    total = sum(integrate.quad(f, a, b, limit=200, epsabs=1e-12, epsrel=1e-10)[0]
                for a, b in zip(edges[:-1], edges[1:]))
    total += integrate.quad(f, edges[-1], np.inf, limit=200)[0]
    return total


def normalization_cases():
    for d in (1, 2):
        for lam in (0.25, 1.0, 4.0):
            yield d, (0.0,) * (d + 1), lam
            for s in (0.5, 1.0, 3.0):
                yield d, (0.0,) * d + (-s,), lam
                tilted = np.zeros(d + 1)
                tilted[0], tilted[-1] = 0.6 * s, -0.8 * s
                yield d, tuple(tilted), lam
            yield d, (0.0,) * d + (1.0,), lam


def criterion_2():
    worst = 0.0
    worst_case = None
    for d, u, lam in normalization_cases():
        p = PlanarChannelParams(d, u, lam)
        err = abs(_plane_mass(p) - absorption_mass(p))
        if err > worst:
            worst, worst_case = err, f"d={d}, u={[round(float(c), 6) for c in u]}, lambda={lam:g}"
    return worst <= 1e-4, f"max |mass - absorption_mass| = {worst:.2e} (<=1e-4) at {worst_case}"


# ---------------------------------------------------------------- 3


def explicit_density(n, params: PlanarChannelParams) -> np.ndarray:
    """Dimension-specific closed forms (K_1 for d = 1, elementary for d = 2) via scipy."""
    n = np.asarray(n, dtype=float)
    s = params.u_norm
    lam = params.lam
    pts = n[..., None] if params.d == 1 else n
    rho = np.sqrt(np.sum(pts * pts, axis=-1) + lam * lam)
    tilt = np.exp(pts @ params.u_par - params.u_vert * lam)
    if params.d == 1:
        return s * lam / math.pi * tilt * special.k1(s * rho) / rho
    return lam / (2.0 * math.pi) * tilt * np.exp(-s * rho) * (1.0 + s * rho) / rho ** 3


def criterion_3(seed: int = ACCEPTANCE_SEED):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for d in (1, 2):
        for _ in range(1000):
            u = rng.uniform(-2.0, 2.0, d + 1)
            lam = rng.uniform(0.2, 3.0)
            p = PlanarChannelParams(d, u, lam)
            n = rng.uniform(-4.0, 4.0, d)
            got = fap_pdf_plane(n if d > 1 else n[0], p)
            want = float(explicit_density(n if d > 1 else n[0], p))
            worst = max(worst, abs(got - want) / want)
    peak = vdfap_pdf([0.0, 0.0], VdfapParams(-1.0, 1.0, 2))
    err_peak = abs(peak - 1.0 / math.pi)
    ok = worst <= 1e-12 and err_peak <= 1e-12
    return ok, f"general vs explicit max rel err {worst:.2e} (<=1e-12); |f(0) - 1/pi| = {err_peak:.1e}"


# ---------------------------------------------------------------- 4


def _fd_gradient(fun, w, h=1e-5):
    out = np.zeros_like(w)
    for i in range(w.size):
        e = np.zeros_like(w)
        e[i] = h
        out[i] = (fun(w + e) - fun(w - e)) / (2.0 * h)
    return out


def _fd_hessian(fun, w, h=2e-4):
    k = w.size
    out = np.zeros((k, k))
    for i in range(k):
        for j in range(k):
            ei = np.zeros(k)
            ej = np.zeros(k)
            ei[i] = h
            ej[j] = h
            out[i, j] = (fun(w + ei + ej) - fun(w + ei - ej) - fun(w - ei + ej) + fun(w - ei - ej)) / (4 * h * h)
    return out


def criterion_4(seed: int = ACCEPTANCE_SEED):
    at_zero = all(vdfap_cf(np.zeros(d), VdfapParams(-1.0, 1.0, d)) == 1.0 for d in (1, 2, 3))
    worst_f = 0.0
    for d in (1, 2):
        for u, lam in ((-1.0, 1.0), (-2.0, 0.5)):
            p = VdfapParams(u, lam, d)
            for w in (0.5, 1.0, 2.0):
                val, _ = cf_by_quadrature(w, p)
                omega = np.zeros(d)
                omega[0] = w
                worst_f = max(worst_f, abs(val - vdfap_cf(omega, p)))
    rng = np.random.default_rng(seed)
    worst_g = worst_h = 0.0
    for i in range(20):
        d = 1 + i % 2
        p = VdfapParams(-rng.uniform(0.2, 3.0), rng.uniform(0.2, 3.0), d)
        w = rng.uniform(-2.0, 2.0, d)
        worst_g = max(worst_g, float(np.max(np.abs(vdfap_cf_gradient(w, p) - _fd_gradient(lambda x: vdfap_cf(x, p), w)))))
        if i < 10:
            fd = _fd_hessian(lambda x: vdfap_cf(x, p), w)
            worst_h = max(worst_h, float(np.max(np.abs(vdfap_cf_hessian(w, p) - fd))))
    ok = at_zero and worst_f <= 1e-3 and worst_g <= 1e-6 and worst_h <= 1e-5
    return ok, (f"Phi(0)==1: {at_zero}; Fourier max err {worst_f:.1e} (<=1e-3); "
                f"grad FD err {worst_g:.1e} (<=1e-6); Hessian FD err {worst_h:.1e} (<=1e-5)")


# ---------------------------------------------------------------- 5


def criterion_5(seed: int = ACCEPTANCE_SEED):
    worst = 0.0
    for u, lam, d in ((-1.0, 1.0, 2), (-2.0, 3.0, 1), (-0.5, 2.0, 2), (-3.0, 0.5, 1)):
        p = VdfapParams(u, lam, d)
        worst = max(worst, abs(second_moment_quadrature(p) / vdfap_moments(p).second_moment - 1.0))
    p = VdfapParams(-1.0, 1.0, 2)
    s = sample_vdfap_exact(p, 100_000, seed)
    sq = np.sum(s.samples ** 2, axis=1)
    z = (sq.mean() - 2.0) / (sq.std(ddof=1) / math.sqrt(sq.size))
    ok = worst <= 1e-3 and abs(z) <= 3.0
    return ok, f"quadrature rel err {worst:.1e} (<=1e-3); sampler mean |N|^2 = {sq.mean():.4f}, z = {z:+.2f} (|z|<=3)"


# ---------------------------------------------------------------- 6


def tail_integral_quadrature(a: float) -> float:
    """Direct quadrature of the tail integral with scipy's K_{3/2}."""
    def f(r):
        k = special.kv(1.5, r)
        return k / math.sqrt(r) * math.log(k / r ** 1.5) if k > 0 else 0.0
    pieces = [a, a + 1.0, a + 4.0, a + 16.0, a + 64.0, a + 700.0]
    return sum(integrate.quad(f, lo, hi, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
               for lo, hi in zip(pieces[:-1], pieces[1:]))


def criterion_6(seed: int = ACCEPTANCE_SEED):
    worst_q = 0.0
    for lam in (0.25, 1.0, 4.0):
        p = VdfapParams(-1.0, lam, 2)
        worst_q = max(worst_q, abs(vdfap_entropy_2d(-1.0, lam) - entropy_quadrature(p)))
    rng = np.random.default_rng(seed)
    worst_id = 0.0
    for _ in range(20):
        u = -math.exp(rng.uniform(-3, 2))
        lam = math.exp(rng.uniform(-3, 2))
        resid = vdfap_entropy_2d(u, lam) - h0(-u * lam) - math.log(2 * math.pi * math.e ** 3) + 2 * math.log(-u)
        worst_id = max(worst_id, abs(resid))
    worst_t = max(abs(entropy_tail_integral(a) - tail_integral_quadrature(a)) for a in (0.5, 1.0, 2.0))
    ok = worst_q <= 1e-4 and worst_id < 1e-12 and worst_t <= 1e-8
    return ok, (f"closed vs quadrature {worst_q:.1e} nats (<=1e-4); identity residual {worst_id:.1e} (<1e-12); "
                f"tail integral err {worst_t:.1e} (<=1e-8)")


# ---------------------------------------------------------------- 7


def criterion_7():
    s = np.logspace(-3, 3, 300)
    gs = np.asarray(g(s))
    mid = (2 * s + 3) / (s + 2)
    chain = bool(np.all(gs < mid) and np.all(mid < 2))
    positive = bool(np.all(np.asarray(h0_derivatives(s).h0_prime) > 0))
    worst = 0.0
    h = 1e-5
    for x in (0.3, 1.0, 5.0):
        fd_g = (g(x + h) - g(x - h)) / (2 * h)
        fd_h = (h0(x + h) - h0(x - h)) / (2 * h)
        der = h0_derivatives(x)
        worst = max(worst, abs(der.g_prime - fd_g), abs(der.h0_prime - fd_h))
    ok = chain and positive and worst <= 1e-6
    return ok, f"g < (2s+3)/(s+2) < 2: {chain}; h0' > 0: {positive}; derivative FD err {worst:.1e} (<=1e-6)"


# ---------------------------------------------------------------- 8


def random_queries(n: int, seed: int):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        yield CapacityQuery(2, -math.exp(rng.uniform(math.log(0.01), math.log(10))),
                            math.exp(rng.uniform(math.log(0.01), math.log(10))),
                            math.exp(rng.uniform(math.log(0.01), math.log(100))))


def sweep_gap_bits(vary: str, lo: float, hi: float, steps: int = 400) -> float:
    rows = capacity_sweep(vary, lo, hi, steps, CapacityQuery(2, -1.0, 1.0, 1.0), "bits")
    return max(r.gap for r in rows)


def criterion_8(seed: int = ACCEPTANCE_SEED):
    q = CapacityQuery(2, -1.0, 1.0, 1.0)
    lo_b = lower_bound_2d(q) * BITS_PER_NAT
    up_b = upper_bound_2d(q) * BITS_PER_NAT
    lo_dual = lower_bound_2d_expanded(q) * BITS_PER_NAT
    up_dual = upper_bound_general(q) * BITS_PER_NAT
    point = (abs(lo_b - 0.6545) <= 1e-3 and abs(up_b - 0.7593) <= 1e-3
             and abs(lo_b - lo_dual) <= 1e-3 and abs(up_b - up_dual) <= 1e-3)
    ordered = all(0 < lower_bound_2d(x) <= upper_bound_2d(x) for x in random_queries(200, seed))
    gp = sweep_gap_bits("P", 0.0, 10.0)
    gl = sweep_gap_bits("lambda", 0.0, 10.0)
    gu = sweep_gap_bits("u", 0.5, 10.0)
    diverge = upper_bound_2d(CapacityQuery(2, -1e-3, 1.0, 1.0)) * BITS_PER_NAT
    ok = point and ordered and gp <= 0.25 and gl <= 0.55 and gu <= 0.35 and diverge > 5.0
    return ok, (f"lower {lo_b:.5f} / upper {up_b:.5f} bits (dual {lo_dual:.5f} / {up_dual:.5f}); "
                f"0<lower<=upper on 200: {ordered}; gaps P {gp:.3f} (<=0.25), lambda {gl:.3f} (<=0.55), "
                f"|u| {gu:.3f} (<=0.35) bits; upper at |u|=1e-3: {diverge:.2f} bits (>5)")


# ---------------------------------------------------------------- 9

DESK_AXES = (GridAxis(-3.0, 3.0, 60), GridAxis(-3.0, 3.0, 60))


def criterion_9(seed: int = ACCEPTANCE_SEED, M: int = 100_000):
    parts = []
    ok = True
    for u in ((0.0, 0.0, 0.0), (2.0, -3.0, -1.0)):
        cfg = SimConfig(3, 840.0, 1e-5, 1.0, M, seed, u=u)
        res = simulate_fap(cfg)
        grid = build_histogram(res, DESK_AXES, "density")
        report = compare_density(grid, PlanarChannelParams(2, u, 1.0), k=5.0)
        ok &= bool(report.passed)
        text = f"u={list(u)}: max-abs {report.max_abs_err:.4f} (<= {report.thresholds['max_abs_err']:.4f})"
        if u[0] or u[1]:
            mode = np.asarray(report.details["empirical_mode"])
            toward = float(mode @ np.array(u[:2])) > 0
            ok &= toward
            text += f", mode {np.round(mode, 2).tolist()} toward [2,-3]: {toward}"
        parts.append(text)
    return ok, "; ".join(parts)


# ---------------------------------------------------------------- 10


def criterion_10(M: int = 20_000):
    good = sum(bool(weak_stability_test(-1.0, 1.0, 2.0, 2, M, seed).passed) for seed in range(10))
    fault = sum(not weak_stability_test(-2.0, 1.0, 2.0, 2, M, seed, u2=-1.0, reference_u=-1.5).passed
                for seed in range(10))
    return good >= 9 and fault >= 9, f"matched drift passes {good}/10 (>=9); mismatched drift fails {fault}/10 (>=9)"


# ---------------------------------------------------------------- 11


def _cli_bytes(argv, workers: int, path: str) -> bytes:
    from .cli import run

    old = os.environ.get(WORKERS_ENV)
    os.environ[WORKERS_ENV] = str(workers)
    try:
        with contextlib.redirect_stdout(io.StringIO()):
            code = run(list(argv) + ["--out", path])
    finally:
        if old is None:
            os.environ.pop(WORKERS_ENV, None)
        else:
            os.environ[WORKERS_ENV] = old
    if code != 0:
        raise RuntimeError(f"fapchan {' '.join(argv)} exited with {code}")
    with open(path, "rb") as fh:
        return fh.read()


def criterion_11(M: int = 10_000):
    tmp = tempfile.mkdtemp(prefix="fapchan-det-")
    try:
        commands = {
            "simulate": ["simulate", "--preset", "paper-fig2", "--M", str(M), "--seed", "7"],
            "histogram": ["simulate", "--preset", "paper-fig1", "--M", str(M), "--seed", "7",
                          "--grid", "-3:3:60,-3:3:60"],
            "sweep": ["sweep", "--vary", "lambda", "--range", "0:10", "--steps", "64", "--u", "-1",
                      "--lambda", "1", "--P", "1", "--units", "bits"],
        }
        verdicts = []
        for name, argv in commands.items():
            outs = [_cli_bytes(argv, w, os.path.join(tmp, f"{name}-{w}-{rep}.out"))
                    for w, rep in ((1, 0), (1, 1), (2, 0), (8, 0))]
            verdicts.append((name, all(o == outs[0] for o in outs), len(outs[0])))
    finally:
        shutil.rmtree(tmp, ignore_errors=True)
    ok = all(v for _, v, _ in verdicts)
    return ok, "; ".join(f"{n}: identical={v} ({size} bytes)" for n, v, size in verdicts)


CRITERIA: dict[int, tuple[str, Callable, float]] = {
    1: ("special functions", criterion_1, 1.0),
    2: ("density normalization", criterion_2, 30.0),
    3: ("formula consistency", criterion_3, 5.0),
    4: ("characteristic function", criterion_4, 60.0),
    5: ("moments", criterion_5, 30.0),
    6: ("entropy", criterion_6, 60.0),
    7: ("h0 monotonicity and g bounds", criterion_7, 1.0),
    8: ("capacity bounds", criterion_8, 10.0),
    9: ("particle-based verification", criterion_9, 300.0),
    10: ("weak stability", criterion_10, 60.0),
    11: ("determinism", criterion_11, 120.0),
}


def run_criterion(number: int) -> CriterionResult:
    title, fn, budget = CRITERIA[number]
    t0 = time.perf_counter()
    try:
        passed, detail = fn()
    except Exception as exc:  # a crash is a failure with its reason recorded
        passed, detail = False, f"error: {type(exc).__name__}: {exc}"
    runtime = time.perf_counter() - t0
    if runtime > budget:
        passed = False
        detail += f"; over runtime budget ({runtime:.1f}s > {budget:.0f}s)"
    return CriterionResult(number, title, bool(passed), detail, runtime, budget)


def run_all(only: Optional[list] = None, stream=None) -> list:
    results = []
    for number in sorted(CRITERIA):
        if only and number not in only:
            continue
        res = run_criterion(number)
        results.append(res)
        if stream is not None:
            print(res.line(), file=stream, flush=True)
    return results


if __name__ == "__main__":
    sys.exit(0 if all(r.passed for r in run_all(stream=sys.stdout)) else 2)

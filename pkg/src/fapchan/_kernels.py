"""Numba kernels for single first-passage trajectories.

Both kernels simulate the Euler-Maruyama chain ``X_k = X_{k-1} + b dt + s Z_k``
(``s = sqrt(sigma^2 dt)``) from ``[0, ..., 0, lam]`` and stop at the first step
``K`` whose vertical coordinate is negative.  ``levy_trajectory`` reaches the same
law without visiting every step; ``stepwise_trajectory`` is the literal loop.

Return value is ``K`` (0 when ``max_steps`` ran out) and the parallel
coordinates are written to ``out``.
"""

import math

import numpy as np
from numba import njit

# Skip a bridge interval when the Brownian-bridge crossing probability
# exp(-2ab / (n s^2)) is below e^-37 (about 1e-16).
SKIP_EXPONENT = 37.0
FIRST_BLOCK = 64
_STACK = 128


@njit(cache=True)
def _first_crossing(rng, i0, a0, j0, b0, s2, res):
    """Earliest crossing step in (i0, j0] given walk values at both ends.

    Conditional on its endpoints a Gaussian random walk is a discrete Brownian
    bridge whatever the drift, so midpoints are drawn from the bridge law and
    the interval is bisected, left half first.  Writes (K, y_{K-1}, y_K) into
    ``res`` and returns True when a crossing exists.
    """
    si = np.empty(_STACK, dtype=np.int64)
    sj = np.empty(_STACK, dtype=np.int64)
    sa = np.empty(_STACK)
    sb = np.empty(_STACK)
    top = 0
    si[0] = i0
    sj[0] = j0
    sa[0] = a0
    sb[0] = b0
    top = 1
    while top > 0:
        top -= 1
        i = si[top]
        j = sj[top]
        a = sa[top]
        b = sb[top]
        n = j - i
        if n == 1:
            if b < 0.0:
                res[0] = j
                res[1] = a
                res[2] = b
                return True
            continue
        if b >= 0.0 and 2.0 * a * b > SKIP_EXPONENT * n * s2:
            continue
        m = i + n // 2
        left = m - i
        right = j - m
        mean = a + (b - a) * left / n
        ym = mean + math.sqrt(s2 * left * right / n) * rng.standard_normal()
        # right half below, left half on top so it is processed first
        si[top] = m
        sj[top] = j
        sa[top] = ym
        sb[top] = b
        si[top + 1] = i
        sj[top + 1] = m
        sa[top + 1] = a
        sb[top + 1] = ym
        top += 2
    return False


@njit(cache=True)
def levy_trajectory(rng, lam, mu_vert, mu_par, s, max_steps, bridge, out):
    """First crossing via block endpoints plus bridge bisection (exact in law).

    ``mu_vert`` and ``mu_par`` are per-step drift increments ``b dt``.
    The parallel coordinates are independent of the vertical walk, so given
    ``K`` they are drawn as the position after ``K - 1`` steps plus one increment.
    """
    s2 = s * s
    res = np.empty(3)
    y = lam
    i = 0
    block = FIRST_BLOCK
    found = False
    while i < max_steps:
        n = min(block, max_steps - i)
        yj = y + n * mu_vert + s * math.sqrt(n) * rng.standard_normal()
        if _first_crossing(rng, i, y, i + n, yj, s2, res):
            found = True
            break
        y = yj
        i += n
        block *= 2
    if not found:
        return 0
    k = int(res[0])
    a = res[1]
    b = res[2]
    frac = a / (a - b) if bridge else 1.0
    sk = s * math.sqrt(k - 1.0)
    for c in range(mu_par.shape[0]):
        prev = mu_par[c] * (k - 1) + sk * rng.standard_normal()
        inc = mu_par[c] + s * rng.standard_normal()
        out[c] = prev + frac * inc
    return k


@njit(cache=True)
def stepwise_trajectory(rng, lam, mu_vert, mu_par, s, max_steps, bridge, out):
    """Literal Euler-Maruyama loop over every step."""
    dpar = mu_par.shape[0]
    x = np.zeros(dpar)
    prev = np.zeros(dpar)
    y = lam
    for k in range(1, max_steps + 1):
        for c in range(dpar):
            prev[c] = x[c]
            x[c] += mu_par[c] + s * rng.standard_normal()
        y_prev = y
        y += mu_vert + s * rng.standard_normal()
        if y < 0.0:
            frac = y_prev / (y_prev - y) if bridge else 1.0
            for c in range(dpar):
                out[c] = prev[c] + frac * (x[c] - prev[c])
            return k
    return 0

"""JIT-compiled probe kernel for Monte Carlo scans.

Replicates, for the relative system under a capped built-in kernel, the
same embedded Runge-Kutta 5(4) stepping, PI control and event bisection as
the reference driver in ``_dopri``, stripped of recording callbacks so a
single probe costs microseconds instead of milliseconds.  Scans fall back
to the reference path when numba is unavailable; a test cross-checks the
two implementations probe by probe.
"""

from __future__ import annotations

import math

import numpy as np

REACHED = 0
EVENT = 1
UNDERFLOW = 2

try:
    from numba import njit

    AVAILABLE = True
except Exception:  # pragma: no cover - exercised only without numba
    AVAILABLE = False

    def njit(*args, **kwargs):  # type: ignore[misc]
        def wrap(fn):
            return fn

        return wrap if not (args and callable(args[0])) else args[0]


from scipy.special import gamma as _gamma_fn

# Dormand-Prince 5(4) tableau, identical to the reference driver.
_A = np.zeros((7, 6))
_A[1, 0] = 1 / 5
_A[2, :2] = (3 / 40, 9 / 40)
_A[3, :3] = (44 / 45, -56 / 15, 32 / 9)
_A[4, :4] = (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729)
_A[5, :5] = (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656)
_A[6, :6] = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920,
               -17253 / 339200, 22 / 525, -1 / 40])

_KIND_LOG = 0
_KIND_POWER = 1


@njit(cache=True)
def _perp_factor(r, kind, coef, power, eps, fac0):
    """G'(r)/r for the capped kernel; constant on the capped region."""
    if r < eps:
        return fac0
    if kind == _KIND_LOG:
        return -1.0 / (2.0 * math.pi * r * r)
    return -power * coef * r ** (-power - 2.0)


@njit(cache=True)
def _rhs(y, out, a_anchor, b, kind, coef, power, eps, fac0):
    m = b.shape[0]
    pgx = np.empty(m)
    pgy = np.empty(m)
    sx = 0.0
    sy = 0.0
    for j in range(m):
        yx = y[2 * j]
        yy = y[2 * j + 1]
        r = math.hypot(yx, yy)
        f = _perp_factor(r, kind, coef, power, eps, fac0)
        pgx[j] = -f * yy
        pgy[j] = f * yx
        sx += b[j] * pgx[j]
        sy += b[j] * pgy[j]
    for j in range(m):
        vx = (a_anchor + b[j]) * pgx[j] + (sx - b[j] * pgx[j])
        vy = (a_anchor + b[j]) * pgy[j] + (sy - b[j] * pgy[j])
        for k in range(m):
            if k == j:
                continue
            dx = y[2 * j] - y[2 * k]
            dy = y[2 * j + 1] - y[2 * k + 1]
            r = math.hypot(dx, dy)
            f = _perp_factor(r, kind, coef, power, eps, fac0)
            vx += b[k] * (-f * dy)
            vy += b[k] * (f * dx)
        out[2 * j] = vx
        out[2 * j + 1] = vy


@njit(cache=True)
def _min_anchor_distance(y):
    m = y.shape[0] // 2
    best = math.hypot(y[0], y[1])
    for j in range(1, m):
        d = math.hypot(y[2 * j], y[2 * j + 1])
        if d < best:
            best = d
    return best


@njit(cache=True)
def _error_norm(err, y0, y1, rel_tol, abs_tol):
    acc = 0.0
    n = y0.shape[0]
    for i in range(n):
        big = abs(y0[i])
        if abs(y1[i]) > big:
            big = abs(y1[i])
        sc = abs_tol + rel_tol * big
        acc += (err[i] / sc) ** 2
    return math.sqrt(acc / n)


@njit(cache=True)
def _hermite(y0, f0, y1, f1, h, theta, out):
    n = y0.shape[0]
    for i in range(n):
        out[i] = ((1.0 - theta) * y0[i] + theta * y1[i]
                  + theta * (theta - 1.0) * ((1.0 - 2.0 * theta) * (y1[i] - y0[i])
                                             + (theta - 1.0) * h * f0[i]
                                             + theta * h * f1[i]))


@njit(cache=True)
def _probe_jit(y, a_anchor, b, kind, coef, power, eps, fac0,
               t_final, rel_tol, abs_tol, max_step, min_step):
    n = y.shape[0]
    t = 0.0
    threshold = eps

    if _min_anchor_distance(y) <= threshold:
        return EVENT, 0.0

    f = np.empty(n)
    _rhs(y, f, a_anchor, b, kind, coef, power, eps, fac0)

    # Initial step heuristic, identical to the reference driver.
    d0 = 0.0
    d1 = 0.0
    for i in range(n):
        sc = abs_tol + rel_tol * abs(y[i])
        d0 += (y[i] / sc) ** 2
        d1 += (f[i] / sc) ** 2
    d0 = math.sqrt(d0 / n)
    d1 = math.sqrt(d1 / n)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    ytmp = np.empty(n)
    ftmp = np.empty(n)
    for i in range(n):
        ytmp[i] = y[i] + h0 * f[i]
    _rhs(ytmp, ftmp, a_anchor, b, kind, coef, power, eps, fac0)
    d2 = 0.0
    for i in range(n):
        sc = abs_tol + rel_tol * abs(y[i])
        d2 += ((ftmp[i] - f[i]) / sc) ** 2
    d2 = math.sqrt(d2 / n) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    h = min(100.0 * h0, h1, max_step)
    if h < min_step:
        h = min_step

    err_prev = 1e-4
    k = np.empty((7, n))
    y_new = np.empty(n)
    err_vec = np.empty(n)
    y_ev = np.empty(n)
    y_mid = np.empty(n)

    while True:
        t_remaining = t_final - t
        if t_remaining <= 0.0:
            return REACHED, t_final

        if h > max_step:
            h = max_step
        if h > t_remaining:
            h = t_remaining
        if h < min_step and t_remaining > min_step:
            return UNDERFLOW, t

        for i in range(n):
            k[0, i] = f[i]
        for stage in range(1, 7):
            for i in range(n):
                acc = 0.0
                for l in range(stage):
                    acc += _A[stage, l] * k[l, i]
                ytmp[i] = y[i] + h * acc
            _rhs(ytmp, k[stage], a_anchor, b, kind, coef, power, eps, fac0)
            if stage == 6:
                for i in range(n):
                    y_new[i] = ytmp[i]
        for i in range(n):
            acc = 0.0
            for l in range(7):
                acc += _E[l] * k[l, i]
            err_vec[i] = h * acc
        # Per-unit-step test, matching the reference driver.
        err = _error_norm(err_vec, y, y_new, rel_tol, abs_tol) / h

        if err <= 1.0:
            if _min_anchor_distance(y_new) <= threshold:
                # Bisect the Hermite interpolant for the first passage.
                tol = 1e-3 * threshold
                lo = 0.0
                hi = 1.0
                for i in range(n):
                    y_ev[i] = y_new[i]
                for _ in range(80):
                    d_hi = _min_anchor_distance(y_ev)
                    if threshold - tol <= d_hi <= threshold:
                        break
                    mid = 0.5 * (lo + hi)
                    _hermite(y, k[0], y_new, k[6], h, mid, y_mid)
                    if _min_anchor_distance(y_mid) <= threshold:
                        hi = mid
                        for i in range(n):
                            y_ev[i] = y_mid[i]
                    else:
                        lo = mid
                    if hi - lo < 1e-16:
                        break
                return EVENT, t + hi * h
            t = t + h
            for i in range(n):
                y[i] = y_new[i]
                f[i] = k[6, i]
            if t_final - t <= 1e-15 * t_final:
                return REACHED, t_final
            if err == 0.0:
                factor = 10.0
            else:
                factor = 0.9 * err ** (-0.175) * err_prev ** 0.1
                if factor > 10.0:
                    factor = 10.0
                elif factor < 0.2:
                    factor = 0.2
            h = h * factor
            err_prev = err if err > 1e-10 else 1e-10
        else:
            factor = 0.9 * err ** (-0.25)
            if factor < 0.2:
                factor = 0.2
            h = h * factor
            if h < min_step:
                return UNDERFLOW, t


def probe(y_flat: np.ndarray, a_anchor: float, b: np.ndarray, s: float,
          epsilon: float, horizon: float, rel_tol: float, abs_tol: float,
          max_step: float, min_step: float) -> tuple[int, float]:
    """Run one capped-dynamics probe; returns (status, event-or-end time)."""
    if not AVAILABLE:  # pragma: no cover
        raise RuntimeError("numba is not available; use the reference probe path")
    if s == 1.0:
        kind = _KIND_LOG
        coef = 1.0 / (2.0 * math.pi)
        power = 0.0
        slope_eps = -1.0 / (2.0 * math.pi * epsilon)
    else:
        kind = _KIND_POWER
        coef = float(_gamma_fn(1.0 - s) / (2.0 ** (2.0 * s) * math.pi * _gamma_fn(s)))
        power = 2.0 * (1.0 - s)
        slope_eps = -power * coef * epsilon ** (-power - 1.0)
    fac0 = slope_eps / epsilon
    status, t_end = _probe_jit(
        np.asarray(y_flat, dtype=np.float64), float(a_anchor),
        np.asarray(b, dtype=np.float64), kind, coef, power,
        float(epsilon), fac0, float(horizon), float(rel_tol), float(abs_tol),
        float(max_step), float(min_step),
    )
    return int(status), float(t_end)

"""Adaptive embedded Runge-Kutta 5(4) driver with event bisection.

Dormand-Prince coefficients, fifth-order propagation with a fourth-order
error estimate, PI step-size control and first-same-as-last reuse.  The
embedded estimate is tested per unit step (error <= tol * h), which makes
accumulated drift scale at least linearly with the tolerance: halving
``rel_tol`` at least halves the measured drift of conserved quantities.
The driver understands three ways a run can end: the final time is
reached, a distance functional crosses a threshold (the crossing is
located by bisection on the last accepted step), or the controller
demands a step below the configured minimum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = ["DopriResult", "solve_dopri", "REACHED", "EVENT", "UNDERFLOW"]

REACHED = 0
EVENT = 1
UNDERFLOW = 2

# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# Difference between the 5th- and embedded 4th-order weights.
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920,
               -17253 / 339200, 22 / 525, -1 / 40])

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
# PI controller exponents: the per-unit-step error of the 4th-order
# estimate scales like h^4.
_ALPHA = 0.7 / 4.0
_BETA = 0.4 / 4.0

_MAX_STEPS = 20_000_000


@dataclass
class DopriResult:
    status: int
    t_end: float
    y_end: np.ndarray
    n_accepted: int
    n_rejected: int
    n_rhs: int


def _error_norm(err: np.ndarray, y0: np.ndarray, y1: np.ndarray,
                rel_tol: float, abs_tol: float) -> float:
    scale = abs_tol + rel_tol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _initial_step(rhs, t0, y0, f0, direction, rel_tol, abs_tol, max_step):
    """Curvature-probing heuristic for the first step size."""
    scale = abs_tol + rel_tol * np.abs(y0)
    d0 = float(np.sqrt(np.mean((y0 / scale) ** 2)))
    d1 = float(np.sqrt(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * direction * f0
    f1 = rhs(t0 + h0 * direction, y1)
    d2 = float(np.sqrt(np.mean(((f1 - f0) / scale) ** 2))) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, max_step)


def _hermite(y0, f0, y1, f1, h, theta):
    """Cubic Hermite interpolant on one step, exact at both endpoints."""
    return ((1.0 - theta) * y0 + theta * y1
            + theta * (theta - 1.0) * ((1.0 - 2.0 * theta) * (y1 - y0)
                                       + (theta - 1.0) * h * f0
                                       + theta * h * f1))


def solve_dopri(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0: np.ndarray,
    t1: float,
    *,
    rel_tol: float,
    abs_tol: float,
    max_step: float,
    min_step: float,
    event_distance: Callable[[np.ndarray], float] | None = None,
    event_threshold: float = 0.0,
    checkpoints: Sequence[float] = (),
    on_accept: Callable[[float, np.ndarray], None] | None = None,
) -> DopriResult:
    """Integrate ``dy/dt = rhs(t, y)`` from ``t0`` to ``t1``.

    ``t1 < t0`` integrates backward.  When ``event_distance`` is given and
    ``event_threshold > 0``, the run stops at the first time the distance
    functional drops to the threshold, located within a relative distance
    tolerance of 1e-3 by bisecting the interpolant over the last step.
    ``checkpoints`` are times the solver lands on exactly (they become
    accepted steps).  ``on_accept`` is invoked for the initial state and
    after every accepted step.
    """
    y = np.array(y0, dtype=float)
    t = float(t0)
    direction = 1.0 if t1 >= t0 else -1.0
    span = abs(t1 - t0)
    watch_event = event_distance is not None and event_threshold > 0.0

    cps = sorted({float(c) for c in checkpoints
                  if min(t0, t1) < c < max(t0, t1)},
                 reverse=direction < 0)
    cp_iter = iter(cps)
    next_cp = next(cp_iter, None)

    n_accepted = 0
    n_rejected = 0
    n_rhs = 1
    f = rhs(t, y)

    if on_accept is not None:
        on_accept(t, y)

    if watch_event and event_distance(y) <= event_threshold:
        return DopriResult(EVENT, t, y, 0, 0, n_rhs)

    if span == 0.0:
        return DopriResult(REACHED, t, y, 0, 0, n_rhs)

    h = _initial_step(rhs, t, y, f, direction, rel_tol, abs_tol, max_step)
    n_rhs += 1
    h = max(h, min_step)
    err_prev = 1e-4

    k = np.empty((7,) + y.shape)
    steps = 0
    while True:
        steps += 1
        if steps > _MAX_STEPS:
            raise RuntimeError("step budget exhausted; integration is not advancing")

        t_remaining = abs(t1 - t)
        if t_remaining <= 0.0:
            return DopriResult(REACHED, t, y, n_accepted, n_rejected, n_rhs)

        h = min(h, max_step, t_remaining)
        clipped_to = None
        if next_cp is not None:
            to_cp = abs(next_cp - t)
            if to_cp <= 0.0:
                next_cp = next(cp_iter, None)
            elif h >= to_cp:
                h = to_cp
                clipped_to = next_cp
        if h < min_step and clipped_to is None and t_remaining > min_step:
            return DopriResult(UNDERFLOW, t, y, n_accepted, n_rejected, n_rhs)

        hs = h * direction
        k[0] = f
        for i in range(1, 7):
            yi = y + hs * (k[:i].T @ _A[i])
            k[i] = rhs(t + _C[i] * hs, yi)
        n_rhs += 6
        y_new = yi  # stage 7 is the 5th-order solution (FSAL)
        err_vec = hs * (k.T @ _E)
        # Per-unit-step test: the estimate must stay below tol * h.
        err = _error_norm(err_vec, y, y_new, rel_tol, abs_tol) / h

        if err <= 1.0:
            t_new = t + hs
            f_new = k[6]
            if watch_event and event_distance(y_new) <= event_threshold:
                t_ev, y_ev = _locate_event(
                    y, f, y_new, f_new, t, hs,
                    event_distance, event_threshold,
                )
                if on_accept is not None:
                    on_accept(t_ev, y_ev)
                return DopriResult(EVENT, t_ev, y_ev,
                                   n_accepted + 1, n_rejected, n_rhs)
            t, y, f = t_new, y_new, f_new
            if clipped_to is not None:
                # Land exactly on the checkpoint despite round-off.
                t = clipped_to
                next_cp = next(cp_iter, None)
            n_accepted += 1
            if on_accept is not None:
                on_accept(t, y)
            if abs(t1 - t) <= 0.0 or np.isclose(t, t1, rtol=0.0, atol=1e-15 * span):
                return DopriResult(REACHED, t1, y, n_accepted, n_rejected, n_rhs)
            if err == 0.0:
                factor = _MAX_FACTOR
            else:
                factor = _SAFETY * err ** (-_ALPHA) * err_prev ** _BETA
                factor = min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
            h = h * factor
            err_prev = max(err, 1e-10)
        else:
            n_rejected += 1
            factor = max(_MIN_FACTOR, _SAFETY * err ** (-0.25))
            h = h * factor
            if h < min_step:
                return DopriResult(UNDERFLOW, t, y, n_accepted, n_rejected, n_rhs)


def _locate_event(y0, f0, y1, f1, t, hs, distance, threshold):
    """Bisect the Hermite interpolant for the first threshold crossing.

    Stops once the located state sits within 1e-3 * threshold below the
    threshold, so the reported distance matches it to that tolerance.
    """
    tol = 1e-3 * threshold
    lo, hi = 0.0, 1.0
    y_hi = y1
    for _ in range(80):
        d_hi = distance(y_hi)
        if threshold - tol <= d_hi <= threshold:
            break
        mid = 0.5 * (lo + hi)
        y_mid = _hermite(y0, f0, y1, f1, hs, mid)
        if distance(y_mid) <= threshold:
            hi, y_hi = mid, y_mid
        else:
            lo = mid
        if hi - lo < 1e-16:
            break
    return t + hi * hs, y_hi

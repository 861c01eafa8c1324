"""Point-vortex dynamics in absolute and relative coordinates.

The absolute system tracks N planar vortices with signed intensities; each
vortex is advected by the perp-gradient field of the others,

    dx_i/dt = sum_{j != i} a_j G'(|x_i - x_j|) (x_i - x_j)^perp / |x_i - x_j|.

The relative system fixes an anchor vortex i and tracks the differences
y_ij = x_i - x_j, which factor translation out of the problem; their
evolution only involves the differences themselves:

    dy_ij/dt = (a_i + a_j) pg(y_ij)
               + sum_{k != i,j} a_k [ pg(y_ik) + pg(y_ij - y_ik) ],

with pg the perp-gradient field of the kernel.  Integration uses an
adaptive embedded Runge-Kutta 5(4) pair; a run ends when the final time is
reached, when the minimal separation first drops to a configured threshold
(located by bisection on the last step), or when the step controller
stalls below the minimum step near a genuine collapse.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from math import fsum
from typing import Sequence

import numpy as np
import numpy.typing as npt

from . import _quantities as q
from ._dopri import EVENT, REACHED, solve_dopri
from .errors import SingularityError

__all__ = [
    "VortexSystem",
    "RelativeSystem",
    "IntegratorConfig",
    "TerminationCause",
    "Termination",
    "TrajectoryRecord",
    "velocity",
    "relative_velocity",
    "integrate",
    "integrate_relative",
    "phase_space_divergence",
    "flow_map_jacobian",
    "relative_pseudo_hamiltonian",
]

FloatArray = npt.NDArray[np.float64]


def _as_intensities(values) -> FloatArray:
    a = np.asarray(values, dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise ValueError("intensities must be a non-empty 1D sequence")
    if not np.all(np.isfinite(a)):
        raise ValueError("intensities must be finite")
    if np.any(a == 0.0):
        raise ValueError("every intensity must be nonzero")
    return a


def _as_points(values, name: str) -> FloatArray:
    x = np.asarray(values, dtype=float)
    if x.ndim != 2 or x.shape[1] != 2:
        raise ValueError(f"{name} must have shape (n, 2)")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} must be finite")
    return x


@dataclass(frozen=True)
class VortexSystem:
    """State of N point vortices: intensities (N,) and positions (N, 2)."""

    intensities: FloatArray
    positions: FloatArray

    def __post_init__(self) -> None:
        a = _as_intensities(self.intensities)
        x = _as_points(self.positions, "positions")
        if x.shape[0] != a.size:
            raise ValueError("positions and intensities disagree on N")
        object.__setattr__(self, "intensities", a)
        object.__setattr__(self, "positions", x)

    @property
    def n(self) -> int:
        return self.intensities.size

    def min_pair_distance(self) -> float:
        return q.min_pair_distance(self.positions)

    def with_positions(self, positions) -> "VortexSystem":
        return VortexSystem(self.intensities, positions)


@dataclass(frozen=True)
class RelativeSystem:
    """Difference coordinates y_ij = x_i - x_j anchored at vortex i.

    ``differences[slot]`` is y_{i, others[slot]} where ``others`` lists the
    non-anchor indices in increasing order.
    """

    anchor: int
    intensities: FloatArray
    differences: FloatArray

    def __post_init__(self) -> None:
        a = _as_intensities(self.intensities)
        y = _as_points(self.differences, "differences")
        n = a.size
        if n < 2:
            raise ValueError("a relative system needs at least two vortices")
        if not 0 <= self.anchor < n:
            raise ValueError(f"anchor index {self.anchor} out of range for N={n}")
        if y.shape[0] != n - 1:
            raise ValueError("expected N-1 difference vectors")
        object.__setattr__(self, "intensities", a)
        object.__setattr__(self, "differences", y)

    @property
    def n(self) -> int:
        return self.intensities.size

    @property
    def others(self) -> tuple[int, ...]:
        return tuple(j for j in range(self.n) if j != self.anchor)

    @classmethod
    def from_absolute(cls, system: VortexSystem, anchor: int) -> "RelativeSystem":
        xi = system.positions[anchor]
        others = [j for j in range(system.n) if j != anchor]
        y = xi[None, :] - system.positions[others]
        return cls(anchor, system.intensities, y)

    def anchored_system(self) -> VortexSystem:
        """Absolute system with the anchor placed at the origin."""
        return VortexSystem(self.intensities,
                            q.relative_full_positions(self.anchor, self.differences))

    def min_anchor_distance(self) -> float:
        return q.relative_min_distance(self.differences)

    def with_differences(self, differences) -> "RelativeSystem":
        return RelativeSystem(self.anchor, self.intensities, differences)


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances, step bounds and the separation-event threshold.

    ``collapse_threshold = 0`` disables event detection.  A controller
    request below ``min_step`` ends the run with ``STEP_UNDERFLOW``; near
    a genuine collapse this is the expected outcome, not an error.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 0.1
    min_step: float = 1e-13
    collapse_threshold: float = 0.0

    def __post_init__(self) -> None:
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise ValueError("tolerances must be positive")
        if not 0.0 < self.min_step < self.max_step:
            raise ValueError("need 0 < min_step < max_step")
        if self.collapse_threshold < 0.0:
            raise ValueError("collapse threshold must be >= 0")


class TerminationCause(Enum):
    REACHED_FINAL_TIME = "reached_final_time"
    EPS_COLLAPSE = "eps_collapse"
    STEP_UNDERFLOW = "step_underflow"


@dataclass(frozen=True)
class Termination:
    cause: TerminationCause
    time: float
    pair: tuple[int, int] | None = None


@dataclass
class TrajectoryRecord:
    """Time-stamped states with separation and invariant logs.

    ``states`` has shape (M, P, 2) with P = N for absolute runs and
    P = N - 1 (the difference vectors) for relative runs.  For relative
    runs the logged vorticity vector and inertia moment refer to the
    anchored embedding (anchor pinned at the origin) and are not flow
    invariants; the energy and the collapse constraint depend only on the
    differences and are.
    """

    kind: str
    intensities: FloatArray
    anchor: int | None
    times: FloatArray
    states: FloatArray
    min_pair_distance: FloatArray
    invariants: dict[str, FloatArray] | None
    termination: Termination
    stats: dict[str, int] = field(default_factory=dict)

    @property
    def n_snapshots(self) -> int:
        return self.times.size

    def system_at(self, index: int):
        if self.kind == "absolute":
            return VortexSystem(self.intensities, self.states[index])
        return RelativeSystem(self.anchor, self.intensities, self.states[index])

    def final_system(self):
        return self.system_at(self.n_snapshots - 1)


def _check_separations(r: np.ndarray, kernel, what: str) -> None:
    if getattr(kernel, "singular_at_zero", True) and np.any(r == 0.0):
        idx = np.argwhere(r == 0.0)[0]
        raise SingularityError(f"coincident {what} (indices {tuple(int(v) for v in idx)}) "
                               "under a singular kernel")


def velocity(system: VortexSystem, kernel, *, compensated: bool = False) -> FloatArray:
    """Velocities of all vortices under the pairwise interaction sum.

    Exact O(N^2) sum in a fixed index order.  ``compensated`` switches the
    reduction to exact floating-point summation for conservation studies.
    """
    x = system.positions
    a = system.intensities
    n = a.size
    if n == 1:
        return np.zeros((1, 2))
    d = x[:, None, :] - x[None, :, :]
    r = np.sqrt(np.einsum("ijk,ijk->ij", d, d))
    off = ~np.eye(n, dtype=bool)
    _check_separations(r[off], kernel, "vortices")
    fac = np.zeros_like(r)
    fac[off] = kernel.perp_factor(r[off])
    # (x_i - x_j)^perp = (-dy, dx)
    contrib_x = -(a[None, :] * fac) * d[:, :, 1]
    contrib_y = (a[None, :] * fac) * d[:, :, 0]
    if compensated:
        v = np.empty((n, 2))
        for i in range(n):
            v[i, 0] = fsum(contrib_x[i, j] for j in range(n) if j != i)
            v[i, 1] = fsum(contrib_y[i, j] for j in range(n) if j != i)
        return v
    return np.stack([contrib_x.sum(axis=1), contrib_y.sum(axis=1)], axis=1)


def _relative_rhs_arrays(a_anchor: float, b: FloatArray, y: FloatArray,
                         kernel) -> FloatArray:
    """Time derivative of the difference vectors, shape (m, 2)."""
    m = b.size
    r = np.hypot(y[:, 0], y[:, 1])
    _check_separations(r, kernel, "anchor separations")
    fac = kernel.perp_factor(r)
    pg = np.stack([-fac * y[:, 1], fac * y[:, 0]], axis=1)

    out = (a_anchor + b)[:, None] * pg
    if m > 1:
        weighted = b[:, None] * pg
        total = weighted.sum(axis=0)
        out += total[None, :] - weighted

        dd = y[:, None, :] - y[None, :, :]
        rr = np.sqrt(np.einsum("jkl,jkl->jk", dd, dd))
        off = ~np.eye(m, dtype=bool)
        _check_separations(rr[off], kernel, "cross separations")
        fx = np.zeros_like(rr)
        fx[off] = kernel.perp_factor(rr[off])
        cx = -(b[None, :] * fx) * dd[:, :, 1]
        cy = (b[None, :] * fx) * dd[:, :, 0]
        out[:, 0] += cx.sum(axis=1)
        out[:, 1] += cy.sum(axis=1)
    return out


def relative_velocity(rel: RelativeSystem, kernel) -> FloatArray:
    """Time derivatives dy_ij/dt of the difference vectors, shape (N-1, 2)."""
    b = rel.intensities[list(rel.others)]
    a_anchor = float(rel.intensities[rel.anchor])
    return _relative_rhs_arrays(a_anchor, b, rel.differences, kernel)


def relative_pseudo_hamiltonian(rel: RelativeSystem, kernel, slot: int) -> float:
    """Generating function for the slot-th difference equation.

    The dynamics of y_ij is the perp-gradient, with respect to y_ij alone,
    of

        (a_i + a_j) G(|y_ij|) + y_ij . sum_{k != i,j} a_k grad G(y_ik)
        + sum_{k != i,j} a_k G(|y_ij - y_ik|).

    One such function exists per pair, so the relative system is not a
    single Hamiltonian flow, but each component inherits the divergence-free
    structure (the basis of the volume-preservation property).
    """
    y = rel.differences
    b = rel.intensities[list(rel.others)]
    a_anchor = float(rel.intensities[rel.anchor])
    yj = y[slot]
    rj = float(np.hypot(yj[0], yj[1]))
    total = (a_anchor + b[slot]) * float(kernel.value(rj))
    for k in range(b.size):
        if k == slot:
            continue
        yk = y[k]
        rk = float(np.hypot(yk[0], yk[1]))
        grad_k = float(kernel.radial_derivative(rk)) / rk * yk
        total += float(b[k]) * float(yj @ grad_k)
        cross = yj - yk
        total += float(b[k]) * float(kernel.value(float(np.hypot(cross[0], cross[1]))))
    return float(total)


def _record_arrays(kind, intensities, anchor, times, states, mins, invars,
                   termination, stats) -> TrajectoryRecord:
    inv = None
    if invars is not None:
        inv = {
            "hamiltonian": np.array(invars["hamiltonian"]),
            "vorticity_vector": np.array(invars["vorticity_vector"]),
            "moment_of_inertia": np.array(invars["moment_of_inertia"]),
            "collapse_constraint": np.array(invars["collapse_constraint"]),
        }
    return TrajectoryRecord(
        kind=kind,
        intensities=np.array(intensities),
        anchor=anchor,
        times=np.array(times),
        states=np.array(states),
        min_pair_distance=np.array(mins),
        invariants=inv,
        termination=termination,
        stats=stats,
    )


def _termination_from(status: int, t_end: float, state, pair) -> Termination:
    if status == REACHED:
        return Termination(TerminationCause.REACHED_FINAL_TIME, t_end)
    if status == EVENT:
        return Termination(TerminationCause.EPS_COLLAPSE, t_end, pair)
    return Termination(TerminationCause.STEP_UNDERFLOW, t_end)


def integrate(
    system: VortexSystem,
    kernel,
    final_time: float,
    config: IntegratorConfig | None = None,
    *,
    checkpoints: Sequence[float] = (),
    record_invariants: bool = True,
    dense_record: bool = True,
) -> TrajectoryRecord:
    """Advance the absolute system to ``final_time`` (may be negative).

    Every accepted step is recorded unless ``dense_record`` is off, in
    which case only the initial and terminal states (and any checkpoints)
    are kept.  Invariant logging can be disabled for throughput.
    """
    config = config or IntegratorConfig()
    a = system.intensities
    n = a.size
    shape = (n, 2)

    if getattr(kernel, "singular_at_zero", True) and n > 1:
        if system.min_pair_distance() == 0.0:
            raise SingularityError("coincident vortices under a singular kernel")

    def rhs(t: float, flat: np.ndarray) -> np.ndarray:
        sys_t = VortexSystem(a, flat.reshape(shape))
        return velocity(sys_t, kernel).ravel()

    def dist(flat: np.ndarray) -> float:
        return q.min_pair_distance(flat.reshape(shape))

    times: list[float] = []
    states: list[np.ndarray] = []
    mins: list[float] = []
    invars = {"hamiltonian": [], "vorticity_vector": [],
              "moment_of_inertia": [], "collapse_constraint": []} \
        if record_invariants else None
    cp_set = {float(c) for c in checkpoints}

    def on_accept(t: float, flat: np.ndarray) -> None:
        # Sparse mode keeps the initial state, checkpoints and a rolling tail.
        if not dense_record and len(times) > 1 and times[-1] not in cp_set:
            times.pop(), states.pop(), mins.pop()
            if invars is not None:
                for v in invars.values():
                    v.pop()
        x = flat.reshape(shape).copy()
        times.append(t)
        states.append(x)
        mins.append(q.min_pair_distance(x))
        if invars is not None:
            invars["hamiltonian"].append(q.hamiltonian(a, x, kernel))
            invars["vorticity_vector"].append(q.vorticity_vector(a, x))
            invars["moment_of_inertia"].append(q.moment_of_inertia(a, x))
            invars["collapse_constraint"].append(q.collapse_constraint(a, x))

    res = solve_dopri(
        rhs, 0.0, system.positions.ravel(), float(final_time),
        rel_tol=config.rel_tol, abs_tol=config.abs_tol,
        max_step=config.max_step, min_step=config.min_step,
        event_distance=dist if n > 1 else None,
        event_threshold=config.collapse_threshold,
        checkpoints=checkpoints,
        on_accept=on_accept,
    )

    pair = None
    if res.status == EVENT:
        x_end = res.y_end.reshape(shape)
        r = q.pair_distance_matrix(x_end)
        iu = np.triu_indices(n, k=1)
        k = int(np.argmin(r[iu]))
        pair = (int(iu[0][k]), int(iu[1][k]))
    term = _termination_from(res.status, res.t_end, res.y_end, pair)
    stats = {"accepted": res.n_accepted, "rejected": res.n_rejected,
             "rhs_evaluations": res.n_rhs}
    return _record_arrays("absolute", a, None, times, states, mins, invars,
                          term, stats)


def integrate_relative(
    rel: RelativeSystem,
    kernel,
    final_time: float,
    config: IntegratorConfig | None = None,
    *,
    checkpoints: Sequence[float] = (),
    record_invariants: bool = True,
    dense_record: bool = True,
) -> TrajectoryRecord:
    """Advance the difference coordinates; the collapse event watches the
    anchor separations ``min_j |y_ij|``."""
    config = config or IntegratorConfig()
    a = rel.intensities
    anchor = rel.anchor
    others = list(rel.others)
    b = a[others]
    a_anchor = float(a[anchor])
    m = b.size
    shape = (m, 2)

    def rhs(t: float, flat: np.ndarray) -> np.ndarray:
        return _relative_rhs_arrays(a_anchor, b, flat.reshape(shape),
                                    kernel).ravel()

    def dist(flat: np.ndarray) -> float:
        y = flat.reshape(shape)
        return q.relative_min_distance(y)

    times: list[float] = []
    states: list[np.ndarray] = []
    mins: list[float] = []
    invars = {"hamiltonian": [], "vorticity_vector": [],
              "moment_of_inertia": [], "collapse_constraint": []} \
        if record_invariants else None
    cp_set = {float(c) for c in checkpoints}

    def on_accept(t: float, flat: np.ndarray) -> None:
        if not dense_record and len(times) > 1 and times[-1] not in cp_set:
            times.pop(), states.pop(), mins.pop()
            if invars is not None:
                for v in invars.values():
                    v.pop()
        y = flat.reshape(shape).copy()
        times.append(t)
        states.append(y)
        mins.append(q.relative_min_distance(y))
        if invars is not None:
            x = q.relative_full_positions(anchor, y)
            invars["hamiltonian"].append(q.hamiltonian(a, x, kernel))
            invars["vorticity_vector"].append(q.vorticity_vector(a, x))
            invars["moment_of_inertia"].append(q.moment_of_inertia(a, x))
            invars["collapse_constraint"].append(q.collapse_constraint(a, x))

    res = solve_dopri(
        rhs, 0.0, rel.differences.ravel(), float(final_time),
        rel_tol=config.rel_tol, abs_tol=config.abs_tol,
        max_step=config.max_step, min_step=config.min_step,
        event_distance=dist,
        event_threshold=config.collapse_threshold,
        checkpoints=checkpoints,
        on_accept=on_accept,
    )

    pair = None
    if res.status == EVENT:
        y_end = res.y_end.reshape(shape)
        slot = int(np.argmin(np.hypot(y_end[:, 0], y_end[:, 1])))
        pair = (anchor, others[slot])
    term = _termination_from(res.status, res.t_end, res.y_end, pair)
    stats = {"accepted": res.n_accepted, "rejected": res.n_rejected,
             "rhs_evaluations": res.n_rhs}
    return _record_arrays("relative", a, anchor, times, states, mins, invars,
                          term, stats)


def _flat_field(state, kernel):
    """Flattened velocity field and the matching flat initial state."""
    if isinstance(state, VortexSystem):
        a = state.intensities
        n = a.size

        def rhs(flat: np.ndarray) -> np.ndarray:
            return velocity(VortexSystem(a, flat.reshape(n, 2)), kernel).ravel()

        return rhs, state.positions.ravel()
    if isinstance(state, RelativeSystem):
        b = state.intensities[list(state.others)]
        a_anchor = float(state.intensities[state.anchor])
        m = b.size

        def rhs(flat: np.ndarray) -> np.ndarray:
            return _relative_rhs_arrays(a_anchor, b, flat.reshape(m, 2),
                                        kernel).ravel()

        return rhs, state.differences.ravel()
    raise TypeError(f"unsupported state type {type(state)!r}")


def phase_space_divergence(state, kernel, h: float = 1e-5) -> float:
    """Central-difference divergence of the full phase-space velocity field.

    The field is a perp-gradient in every coordinate pair, so the analytic
    divergence vanishes identically and the returned value measures only
    discretization and round-off.  Accepts absolute or relative states.
    """
    if h <= 0.0:
        raise ValueError("finite-difference step must be positive")
    rhs, flat = _flat_field(state, kernel)
    total = 0.0
    for idx in range(flat.size):
        plus = flat.copy()
        minus = flat.copy()
        plus[idx] += h
        minus[idx] -= h
        total += (rhs(plus)[idx] - rhs(minus)[idx]) / (2.0 * h)
    return float(total)


def flow_map_jacobian(
    system,
    kernel,
    final_time: float,
    config: IntegratorConfig | None = None,
    h: float = 1e-6,
) -> FloatArray:
    """Finite-difference Jacobian of the time-``final_time`` flow map.

    Volume preservation of the dynamics shows up as a unit determinant.
    """
    config = config or IntegratorConfig()
    if isinstance(system, VortexSystem):
        flat0 = system.positions.ravel()

        def advance(flat: np.ndarray) -> np.ndarray:
            sys0 = VortexSystem(system.intensities, flat.reshape(-1, 2))
            rec = integrate(sys0, kernel, final_time, config,
                            record_invariants=False, dense_record=False)
            return rec.states[-1].ravel()
    else:
        flat0 = system.differences.ravel()

        def advance(flat: np.ndarray) -> np.ndarray:
            rel0 = system.with_differences(flat.reshape(-1, 2))
            rec = integrate_relative(rel0, kernel, final_time, config,
                                     record_invariants=False, dense_record=False)
            return rec.states[-1].ravel()

    d = flat0.size
    jac = np.empty((d, d))
    for idx in range(d):
        plus = flat0.copy()
        minus = flat0.copy()
        plus[idx] += h
        minus[idx] -= h
        jac[:, idx] = (advance(plus) - advance(minus)) / (2.0 * h)
    return jac

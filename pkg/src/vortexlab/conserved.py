"""Conserved quantities, cluster diagnostics and drift audits.

Four scalars are constant along point-vortex trajectories: the interaction
energy H, the weighted position sum M (a planar vector), the weighted
second moment I, and the quadratic

    C = sum_{i != j} a_i a_j |x_i - x_j|^2 = 2 (sum_i a_i) I - 2 |M|^2,

whose vanishing is a necessary condition for a three-vortex collapse.
The identity on the right is recomputed alongside the direct sum and the
residual is surfaced as a permanent self-test.

Cluster diagnostics classify an intensity vector by the smallest absolute
subset sum: systems where every nonempty subset has nonzero total behave
qualitatively differently (uniformly bounded trajectories) from systems
where only proper subsets do, or where some subset is exactly neutral.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _quantities as q
from .dynamics import RelativeSystem, TrajectoryRecord, VortexSystem

__all__ = [
    "InvariantSnapshot",
    "ClusterClass",
    "ClusterDiagnostics",
    "hamiltonian",
    "vorticity_vector",
    "moment_of_inertia",
    "center_of_vorticity",
    "collapse_constraint",
    "collapse_identity_residual",
    "diameter",
    "invariant_snapshot",
    "cluster_diagnostics",
    "drift_audit",
    "MAX_SUBSET_N",
]

# Exhaustive subset enumeration is exact but exponential; 2^24 sums is the
# largest array worth materializing.
MAX_SUBSET_N = 24


def _positions_of(state) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(state, VortexSystem):
        return state.intensities, state.positions
    if isinstance(state, RelativeSystem):
        return state.intensities, q.relative_full_positions(state.anchor,
                                                            state.differences)
    raise TypeError(f"unsupported state type {type(state)!r}")


def hamiltonian(system, kernel) -> float:
    """Interaction energy ``sum_{i != j} a_i a_j G(|x_i - x_j|)``.

    Relative states are evaluated through the anchored embedding; the
    result depends only on the difference vectors.
    """
    a, x = _positions_of(system)
    return q.hamiltonian(a, x, kernel)


def vorticity_vector(system) -> np.ndarray:
    """``M = sum_i a_i x_i``."""
    a, x = _positions_of(system)
    return q.vorticity_vector(a, x)


def moment_of_inertia(system) -> float:
    """``I = sum_i a_i |x_i|^2``."""
    a, x = _positions_of(system)
    return q.moment_of_inertia(a, x)


def center_of_vorticity(system) -> np.ndarray | None:
    """``M / sum_i a_i``, or None for a neutral system (never divides)."""
    a, x = _positions_of(system)
    total = float(np.sum(a))
    if total == 0.0:
        return None
    return q.vorticity_vector(a, x) / total


def collapse_constraint(system) -> float:
    """``C = sum_{i != j} a_i a_j |x_i - x_j|^2`` by the direct double sum."""
    a, x = _positions_of(system)
    return q.collapse_constraint(a, x)


def collapse_identity_residual(system) -> float:
    """Relative residual of ``C = 2 (sum a_i) I - 2 |M|^2``.

    Normalized by ``max(|C|, sum |a_i a_j| d_ij^2, 1e-30)`` so systems with
    cancelling terms are judged against the magnitude of what cancelled.
    """
    a, x = _positions_of(system)
    direct = q.collapse_constraint(a, x)
    m = q.vorticity_vector(a, x)
    via_identity = (2.0 * float(np.sum(a)) * q.moment_of_inertia(a, x)
                    - 2.0 * float(m @ m))
    n = a.size
    if n < 2:
        return abs(direct - via_identity)
    d = x[:, None, :] - x[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", d, d)
    gross = float(np.sum(np.abs(np.outer(a, a)) * r2))
    scale = max(abs(direct), gross, 1e-30)
    return abs(direct - via_identity) / scale


def diameter(system) -> float:
    """Largest pairwise distance.  Reports 0 for N = 1 by convention."""
    _, x = _positions_of(system)
    return q.diameter(x)


@dataclass(frozen=True)
class InvariantSnapshot:
    """The conserved quantities of one state, plus the identity residual."""

    hamiltonian: float
    vorticity_vector: np.ndarray
    moment_of_inertia: float
    collapse_constraint: float
    diameter: float
    center_of_vorticity: np.ndarray | None
    identity_residual: float


def invariant_snapshot(system, kernel) -> InvariantSnapshot:
    """Evaluate every conserved quantity of a state at once."""
    return InvariantSnapshot(
        hamiltonian=hamiltonian(system, kernel),
        vorticity_vector=vorticity_vector(system),
        moment_of_inertia=moment_of_inertia(system),
        collapse_constraint=collapse_constraint(system),
        diameter=diameter(system),
        center_of_vorticity=center_of_vorticity(system),
        identity_residual=collapse_identity_residual(system),
    )


class ClusterClass(Enum):
    NON_NEUTRAL_CLUSTERS = "non_neutral_clusters"
    NON_NEUTRAL_SUB_CLUSTERS = "non_neutral_sub_clusters"
    NEUTRAL = "neutral"


@dataclass(frozen=True)
class ClusterDiagnostics:
    """Subset-sum extrema of an intensity vector.

    ``total_abs`` is ``sum |a_i|``; ``min_proper_subset_sum`` the smallest
    ``|sum_{i in P} a_i|`` over nonempty proper subsets P; ``min_subset_sum``
    the same minimum with the full set included, which equals
    ``min(min_proper_subset_sum, |sum a_i|)``.
    """

    total_abs: float
    min_proper_subset_sum: float
    min_subset_sum: float
    classification: ClusterClass


def cluster_diagnostics(intensities) -> ClusterDiagnostics:
    """Exact subset-sum minima by exhaustive enumeration (N <= 24)."""
    a = np.asarray(intensities, dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise ValueError("intensities must be a non-empty 1D sequence")
    n = a.size
    if n > MAX_SUBSET_N:
        raise ValueError(f"subset enumeration capped at N={MAX_SUBSET_N}, got {n}")

    # Doubling construction: sums[mask] is the subset sum for that bitmask.
    sums = np.zeros(1)
    for ai in a:
        sums = np.concatenate([sums, sums + ai])
    total = float(sums[-1])

    if n == 1:
        a0 = np.inf  # no nonempty proper subset exists
    else:
        proper = np.abs(sums[1:-1])
        a0 = float(np.min(proper))
    a_min = min(a0, abs(total))

    if a_min > 0.0:
        cls = ClusterClass.NON_NEUTRAL_CLUSTERS
    elif a0 > 0.0:
        cls = ClusterClass.NON_NEUTRAL_SUB_CLUSTERS
    else:
        cls = ClusterClass.NEUTRAL
    return ClusterDiagnostics(
        total_abs=float(np.sum(np.abs(a))),
        min_proper_subset_sum=a0,
        min_subset_sum=a_min,
        classification=cls,
    )


def trajectory_invariants(record: TrajectoryRecord, kernel) -> dict[str, np.ndarray]:
    """Recompute the invariant log of a record from its stored states."""
    vals = {"hamiltonian": [], "vorticity_vector": [],
            "moment_of_inertia": [], "collapse_constraint": []}
    for idx in range(record.n_snapshots):
        state = record.system_at(idx)
        a, x = _positions_of(state)
        vals["hamiltonian"].append(q.hamiltonian(a, x, kernel))
        vals["vorticity_vector"].append(q.vorticity_vector(a, x))
        vals["moment_of_inertia"].append(q.moment_of_inertia(a, x))
        vals["collapse_constraint"].append(q.collapse_constraint(a, x))
    return {k: np.array(v) for k, v in vals.items()}


def drift_audit(
    record: TrajectoryRecord,
    kernel=None,
    quantities: tuple[str, ...] = ("hamiltonian", "vorticity_vector",
                                   "moment_of_inertia", "collapse_constraint"),
) -> dict[str, float]:
    """Worst relative drift of each invariant along a trajectory.

    Drift of Q is ``max_t |Q(t) - Q(0)| / max(|Q(0)|, 1)``; the floor of 1
    keeps quantities that start at zero (such as the energy of an
    opposite-sign pair at unit distance) from dividing by zero.  Uses the
    record's invariant log when present, otherwise recomputes it, which
    requires the kernel.
    """
    if record.n_snapshots < 2:
        raise ValueError("drift audit needs at least two snapshots")
    log = record.invariants
    if log is None:
        if kernel is None:
            raise ValueError("record has no invariant log; pass the kernel")
        log = trajectory_invariants(record, kernel)

    out: dict[str, float] = {}
    for name in quantities:
        series = log[name]
        if series.ndim == 1:
            dev = np.abs(series - series[0])
            scale = max(abs(float(series[0])), 1.0)
        else:
            dev = np.linalg.norm(series - series[0], axis=1)
            scale = max(float(np.linalg.norm(series[0])), 1.0)
        out[name] = float(np.max(dev)) / scale
    return out

"""Array-level formulas for the conserved quantities.

Shared by the trajectory recorder and the public ``conserved`` module so
neither has to import the other.  All functions take raw arrays:
``a`` of shape (N,) and ``x`` of shape (N, 2) for absolute positions, or
the anchor intensity, the other intensities ``b`` of shape (N-1,) and the
difference vectors ``y`` of shape (N-1, 2) for relative states.
"""

from __future__ import annotations

import numpy as np

from .errors import SingularityError


def pair_distance_matrix(x: np.ndarray) -> np.ndarray:
    """Full (N, N) matrix of pairwise distances, zero diagonal."""
    d = x[:, None, :] - x[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", d, d))


def min_pair_distance(x: np.ndarray) -> float:
    n = x.shape[0]
    if n < 2:
        return np.inf
    r = pair_distance_matrix(x)
    iu = np.triu_indices(n, k=1)
    return float(np.min(r[iu]))


def hamiltonian(a: np.ndarray, x: np.ndarray, kernel) -> float:
    """Interaction energy ``sum_{i != j} a_i a_j G(|x_i - x_j|)``."""
    n = a.size
    if n < 2:
        return 0.0
    r = pair_distance_matrix(x)
    iu = np.triu_indices(n, k=1)
    rv = r[iu]
    if kernel.singular_at_zero and np.any(rv == 0.0):
        raise SingularityError("coincident vortices under a singular kernel")
    g = kernel.value(rv)
    # Ordered double sum = twice the sum over unordered pairs.
    return 2.0 * float(np.sum(a[iu[0]] * a[iu[1]] * g))


def vorticity_vector(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Weighted position sum ``sum_i a_i x_i``."""
    return a @ x


def moment_of_inertia(a: np.ndarray, x: np.ndarray) -> float:
    """Weighted second moment ``sum_i a_i |x_i|^2``."""
    return float(a @ np.einsum("ij,ij->i", x, x))


def collapse_constraint(a: np.ndarray, x: np.ndarray) -> float:
    """Conserved quadratic ``sum_{i != j} a_i a_j |x_i - x_j|^2``."""
    n = a.size
    if n < 2:
        return 0.0
    d = x[:, None, :] - x[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", d, d)
    iu = np.triu_indices(n, k=1)
    return 2.0 * float(np.sum(a[iu[0]] * a[iu[1]] * r2[iu]))


def diameter(x: np.ndarray) -> float:
    """Largest pairwise distance; 0 for a single point by convention."""
    if x.shape[0] < 2:
        return 0.0
    r = pair_distance_matrix(x)
    return float(np.max(r))


def relative_min_distance(y: np.ndarray) -> float:
    """Smallest anchor separation ``min_j |y_j|``."""
    return float(np.min(np.hypot(y[:, 0], y[:, 1])))


def anchored_positions(y: np.ndarray) -> np.ndarray:
    """Embed a relative state with the anchor at the origin.

    With differences ``y_j = x_anchor - x_j``, the embedding places
    ``x_anchor = 0`` and ``x_j = -y_j``.
    """
    m = y.shape[0]
    out = np.empty((m + 1, 2))
    out[0] = 0.0
    out[1:] = -y
    return out


def relative_full_positions(anchor: int, y: np.ndarray) -> np.ndarray:
    """Anchored embedding with the anchor restored to its original index."""
    m = y.shape[0]
    out = np.empty((m + 1, 2))
    others = [j for j in range(m + 1) if j != anchor]
    out[anchor] = 0.0
    for slot, j in enumerate(others):
        out[j] = -y[slot]
    return out

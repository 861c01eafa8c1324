"""Monte Carlo estimation of the near-collapse measure and collapse search.

The probability that randomly placed vortices drive some pair within a
distance ``epsilon`` of each other is estimated by sampling difference
vectors uniformly from a disk of radius ``rho``, integrating the capped
dynamics over a fixed horizon, and recording first passages of the anchor
separations below ``epsilon``.  For the power-law kernel of order ``s``
the measure of that event set is bounded by a constant times

    epsilon                if s > 1/2,
    epsilon log(1/epsilon) if s = 1/2,
    epsilon^(2s)           if s < 1/2,

so the scan fits a log-log slope across the epsilon cells and reports the
largest ratio of observed fraction to the rate law as the empirical bound
constant.

The module also evaluates the blow-up diagnostics used to derive that
bound (a capped steep kernel summed over the anchor separations, and the
majorant of its time derivative), and searches for three-vortex initial
data on the codimension-one surface C = 0 where a genuine finite-time
collapse is possible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from . import _quantities as q
from .dynamics import (
    IntegratorConfig,
    RelativeSystem,
    TerminationCause,
    VortexSystem,
    integrate,
    integrate_relative,
)
from .kernels import (
    MAX_EPSILON,
    auxiliary_kernel,
    euler_kernel,
    kernel_for_order,
    regularize,
)

try:
    from . import _fastprobe
    HAVE_FAST_PROBE = _fastprobe.AVAILABLE
except Exception:  # pragma: no cover - numba missing or broken
    _fastprobe = None
    HAVE_FAST_PROBE = False

__all__ = [
    "ScanConfig",
    "ScanCell",
    "CollapseScanResult",
    "ProbeResult",
    "PhiDiagnostics",
    "RateLaw",
    "rate_law_for_order",
    "rate_value",
    "wilson_interval",
    "sample_initial_relative",
    "eps_collapse_probe",
    "scan",
    "phi_psi",
    "find_collapse_candidate",
    "HAVE_FAST_PROBE",
]

MIN_SAMPLES = 100


def _default_scan_integrator() -> IntegratorConfig:
    # Capped dynamics is globally smooth; modest tolerances are plenty for
    # hit statistics and keep the probe throughput high.
    return IntegratorConfig(rel_tol=1e-5, abs_tol=1e-8, max_step=0.05,
                            min_step=1e-12)


@dataclass(frozen=True)
class ScanConfig:
    """Parameters of one collapse-measure scan.

    ``epsilons`` must decrease strictly and stay within (0, 1/2]; each cell
    draws ``samples_per_epsilon`` independent initial conditions.  The
    generator for sample ``k`` of cell ``e`` is derived from
    ``(rng_seed, e, k)`` alone, so results do not depend on how probes are
    distributed over workers.
    """

    s: float
    anchor: int
    intensities: tuple[float, ...]
    rho: float
    horizon: float
    epsilons: tuple[float, ...]
    samples_per_epsilon: int
    rng_seed: int
    integrator: IntegratorConfig = field(default_factory=_default_scan_integrator)

    def __post_init__(self) -> None:
        if not 0.0 < self.s <= 1.0:
            raise ValueError(f"interaction order must lie in (0, 1], got {self.s}")
        a = np.asarray(self.intensities, dtype=float)
        if a.ndim != 1 or a.size < 2 or np.any(a == 0.0) or not np.all(np.isfinite(a)):
            raise ValueError("intensities must be >= 2 finite nonzero reals")
        if not 0 <= self.anchor < a.size:
            raise ValueError(f"anchor {self.anchor} out of range for N={a.size}")
        if self.rho <= 0.0:
            raise ValueError("sampling radius rho must be positive")
        if self.horizon <= 0.0:
            raise ValueError("horizon must be positive")
        eps = tuple(float(e) for e in self.epsilons)
        if not eps or any(not 0.0 < e <= MAX_EPSILON for e in eps):
            raise ValueError(f"epsilons must lie in (0, {MAX_EPSILON}]")
        if any(e2 >= e1 for e1, e2 in zip(eps, eps[1:])):
            raise ValueError("epsilons must decrease strictly")
        if self.samples_per_epsilon < MIN_SAMPLES:
            raise ValueError(f"need at least {MIN_SAMPLES} samples per epsilon")
        object.__setattr__(self, "intensities", tuple(float(v) for v in a))
        object.__setattr__(self, "epsilons", eps)


class RateLaw(Enum):
    LINEAR = "linear"
    LINEAR_LOG = "linear_log"
    POWER_2S = "power_2s"


def rate_law_for_order(s: float) -> RateLaw:
    """Which bound family applies at interaction order ``s``."""
    if s > 0.5:
        return RateLaw.LINEAR
    if s == 0.5:
        return RateLaw.LINEAR_LOG
    return RateLaw.POWER_2S


def rate_value(law: RateLaw, epsilon: float, s: float) -> float:
    if law is RateLaw.LINEAR:
        return epsilon
    if law is RateLaw.LINEAR_LOG:
        return epsilon * math.log(1.0 / epsilon)
    return epsilon ** (2.0 * s)


def wilson_interval(hits: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Wilson score interval; well behaved at zero and full counts."""
    if n <= 0:
        raise ValueError("need a positive sample count")
    p = hits / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2.0 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom
    # At degenerate counts center == half (resp. 1 - center == half) exactly;
    # pin the bound so round-off cannot leak past the endpoint.
    low = 0.0 if hits == 0 else max(0.0, center - half)
    high = 1.0 if hits == n else min(1.0, center + half)
    return (low, high)


@dataclass(frozen=True)
class ScanCell:
    """Per-epsilon tally of one scan."""

    epsilon: float
    sample_count: int
    hit_count: int
    initial_overlap_hits: int
    inconclusive_count: int
    measure_fraction: float
    wilson_low: float
    wilson_high: float

    @property
    def dynamical_hits(self) -> int:
        return self.hit_count - self.initial_overlap_hits


@dataclass(frozen=True)
class CollapseScanResult:
    """Scan tallies plus the fitted scaling diagnostics.

    ``fitted_exponent`` is the least-squares slope of log fraction against
    log epsilon over the cells with at least ``fit_min_hits`` hits (None
    when fewer than two qualify).  ``bound_constant`` is the largest
    fraction-to-rate ratio, the empirical stand-in for the constant in the
    measure bound.
    """

    config: ScanConfig
    cells: tuple[ScanCell, ...]
    rate_law: RateLaw
    fitted_exponent: float | None
    fit_epsilons: tuple[float, ...]
    bound_constant: float
    fit_min_hits: int = 10


@dataclass(frozen=True)
class ProbeResult:
    """Outcome of one initial condition.

    ``inconclusive`` marks a run the step controller abandoned while every
    anchor separation still exceeded epsilon; such runs are tallied apart
    because counting them either way would bias the measure estimate.
    """

    hit: bool
    first_time: float | None
    inconclusive: bool = False


def _sample_disk(rng: np.random.Generator, rho: float) -> tuple[float, float]:
    # Rejection from the bounding square keeps the draw sequence simple and
    # exactly reproducible for a given generator state.
    while True:
        px = rng.uniform(-rho, rho)
        py = rng.uniform(-rho, rho)
        if px * px + py * py <= rho * rho:
            return px, py


def sample_initial_relative(config: ScanConfig, rng: np.random.Generator) -> RelativeSystem:
    """Draw each difference vector uniformly from the disk of radius rho."""
    n = len(config.intensities)
    y = np.empty((n - 1, 2))
    for slot in range(n - 1):
        y[slot] = _sample_disk(rng, config.rho)
    return RelativeSystem(config.anchor, np.array(config.intensities), y)


def _probe_rng(seed: int, eps_index: int, sample_index: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(eps_index, sample_index)))


def eps_collapse_probe(
    rel: RelativeSystem,
    s: float,
    epsilon: float,
    horizon: float,
    integrator: IntegratorConfig | None = None,
    *,
    use_fast_path: bool = True,
) -> ProbeResult:
    """Integrate the capped dynamics and watch for an anchor separation
    at or below epsilon.

    ``hit`` is the first passage of ``min_j |y_ij(t)|`` to epsilon within
    the horizon (time located by bisection; exactly 0.0 when the sampled
    state already overlaps).
    """
    integrator = integrator or _default_scan_integrator()
    if use_fast_path and HAVE_FAST_PROBE:
        b = rel.intensities[list(rel.others)]
        status, t_ev = _fastprobe.probe(
            rel.differences.ravel().copy(),
            float(rel.intensities[rel.anchor]), np.asarray(b, dtype=float),
            float(s), float(epsilon), float(horizon),
            integrator.rel_tol, integrator.abs_tol,
            integrator.max_step, integrator.min_step,
        )
        if status == _fastprobe.EVENT:
            return ProbeResult(True, t_ev)
        if status == _fastprobe.UNDERFLOW:
            return ProbeResult(False, None, inconclusive=True)
        return ProbeResult(False, None)

    kernel = regularize(kernel_for_order(s), epsilon)
    cfg = replace(integrator, collapse_threshold=epsilon)
    rec = integrate_relative(rel, kernel, horizon, cfg,
                             record_invariants=False, dense_record=False)
    cause = rec.termination.cause
    if cause is TerminationCause.EPS_COLLAPSE:
        return ProbeResult(True, rec.termination.time)
    if cause is TerminationCause.STEP_UNDERFLOW:
        return ProbeResult(False, None, inconclusive=True)
    return ProbeResult(False, None)


def _run_cell_range(args) -> tuple[int, int, int, int]:
    """Worker body: probe samples [start, stop) of one epsilon cell."""
    config, eps_index, start, stop, use_fast = args
    epsilon = config.epsilons[eps_index]
    hits = 0
    overlaps = 0
    inconclusive = 0
    for k in range(start, stop):
        rng = _probe_rng(config.rng_seed, eps_index, k)
        rel = sample_initial_relative(config, rng)
        res = eps_collapse_probe(rel, config.s, epsilon, config.horizon,
                                 config.integrator, use_fast_path=use_fast)
        if res.hit:
            hits += 1
            if res.first_time == 0.0:
                overlaps += 1
        elif res.inconclusive:
            inconclusive += 1
    return hits, overlaps, inconclusive, stop - start


def _fit_exponent(cells: Sequence[ScanCell], min_hits: int) -> tuple[float | None, tuple[float, ...]]:
    usable = [c for c in cells if c.hit_count >= min_hits]
    if len(usable) < 2:
        return None, ()
    lx = np.log([c.epsilon for c in usable])
    ly = np.log([c.measure_fraction for c in usable])
    slope = float(np.polyfit(lx, ly, 1)[0])
    return slope, tuple(c.epsilon for c in usable)


def scan(
    config: ScanConfig,
    *,
    n_workers: int = 1,
    use_fast_path: bool = True,
    progress: Callable[[int, float], None] | None = None,
) -> CollapseScanResult:
    """Run the full measure scan described by ``config``.

    Probes are independent; ``n_workers > 1`` fans them out over a process
    pool.  Results are identical for any worker count because each probe
    derives its generator from the sample coordinates alone.
    """
    chunk = 500
    tasks = []
    for ei in range(len(config.epsilons)):
        for start in range(0, config.samples_per_epsilon, chunk):
            stop = min(start + chunk, config.samples_per_epsilon)
            tasks.append((config, ei, start, stop, use_fast_path))

    tallies = {ei: [0, 0, 0, 0] for ei in range(len(config.epsilons))}

    def absorb(task, outcome):
        ei = task[1]
        for slot in range(4):
            tallies[ei][slot] += outcome[slot]
        if progress is not None:
            done = tallies[ei][3]
            progress(ei, done / config.samples_per_epsilon)

    if n_workers > 1:
        import multiprocessing as mp

        with mp.get_context("spawn").Pool(n_workers) as pool:
            for task, outcome in zip(tasks, pool.map(_run_cell_range, tasks)):
                absorb(task, outcome)
    else:
        for task in tasks:
            absorb(task, _run_cell_range(task))

    cells = []
    for ei, epsilon in enumerate(config.epsilons):
        hits, overlaps, inconclusive, count = tallies[ei]
        low, high = wilson_interval(hits, count)
        cells.append(ScanCell(
            epsilon=epsilon,
            sample_count=count,
            hit_count=hits,
            initial_overlap_hits=overlaps,
            inconclusive_count=inconclusive,
            measure_fraction=hits / count,
            wilson_low=low,
            wilson_high=high,
        ))
    cells = tuple(cells)

    law = rate_law_for_order(config.s)
    slope, fit_eps = _fit_exponent(cells, 10)
    bound = max((c.measure_fraction / rate_value(law, c.epsilon, config.s)
                 for c in cells), default=0.0)
    return CollapseScanResult(
        config=config,
        cells=cells,
        rate_law=law,
        fitted_exponent=slope,
        fit_epsilons=fit_eps,
        bound_constant=float(bound),
    )


@dataclass(frozen=True)
class PhiDiagnostics:
    """Values of the blow-up functional and its derivative majorant."""

    phi: float
    psi: float
    a_param: float
    epsilon: float


def phi_psi(
    rel: RelativeSystem,
    s: float,
    epsilon: float,
    a_param: float = 1.0,
) -> PhiDiagnostics:
    """Evaluate the collapse diagnostics at one relative state.

    ``phi`` sums the capped steep kernel ``q^(-2-a)`` over the anchor
    separations, so it grows without bound as the state approaches an
    anchor collapse.  ``psi`` bounds ``|d phi / dt|`` along the capped
    dynamics:

        psi = sum_j sum_{k != j} |a_k| |L'(|y_j|)|
              ( |G'(|y_k|)| + |G'(|y_j - y_k|)| ),

    with L the capped steep kernel and G the capped interaction kernel.
    With no third vortex the double sum is empty and psi is zero.
    """
    if a_param <= 0.0:
        raise ValueError("a_param must be positive")
    aux = auxiliary_kernel(a_param, epsilon)
    gker = regularize(kernel_for_order(s), epsilon)
    y = rel.differences
    b = rel.intensities[list(rel.others)]
    m = b.size
    r = np.hypot(y[:, 0], y[:, 1])

    phi = float(np.sum(aux.value(r)))

    psi = 0.0
    if m > 1:
        dl = np.abs(aux.radial_derivative(r))
        dg = np.abs(gker.radial_derivative(r))
        for j in range(m):
            for k in range(m):
                if k == j:
                    continue
                cross = y[j] - y[k]
                rc = float(np.hypot(cross[0], cross[1]))
                psi += abs(float(b[k])) * float(dl[j]) * (
                    float(dg[k]) + abs(float(gker.radial_derivative(rc))))
    return PhiDiagnostics(phi=phi, psi=float(psi), a_param=a_param, epsilon=epsilon)


def _collapse_value(a: np.ndarray, x1, x2, x3) -> float:
    x = np.array([x1, x2, x3])
    return q.collapse_constraint(a, x)


def _mirror(system: VortexSystem) -> VortexSystem:
    flipped = system.positions.copy()
    flipped[:, 1] *= -1.0
    return VortexSystem(system.intensities, flipped)


def _shrinks(system: VortexSystem, kernel, horizon: float) -> bool:
    """True when the minimal separation contracts markedly under the flow."""
    d0 = system.min_pair_distance()
    cfg = IntegratorConfig(rel_tol=1e-8, abs_tol=1e-10, max_step=0.05,
                           min_step=1e-12, collapse_threshold=0.25 * d0)
    rec = integrate(system, kernel, horizon, cfg,
                    record_invariants=False, dense_record=True)
    if rec.termination.cause in (TerminationCause.EPS_COLLAPSE,
                                 TerminationCause.STEP_UNDERFLOW):
        return True
    return bool(np.min(rec.min_pair_distance) < 0.9 * d0
                and rec.min_pair_distance[-1] < d0)


def find_collapse_candidate(
    intensities,
    rng: np.random.Generator,
    *,
    attempts: int = 400,
    c_tolerance: float = 1e-10,
    verify_horizon: float = 5.0,
    kernel=None,
) -> VortexSystem | None:
    """Search for a three-vortex configuration with C = 0 that contracts.

    Two vortices are placed at random; the third moves along a random ray
    and the crossing of C through zero is located by 1D root finding (the
    constraint is quadratic along the ray, so a bracket guarantees a
    root).  Configurations too close to the equilateral shape, which is a
    rigidly rotating equilibrium on the C = 0 surface, are rejected.  The
    surviving shape is integrated briefly under the logarithmic kernel;
    when it expands, its mirror image (same distances, opposite chirality,
    hence C unchanged) contracts and is returned instead.

    Returns None when the budget is exhausted, in particular whenever the
    intensities all share one sign and C cannot vanish.
    """
    a = np.asarray(intensities, dtype=float)
    if a.shape != (3,):
        raise ValueError("the collapse search is specific to three vortices")
    if np.any(a == 0.0) or not np.all(np.isfinite(a)):
        raise ValueError("intensities must be finite and nonzero")
    pair_products = [a[0] * a[1], a[0] * a[2], a[1] * a[2]]
    if all(p > 0.0 for p in pair_products):
        # C is a positive combination of squared distances; no root.
        return None
    kernel = kernel or euler_kernel()

    for _ in range(attempts):
        x1 = rng.uniform(-1.0, 1.0, 2)
        x2 = rng.uniform(-1.0, 1.0, 2)
        base = float(np.hypot(*(x1 - x2)))
        if base < 0.3:
            continue
        angle = rng.uniform(0.0, 2.0 * np.pi)
        u = np.array([np.cos(angle), np.sin(angle)])
        mid = 0.5 * (x1 + x2)

        def c_of(lam: float) -> float:
            return _collapse_value(a, x1, x2, mid + lam * u)

        grid = np.linspace(0.05, 6.0, 60)
        vals = [c_of(g) for g in grid]
        bracket = None
        for g1, g2, v1, v2 in zip(grid, grid[1:], vals, vals[1:]):
            if v1 == 0.0:
                bracket = (g1, g1)
                break
            if v1 * v2 < 0.0:
                bracket = (g1, g2)
                break
        if bracket is None:
            continue
        lam = bracket[0] if bracket[0] == bracket[1] else float(
            brentq(c_of, bracket[0], bracket[1], xtol=1e-15, rtol=8.9e-16))
        x3 = mid + lam * u
        positions = np.array([x1, x2, x3])

        dists = sorted([np.hypot(*(x1 - x2)), np.hypot(*(x1 - x3)),
                        np.hypot(*(x2 - x3))])
        if dists[0] < 0.08 * dists[2]:
            continue
        if (dists[2] - dists[0]) < 0.05 * dists[2]:
            continue  # too close to the equilateral equilibrium

        # Normalize to unit diameter; C is quadratic under scaling so the
        # root is preserved.
        positions = positions / dists[2]
        candidate = VortexSystem(a, positions)
        if abs(_collapse_value(a, *positions)) > c_tolerance:
            continue

        if _shrinks(candidate, kernel, verify_horizon):
            return candidate
        mirrored = _mirror(candidate)
        if _shrinks(mirrored, kernel, verify_horizon):
            return mirrored
    return None

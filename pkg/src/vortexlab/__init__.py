"""Numerical laboratory for planar point-vortex dynamics.

Interaction kernels (logarithmic and fractional power-law) with capped
regularizations, absolute and relative-coordinate vortex dynamics under an
adaptive embedded Runge-Kutta 5(4) integrator with collapse-event
detection, conserved-quantity audits, and Monte Carlo estimation of the
measure of near-collapse initial data with scaling-exponent fits.
"""

__version__ = "0.1.0"

from .collapse import (
    CollapseScanResult,
    PhiDiagnostics,
    ProbeResult,
    RateLaw,
    ScanCell,
    ScanConfig,
    eps_collapse_probe,
    find_collapse_candidate,
    phi_psi,
    sample_initial_relative,
    scan,
)
from .conserved import (
    ClusterClass,
    ClusterDiagnostics,
    InvariantSnapshot,
    center_of_vorticity,
    cluster_diagnostics,
    collapse_constraint,
    collapse_identity_residual,
    diameter,
    drift_audit,
    hamiltonian,
    invariant_snapshot,
    moment_of_inertia,
    vorticity_vector,
)
from .dynamics import (
    IntegratorConfig,
    RelativeSystem,
    Termination,
    TerminationCause,
    TrajectoryRecord,
    VortexSystem,
    flow_map_jacobian,
    integrate,
    integrate_relative,
    phase_space_divergence,
    relative_pseudo_hamiltonian,
    relative_velocity,
    velocity,
)
from .errors import ConfigError, SingularityError, VortexLabError
from .kernels import (
    AuxiliaryKernel,
    KernelProfile,
    RegularizationReport,
    RegularizedKernel,
    auxiliary_kernel,
    check_regularization,
    custom_kernel,
    euler_kernel,
    green_value,
    kernel_for_order,
    perp_gradient,
    regularize,
    sqg_kernel,
)

__all__ = [
    "__version__",
    # kernels
    "KernelProfile", "RegularizedKernel", "AuxiliaryKernel",
    "euler_kernel", "sqg_kernel", "custom_kernel", "kernel_for_order",
    "green_value", "perp_gradient", "regularize", "auxiliary_kernel",
    "check_regularization", "RegularizationReport",
    # dynamics
    "VortexSystem", "RelativeSystem", "IntegratorConfig",
    "Termination", "TerminationCause", "TrajectoryRecord",
    "velocity", "relative_velocity", "integrate", "integrate_relative",
    "phase_space_divergence", "flow_map_jacobian",
    "relative_pseudo_hamiltonian",
    # conserved
    "InvariantSnapshot", "ClusterClass", "ClusterDiagnostics",
    "hamiltonian", "vorticity_vector", "moment_of_inertia",
    "center_of_vorticity", "collapse_constraint",
    "collapse_identity_residual", "diameter", "invariant_snapshot",
    "cluster_diagnostics", "drift_audit",
    # collapse lab
    "ScanConfig", "ScanCell", "CollapseScanResult", "ProbeResult",
    "PhiDiagnostics", "RateLaw", "sample_initial_relative",
    "eps_collapse_probe", "scan", "phi_psi", "find_collapse_candidate",
    # errors
    "VortexLabError", "SingularityError", "ConfigError",
]

"""Steering and Bell criteria for two-mode oscillator Fock superpositions.

Evaluates the Reid inference-variance criterion, the conditional-entropy criterion,
and the maximal CHSH value for finite Fock superpositions of two harmonic-oscillator
modes, with sweep and critical-angle tooling for the two built-in one-parameter
families cos(t)|00>+sin(t)|11> and cos(t)|01>+sin(t)|10>.
"""

from .criteria import (
    CHSH_CLASSICAL_BOUND,
    LN_PI_E,
    REID_BOUND,
    CorrelationMatrix,
    CriterionResult,
    chsh_max,
    conditional_entropy,
    conditional_variance_min,
    correlation_matrix,
    entropic_value,
    reid_value,
)
from .fock import (
    DENSITY_FLOOR,
    DegenerateMarginal,
    Domain,
    FockState,
    NATURAL_UNITS,
    UnitSystem,
    conditional_mean,
    eigenfunction_p,
    eigenfunction_x,
    hermite,
    joint_density,
    make_psi,
    make_psi_prime,
    marginal_density,
    wavefunction,
)
from .quadrature import (
    DEFAULT_SPEC,
    ENTROPY_FLOOR,
    ConvergenceFailure,
    GaussHermiteRule,
    IntegralResult,
    QuadratureSpec,
    adaptive_panels,
    gauss_hermite_rule,
    integrate_entropy_1d,
    integrate_entropy_2d,
    integrate_moment_1d,
    integrate_moment_2d,
)
from .sweep import (
    CRITERIA,
    STATE_BUILDERS,
    CriticalAngle,
    HierarchyReport,
    NoRootInRange,
    SweepResult,
    find_critical_angles,
    hierarchy_report,
    sweep,
)

__version__ = "0.1.0"

__all__ = [
    "CHSH_CLASSICAL_BOUND",
    "CRITERIA",
    "ConvergenceFailure",
    "CorrelationMatrix",
    "CriterionResult",
    "CriticalAngle",
    "DEFAULT_SPEC",
    "DENSITY_FLOOR",
    "DegenerateMarginal",
    "Domain",
    "ENTROPY_FLOOR",
    "FockState",
    "GaussHermiteRule",
    "HierarchyReport",
    "IntegralResult",
    "LN_PI_E",
    "NATURAL_UNITS",
    "NoRootInRange",
    "QuadratureSpec",
    "REID_BOUND",
    "STATE_BUILDERS",
    "SweepResult",
    "UnitSystem",
    "adaptive_panels",
    "chsh_max",
    "conditional_entropy",
    "conditional_mean",
    "conditional_variance_min",
    "correlation_matrix",
    "eigenfunction_p",
    "eigenfunction_x",
    "entropic_value",
    "find_critical_angles",
    "gauss_hermite_rule",
    "hermite",
    "hierarchy_report",
    "integrate_entropy_1d",
    "integrate_entropy_2d",
    "integrate_moment_1d",
    "integrate_moment_2d",
    "joint_density",
    "make_psi",
    "make_psi_prime",
    "marginal_density",
    "reid_value",
    "sweep",
    "wavefunction",
    "__version__",
]

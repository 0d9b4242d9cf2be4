"""Simulation and bifurcation classification of planar piecewise-smooth
continuous Lienard fast/slow systems: corner bifurcations (smooth Hopf,
nonsmooth Hopf, Hopf-like, super-explosion), canard cycles and relaxation
oscillations, canard-explosion windows, and shadow-system bounding."""

__version__ = "0.1.0"

from .bifurcation import (  # noqa: F401
    BifurcationReport,
    CornerQuantities,
    Equilibrium,
    classify_corner,
    classify_fold_hopf,
    corner_quantities,
    find_equilibrium,
    find_hopf_locus,
    jacobian_eigen,
    lyapunov_first_coefficient,
)
from .expr import (  # noqa: F401
    Expression,
    Jet3,
    evaluate,
    evaluate_jet,
    parse_expression,
    to_source,
)
from .integrate import (  # noqa: F401
    EventSpec,
    IntegratorConfig,
    Trajectory,
    available_backends,
    default_backend,
    integrate,
    locate_event,
    time_in_tube,
)
from .orbits import (  # noqa: F401
    PeriodicOrbit,
    ShadowComparison,
    SweepResult,
    detect_bistability,
    find_limit_cycle,
    classify_cycle,
    return_map,
    shadow_compare,
    sweep_amplitude,
)
from .system import (  # noqa: F401
    CriticalManifold,
    SystemDefinition,
    ValidationReport,
    F,
    critical_manifold,
    find_x_max,
    fixture_names,
    load_fixture,
    load_system,
    make_shadow,
    make_system,
    validate,
)

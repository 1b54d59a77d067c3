from expnls.nls.cache import CacheError, cached_precompute
from expnls.nls.coefficients import (
    CoefficientTables,
    erk_a,
    erk_b,
    lawson_alpha_set,
    precompute_tables,
)
from expnls.nls.collocation import (
    CollocationNodes,
    LagrangeBasis,
    collocation_nodes,
    collocation_tableau,
    gauss_tableau,
)
from expnls.nls.config import ConfigError, RunConfig
from expnls.nls.diagnostics import (
    ErrorReport,
    Monitor,
    OrderEstimate,
    angular_momentum,
    discrete_energy,
    energy_error,
    mass_error,
    order_estimate,
    phase_error,
)
from expnls.nls.integrators import (
    IntegrationError,
    IntegrationResult,
    StepperConfig,
    build_stepper,
    erk_step,
    integrate,
    lawson_step,
    reverse_step,
    splitting_step,
)
from expnls.nls.method import MethodFamily, MethodSpec, NodeFamily
from expnls.nls.phi import ContourConfig, phi, phi_values
from expnls.nls.potential import RotatingTrap, cutoff_chi, rotation_matrix
from expnls.nls.problems import (
    PROBLEMS,
    Problem,
    ProblemError,
    abs_sine_1d,
    bec_2d,
    cubic_plane_2d,
    cubic_quintic_1d,
    cubic_soliton_1d,
    rotating_gpe_2d,
    thomas_fermi_initial,
)
from expnls.nls.profile import RadialProfile, ground_profile_2d
from expnls.nls.representation import Representation
from expnls.nls.spectral import (
    Grid,
    SpectralField,
    discrete_gradient,
    lp_norm,
    make_grid,
    to_physical,
    to_spectral,
)
from expnls.nls.splitting import SplittingScheme, splitting_scheme
from expnls.nls.tableau import ButcherTableau

__all__ = [
    "CacheError",
    "cached_precompute",
    "CoefficientTables",
    "erk_a",
    "erk_b",
    "lawson_alpha_set",
    "precompute_tables",
    "CollocationNodes",
    "LagrangeBasis",
    "collocation_nodes",
    "collocation_tableau",
    "gauss_tableau",
    "ConfigError",
    "RunConfig",
    "ErrorReport",
    "Monitor",
    "OrderEstimate",
    "angular_momentum",
    "discrete_energy",
    "energy_error",
    "mass_error",
    "order_estimate",
    "phase_error",
    "IntegrationError",
    "IntegrationResult",
    "StepperConfig",
    "build_stepper",
    "erk_step",
    "integrate",
    "lawson_step",
    "reverse_step",
    "splitting_step",
    "MethodFamily",
    "MethodSpec",
    "NodeFamily",
    "ContourConfig",
    "phi",
    "phi_values",
    "RotatingTrap",
    "cutoff_chi",
    "rotation_matrix",
    "PROBLEMS",
    "Problem",
    "ProblemError",
    "abs_sine_1d",
    "bec_2d",
    "cubic_plane_2d",
    "cubic_quintic_1d",
    "cubic_soliton_1d",
    "rotating_gpe_2d",
    "thomas_fermi_initial",
    "RadialProfile",
    "ground_profile_2d",
    "Representation",
    "Grid",
    "SpectralField",
    "discrete_gradient",
    "lp_norm",
    "make_grid",
    "to_physical",
    "to_spectral",
    "SplittingScheme",
    "splitting_scheme",
    "ButcherTableau",
]

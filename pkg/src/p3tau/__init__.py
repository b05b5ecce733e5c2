"""Numerical connection problem for Painlevé III (radial sine-Gordon).

Solves u'' + u'/x + sin u = 0 from its small-x data, extracts the large-x
amplitudes, and evaluates the tau-function constant ln(C_inf/C0) both by
regularized quadrature and from its Barnes-G closed form.
"""

from .errors import (
    ConvergenceError,
    IllConditionedError,
    PoleError,
    SingularityError,
    SingularValueError,
    ValidationError,
)
from .monodromy import (
    AsymptoticData,
    CauchyData,
    MonodromyData,
    RhoValue,
    StokesData,
    amplitudes_from_monodromy,
    cauchy_from_monodromy,
    cauchy_to_monodromy,
    monodromy_from_stokes,
    nu_from_monodromy,
    rho_from_monodromy,
    stokes_from_monodromy,
    validate,
)
from .ode import Trajectory, fit_amplitudes, integrate, replay, seed_series, sensitivities
from .tau import (
    TauRatioResult,
    chi_constant,
    chi_from_ratio,
    generating_function_terms,
    hamiltonian,
    log_tau_ratio_action,
    log_tau_ratio_closed_form,
    log_tau_ratio_quadrature,
)
from .mbform import (
    FormSample,
    closure_check,
    generating_function,
    generating_gradient,
    omega_asymptotic_infty,
    omega_asymptotic_zero,
    omega_at,
    omega_samples,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "IllConditionedError",
    "PoleError",
    "SingularityError",
    "SingularValueError",
    "ValidationError",
    "AsymptoticData",
    "CauchyData",
    "MonodromyData",
    "RhoValue",
    "StokesData",
    "amplitudes_from_monodromy",
    "cauchy_from_monodromy",
    "cauchy_to_monodromy",
    "monodromy_from_stokes",
    "nu_from_monodromy",
    "rho_from_monodromy",
    "stokes_from_monodromy",
    "validate",
    "Trajectory",
    "fit_amplitudes",
    "integrate",
    "replay",
    "seed_series",
    "sensitivities",
    "TauRatioResult",
    "chi_constant",
    "chi_from_ratio",
    "generating_function_terms",
    "hamiltonian",
    "log_tau_ratio_action",
    "log_tau_ratio_closed_form",
    "log_tau_ratio_quadrature",
    "FormSample",
    "closure_check",
    "generating_function",
    "generating_gradient",
    "omega_asymptotic_infty",
    "omega_asymptotic_zero",
    "omega_at",
    "omega_samples",
]

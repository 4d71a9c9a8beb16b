"""Spectral-Galerkin solver and source identification for the strongly damped wave equation."""

__version__ = "0.1.0"

from .basis import SpectralBasis, build_basis, evaluate, project, synthesize  # noqa: E402
from .errors import (ConfigError, DegenerateOverdetermination, Diverged,  # noqa: E402
                     NonConvergence, SdwaveError, SweepNotConverged)
from .inverse import compute_K0, reconstruct_g  # noqa: E402
from .problem import (DampingCoefficient, Interval, Nonlinearity, ProblemSpec,  # noqa: E402
                      validate)
from .solver import GalerkinState, StepperConfig, Trajectory, solve_ivp  # noqa: E402

__all__ = [
    "ConfigError", "DampingCoefficient", "DegenerateOverdetermination", "Diverged",
    "GalerkinState", "Interval", "NonConvergence", "Nonlinearity", "ProblemSpec",
    "SdwaveError", "SpectralBasis", "StepperConfig", "SweepNotConverged", "Trajectory",
    "build_basis", "compute_K0", "evaluate", "project", "reconstruct_g", "solve_ivp",
    "synthesize", "validate",
]

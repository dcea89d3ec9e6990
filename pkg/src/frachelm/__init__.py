"""Spectral fractional Helmholtz solver in one dimension with a
magnetotelluric forward model."""

__version__ = "0.1.0"

from .errors import (
    BreakdownError,
    DegenerateGradientError,
    DimensionError,
    FracHelmError,
    InvalidExponentError,
    InvalidMeshError,
    InvariantViolation,
    NonConvergenceError,
    OracleResonanceError,
    PreconditionerDegenerateError,
    SolverError,
)
from .quadrature import SincQuadrature, sinc_params
from .solver import ProblemSpec, SolutionBundle, SineForcing, mms_exact, mms_forcing, solve
from .mt import EarthModel, SoundingPoint, decay_profile, nondimensionalize, sounding_point, sounding_sweep
from .analytic import TimeFractionalParams, classical_field, classical_sounding, time_fractional_sounding

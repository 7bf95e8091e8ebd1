"""Multicomponent diffusion from Stefan-Maxwell relaxation: matrix algebra,
entropy-structure certification, closure, and twin 1-D solvers."""

from .closure import FluxClosureResult, maxwell_flux, well_prepared_state
from .entropy import ConservedU, StateU
from .errors import (
    CFLViolation,
    ConfigError,
    DegenerateFit,
    DegenerateOmega,
    InvalidConserved,
    InvalidSpec,
    MixtureError,
    NonPositiveDensity,
    SingularMatrix,
    ZeroFrequency,
)
from .fields import Field1D, FieldU1D
from .mixture import (
    MixtureSpec,
    PressureKind,
    PressureLaw,
    assemble_K,
    c_matrix,
    diffusion_matrix,
    phi_matrix,
    pressure,
    pressure_derivative,
    reduced_K_inverse,
)

__version__ = "0.1.0"

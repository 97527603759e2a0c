"""Oscillator permittivity models, consistency audits and Casimir-Polder
atom-plate calculations in the Lifshitz theory."""

from lifshitz_audit.constants import CONSTANTS, PhysicalConstants
from lifshitz_audit.errors import (
    AccuracyError,
    DomainError,
    ExtractionError,
    LifshitzAuditError,
    ModelError,
    ParseError,
    RangeError,
    SingularityError,
)
from lifshitz_audit.models import (
    ModelKind,
    OscillatorModel,
    OscillatorTerm,
    TemperatureFit,
    TermFit,
    eps_imag_axis,
    eps_real_axis,
    params_at,
    rho_cm,
    t_delta_of,
    temperature_of,
)

__all__ = [
    "AccuracyError",
    "CONSTANTS",
    "DomainError",
    "ExtractionError",
    "LifshitzAuditError",
    "ModelError",
    "ModelKind",
    "OscillatorModel",
    "OscillatorTerm",
    "ParseError",
    "PhysicalConstants",
    "RangeError",
    "SingularityError",
    "TemperatureFit",
    "TermFit",
    "eps_imag_axis",
    "eps_real_axis",
    "params_at",
    "rho_cm",
    "t_delta_of",
    "temperature_of",
]

__version__ = "0.1.0"

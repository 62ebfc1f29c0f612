"""Numerics for the duality between linear irreversible thermodynamics and the harmonic oscillator."""

from .duality import (
    DiscretePath,
    MechParams,
    ThermoParams,
    mech_action,
    om_action,
    thermo_params_new,
    to_mechanical,
    to_thermo,
    wick_action_identity,
)
from .errors import MassLossWarning, NumericalError, ThermodualError, ValidationError
from .oscillator import ComplexGrid, EigenSpec, MaximalEntropySpec
from .quadrature import QuadratureRule

__version__ = "0.1.0"

__all__ = [
    "ComplexGrid",
    "DiscretePath",
    "EigenSpec",
    "MassLossWarning",
    "MaximalEntropySpec",
    "MechParams",
    "NumericalError",
    "QuadratureRule",
    "ThermoParams",
    "ThermodualError",
    "ValidationError",
    "mech_action",
    "om_action",
    "thermo_params_new",
    "to_mechanical",
    "to_thermo",
    "wick_action_identity",
]

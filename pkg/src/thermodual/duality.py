"""Parameter sets of the two theories and the dictionary between them.

The thermodynamical side is a linear, stationary Markov process described by
the entropy curvature ``s``, the Onsager coefficient ``L`` and Boltzmann's
constant ``k_B``. The mechanical side is a harmonic oscillator ``(m, omega,
hbar)``. The dictionary is

    omega <-> gamma = s L,    m omega / hbar <-> s / (2 k_B),    hbar <-> 2 k_B

together with the Wick rotation tau = i t. Coordinates are dimensionless
throughout; callers pre-scale physical coordinates with
:func:`thermodual.oscillator.nondimensionalize`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InconsistentDictionary, NonPositiveParameter, PathTooShort

# hbar must equal 2 k_B to this relative accuracy
DICTIONARY_RTOL = 1e-12


def _require_positive(**values: float) -> None:
    for name, value in values.items():
        if not (math.isfinite(value) and value > 0):
            raise NonPositiveParameter(f"{name} must be a finite positive number, got {value!r}")


@dataclass(frozen=True)
class ThermoParams:
    """Entropy curvature ``s``, Onsager coefficient ``L_onsager`` and ``k_B``."""

    s: float
    L_onsager: float
    k_B: float

    def __post_init__(self) -> None:
        _require_positive(s=self.s, L_onsager=self.L_onsager, k_B=self.k_B)

    @property
    def gamma(self) -> float:
        """Relaxation rate ``s * L``."""
        return self.s * self.L_onsager

    @property
    def R(self) -> float:
        """Thermodynamical resistance ``1 / L``; plays the role of a mass."""
        return 1.0 / self.L_onsager

    @property
    def variance(self) -> float:
        """Equilibrium variance ``k_B / s`` of the fluctuating coordinate."""
        return self.k_B / self.s

    def as_dict(self) -> dict:
        return {"s": self.s, "L_onsager": self.L_onsager, "k_B": self.k_B}


@dataclass(frozen=True)
class MechParams:
    m: float
    omega: float
    hbar: float

    def __post_init__(self) -> None:
        _require_positive(m=self.m, omega=self.omega, hbar=self.hbar)

    def as_dict(self) -> dict:
        return {"m": self.m, "omega": self.omega, "hbar": self.hbar}


@dataclass(frozen=True)
class DiscretePath:
    """Samples of a trajectory on a uniform time lattice with spacing ``step``."""

    values: np.ndarray
    step: float

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise PathTooShort("a discrete path needs at least two samples")
        _require_positive(step=self.step)
        object.__setattr__(self, "values", values)

    @property
    def duration(self) -> float:
        return self.step * (self.values.size - 1)


def thermo_params_new(s: float, L_onsager: float, k_B: float) -> ThermoParams:
    return ThermoParams(float(s), float(L_onsager), float(k_B))


def to_mechanical(tp: ThermoParams) -> MechParams:
    """Map thermodynamical parameters onto the partner oscillator.

    ``hbar = 2 k_B`` and ``omega = gamma``; the mass then follows from
    ``m omega / hbar = s / (2 k_B)`` and equals the resistance ``R``.
    """
    hbar = 2.0 * tp.k_B
    omega = tp.gamma
    m = tp.s * hbar / (2.0 * tp.k_B * omega)
    return MechParams(m=m, omega=omega, hbar=hbar)


def to_thermo(mp: MechParams, k_B: float) -> ThermoParams:
    _require_positive(k_B=k_B)
    if abs(mp.hbar - 2.0 * k_B) > DICTIONARY_RTOL * 2.0 * k_B:
        raise InconsistentDictionary(
            f"hbar={mp.hbar!r} is not 2*k_B={2.0 * k_B!r}; the dictionary fixes hbar <-> 2 k_B"
        )
    gamma = mp.omega
    s = 2.0 * k_B * mp.m * mp.omega / mp.hbar
    return ThermoParams(s=s, L_onsager=gamma / s, k_B=k_B)


def _action(values: np.ndarray, step: complex, mass: float, pot: float) -> complex:
    # forward-difference kinetic term, trapezoid potential term
    dv = np.diff(values)
    kinetic = 0.5 * mass * np.sum(dv * dv) / step
    trap = 0.5 * (values[0] ** 2 + values[-1] ** 2) + np.sum(values[1:-1] ** 2)
    return kinetic + 0.5 * mass * pot * trap * step


def om_action(path: DiscretePath, tp: ThermoParams) -> float:
    """Discrete Onsager-Machlup action  sum (R/2)(ydot^2 + gamma^2 y^2) dtau."""
    return float(_action(path.values, path.step, tp.R, tp.gamma**2))


def mech_action(path: DiscretePath, mp: MechParams) -> float:
    """Discrete oscillator action  sum ((m/2) xdot^2 - (m omega^2 / 2) x^2) dt."""
    return float(_action(path.values, path.step, mp.m, -(mp.omega**2)))


def wick_action_identity(path: DiscretePath, tp: ThermoParams) -> complex:
    """Residual of  S_OM = -i S_mech (2 k_B / hbar)  on a common set of samples.

    The mechanical action is evaluated on the same sample values with the
    complex time step ``dt = -i dtau`` and the partner parameters from
    :func:`to_mechanical`. The residual vanishes identically up to rounding.
    """
    mp = to_mechanical(tp)
    s_om = _action(path.values, path.step, tp.R, tp.gamma**2)
    s_mech = _action(path.values, -1j * path.step, mp.m, -(mp.omega**2))
    return complex(s_om + 1j * s_mech * (2.0 * tp.k_B / mp.hbar))

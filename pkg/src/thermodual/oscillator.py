"""The thermodynamical oscillator  -(d^2/dy^2 + y^2) w = sigma w.

For real ``sigma`` the two independent eigenfunctions are

    w_plus(y)  = H_nu( e^{3i pi/4} y) e^{i y^2 / 2}
    w_minus(y) = H_nu(-e^{3i pi/4} y) e^{i y^2 / 2},      nu = -1/2 + i sigma/2,

bounded on the real line but not integrable (|w| ~ |y|^{-1/2}). This module
evaluates them, applies the Hamiltonian analytically, and measures their
L1/L2/Linf behaviour on truncated grids. The ordinary quantum oscillator is
included as a baseline.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import specfun
from .duality import MechParams, ThermoParams
from .errors import GridMismatch, GridTooCoarse, OutsideSector

ROTATION = cmath.exp(0.75j * math.pi)

RESIDUAL_FLOOR = 1e-300
MIN_POINTS_PER_UNIT = 16

# membership thresholds
L1_EXPONENT_THRESHOLD = 0.1
SUP_STABILITY_RTOL = 0.01


@dataclass(frozen=True)
class EigenSpec:
    branch: str
    sigma: float

    def __post_init__(self) -> None:
        if self.branch not in ("plus", "minus"):
            raise ValueError(f"branch must be 'plus' or 'minus', got {self.branch!r}")
        if not math.isfinite(self.sigma):
            raise ValueError("sigma must be finite")

    @property
    def nu(self) -> complex:
        return complex(-0.5, 0.5 * self.sigma)

    @property
    def sign(self) -> float:
        return 1.0 if self.branch == "plus" else -1.0

    @property
    def eigenvalue(self) -> complex:
        return complex(self.sigma)


@dataclass
class ComplexGrid:
    """Complex samples on a uniform grid over ``[y_min, y_max]``."""

    y_min: float
    y_max: float
    n: int
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=complex)
        if self.n < 2 or self.y_max <= self.y_min:
            raise ValueError("a grid needs n >= 2 points on a nondegenerate interval")
        if self.values.shape != (self.n,):
            raise ValueError(f"expected {self.n} values, got shape {self.values.shape}")

    @classmethod
    def sample(cls, func: Callable, y_min: float, y_max: float, n: int) -> "ComplexGrid":
        y = np.linspace(y_min, y_max, n)
        return cls(y_min, y_max, n, np.asarray(func(y), dtype=complex))

    @property
    def y(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.n)

    @property
    def dy(self) -> float:
        return (self.y_max - self.y_min) / (self.n - 1)

    def commensurate(self, other: "ComplexGrid") -> bool:
        return self.n == other.n and math.isclose(self.y_min, other.y_min) and math.isclose(self.y_max, other.y_max)

    def require_commensurate(self, other: "ComplexGrid") -> None:
        if not self.commensurate(other):
            raise GridMismatch("grids differ in extent or resolution")


@dataclass
class NormReport:
    Y: np.ndarray
    l1_partial: np.ndarray
    l2_partial: np.ndarray
    linf: float
    l1_growth_exponent: float
    l2_growth_exponent: float


@dataclass
class Membership:
    in_linf: bool
    in_l1: bool
    in_l2: bool
    l1_growth_exponent: float
    l2_growth_exponent: float
    sup: float
    sup_doubled: float
    details: dict = field(default_factory=dict)


# -- eigenfunctions ------------------------------------------------------------


def _scalar_or_array(y):
    y_arr = np.asarray(y, dtype=float)
    return y_arr, y_arr.ndim == 0


def _hermite_parts(spec: EigenSpec, y: np.ndarray):
    nu = spec.nu
    z = spec.sign * ROTATION * y
    h = specfun.hermite_values(nu, z)
    d1 = specfun.hermite_deriv_values(nu, z)
    d2 = specfun.hermite_deriv2_values(nu, z)
    return z, h, d1, d2


def eigenfunction(spec: EigenSpec, y):
    y_arr, scalar = _scalar_or_array(y)
    z = spec.sign * ROTATION * y_arr.ravel()
    w = specfun.hermite_values(spec.nu, z) * np.exp(0.5j * y_arr.ravel() ** 2)
    w = w.reshape(y_arr.shape)
    return complex(w) if scalar else w


def _apply_parts(spec: EigenSpec, y: np.ndarray):
    """Return (H w, w, term scale) using analytic Hermite derivatives.

    With z = a y and a^2 = -i:  w'' = e^{iy^2/2} (-i H'' + 2i z H' + i H - y^2 H).
    The scale sums the moduli of the individual terms, for relative residuals.
    """
    z, h, d1, d2 = _hermite_parts(spec, y)
    phase = np.exp(0.5j * y**2)
    w = h * phase
    w2 = (-1j * d2 + 2j * z * d1 + 1j * h - y**2 * h) * phase
    scale = np.abs(d2) + np.abs(2.0 * z * d1) + np.abs(h) + 2.0 * y**2 * np.abs(h)
    return -(w2 + y**2 * w), w, scale


def hamiltonian_apply(spec: EigenSpec, y):
    """-(w'' + y^2 w) for the eigenfunction ``spec``, without finite differences."""
    y_arr, scalar = _scalar_or_array(y)
    hw, _, _ = _apply_parts(spec, y_arr.ravel())
    hw = hw.reshape(y_arr.shape)
    return complex(hw) if scalar else hw


def eigen_residual_values(spec: EigenSpec, y) -> np.ndarray:
    y = np.asarray(y, dtype=float).ravel()
    hw, w, scale = _apply_parts(spec, y)
    return np.abs(hw - spec.sigma * w) / (scale + np.abs(spec.sigma * w) + RESIDUAL_FLOOR)


def eigen_residual(spec: EigenSpec, grid) -> float:
    """Max relative residual of the eigen-equation over ``grid``.

    The residual is normalised by the moduli of the individual terms that
    make up -(w'' + y^2 w) and sigma w, which stays meaningful at sigma = 0
    where the left-hand side itself vanishes.
    """
    return float(np.max(eigen_residual_values(spec, grid)))


def asymptotic_eigenfunction(spec: EigenSpec, y, terms: int | None = specfun.DEFAULT_ASYMPTOTIC_TERMS):
    """Large-|y| form of the eigenfunction.

    Only defined where the Hermite argument +-e^{3i pi/4} y lies in the sector
    pi/4 < arg < 5pi/4, i.e. y > 0 on the plus branch and y < 0 on the minus
    branch; elsewhere :class:`OutsideSector` is raised. ``terms=0`` reproduces
    the two-term leading form.
    """
    y_arr, scalar = _scalar_or_array(y)
    yr = y_arr.ravel()
    if np.any(spec.sign * yr <= 0):
        raise OutsideSector(f"{spec.branch} branch has an in-sector argument only for {'y > 0' if spec.sign > 0 else 'y < 0'}")
    z = spec.sign * ROTATION * yr
    h, _, _ = specfun.hermite_asymptotic_values(spec.nu, z, terms)
    w = (h * np.exp(0.5j * yr**2)).reshape(y_arr.shape)
    return complex(w) if scalar else w


def asymptotic_envelope(spec: EigenSpec, y):
    """Sum of the moduli of the two leading asymptotic terms (triangle bound)."""
    y = np.abs(np.asarray(y, dtype=float))
    sigma = spec.sigma
    first = (2.0 * y) ** -0.5 * math.exp(-3.0 * math.pi * sigma / 8.0)
    coef = math.sqrt(math.pi) * math.exp(-math.pi * sigma / 2.0) / abs(specfun.gamma_complex((1 - 1j * sigma) / 2))
    second = coef * y**-0.5 * math.exp(3.0 * math.pi * sigma / 8.0)
    return first + second


# -- maximal-entropy states ------------------------------------------------------


def _sign_value(sign: str) -> float:
    if sign not in ("plus", "minus"):
        raise ValueError(f"sign must be 'plus' or 'minus', got {sign!r}")
    return 1.0 if sign == "plus" else -1.0


@dataclass(frozen=True)
class MaximalEntropySpec:
    """The state e^{+-i y^2/2}, an eigenfunction with eigenvalue -+i."""

    sign: str

    def __post_init__(self) -> None:
        _sign_value(self.sign)

    @property
    def eigenvalue(self) -> complex:
        return -1j * _sign_value(self.sign)


def maximal_entropy_state(sign: str, y):
    """e^{+-i y^2/2}; its modulus is identically one."""
    s = _sign_value(sign)
    y_arr, scalar = _scalar_or_array(y)
    w = np.exp(s * 0.5j * y_arr**2)
    return complex(w) if scalar else w


def maximal_entropy_apply(sign: str, y):
    """-(w'' + y^2 w) for w = e^{+-i y^2/2}, from w' = +-i y w, w'' = (+-i - y^2) w."""
    s = _sign_value(sign)
    y_arr, scalar = _scalar_or_array(y)
    w = np.exp(s * 0.5j * y_arr**2)
    w2 = (s * 1j - y_arr**2) * w
    out = -(w2 + y_arr**2 * w)
    return complex(out) if scalar else out


# -- norms and membership ----------------------------------------------------------


def _growth_exponent(Y: np.ndarray, partial: np.ndarray) -> float:
    half = Y.size // 2
    slope, _ = np.polyfit(np.log(Y[half:]), np.log(partial[half:]), 1)
    return float(slope)


def norms(grid_fn: ComplexGrid, Y_list) -> NormReport:
    """Partial L1/L2 integrals over [-Y, Y], the grid sup, and L1/L2 growth laws.

    The growth exponents are least-squares slopes of log(partial) against
    log(Y) over the upper half of ``Y_list``.
    """
    Y = np.asarray(Y_list, dtype=float)
    if grid_fn.dy > 1.0 / MIN_POINTS_PER_UNIT + 1e-12:
        raise GridTooCoarse(f"grid spacing {grid_fn.dy:g} exceeds 1/{MIN_POINTS_PER_UNIT}")
    if Y.size < 2 or np.any(np.diff(Y) <= 0) or Y[0] <= 0:
        raise ValueError("Y_list must be positive and strictly increasing")
    if -Y[-1] < grid_fn.y_min - 1e-12 or Y[-1] > grid_fn.y_max + 1e-12:
        raise ValueError("Y_list extends beyond the grid support")
    y = grid_fn.y
    mod = np.abs(grid_fn.values)
    dy = grid_fn.dy

    def cumulative(f):
        c = np.concatenate(([0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * dy)))
        return np.interp(Y, y, c) - np.interp(-Y, y, c)

    l1 = cumulative(mod)
    l2 = cumulative(mod**2)
    return NormReport(
        Y=Y,
        l1_partial=l1,
        l2_partial=l2,
        linf=float(mod.max()),
        l1_growth_exponent=_growth_exponent(Y, l1),
        l2_growth_exponent=_growth_exponent(Y, l2),
    )


def _as_function(target) -> Callable:
    if isinstance(target, EigenSpec):
        return lambda y: eigenfunction(target, y)
    if callable(target):
        return target
    raise TypeError("membership target must be an EigenSpec or a callable of y")


def membership(
    target,
    Y_max: float = 100.0,
    Y_min: float = 10.0,
    n_Y: int = 19,
    points_per_unit: int = 64,
) -> Membership:
    """Numerical L1/L2/Linf membership verdicts for an eigenfunction or a callable.

    A function counts as integrable when its partial L1 integral grows with an
    exponent below :data:`L1_EXPONENT_THRESHOLD`, the same rule is applied to
    the partial L2 integral, and it counts as bounded when the grid sup changes
    by less than :data:`SUP_STABILITY_RTOL` on doubling the domain. These are
    heuristics, not proofs.
    """
    func = _as_function(target)
    n = int(2 * Y_max * points_per_unit) + 1
    grid = ComplexGrid.sample(func, -Y_max, Y_max, n)
    Y = np.linspace(Y_min, Y_max, n_Y)
    report = norms(grid, Y)
    doubled = ComplexGrid.sample(func, -2 * Y_max, 2 * Y_max, 2 * n - 1)
    sup2 = float(np.abs(doubled.values).max())
    sup = report.linf
    stable = math.isfinite(sup2) and abs(sup2 - sup) <= SUP_STABILITY_RTOL * sup
    return Membership(
        in_linf=bool(stable),
        in_l1=report.l1_growth_exponent < L1_EXPONENT_THRESHOLD,
        in_l2=report.l2_growth_exponent < L1_EXPONENT_THRESHOLD,
        l1_growth_exponent=report.l1_growth_exponent,
        l2_growth_exponent=report.l2_growth_exponent,
        sup=sup,
        sup_doubled=sup2,
        details={"Y": report.Y.tolist(), "l1_partial": report.l1_partial.tolist(), "l2_partial": report.l2_partial.tolist()},
    )


# -- quantum baseline --------------------------------------------------------------


def qho_baseline(n: int, x):
    """Unnormalised oscillator eigenfunction H_n(x) e^{-x^2/2}, eigenvalue 2n+1."""
    if not 0 <= n <= 20:
        raise ValueError("baseline supports 0 <= n <= 20")
    x_arr, scalar = _scalar_or_array(x)
    w = specfun.hermite_polynomial_values(n, x_arr) * np.exp(-0.5 * x_arr**2)
    return complex(w) if scalar else w


def qho_baseline_apply(n: int, x):
    """(-d^2/dx^2 + x^2) applied analytically to :func:`qho_baseline`."""
    x_arr, scalar = _scalar_or_array(x)
    h = specfun.hermite_polynomial_values(n, x_arr)
    d1 = 2.0 * n * specfun.hermite_polynomial_values(n - 1, x_arr) if n >= 1 else np.zeros_like(h)
    d2 = 4.0 * n * (n - 1) * specfun.hermite_polynomial_values(n - 2, x_arr) if n >= 2 else np.zeros_like(h)
    out = (-d2 + 2.0 * x_arr * d1 + h) * np.exp(-0.5 * x_arr**2)
    return complex(out) if scalar else out


# -- units -------------------------------------------------------------------------


def nondimensionalize(y_phys, tp: ThermoParams):
    """Dimensionless coordinate y * sqrt(s / 2 k_B)."""
    return y_phys * math.sqrt(tp.s / (2.0 * tp.k_B))


def nondimensionalize_mech(x_phys, mp: MechParams):
    """Dimensionless coordinate x * sqrt(m omega / hbar)."""
    return x_phys * math.sqrt(mp.m * mp.omega / mp.hbar)

"""Forward-only evolution of incoming densities and outgoing observables.

Incoming states (integrable densities) evolve by the OU kernel acting on the
first argument, outgoing states (bounded functions) by the transposed action.
Both are discretized on uniform grids. With the default trapezoid rule the two
actions share one kernel matrix, so the transpose identity holds to rounding.
There is deliberately no backward evolution: every duration must be positive.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .duality import ThermoParams
from .errors import GridTooCoarse, MassLossWarning, NegativeDuration, ValidationError
from .kernels import _require_forward, ou_density_values, ou_moments
from .oscillator import ComplexGrid, EigenSpec, MaximalEntropySpec
from .quadrature import QuadratureRule, trapezoid_weights

TRAPEZOID = QuadratureRule("trapezoid")

DENSITY_MASS_TOL = 1e-8
MASS_LOSS_TOL = 1e-6
# the trapezoid rule is spectrally accurate for Gaussians wider than this many cells
MIN_KERNEL_CELLS = 1.2
BLOCK_ROWS = 512


@dataclass
class IncomingState:
    """An integrable function on a grid; ``density`` asserts unit mass."""

    grid: ComplexGrid
    density: bool = False

    def __post_init__(self) -> None:
        if not np.all(np.isfinite(self.grid.values)):
            raise ValidationError("incoming state has non-finite samples")
        if self.density:
            v = self.grid.values
            if np.any(v.imag != 0) or np.any(v.real < 0):
                raise ValidationError("a density must be real and nonnegative")
            mass = integrate(self.grid)
            if abs(mass - 1.0) > DENSITY_MASS_TOL:
                raise ValidationError(f"a density must integrate to 1, got {mass.real!r}")


@dataclass
class OutgoingState:
    """A bounded function on a grid."""

    grid: ComplexGrid

    def __post_init__(self) -> None:
        if not np.all(np.isfinite(self.grid.values)):
            raise ValidationError("outgoing state must be finite on its grid")

    @property
    def sup(self) -> float:
        return float(np.max(np.abs(self.grid.values)))


@dataclass
class GeneratorGap:
    y: np.ndarray
    a_kernel: np.ndarray
    a_osc: np.ndarray
    difference_norm: float


def integrate(grid: ComplexGrid) -> complex:
    return complex(np.dot(trapezoid_weights(grid.n, grid.dy), grid.values))


def pairing(psi: OutgoingState, phi: IncomingState) -> complex:
    """(psi | phi) = integral conj(psi) phi, by the trapezoid rule."""
    psi.grid.require_commensurate(phi.grid)
    g = phi.grid
    return complex(np.dot(trapezoid_weights(g.n, g.dy), np.conj(psi.grid.values) * g.values))


def _with_values(grid: ComplexGrid, values) -> ComplexGrid:
    return ComplexGrid(grid.y_min, grid.y_max, grid.n, values)


def _check_resolution(grid: ComplexGrid, dtau: float, tp: ThermoParams) -> None:
    _, var = ou_moments(0.0, dtau, tp)
    if math.sqrt(var) < MIN_KERNEL_CELLS * grid.dy:
        raise GridTooCoarse(
            f"kernel width {math.sqrt(var):.3g} is below {MIN_KERNEL_CELLS} grid cells of {grid.dy:.3g}; "
            "refine the grid or use a node-based rule"
        )


def _trapezoid_apply(grid: ComplexGrid, dtau: float, tp: ThermoParams, transpose: bool) -> np.ndarray:
    """Sum over the grid of f1(y_j | y_i) with trapezoid weights.

    ``transpose=False`` integrates over the source point (incoming action),
    ``transpose=True`` over the target point (outgoing action).
    """
    _check_resolution(grid, dtau, tp)
    y = grid.y
    wv = trapezoid_weights(grid.n, grid.dy) * grid.values
    out = np.empty(grid.n, dtype=complex)
    for start in range(0, grid.n, BLOCK_ROWS):
        rows = y[start : start + BLOCK_ROWS, None]
        kern = ou_density_values(y[None, :], rows, dtau, tp) if transpose else ou_density_values(rows, y[None, :], dtau, tp)
        out[start : start + BLOCK_ROWS] = kern @ wv
    return out


def _node_apply(grid: ComplexGrid, dtau: float, tp: ThermoParams, rule: QuadratureRule, transpose: bool) -> np.ndarray:
    """Integrate against interpolated state values at rule nodes around each kernel."""
    y = grid.y
    spline = CubicSpline(y, grid.values)
    decay = math.exp(-tp.gamma * dtau)
    sd = math.sqrt(float(ou_moments(0.0, dtau, tp)[1]))
    out = np.empty(grid.n, dtype=complex)
    for k, yk in enumerate(y):
        if transpose:
            # integrate over the target, kernel centred at the decayed mean
            x, w = rule.nodes(decay * yk, sd)
            vals = spline(np.clip(x, y[0], y[-1]))
            out[k] = np.dot(w * ou_density_values(x, yk, dtau, tp), vals)
        else:
            # integrate over the source; as a function of it the kernel is
            # centred at yk / decay with width sd / decay
            x, w = rule.nodes(yk / decay, sd / decay)
            vals = np.where((x >= y[0]) & (x <= y[-1]), spline(np.clip(x, y[0], y[-1])), 0.0)
            out[k] = np.dot(w * ou_density_values(yk, x, dtau, tp), vals)
    return out


def _apply(grid, dtau, tp, rule, transpose):
    _require_forward(dtau)
    if rule.kind == "trapezoid":
        return _trapezoid_apply(grid, dtau, tp, transpose)
    return _node_apply(grid, dtau, tp, rule, transpose)


def evolve_incoming(phi: IncomingState, dtau: float, tp: ThermoParams, rule: QuadratureRule = TRAPEZOID) -> IncomingState:
    """(U phi)(y2) = integral f1(y2, dtau | y1) phi(y1) dy1 on the input grid.

    Warns with :class:`MassLossWarning` when the grid truncation changes the
    total mass by more than ``MASS_LOSS_TOL``; the result is not renormalized.
    """
    values = _apply(phi.grid, dtau, tp, rule, transpose=False)
    out = _with_values(phi.grid, values)
    before, after = integrate(phi.grid), integrate(out)
    lost = abs(after - before) > MASS_LOSS_TOL * max(1.0, abs(before))
    if lost:
        warnings.warn(f"evolved mass {after.real:.10g} differs from {before.real:.10g}", MassLossWarning, stacklevel=2)
    return IncomingState(out, density=phi.density and not lost and abs(after - 1.0) <= DENSITY_MASS_TOL)


def evolve_outgoing(psi: OutgoingState, dtau: float, tp: ThermoParams, rule: QuadratureRule = TRAPEZOID) -> OutgoingState:
    """(psi U)(y1) = integral psi(y2) f1(y2, dtau | y1) dy2.

    With the trapezoid rule ``psi`` is taken to vanish off the grid, so values
    within a few kernel widths of the edges feel the truncation; node-based
    rules instead hold the edge values constant beyond the grid.
    """
    return OutgoingState(_with_values(psi.grid, _apply(psi.grid, dtau, tp, rule, transpose=True)))


def transpose_identity_check(
    psi: OutgoingState, phi: IncomingState, dtau: float, tp: ThermoParams, rule: QuadratureRule = TRAPEZOID
) -> float:
    """|(psi U | phi) - (psi | U phi)|."""
    psi.grid.require_commensurate(phi.grid)
    left = pairing(evolve_outgoing(psi, dtau, tp, rule), phi)
    right = pairing(psi, evolve_incoming(phi, dtau, tp, rule))
    return abs(left - right)


def _pairing_rate(psi, phi, tp, dtau, rule) -> complex:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MassLossWarning)
        moved = pairing(evolve_outgoing(psi, dtau, tp, rule), evolve_incoming(phi, dtau, tp, rule))
    return (moved - pairing(psi, phi)) / dtau


def irreversibility_drift(
    psi: OutgoingState,
    phi: IncomingState,
    tp: ThermoParams,
    dtau_probe: float = 1e-4,
    richardson: bool = False,
    rule: QuadratureRule = TRAPEZOID,
) -> complex:
    """-2 k_B d/dtau (psi U(tau) | U(tau) phi) at tau = 0, both states evolved.

    A forward difference quotient over ``dtau_probe``; with ``richardson`` the
    first-order error is cancelled using a second probe at half the step.
    """
    psi.grid.require_commensurate(phi.grid)
    rate = _pairing_rate(psi, phi, tp, dtau_probe, rule)
    if richardson:
        rate = 2.0 * _pairing_rate(psi, phi, tp, 0.5 * dtau_probe, rule) - rate
    return -2.0 * tp.k_B * rate


def spectral_scale(eigenvalue: complex, tau: float, k_B: float) -> complex:
    if not tau >= 0:
        raise NegativeDuration(f"spectral evolution runs forward only, got tau={tau!r}")
    return complex(np.exp(-tau * complex(eigenvalue) / (2.0 * k_B)))


def spectral_evolve(spec: EigenSpec | MaximalEntropySpec, tau: float, tp: ThermoParams) -> complex:
    """Factor exp(-tau lambda / 2 k_B) multiplying an eigenfunction with eigenvalue lambda."""
    return spectral_scale(spec.eigenvalue, tau, tp.k_B)


def _first_derivative(values: np.ndarray, dy: float) -> np.ndarray:
    d1 = np.gradient(values, dy, edge_order=2)
    d1[2:-2] = (-values[4:] + 8 * values[3:-1] - 8 * values[1:-3] + values[:-4]) / (12 * dy)
    return d1


def _second_derivative(values: np.ndarray, dy: float) -> np.ndarray:
    # fourth-order central stencil inside, second order at the two outer rows
    d2 = np.empty_like(values)
    d2[2:-2] = (-values[4:] + 16 * values[3:-1] - 30 * values[2:-2] + 16 * values[1:-3] - values[:-4]) / (12 * dy * dy)
    for i in (1, -2):
        d2[i] = (values[i + 1] - 2 * values[i] + values[i - 1]) / (dy * dy)
    d2[0], d2[-1] = d2[1], d2[-2]
    return d2


def fokker_planck_apply(phi: IncomingState, tp: ThermoParams) -> np.ndarray:
    """gamma d/dy (y phi) + gamma (k_B / s) phi'' by finite differences."""
    g = phi.grid
    y, v = g.y, g.values
    drift = _first_derivative(y * v, g.dy)
    return tp.gamma * (drift + tp.variance * _second_derivative(v, g.dy))


def generator_gap(
    phi: IncomingState,
    tp: ThermoParams,
    dtau_probe: float = 1e-4,
    richardson: bool = False,
    rule: QuadratureRule = TRAPEZOID,
) -> GeneratorGap:
    """Kernel generator estimate next to the oscillator operator on one grid.

    ``a_kernel = -2 k_B (U phi - phi) / dtau_probe`` and
    ``a_osc = -(phi'' + y^2 phi)``. The two are reported side by side; they
    are not expected to coincide.
    """

    def quotient(d):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", MassLossWarning)
            moved = evolve_incoming(phi, d, tp, rule).grid.values
        return (moved - phi.grid.values) / d

    rate = quotient(dtau_probe)
    if richardson:
        rate = 2.0 * quotient(0.5 * dtau_probe) - rate
    a_kernel = -2.0 * tp.k_B * rate
    g = phi.grid
    a_osc = -(_second_derivative(g.values, g.dy) + g.y**2 * g.values)
    diff = a_kernel - a_osc
    return GeneratorGap(g.y, a_kernel, a_osc, float(np.sqrt(np.dot(trapezoid_weights(g.n, g.dy), np.abs(diff) ** 2))))

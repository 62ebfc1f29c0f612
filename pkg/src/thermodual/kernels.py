"""Transition kernels on both sides of the duality.

Thermodynamical side: the Ornstein-Uhlenbeck conditional density

    f1(y2, dtau | y1) = N(y2; e^{-gamma dtau} y1, (k_B/s)(1 - e^{-2 gamma dtau})),

its Chapman-Kolmogorov composition and its stationary limit. Mechanical side:
the harmonic-oscillator (Mehler) propagator at complex time, an independent
Trotter-composition oracle for it, and a regulated check of its group
property. :func:`duality_kernel_compare` relates the two through the Wick
rotation ``t = -i tau``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .duality import MechParams, ThermoParams, to_mechanical
from .errors import BadTimeOrder, CausticSingularity, NonPositiveDuration, ValidationError
from .quadrature import QuadratureRule, panel_gauss_legendre

# |sin(omega t)| below this counts as a focal point when no regulator is set
CAUSTIC_TOL = 1e-10

DEFAULT_CK_RULE = QuadratureRule("gauss_legendre_panel", 128)


@dataclass(frozen=True)
class KernelQuery:
    y_from: float
    y_to: float
    dtau: float

    def __post_init__(self) -> None:
        _require_forward(self.dtau)


@dataclass
class GaugeReport:
    """Outcome of fitting  f1 / K_E = g(y2) h(tau) / g(y1)  on a grid.

    ``log_g`` is fixed by the gauge choice ``log_g[0] = 0``; ``log_h`` is the
    fitted constant. ``factorization_residual`` is the largest modulus of the
    complex log-ratio residual.
    """

    grid: np.ndarray
    ratio_grid: np.ndarray
    factorization_residual: float
    tau: float
    log_g: np.ndarray
    log_h: float

    @property
    def h(self) -> float:
        return math.exp(self.log_h)


def _require_forward(dtau) -> None:
    d = np.asarray(dtau, dtype=float)
    if not np.all(np.isfinite(d)) or np.any(d <= 0):
        raise NonPositiveDuration(f"transition durations must be positive, got {dtau!r}")


# -- Ornstein-Uhlenbeck kernel ---------------------------------------------------


def ou_moments(y_from, dtau, tp: ThermoParams):
    """Mean and variance of the OU transition from ``y_from`` over ``dtau``."""
    _require_forward(dtau)
    decay = np.exp(-tp.gamma * np.asarray(dtau, dtype=float))
    var = -tp.variance * np.expm1(-2.0 * tp.gamma * np.asarray(dtau, dtype=float))
    return decay * np.asarray(y_from, dtype=float), var


def ou_density_values(y_to, y_from, dtau, tp: ThermoParams) -> np.ndarray:
    """Vectorized f1(y_to, dtau | y_from); arguments broadcast."""
    mean, var = ou_moments(y_from, dtau, tp)
    d = np.asarray(y_to, dtype=float) - mean
    return np.exp(-0.5 * d * d / var) / np.sqrt(2.0 * math.pi * var)


def ou_density(q: KernelQuery, tp: ThermoParams) -> float:
    return float(ou_density_values(q.y_to, q.y_from, q.dtau, tp))


def ou_cdf(y_to, y_from, dtau, tp: ThermoParams):
    mean, var = ou_moments(y_from, dtau, tp)
    return 0.5 * erfc(-(np.asarray(y_to, dtype=float) - mean) / np.sqrt(2.0 * var))


def stationary_density(y, tp: ThermoParams):
    """Equilibrium density  sqrt(s / 2 pi k_B) exp(-s y^2 / 2 k_B)."""
    y = np.asarray(y, dtype=float)
    out = math.sqrt(tp.s / (2.0 * math.pi * tp.k_B)) * np.exp(-tp.s * y * y / (2.0 * tp.k_B))
    return float(out) if out.ndim == 0 else out


def linear_flux(y, tp: ThermoParams):
    """Flux  L * dS/dy = -gamma y  of the linear regime."""
    out = -tp.gamma * np.asarray(y, dtype=float)
    return float(out) if out.ndim == 0 else out


def ck_residual(
    y1: float,
    y3: float,
    t1: float,
    t2: float,
    t3: float,
    tp: ThermoParams,
    rule: QuadratureRule = DEFAULT_CK_RULE,
) -> float:
    """Relative Chapman-Kolmogorov defect of the OU kernel at one point.

    The intermediate integral runs over the product of the two Gaussians in
    ``y2``; rules without an explicit domain are centred on that product and
    scaled by its width, so the quadrature follows the inner kernel all the
    way into its delta limit.
    """
    if not (t1 < t2 < t3):
        raise BadTimeOrder(f"need t1 < t2 < t3, got {(t1, t2, t3)}")
    da, db = t2 - t1, t3 - t2
    mean_a, var_a = ou_moments(y1, da, tp)
    decay_b = math.exp(-tp.gamma * db)
    _, var_b = ou_moments(0.0, db, tp)
    precision = 1.0 / var_a + decay_b**2 / var_b
    center = (mean_a / var_a + y3 * decay_b / var_b) / precision
    y2, w = rule.nodes(float(center), float(1.0 / math.sqrt(precision)))
    inner = ou_density_values(y3, y2, db, tp) * ou_density_values(y2, y1, da, tp)
    direct = float(ou_density_values(y3, y1, t3 - t1, tp))
    return abs(float(np.dot(w, inner)) - direct) / direct


# -- oscillator propagator ---------------------------------------------------------


def _regulated_time(t, epsilon: float) -> complex:
    if epsilon < 0 or not math.isfinite(epsilon):
        raise ValidationError(f"epsilon must be a finite nonnegative number, got {epsilon!r}")
    t = complex(t)
    if t.real < 0 or t.imag > 0 or t == 0:
        raise NonPositiveDuration(f"propagation time must lie in Re t >= 0, Im t <= 0, t != 0; got {t!r}")
    return t - 1j * epsilon


def _sqrt_sin(wt: complex) -> complex:
    # Continue sqrt(sin) along the regulated path: each focal point adds pi/2.
    k = math.floor(wt.real / math.pi)
    return np.sqrt((-1.0) ** k * np.sin(wt)) * np.exp(0.5j * math.pi * k)


def qho_propagator_values(x1, x2, t, mp: MechParams, epsilon: float = 0.0) -> np.ndarray:
    """Mehler kernel K(x2, t | x1) at complex time ``t - i epsilon``."""
    tc = _regulated_time(t, epsilon)
    wt = mp.omega * tc
    s = np.sin(wt)
    if epsilon == 0 and tc.imag == 0 and abs(s) < CAUSTIC_TOL:
        raise CausticSingularity(f"omega t = {wt.real!r} is a focal point; set epsilon > 0")
    c = np.cos(wt)
    mw = mp.m * mp.omega / mp.hbar
    pre = math.sqrt(mw / (2.0 * math.pi)) * np.exp(-0.25j * math.pi) / _sqrt_sin(wt)
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    return pre * np.exp(0.5j * mw * ((x1 * x1 + x2 * x2) * c - 2.0 * x1 * x2) / s)


def qho_propagator(x1: float, x2: float, t, mp: MechParams, epsilon: float = 0.0) -> complex:
    return complex(qho_propagator_values(x1, x2, t, mp, epsilon))


@dataclass(frozen=True)
class _GaussKernel:
    """K(xb | xa) = norm * exp(i (a xa^2 + b xa xb + c xb^2))."""

    norm: complex
    a: complex
    b: complex
    c: complex

    def then(self, later: "_GaussKernel") -> "_GaussKernel":
        alpha = self.c + later.a
        return _GaussKernel(
            norm=self.norm * later.norm * np.sqrt(math.pi / (-1j * alpha)),
            a=self.a - self.b**2 / (4.0 * alpha),
            b=-self.b * later.b / (2.0 * alpha),
            c=later.c - later.b**2 / (4.0 * alpha),
        )

    def __call__(self, x1, x2):
        return self.norm * np.exp(1j * (self.a * x1 * x1 + self.b * x1 * x2 + self.c * x2 * x2))


def trotter_propagator(x1, x2, t, mp: MechParams, n_slices: int, epsilon: float = 0.0):
    """Compose ``n_slices`` symmetric-split short-time kernels exactly.

    Each slice is the free kernel flanked by half potential steps; the
    Gaussian integrals over intermediate points are done in closed form, so
    the only error is the splitting error of the short-time factor.
    """
    if n_slices < 1:
        raise ValidationError("n_slices must be at least 1")
    dt = _regulated_time(t, epsilon) / n_slices
    free = mp.m / (2.0 * mp.hbar * dt)
    pot = dt * mp.m * mp.omega**2 / (4.0 * mp.hbar)
    step = _GaussKernel(np.sqrt(mp.m / (2j * math.pi * mp.hbar * dt)), free - pot, -2.0 * free, free - pot)
    result, power, n = None, step, n_slices
    while n:
        if n & 1:
            result = power if result is None else result.then(power)
        n >>= 1
        if n:
            power = power.then(power)
    return result(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))


def taper(x, half_width: float, start: float = 2.0 / 3.0, width: float = 1.0 / 12.0):
    """Smooth cutoff equal to 1 near the origin and ~1e-6 at ``half_width``."""
    return 0.5 * erfc((np.abs(x) - start * half_width) / (width * half_width))


def group_property_error(
    x1: float,
    x3: float,
    t_a: float,
    t_b: float,
    mp: MechParams,
    epsilon: float = 1e-3,
    points: int = 400,
    half_width: float = 12.0,
    smooth_cutoff: bool = True,
) -> float:
    """Relative defect of  int K(x3, t_b | x2) K(x2, t_a | x1) dx2 = K(x3, t_a + t_b | x1).

    Both factors carry the regulator, so the exact composite is the kernel at
    ``t_a + t_b - 2 i epsilon``. The integrand does not decay on the real line;
    a smooth cutoff keeps the truncation at ``|x2| = half_width`` from leaking
    an O(1) boundary term into the result.
    """
    x2, w = panel_gauss_legendre(-half_width, half_width, points // 16, 16)
    if smooth_cutoff:
        w = w * taper(x2, half_width)
    inner = qho_propagator_values(x2, x3, t_b, mp, epsilon) * qho_propagator_values(x1, x2, t_a, mp, epsilon)
    ref = qho_propagator(x1, x3, t_a + t_b, mp, 2.0 * epsilon)
    return abs(complex(np.dot(w, inner)) - ref) / abs(ref)


def epsilon_tradeoff(eps_list, x1, x3, t_a, t_b, mp: MechParams, points: int = 400, half_width: float = 12.0):
    """Rows of (epsilon, composition error, regulator bias) over ``eps_list``.

    The regulator bias is the distance between the regulated and the bare
    composite kernels; it vanishes as epsilon -> 0 while the quadrature error
    of the oscillatory integral grows.
    """
    rows = []
    bare = qho_propagator(x1, x3, t_a + t_b, mp, 0.0)
    for eps in eps_list:
        err = group_property_error(x1, x3, t_a, t_b, mp, eps, points, half_width)
        bias = abs(qho_propagator(x1, x3, t_a + t_b, mp, 2.0 * eps) - bare) / abs(bare)
        rows.append((float(eps), err, bias))
    return rows


# -- duality comparison ------------------------------------------------------------


def duality_kernel_compare(tp: ThermoParams, tau: float, grid) -> GaugeReport:
    """Compare f1 with the Wick-rotated propagator on ``grid`` x ``grid``."""
    _require_forward(tau)
    y = np.asarray(grid, dtype=float)
    n = y.size
    if n < 2:
        raise ValidationError("the comparison grid needs at least two points")
    mp = to_mechanical(tp)
    y1, y2 = np.meshgrid(y, y, indexing="ij")
    ratio = ou_density_values(y2, y1, tau, tp) / qho_propagator_values(y1, y2, -1j * tau, mp)
    log_ratio = np.log(ratio.astype(complex)).ravel()

    # unknowns: log g at grid[1:], then log h
    design = np.zeros((n * n, n))
    rows = np.arange(n * n)
    i, j = np.divmod(rows, n)
    design[rows[j > 0], j[j > 0] - 1] += 1.0
    design[rows[i > 0], i[i > 0] - 1] -= 1.0
    design[:, -1] = 1.0
    coef, *_ = np.linalg.lstsq(design, log_ratio.real, rcond=None)
    resid = log_ratio - design @ coef
    return GaugeReport(
        grid=y,
        ratio_grid=ratio.astype(complex),
        factorization_residual=float(np.max(np.abs(resid))),
        tau=float(tau),
        log_g=np.concatenate([[0.0], coef[:-1]]),
        log_h=float(coef[-1]),
    )

"""Complex Gamma function and Hermite functions of complex order.

The Hermite function is

    H_nu(z) = 1 / (2 Gamma(-nu)) * sum_n (-1)^n Gamma((n - nu)/2) (2z)^n / n!

an entire function of ``z`` for every order ``nu`` that is not a nonnegative
integer. In double precision the series loses about ``|z|^2 / ln 10`` digits
to cancellation, so beyond the crossover radius the large-argument expansions
take over. Two of them are used, split along the Stokes lines arg z = +-pi/2:

* ``|arg z| <= pi/2``: the algebraic expansion
  (2z)^nu sum_k (-1)^k (-nu)_{2k} / (k! (2z)^{2k})
* ``pi/2 < |arg z| <= pi``: the algebraic expansion plus the exponential one
  -sqrt(pi) e^{+-i pi nu} / Gamma(-nu) z^{-nu-1} e^{z^2} sum_k (nu+1)_{2k} / (k! (2z)^{2k})

Scalar entry points return :class:`EvalReport`; the ``*_values`` functions are
their vectorised counterparts and return bare arrays.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import GammaPole, OrderAtPole, OutsideSector, SeriesNonConvergent

EPS = np.finfo(float).eps

# Crossover radius between the (re-centred) power series and the large-|z|
# expansions. At |z| = 6 the optimally truncated expansions are accurate to
# ~1e-13 on the eigenfunction rays; see tests/test_specfun.py.
Z_CROSS = 6.0

MAX_SERIES_TERMS = 10_000
MAX_ASYMPTOTIC_TERMS = 60
DEFAULT_ASYMPTOTIC_TERMS = 4

# Lanczos-type approximation with g = 607/128 and 14 terms (Godfrey's set);
# relative error about 1e-15 across Re z >= 1/2.
_LANCZOS_SHIFT = 671.0 / 128.0
_LANCZOS_C0 = 0.999999999999997092
_LANCZOS_COEF = (
    57.1562356658629235,
    -59.5979603554754912,
    14.1360979747417471,
    -0.491913816097620199,
    0.339946499848118887e-4,
    0.465236289270485756e-4,
    -0.983744753048795646e-4,
    0.158088703224912494e-3,
    -0.210264441724104883e-3,
    0.217439618115212643e-3,
    -0.164318106536763890e-3,
    0.844182239838527433e-4,
    -0.261908384015814087e-4,
    0.368991826595316234e-5,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)
_SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class EvalReport:
    """Value of a special-function evaluation with its provenance.

    ``est_error`` is a relative error estimate; ``terms_used`` counts the
    series terms (or asymptotic correction orders) actually summed.
    """

    value: complex
    method: str
    terms_used: int
    est_error: float


# -- Gamma -------------------------------------------------------------------


def _is_nonpositive_integer(z: np.ndarray) -> np.ndarray:
    return (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))


def _gamma_right(z: np.ndarray) -> np.ndarray:
    # valid for Re z >= 1/2
    ser = np.full_like(z, _LANCZOS_C0)
    for j, c in enumerate(_LANCZOS_COEF, start=1):
        ser = ser + c / (z + j)
    t = z + _LANCZOS_SHIFT
    return _SQRT_2PI * np.exp((z + 0.5) * np.log(t) - t) * ser / z


def _sinpi(z: np.ndarray) -> np.ndarray:
    shift = 2.0 * np.round(z.real / 2.0)
    return np.sin(np.pi * (z - shift))


def gamma_values(z) -> np.ndarray:
    """Vectorised complex Gamma function (Lanczos plus reflection)."""
    z = np.asarray(z, dtype=complex)
    if np.any(_is_nonpositive_integer(z)):
        raise GammaPole("Gamma has poles at z = 0, -1, -2, ...")
    out = np.empty_like(z)
    right = z.real >= 0.5
    out[right] = _gamma_right(z[right])
    left = ~right
    if np.any(left):
        zl = z[left]
        out[left] = np.pi / (_sinpi(zl) * _gamma_right(1.0 - zl))
    return out


def gamma_complex(z: complex) -> complex:
    return complex(gamma_values(np.asarray([z]))[0])


# -- orders ------------------------------------------------------------------


def is_nonneg_integer(nu: complex) -> bool:
    nu = complex(nu)
    return nu.imag == 0 and nu.real >= 0 and nu.real == round(nu.real)


def _check_series_order(nu: complex) -> None:
    if is_nonneg_integer(nu):
        raise OrderAtPole(f"order {nu} is a nonnegative integer (Gamma(-nu) pole); use hermite_polynomial")


# -- Hermite polynomials -------------------------------------------------------


def hermite_polynomial_values(n: int, z) -> np.ndarray:
    if n < 0 or int(n) != n:
        raise ValueError("polynomial degree must be a nonnegative integer")
    z = np.asarray(z, dtype=complex)
    h_prev = np.ones_like(z)
    if n == 0:
        return h_prev
    h = 2.0 * z
    for k in range(1, int(n)):
        h_prev, h = h, 2.0 * z * h - 2.0 * k * h_prev
    return h


def hermite_polynomial(n: int, z: complex) -> complex:
    """Physicists' Hermite polynomial via H_{k+1} = 2z H_k - 2k H_{k-1}."""
    return complex(hermite_polynomial_values(n, np.asarray([z]))[0])


# -- power series --------------------------------------------------------------


class _Neumaier:
    """Compensated summation over complex arrays (real and imaginary parts apart)."""

    def __init__(self, shape):
        self.sum = np.zeros(shape, dtype=complex)
        self._comp_re = np.zeros(shape)
        self._comp_im = np.zeros(shape)

    @staticmethod
    def _step(s, c, x):
        t = s + x
        big = np.abs(s) >= np.abs(x)
        c = c + np.where(big, (s - t) + x, (x - t) + s)
        return t, c

    def add(self, x: np.ndarray) -> None:
        re, self._comp_re = self._step(self.sum.real, self._comp_re, x.real)
        im, self._comp_im = self._step(self.sum.imag, self._comp_im, x.imag)
        self.sum = re + 1j * im

    @property
    def total(self) -> np.ndarray:
        return self.sum + (self._comp_re + 1j * self._comp_im)


def _series_values(nu: complex, z: np.ndarray, tol: float, max_terms: int):
    """Sum the power series; returns (value, relative error, terms)."""
    nu = complex(nu)
    two_z = 2.0 * z
    q = two_z * two_z
    g = gamma_values(np.asarray([-nu / 2.0, (1.0 - nu) / 2.0, -nu]))
    t_even = np.full(z.shape, g[0], dtype=complex)
    t_odd = -g[1] * two_z
    acc = _Neumaier(z.shape)
    abs_sum = np.zeros(z.shape)
    n = 0
    while True:
        acc.add(t_even)
        acc.add(t_odd)
        abs_sum += np.abs(t_even) + np.abs(t_odd)
        t_even = t_even * ((n - nu) / 2.0) * q / ((n + 1) * (n + 2))
        t_odd = t_odd * ((n + 1 - nu) / 2.0) * q / ((n + 2) * (n + 3))
        n += 2
        # ratios of the *following* step; they decrease monotonically once n > |nu|
        rho_e = abs((n - nu) / 2.0) * np.abs(q) / ((n + 1) * (n + 2))
        rho_o = abs((n + 1 - nu) / 2.0) * np.abs(q) / ((n + 2) * (n + 3))
        if n > abs(nu) + 2 and np.all(rho_e < 1) and np.all(rho_o < 1):
            tail = np.abs(t_even) / (1 - rho_e) + np.abs(t_odd) / (1 - rho_o)
            partial = np.abs(acc.total)
            if np.all(tail <= tol * np.maximum(partial, EPS * abs_sum)):
                break
        if n >= max_terms:
            raise SeriesNonConvergent(f"Hermite series did not converge within {max_terms} terms")
    s = acc.total
    value = s / (2.0 * g[2])
    scale = np.maximum(np.abs(s), np.finfo(float).tiny)
    # rounding of each term is bounded by a few ulps times the term count growth
    est = (tail + 4.0 * EPS * math.sqrt(n) * abs_sum) / scale + EPS
    return value, est, n


def hermite_series(nu: complex, z: complex, tol: float = 1e-16, max_terms: int = MAX_SERIES_TERMS) -> EvalReport:
    if not tol > 0:
        raise ValueError("tol must be positive")
    _check_series_order(nu)
    value, est, n = _series_values(nu, np.asarray([z], dtype=complex), tol, max_terms)
    return EvalReport(complex(value[0]), "series", n, float(est[0]))


def _taylor_step(nu: complex, z0: np.ndarray, h0: np.ndarray, d0: np.ndarray, h: np.ndarray):
    """Advance (H, H') from z0 to z0 + h with the local Taylor series of the ODE.

    Coefficients obey (k+1)(k+2) a_{k+2} = 2 z0 (k+1) a_{k+1} + 2 (k - nu) a_k.
    Returns (H, H', relative rounding estimate).
    """
    a_prev, a_cur = h0, d0
    hp = h.copy()  # h^k for the current a_cur (k = 1)
    val = _Neumaier(z0.shape)
    der = _Neumaier(z0.shape)
    val.add(a_prev)
    val.add(a_cur * hp)
    der.add(a_cur)
    abs_val = np.abs(a_prev) + np.abs(a_cur * hp)
    k = 0
    small_run = np.zeros(z0.shape, dtype=int)
    while True:
        a_next = (2.0 * z0 * (k + 1) * a_cur + 2.0 * (k - nu) * a_prev) / ((k + 1) * (k + 2))
        der.add((k + 2) * a_next * hp)
        hp = hp * h
        t = a_next * hp
        val.add(t)
        abs_val += np.abs(t)
        a_prev, a_cur = a_cur, a_next
        k += 1
        tiny = np.abs(t) <= EPS * 1e-2 * np.abs(val.sum)
        small_run = np.where(tiny, small_run + 1, 0)
        if np.all(small_run >= 2) or k > 400:
            break
    v = val.total
    return v, der.total, EPS * abs_val / np.maximum(np.abs(v), np.finfo(float).tiny)


# Radius where continuation takes over from the origin series, and its step.
CONTINUATION_BASE = 1.5
CONTINUATION_STEP = 0.25


def _continued_values(nu: complex, z: np.ndarray):
    """Power series about the origin, re-centred outwards along each ray.

    The origin series is evaluated at radius :data:`CONTINUATION_BASE` on the
    ray through ``z`` and the Taylor series of the Hermite equation is then
    re-expanded in steps of at most :data:`CONTINUATION_STEP`. Along rays on
    which e^{z^2} has unit modulus (those met by the oscillator eigenfunctions)
    this avoids the e^{|z|^2} cancellation of the single origin series.
    """
    nu = complex(nu)
    r = np.abs(z)
    z0 = z * (CONTINUATION_BASE / r)
    h_val, h_err, n0 = _series_values(nu, z0, 1e-16, MAX_SERIES_TERMS)
    if nu == 0:
        d_val, d_err = np.zeros_like(z0), np.zeros(z.shape)
    elif is_nonneg_integer(nu - 1.0):
        d_val = 2.0 * nu * hermite_polynomial_values(int(round((nu - 1.0).real)), z0)
        d_err = np.full(z.shape, EPS)
    else:
        d_low, d_err, _ = _series_values(nu - 1.0, z0, 1e-16, MAX_SERIES_TERMS)
        d_val = 2.0 * nu * d_low
    n_steps = max(1, int(math.ceil((r.max() - CONTINUATION_BASE) / CONTINUATION_STEP)))
    h = (z - z0) / n_steps
    err = np.maximum(h_err, d_err)
    cur, dcur = h_val, d_val
    for i in range(n_steps):
        cur, dcur, e = _taylor_step(nu, z0 + i * h, cur, dcur, h)
        err = err + e
    return cur, err, n0 + n_steps


# -- large-argument expansions -----------------------------------------------


def _expansion(ratio, z2inv: np.ndarray, terms: int | None):
    """Sum 1 + sum_k c_k (2z)^{-2k} where ``ratio(k)`` is c_{k+1}/c_k.

    With ``terms=None`` the sum is truncated adaptively (at the smallest term,
    or once terms drop below rounding); otherwise exactly ``terms``
    corrections are taken. Returns (sum, |first dropped term|, count).
    """
    shape = z2inv.shape
    total = np.ones(shape, dtype=complex)
    term = np.ones(shape, dtype=complex)
    dropped = np.zeros(shape)
    active = np.ones(shape, dtype=bool)
    used = np.zeros(shape, dtype=int)
    limit = MAX_ASYMPTOTIC_TERMS if terms is None else terms
    for k in range(limit + 1):
        nxt = term * ratio(k) * z2inv
        if k == limit:
            dropped = np.where(active, np.abs(nxt), dropped)
            break
        if terms is None:
            stop = active & ((np.abs(nxt) >= np.abs(term)) | (np.abs(nxt) < EPS * np.abs(total)))
            dropped = np.where(stop, np.abs(nxt), dropped)
            active &= ~stop
            if not np.any(active):
                break
        total = np.where(active, total + nxt, total)
        used += active
        term = nxt
    return total, dropped, used


def _large_values(nu: complex, z: np.ndarray, log_z: np.ndarray, with_exp: bool, exp_sign: float, terms):
    """Large-|z| form with a caller-supplied branch of log z."""
    nu = complex(nu)
    z2inv = 1.0 / (4.0 * z * z)
    # ratio c_{k+1}/c_k of (-1)^k (-nu)_{2k} / k!
    alg, alg_err, alg_n = _expansion(lambda k: -(-nu + 2 * k) * (-nu + 2 * k + 1) / (k + 1), z2inv, terms)
    lead = np.exp(nu * (math.log(2.0) + log_z))
    value = lead * alg
    err_abs = np.abs(lead) * alg_err
    used = alg_n
    if with_exp:
        ser, ser_err, ser_n = _expansion(lambda k: (nu + 1 + 2 * k) * (nu + 2 + 2 * k) / (k + 1), z2inv, terms)
        c = _SQRT_PI * cmath.exp(exp_sign * 1j * math.pi * nu) / gamma_complex(-nu)
        sub = c * np.exp((-nu - 1.0) * log_z + z * z)
        value = value - sub * ser
        err_abs = err_abs + np.abs(sub) * ser_err
        used = np.maximum(used, ser_n)
    est = err_abs / np.maximum(np.abs(value), np.finfo(float).tiny) + EPS
    return value, est, used


def _sector_log(z: np.ndarray) -> np.ndarray:
    """log z with arg continued into (pi/4, 5pi/4]; NaN imaginary part off-sector."""
    theta = np.angle(z)
    theta = np.where(theta <= -3 * np.pi / 4, theta + 2 * np.pi, theta)
    return np.log(np.abs(z)) + 1j * theta


def in_asymptotic_sector(z: complex) -> bool:
    theta = float(np.angle(complex(z)))
    if theta <= -3 * math.pi / 4:
        theta += 2 * math.pi
    return math.pi / 4 < theta < 5 * math.pi / 4


def hermite_asymptotic_values(nu: complex, z, terms: int | None = DEFAULT_ASYMPTOTIC_TERMS):
    """Vectorised sector expansion; returns (values, relative error, terms)."""
    z = np.asarray(z, dtype=complex)
    _check_series_order(nu)
    ok = np.vectorize(in_asymptotic_sector, otypes=[bool])(z) if z.size else np.zeros(0, bool)
    if not np.all(ok):
        raise OutsideSector("the expansion holds only for pi/4 < arg z < 5pi/4")
    return _large_values(nu, z, _sector_log(z), True, 1.0, terms)


def hermite_asymptotic(nu: complex, z: complex, terms: int | None = DEFAULT_ASYMPTOTIC_TERMS) -> EvalReport:
    """Large-|z| expansion in the sector pi/4 < arg z < 5pi/4.

    The leading part is (2z)^nu - sqrt(pi) e^{i pi nu} / Gamma(-nu) z^{-nu-1} e^{z^2};
    ``terms`` further orders in (2z)^{-2} are added to each piece (``terms=0``
    gives the bare leading form, ``None`` truncates adaptively). Powers use
    arg z continued into the sector, which agrees with the principal branch
    on (pi/4, pi].
    """
    value, est, used = hermite_asymptotic_values(nu, np.asarray([z]), terms)
    return EvalReport(complex(value[0]), "asymptotic", int(used[0]), float(est[0]))


def _large_any_values(nu: complex, z: np.ndarray, terms=None):
    """Large-|z| expansion valid in every direction (Stokes lines at +-pi/2)."""
    theta = np.angle(z)
    log_z = np.log(np.abs(z)) + 1j * theta
    value = np.empty_like(z)
    est = np.empty(z.shape)
    used = np.empty(z.shape, dtype=int)
    regions = (
        (np.abs(theta) <= np.pi / 2, False, 0.0),
        (theta > np.pi / 2, True, 1.0),
        (theta < -np.pi / 2, True, -1.0),
    )
    for mask, with_exp, sign in regions:
        if np.any(mask):
            v, e, u = _large_values(nu, z[mask], log_z[mask], with_exp, sign, terms)
            value[mask], est[mask], used[mask] = v, e, u
    return value, est, used


# -- dispatch ------------------------------------------------------------------

METHOD_CODES = ("series", "asymptotic", "polynomial")


def _recessive(z: np.ndarray) -> np.ndarray:
    # |arg z| < pi/4: H_nu is the subdominant solution, so outward continuation is unstable
    return np.cos(2.0 * np.angle(z)) > 1e-3


def _eval(nu: complex, z: np.ndarray, z_cross: float, tol: float = 1e-16):
    """Branch selection shared by the scalar and vectorised entry points.

    Returns (values, relative errors, method codes, terms).
    """
    value = np.empty_like(z)
    est = np.empty(z.shape)
    code = np.empty(z.shape, dtype=int)
    used = np.zeros(z.shape, dtype=int)
    r = np.abs(z)
    near = r <= min(CONTINUATION_BASE, z_cross)
    mid = ~near & (r <= z_cross)
    far = r > z_cross
    mid_rec = mid & _recessive(z)
    mid_osc = mid & ~mid_rec
    if np.any(near):
        v, e, n = _series_values(nu, z[near], tol, MAX_SERIES_TERMS)
        value[near], est[near], code[near], used[near] = v, e, 0, n
    if np.any(mid_osc):
        v, e, n = _continued_values(nu, z[mid_osc])
        value[mid_osc], est[mid_osc], code[mid_osc], used[mid_osc] = v, e, 0, n
    if np.any(mid_rec):
        # both branches lose accuracy here; keep whichever claims the smaller error
        zs = z[mid_rec]
        vs, es, ns = _series_values(nu, zs, tol, MAX_SERIES_TERMS)
        va, ea, na = _large_any_values(nu, zs)
        pick = ea < es
        value[mid_rec] = np.where(pick, va, vs)
        est[mid_rec] = np.where(pick, ea, es)
        code[mid_rec] = np.where(pick, 1, 0)
        used[mid_rec] = np.where(pick, na, ns)
    if np.any(far):
        v, e, n = _large_any_values(nu, z[far])
        value[far], est[far], code[far], used[far] = v, e, 1, n
    return value, est, code, used


def hermite_nu_full(nu: complex, z, z_cross: float = Z_CROSS):
    """Vectorised dispatcher; returns (values, relative errors, method codes).

    Method codes index :data:`METHOD_CODES`.
    """
    z = np.asarray(z, dtype=complex)
    if is_nonneg_integer(nu):
        v = hermite_polynomial_values(int(round(complex(nu).real)), z)
        return v, np.full(z.shape, EPS), np.full(z.shape, 2)
    value, est, code, _ = _eval(complex(nu), z.ravel(), z_cross)
    return value.reshape(z.shape), est.reshape(z.shape), code.reshape(z.shape)


def hermite_values(nu: complex, z, z_cross: float = Z_CROSS) -> np.ndarray:
    return hermite_nu_full(nu, z, z_cross)[0]


def hermite_nu(nu: complex, z: complex, z_cross: float = Z_CROSS) -> EvalReport:
    """H_nu(z): power series for |z| <= ``z_cross``, large-|z| expansion beyond.

    Inside the crossover the origin series is re-centred along the ray where
    that is numerically stable. Nonnegative integer orders are routed to the
    polynomial recurrence.
    """
    if is_nonneg_integer(nu):
        n = int(round(complex(nu).real))
        return EvalReport(hermite_polynomial(n, z), "polynomial", n + 1, float(EPS))
    value, est, code, used = _eval(complex(nu), np.asarray([z], dtype=complex), z_cross)
    return EvalReport(complex(value[0]), METHOD_CODES[code[0]], int(used[0]), float(est[0]))


def hermite_deriv_values(nu: complex, z, z_cross: float = Z_CROSS) -> np.ndarray:
    nu = complex(nu)
    if nu == 0:
        return np.zeros(np.shape(z), dtype=complex)
    return 2.0 * nu * hermite_values(nu - 1.0, z, z_cross)


def hermite_deriv(nu: complex, z: complex, z_cross: float = Z_CROSS) -> complex:
    """dH_nu/dz = 2 nu H_{nu-1}(z)."""
    return complex(hermite_deriv_values(nu, np.asarray([z]), z_cross)[0])


def hermite_deriv2_values(nu: complex, z, z_cross: float = Z_CROSS) -> np.ndarray:
    nu = complex(nu)
    if nu == 0 or nu == 1:
        return np.zeros(np.shape(z), dtype=complex)
    return 4.0 * nu * (nu - 1.0) * hermite_values(nu - 2.0, z, z_cross)


HERMITE_RESIDUAL_FLOOR = 1e-300


def hermite_ode_residual_values(nu: complex, z, z_cross: float = Z_CROSS) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    nu = complex(nu)
    h = hermite_values(nu, z, z_cross)
    d1 = 2.0 * z * hermite_deriv_values(nu, z, z_cross)
    d2 = hermite_deriv2_values(nu, z, z_cross)
    num = np.abs(d2 - d1 + 2.0 * nu * h)
    return num / (np.abs(d2) + np.abs(d1) + np.abs(2.0 * nu * h) + HERMITE_RESIDUAL_FLOOR)


def hermite_ode_residual(nu: complex, z: complex, z_cross: float = Z_CROSS) -> float:
    """Relative residual of H'' - 2z H' + 2 nu H = 0 with analytic derivatives."""
    return float(hermite_ode_residual_values(nu, np.asarray([z]), z_cross)[0])

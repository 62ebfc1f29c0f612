import cmath
import math

import mpmath as mp
import numpy as np
import pytest
import scipy.special as sps
from hypothesis import given, settings
from hypothesis import strategies as st

from thermodual import specfun as sf
from thermodual.errors import GammaPole, OrderAtPole, OutsideSector

mp.mp.dps = 40
ROT = cmath.exp(0.75j * math.pi)
SIGMAS = [0.0, 1.0, -1.0, 5.0, -5.0]


def physics_nu(sigma):
    return complex(-0.5, 0.5 * sigma)


def mp_hermite(nu, z):
    return complex(mp.hermite(mp.mpc(nu), mp.mpc(z)))


def rel(a, b):
    return abs(a - b) / abs(b)


# -- Gamma ----------------------------------------------------------------------


def test_gamma_special_values():
    assert sf.gamma_complex(1) == pytest.approx(1.0, rel=1e-15)
    assert sf.gamma_complex(0.5) == pytest.approx(1.772453850905516, rel=1e-15)
    assert sf.gamma_complex(6) == pytest.approx(120.0, rel=1e-14)


@pytest.mark.parametrize("z", [0, -1, -2, -17])
def test_gamma_poles(z):
    with pytest.raises(GammaPole):
        sf.gamma_complex(z)


def test_gamma_matches_scipy_on_a_grid():
    re, im = np.meshgrid(np.linspace(-19.73, 19.61, 41), np.linspace(-19.9, 19.9, 40))
    z = (re + 1j * im).ravel()
    z = z[np.abs(z) <= 20]
    ours = sf.gamma_values(z)
    ref = sps.gamma(z)
    ok = np.isfinite(ref) & (ref != 0)
    assert np.max(np.abs(ours[ok] - ref[ok]) / np.abs(ref[ok])) < 1e-13


@pytest.mark.parametrize("z", [0.3 + 0.2j, -3.7 + 0.01j, 12.5 - 7j, -15.2 + 4j, 0.001j, 19.0 + 0.5j])
def test_gamma_matches_mpmath(z):
    assert rel(sf.gamma_complex(z), complex(mp.gamma(mp.mpc(z)))) < 1e-13


@settings(max_examples=100, deadline=None)
@given(st.complex_numbers(max_magnitude=15, allow_nan=False, allow_infinity=False))
def test_gamma_recurrence(z):
    if abs(z) < 1e-3 or abs(z - round(z.real)) < 1e-3:
        return
    assert rel(sf.gamma_complex(z + 1) / sf.gamma_complex(z), z) < 1e-12


# -- polynomials ------------------------------------------------------------------


def test_hermite_polynomial_small_cases():
    assert sf.hermite_polynomial(0, 3 + 4j) == 1
    assert sf.hermite_polynomial(1, 2 + 1j) == 4 + 2j
    assert sf.hermite_polynomial(2, 1) == 2


@pytest.mark.parametrize("n", [3, 7, 12, 20])
def test_hermite_polynomial_matches_scipy(n):
    x = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(sf.hermite_polynomial_values(n, x).real, sps.eval_hermite(n, x), rtol=1e-12, atol=1e-9)


# -- origin series ----------------------------------------------------------------


def test_series_closed_forms_at_origin():
    r = sf.hermite_series(-1, 0)
    assert r.value == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-15)
    assert r.method == "series"
    expected = sf.gamma_complex(0.25) / (2 * math.sqrt(math.pi))
    assert sf.hermite_series(-0.5, 0).value == pytest.approx(expected, rel=1e-15)
    assert abs(expected - 1.0227656) < 1e-6


@pytest.mark.parametrize("nu", [0, 1, 4])
def test_series_refuses_integer_orders(nu):
    with pytest.raises(OrderAtPole):
        sf.hermite_series(nu, 0.3)


def test_series_rejects_bad_tolerance():
    with pytest.raises(ValueError):
        sf.hermite_series(-0.5, 0.1, tol=0)


@pytest.mark.parametrize("sigma", SIGMAS)
def test_series_against_mpmath_inside_unit_disc(sigma):
    nu = physics_nu(sigma)
    rng = np.random.default_rng(4)
    for z in rng.uniform(-1, 1, 10) + 1j * rng.uniform(-1, 1, 10):
        rep = sf.hermite_series(nu, z)
        ref = mp_hermite(nu, z)
        err = rel(rep.value, ref)
        assert err < 1e-13
        assert err <= 10 * rep.est_error + 1e-15


def test_series_error_estimate_is_honest_where_it_cancels():
    # far along the oscillatory ray the bare series loses digits; the estimate must say so
    nu = physics_nu(2.0)
    z = 4 * ROT
    rep = sf.hermite_series(nu, z)
    assert rel(rep.value, mp_hermite(nu, z)) <= 10 * rep.est_error


# -- dispatcher ---------------------------------------------------------------------


@pytest.mark.parametrize("sigma", SIGMAS)
@pytest.mark.parametrize("r", [0.5, 2.0, 4.5, 5.9, 7.0, 12.0, 30.0])
@pytest.mark.parametrize("branch", [1, -1])
def test_dispatcher_on_physics_rays(sigma, r, branch):
    nu = physics_nu(sigma)
    z = branch * ROT * r
    rep = sf.hermite_nu(nu, z)
    ref = mp_hermite(nu, z)
    assert rel(rep.value, ref) < 1e-9
    assert rep.method in ("series", "asymptotic")
    assert rep.method == ("series" if r <= sf.Z_CROSS else "asymptotic")


@pytest.mark.parametrize("arg", np.linspace(-math.pi, math.pi, 13))
def test_dispatcher_all_directions(arg):
    nu = physics_nu(1.0)
    for r in (1.0, 3.0, 8.0):
        z = r * cmath.exp(1j * arg)
        rep = sf.hermite_nu(nu, z)
        ref = mp_hermite(nu, z)
        assert rel(rep.value, ref) < 1e-6, (r, arg)


def test_dispatcher_routes_integer_orders_to_polynomial():
    rep = sf.hermite_nu(3, 1.5 - 0.5j)
    assert rep.method == "polynomial"
    assert rep.value == pytest.approx(sf.hermite_polynomial(3, 1.5 - 0.5j))


def test_vectorised_matches_scalar():
    nu = physics_nu(-1.0)
    z = np.array([0.2, 2 * ROT, -9 * ROT, 3 - 1j])
    vec = sf.hermite_values(nu, z)
    for zi, vi in zip(z, vec):
        assert vi == pytest.approx(sf.hermite_nu(nu, zi).value, rel=1e-14)


# -- asymptotics -----------------------------------------------------------------


@pytest.mark.parametrize("z", [1.0, 1j * 0 + 2.0, -3j, 3.0 + 0.5j])
def test_asymptotic_sector_guard(z):
    with pytest.raises(OutsideSector):
        sf.hermite_asymptotic(-0.5, z)


def test_asymptotic_agrees_at_eight():
    z = 8 * ROT
    a = sf.hermite_asymptotic(-0.5, z)
    assert a.method == "asymptotic"
    assert rel(a.value, mp_hermite(-0.5, z)) < 1e-3


def test_asymptotic_deviation_decreases():
    devs = []
    for r in (6, 8, 10):
        z = r * ROT
        devs.append(rel(sf.hermite_asymptotic(-0.5, z).value, sf.hermite_nu(-0.5, z, z_cross=np.inf).value))
    assert devs[0] > devs[1] > devs[2]


def test_leading_order_form_matches_two_term_formula():
    nu, z = physics_nu(2.0), 9 * ROT
    lead = (2 * z) ** nu - math.sqrt(math.pi) * cmath.exp(1j * math.pi * nu) / sf.gamma_complex(-nu) * z ** (-nu - 1) * cmath.exp(z * z)
    assert sf.hermite_asymptotic(nu, z, terms=0).value == pytest.approx(lead, rel=1e-13)


def test_branch_consistency_in_overlap_window():
    for sigma in SIGMAS:
        nu = physics_nu(sigma)
        for r in np.linspace(sf.Z_CROSS, sf.Z_CROSS + 2, 5):
            z = r * ROT
            a = sf.hermite_asymptotic(nu, z)
            s = sf.hermite_nu(nu, z, z_cross=np.inf)
            assert rel(a.value, s.value) <= 10 * a.est_error + 1e-12


def test_asymptotic_beyond_pi_uses_continued_argument():
    # arg slightly above pi lies in the sector and must match the entire function
    z = 9 * cmath.exp(1j * (math.pi + 0.2))
    assert rel(sf.hermite_asymptotic(-0.5 + 0.5j, z).value, mp_hermite(-0.5 + 0.5j, z)) < 1e-6


# -- derivatives and the ODE -----------------------------------------------------------


def test_derivative_closed_form_at_origin():
    expected = -sf.gamma_complex(0.75) / (2 * sf.gamma_complex(1.5))
    assert sf.hermite_deriv(-0.5, 0) == pytest.approx(expected, rel=1e-14)


def test_derivative_against_finite_differences():
    rng = np.random.default_rng(11)
    r = 3 * np.sqrt(rng.uniform(0, 1, 50))
    z = r * np.exp(2j * math.pi * rng.uniform(0, 1, 50))
    nu = physics_nu(1.0)
    h = 1e-3
    fd = (
        -sf.hermite_values(nu, z + 2 * h)
        + 8 * sf.hermite_values(nu, z + h)
        - 8 * sf.hermite_values(nu, z - h)
        + sf.hermite_values(nu, z - 2 * h)
    ) / (12 * h)
    d = sf.hermite_deriv_values(nu, z)
    assert np.max(np.abs(fd - d) / np.abs(d)) < 1e-7


def test_derivative_linearity():
    a = 0.3 - 1.7j
    nu, z = physics_nu(-1.0), 1.1 + 0.4j
    h = 1e-4
    fd = (a * sf.hermite_nu(nu, z + h).value - a * sf.hermite_nu(nu, z - h).value) / (2 * h)
    assert fd == pytest.approx(a * sf.hermite_deriv(nu, z), rel=1e-7)


def disc_points(n=40, radius=3.0, seed=0):
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.uniform(0, 1, n))
    return r * np.exp(2j * math.pi * rng.uniform(0, 1, n))


@pytest.mark.parametrize("sigma, bound", [(0.0, 1e-9), (5.0, 1e-8)])
def test_ode_residual_examples(sigma, bound):
    assert np.max(sf.hermite_ode_residual_values(physics_nu(sigma), disc_points())) < bound


def test_ode_residual_exact_small_case():
    assert sf.hermite_ode_residual(-1, 0) < 1e-12


def test_ode_residual_large_arguments():
    z = np.concatenate([ROT * np.linspace(3, 40, 30), -ROT * np.linspace(3, 40, 30)])
    for sigma in SIGMAS:
        assert np.max(sf.hermite_ode_residual_values(physics_nu(sigma), z)) < 1e-8


@pytest.mark.parametrize("sigma", SIGMAS)
def test_reflection_pair_is_independent(sigma):
    nu = physics_nu(sigma)
    z = 0.7 + 0.2j
    h, hm = sf.hermite_nu(nu, z).value, sf.hermite_nu(nu, -z).value
    d, dm = sf.hermite_deriv(nu, z), sf.hermite_deriv(nu, -z)
    wronskian = -h * dm - d * hm
    expected = 2 ** (nu + 1) * math.sqrt(math.pi) * cmath.exp(z * z) / sf.gamma_complex(-nu)
    assert wronskian == pytest.approx(expected, rel=1e-12)
    assert abs(wronskian) > 1e-6


def test_low_error_claims_imply_small_residual():
    z = disc_points(60, 8.0, seed=3)
    for sigma in SIGMAS:
        nu = physics_nu(sigma)
        _, est, _ = sf.hermite_nu_full(nu, z)
        res = sf.hermite_ode_residual_values(nu, z)
        claimed = est < 1e-9
        assert np.all(res[claimed] < 1e-8)

"""Acceptance suite: one verdict line per criterion, printed in the terminal summary."""

import json
import math
import time

import numpy as np
import pytest

from thermodual import cli
from thermodual.duality import DiscretePath, MechParams, om_action, thermo_params_new, wick_action_identity
from thermodual.kernels import ck_residual, duality_kernel_compare, group_property_error, ou_density_values
from thermodual.montecarlo import lattice_propagator, simulate, transition_test
from thermodual.oscillator import (
    ComplexGrid,
    EigenSpec,
    asymptotic_eigenfunction,
    eigen_residual,
    eigenfunction,
    maximal_entropy_apply,
    maximal_entropy_state,
    membership,
)
from thermodual.quadrature import QuadratureRule
from thermodual.semigroup import (
    IncomingState,
    OutgoingState,
    evolve_incoming,
    evolve_outgoing,
    irreversibility_drift,
    spectral_evolve,
    transpose_identity_check,
)
from thermodual.specfun import hermite_ode_residual_values

TP = thermo_params_new(1.0, 1.0, 1.0)


def gauss(y, mean, var):
    return np.exp(-((y - mean) ** 2) / (2 * var)) / math.sqrt(2 * math.pi * var)


def test_chapman_kolmogorov(criterion):
    rng = np.random.default_rng(1)
    rule = QuadratureRule("gauss_legendre_panel", 128)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        y1, y3 = rng.uniform(-3, 3, 2)
        t1, t2, t3 = np.sort(rng.uniform(0, 3, 3))
        worst = max(worst, ck_residual(y1, y3, t1, t2, t3, TP, rule))
    elapsed = time.perf_counter() - start
    assert criterion(1, worst < 1e-8 and elapsed < 10, f"max residual {worst:.2e} over 100 cases in {elapsed:.2f} s")


def test_hermite_ode(criterion):
    rng = np.random.default_rng(2)
    r = 3 * np.sqrt(rng.uniform(0, 1, 40))
    z = r * np.exp(1j * rng.uniform(0, 2 * np.pi, 40))
    worst = max(float(np.max(hermite_ode_residual_values(complex(-0.5, s / 2), z))) for s in (0, 1, -1, 5, -5))
    assert criterion(2, worst < 1e-8, f"max relative residual {worst:.2e}")


def test_eigen_equation(criterion):
    y = np.linspace(-4, 4, 81)
    fixed = max(eigen_residual(EigenSpec(b, s), y) for b in ("plus", "minus") for s in (-5, -2, 0, 2, 5))
    scan = max(eigen_residual(EigenSpec(b, s), y) for b in ("plus", "minus") for s in np.linspace(-5, 5, 41))
    ok = fixed < 1e-7 and scan < 1e-7
    assert criterion(3, ok, f"max residual {fixed:.2e} at listed sigma, {scan:.2e} over the 41-value scan")


def test_maximal_entropy(criterion):
    y = np.linspace(-6, 6, 121)
    err_plus = np.max(np.abs(maximal_entropy_apply("plus", y) / maximal_entropy_state("plus", y) + 1j))
    err_minus = np.max(np.abs(maximal_entropy_apply("minus", y) / maximal_entropy_state("minus", y) - 1j))
    worst = max(err_plus, err_minus)
    assert criterion(4, worst < 1e-12, f"max eigenvalue error {worst:.2e}")


def test_asymptotics(criterion):
    spec = EigenSpec("plus", 0.0)

    def dev(y):
        return abs(asymptotic_eigenfunction(spec, y) / eigenfunction(spec, y) - 1)

    at8 = dev(8.0)
    trend = [dev(y) for y in (7.0, 9.0, 11.0)]
    ok = at8 < 1e-3 and trend[0] > trend[1] > trend[2]
    assert criterion(5, ok, f"deviation {at8:.2e} at y=8; " + ", ".join(f"{d:.1e}" for d in trend) + " at y=7,9,11")


def test_linf_not_l1(criterion):
    results = [membership(EigenSpec("plus", s), Y_max=100.0, Y_min=10.0) for s in (0.0, 2.0)]
    ok = all(abs(m.l1_growth_exponent - 0.5) <= 0.05 and m.in_linf and not m.in_l1 for m in results)
    detail = "; ".join(
        f"sigma={s}: exponent {m.l1_growth_exponent:.3f}, sup change {abs(m.sup_doubled / m.sup - 1):.1e}"
        for s, m in zip((0, 2), results)
    )
    assert criterion(6, ok, detail)


def test_nonunitarity(criterion):
    rng = np.random.default_rng(7)
    exact = all(
        spectral_evolve(EigenSpec("plus", s), t, TP) == pytest.approx(math.exp(-t * s / (2 * TP.k_B)), rel=1e-15)
        for s, t in zip(rng.uniform(-5, 5, 20), rng.uniform(0, 3, 20))
    )
    y = np.linspace(-8, 8, 801)
    contracts = True
    for _ in range(20):
        c = rng.normal(size=4)
        psi = OutgoingState(ComplexGrid(-8, 8, 801, np.tanh(c[0] * y + c[1]) + c[2] * np.cos(c[3] * y)))
        contracts &= evolve_outgoing(psi, rng.uniform(0.05, 2.0), TP).sup <= psi.sup + 1e-12
    phi = IncomingState(ComplexGrid.sample(lambda v: gauss(v, 0, 1), -8, 8, 801))
    refused = 0
    for call in (lambda: evolve_incoming(phi, -0.1, TP), lambda: spectral_evolve(EigenSpec("plus", 1.0), -0.1, TP)):
        try:
            call()
        except ValueError:
            refused += 1
    ok = exact and contracts and refused == 2
    assert criterion(7, ok, f"spectral scales exact: {exact}; sup never grows: {contracts}; negative durations refused: {refused}/2")


def test_transpose_and_drift(criterion):
    rng = np.random.default_rng(11)

    def grid(f):
        return ComplexGrid.sample(f, -8, 8, 1601)

    worst = 0.0
    for _ in range(10):
        a, b, m, v = rng.normal(size=2), rng.normal(), rng.uniform(-2, 2), rng.uniform(0.1, 1.0)
        psi = OutgoingState(grid(lambda y: np.sin(a[0] * y) + 1j * np.cos(a[1] * y)))
        phi = IncomingState(grid(lambda y: (1 + 0.2 * b * np.tanh(y)) * gauss(y, m, v)))
        worst = max(worst, transpose_identity_check(psi, phi, rng.uniform(0.05, 1.5), TP))
    phi = IncomingState(grid(lambda y: gauss(y, 0.7, 0.25)), density=True)
    flat = abs(irreversibility_drift(OutgoingState(grid(np.ones_like)), phi, TP))
    second = 0.7**2 + 0.25
    # both states move, so the pairing advances at twice the moment rate
    oracle = -2 * TP.k_B * 2 * (-2 * TP.gamma * second + 2 * TP.gamma * TP.variance)
    drift = irreversibility_drift(OutgoingState(grid(lambda y: y * y)), phi, TP)
    rel = abs(drift / oracle - 1)
    ok = worst < 1e-7 and flat < 1e-6 and rel < 1e-3
    assert criterion(8, ok, f"transpose {worst:.1e}; constant-observable drift {flat:.1e}; y^2 drift rel err {rel:.1e}")


def test_wick_identity(criterion):
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(1000):
        tp = thermo_params_new(*rng.uniform(0.2, 3.0, 3))
        path = DiscretePath(rng.normal(scale=2.0, size=rng.integers(2, 64)), rng.uniform(0.01, 0.5))
        worst = max(worst, abs(wick_action_identity(path, tp)) / abs(om_action(path, tp)))
    assert criterion(9, worst < 1e-12, f"max relative residual {worst:.2e} over 1000 paths")


def test_monte_carlo(criterion):
    start = time.perf_counter()
    passes = sum(
        transition_test(simulate(1.0, 0.05, 20, 100_000, "exact_ou", seed, TP, keep_paths=False)).p_value > 0.01
        for seed in range(20)
    )
    em = transition_test(simulate(1.0, 1e-3, 500, 200_000, "euler_maruyama", 17, TP, keep_paths=False))
    elapsed = time.perf_counter() - start
    ok = passes >= 19 and em.mean_err < 0.01 and em.var_err < 0.01 and elapsed < 60
    detail = f"KS pass {passes}/20; Euler mean err {em.mean_err:.1e}, var err {em.var_err:.1e}; {elapsed:.1f} s"
    assert criterion(10, ok, detail)


@pytest.mark.xfail(
    strict=True,
    reason="the two-term Lagrangian drops the boundary factor exp(-s(y2^2-y1^2)/4k_B); "
    "the normalized lattice converges to the Euclidean oscillator kernel, not to f1",
)
def test_lattice_path_integral(criterion):
    exact = float(ou_density_values(-0.2, 0.5, 1.0, TP))
    errs = [abs(lattice_propagator(0.5, -0.2, 1.0, n, TP) / exact - 1) for n in (64, 128, 256)]
    ok = errs[2] < 1e-2 and errs[0] > errs[1] > errs[2]
    detail = "relative errors " + ", ".join(f"{e:.4g}" for e in errs) + " at 64/128/256 slices"
    # diagnostic only: restoring the dropped boundary term recovers f1
    fixed = [abs(lattice_propagator(0.5, -0.2, 1.0, n, TP, boundary_term=True) / exact - 1) for n in (64, 128, 256)]
    detail += " (with boundary term: " + ", ".join(f"{e:.1e}" for e in fixed) + ")"
    assert criterion(11, ok, detail)


def test_group_property(criterion):
    mp = MechParams(1.0, 1.0, 1.0)
    cases = [(0.3, -0.5, 0.4, 0.6), (0.3, -0.5, 0.5, 0.5), (0.3, -0.5, 1.0, 1.0)]
    errs = [group_property_error(x1, x3, ta, tb, mp, epsilon=1e-3, points=400) for x1, x3, ta, tb in cases]
    worst = max(errs)
    assert criterion(12, worst < 1e-4, f"max composition error {worst:.2e} at eps=1e-3, 400 points")


def test_gauge_factorization(criterion):
    rep = duality_kernel_compare(TP, 0.7, np.linspace(-2, 2, 21))
    ok = rep.factorization_residual < 1e-6
    assert criterion(13, ok, f"fit residual {rep.factorization_residual:.2e}, log h = {rep.log_h:.6f}")


SEEDED = {
    "mc": {"mc": {"n_paths": 20_000}},
    "duality": {"duality": {"n_paths": 200}},
    "ck-check": {"ck-check": {"n_cases": 30}},
}


def test_determinism(criterion, tmp_path, capsys):
    identical = []
    for command, cfg in SEEDED.items():
        path = tmp_path / f"{command}.json"
        path.write_text(json.dumps(cfg))
        envelopes = []
        for run in ("a", "b"):
            assert cli.run([command, "--config", str(path), "--out-dir", str(tmp_path / run / command)]) == 0
            envelopes.append(json.loads(capsys.readouterr().out))
        for rec_a, rec_b in zip(*(e["outputs"] for e in envelopes)):
            with open(rec_a["path"], "rb") as fa, open(rec_b["path"], "rb") as fb:
                identical.append(fa.read() == fb.read())
    ok = all(identical) and len(identical) >= len(SEEDED)
    assert criterion(14, ok, f"{sum(identical)}/{len(identical)} CSVs byte-identical across reruns of {', '.join(SEEDED)}")

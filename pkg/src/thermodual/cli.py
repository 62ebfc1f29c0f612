"""Command-line front end.

Every subcommand reads an optional JSON config, fills in defaults, writes its
tables as CSV files into ``--out-dir`` and prints a JSON envelope on stdout.
Errors are reported as JSON on stderr with exit code 1 (invalid input),
2 (numerical failure) or 3 (I/O).
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from importlib import metadata
from pathlib import Path

import jsonschema
import numpy as np

from . import duality, kernels, montecarlo, oscillator, semigroup, specfun
from .errors import NumericalError, ThermodualError
from .quadrature import QuadratureRule

SCHEMA_VERSION = "1.0"
THREADS_ENV = "THERMODUAL_THREADS"
SCHEMA_FILE = Path(__file__).with_name("config.schema.json")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3


def _grid(lo, hi, n):
    return {"min": lo, "max": hi, "n": n}


def _state(kind="gaussian", mean=0.0, width=1.0, power=2, sigma=0.0):
    return {"kind": kind, "mean": mean, "width": width, "power": power, "sigma": sigma}


DEFAULT_PARAMS = {"s": 1.0, "L_onsager": 1.0, "k_B": 1.0}

DEFAULTS = {
    "duality": {"n_paths": 1000, "n_samples": 32, "step": 0.05, "amplitude": 2.0, "seed": 0},
    "kernel": {
        "y_from": 0.7,
        "dtau": 0.3,
        "y_to": _grid(-4.0, 4.0, 161),
        "tradeoff": {
            "eps": [1e-1, 1e-2, 1e-3, 1e-4, 0.0],
            "x1": 0.3,
            "x3": -0.5,
            "t_a": 1.0,
            "t_b": 1.0,
            "points": 400,
            "half_width": 12.0,
        },
    },
    "ck-check": {"n_cases": 100, "seed": 0, "y_range": 3.0, "t_max": 3.0, "points": 128, "half_width": 8.0, "cases": []},
    "hermite": {"nu": "-0.5+0.5i", "z": ["0+0i"], "z_cross": specfun.Z_CROSS},
    "eigfun": {"branch": "plus", "sigma": 0.0, "y": _grid(-10.0, 10.0, 801)},
    "spectrum-scan": {"sigma": _grid(-5.0, 5.0, 41), "y": _grid(-4.0, 4.0, 81)},
    "membership": {"branch": "plus", "sigma": 0.0, "Y_min": 10.0, "Y_max": 100.0, "n_Y": 19, "points_per_unit": 64},
    "evolve": {
        "direction": "incoming",
        "state": _state("gaussian", 1.0, 0.01),
        "dtau": 0.5,
        "grid": _grid(-6.0, 6.0, 2401),
        "spectral": {"sigma": [-5.0, -2.0, 0.0, 2.0, 5.0], "tau": [0.0, 0.5, 1.0, 2.0]},
    },
    "pairing-drift": {
        "psi": _state("power"),
        "phi": _state("gaussian", 0.7, 0.5),
        "grid": _grid(-8.0, 8.0, 1601),
        "dtau_probe": 1e-4,
        "richardson": False,
    },
    "generator-gap": {
        "phi": _state("gaussian", 0.0, 1.0),
        "grid": _grid(-8.0, 8.0, 1601),
        "dtau_probe": 1e-4,
        "richardson": False,
    },
    "mc": {
        "y0": 1.0,
        "dtau": 0.05,
        "n_steps": 20,
        "n_paths": 100000,
        "scheme": "exact_ou",
        "seed": 0,
        "bins": 64,
        "write_endpoints": True,
    },
    "lattice": {"y1": 0.5, "y2": -0.2, "tau": 1.0, "slices": [64, 128, 256], "boundary_term": False},
    "duality-compare": {"tau": 0.7, "grid": _grid(-2.0, 2.0, 21), "tau_scan": [0.1, 0.25, 0.5, 1.0, 1.5, 2.0]},
}

ENUMS = {
    ("eigfun", "branch"): ["plus", "minus"],
    ("membership", "branch"): ["plus", "minus"],
    ("evolve", "direction"): ["incoming", "outgoing"],
    ("mc", "scheme"): list(montecarlo.SCHEMES),
    ("state", "kind"): ["gaussian", "stationary", "constant", "power", "eigen_real"],
}


# -- schema ------------------------------------------------------------------------


def _schema_for(value, path):
    if isinstance(value, dict):
        if set(value) == set(_state()):
            path = ("state",)
        return {
            "type": "object",
            "additionalProperties": False,
            "properties": {k: _schema_for(v, path + (k,)) for k, v in value.items()},
        }
    if isinstance(value, bool):
        return {"type": "boolean"}
    if isinstance(value, int):
        return {"type": "integer"}
    if isinstance(value, float):
        return {"type": "number"}
    if isinstance(value, str):
        enum = ENUMS.get(path[-2:]) if len(path) >= 2 else None
        return {"type": "string", "enum": enum} if enum else {"type": "string"}
    if isinstance(value, list):
        if path[-1] == "cases":
            item = {"type": "array", "items": {"type": "number"}, "minItems": 5, "maxItems": 5}
        elif path[-1] == "z":
            item = {"type": "string"}
        elif path[-1] == "slices":
            item = {"type": "integer"}
        else:
            item = {"type": "number"}
        return {"type": "array", "items": item}
    raise TypeError(f"no schema rule for {value!r}")


def build_schema() -> dict:
    number = {"type": "number"}
    thermo = {"type": "object", "additionalProperties": False, "required": ["s", "L_onsager", "k_B"],
              "properties": {k: number for k in ("s", "L_onsager", "k_B")}}
    mech = {"type": "object", "additionalProperties": False, "required": ["m", "omega", "hbar", "k_B"],
            "properties": {k: number for k in ("m", "omega", "hbar", "k_B")}}
    props = {"schema_version": {"type": "string", "const": SCHEMA_VERSION}, "params": {"oneOf": [thermo, mech]}}
    for name, block in DEFAULTS.items():
        props[name] = _schema_for(block, (name,))
    return {
        "$schema": "http://json-schema.org/draft-07/schema#",
        "title": "thermodual run configuration",
        "type": "object",
        "additionalProperties": False,
        "properties": props,
    }


def _load_schema() -> dict:
    with open(SCHEMA_FILE) as fh:
        return json.load(fh)


def _merge(defaults: dict, given: dict) -> dict:
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        elif isinstance(out.get(key), float) and isinstance(value, int) and not isinstance(value, bool):
            out[key] = float(value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def resolve_config(command: str, raw: dict | None) -> dict:
    """Validate ``raw`` against the shipped schema and fill in defaults."""
    raw = {} if raw is None else raw
    jsonschema.validate(raw, _load_schema())
    return {
        "schema_version": SCHEMA_VERSION,
        "params": copy.deepcopy(raw.get("params", DEFAULT_PARAMS)),
        command: _merge(DEFAULTS[command], raw.get(command, {})),
    }


def thermo_params(cfg: dict) -> duality.ThermoParams:
    p = cfg["params"]
    if "m" in p:
        mp = duality.MechParams(p["m"], p["omega"], p["hbar"])
        return duality.to_thermo(mp, p["k_B"])
    return duality.thermo_params_new(p["s"], p["L_onsager"], p["k_B"])


# -- helpers -----------------------------------------------------------------------


def parse_complex(text) -> complex:
    """Accept ``"-0.5+0.5i"``, ``"1j"``, ``{"re": .., "im": ..}`` or a number."""
    if isinstance(text, dict):
        return complex(text["re"], text["im"])
    if isinstance(text, (int, float)):
        return complex(text)
    cleaned = str(text).strip().replace(" ", "").replace("i", "j")
    try:
        return complex(cleaned)
    except ValueError:
        raise ValueError(f"cannot parse complex number {text!r}") from None


def complex_json(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


class Outputs:
    def __init__(self, out_dir: Path, prefix: str):
        self.out_dir = out_dir
        self.prefix = prefix
        self.records: list[dict] = []

    def table(self, name: str, columns: list[str], rows) -> None:
        path = self.out_dir / f"{self.prefix}{name}.csv"
        count = 0
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
                count += 1
        self.records.append({"name": name, "path": str(path), "columns": columns, "rows": count})


def _threads(arg: int | None) -> int:
    if arg is not None:
        return max(1, arg)
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _grid_of(spec: dict) -> np.ndarray:
    if spec["n"] < 2 or not spec["max"] > spec["min"]:
        raise ValueError("grids need n >= 2 and max > min")
    return np.linspace(spec["min"], spec["max"], spec["n"])


def _state_values(spec: dict, y: np.ndarray, tp: duality.ThermoParams) -> np.ndarray:
    kind = spec["kind"]
    if kind == "gaussian":
        w = spec["width"]
        if not w > 0:
            raise ValueError("gaussian width must be positive")
        return np.exp(-0.5 * ((y - spec["mean"]) / w) ** 2) / (math.sqrt(2 * math.pi) * w)
    if kind == "stationary":
        return kernels.stationary_density(y, tp)
    if kind == "constant":
        return np.ones_like(y)
    if kind == "power":
        return y ** spec["power"]
    return oscillator.eigenfunction(oscillator.EigenSpec("plus", spec["sigma"]), y).real


def _complex_grid(g: dict, values) -> oscillator.ComplexGrid:
    return oscillator.ComplexGrid(g["min"], g["max"], g["n"], values)


# -- subcommands -------------------------------------------------------------------


def cmd_duality(cfg, tp, out, threads):
    c = cfg["duality"]
    mp = duality.to_mechanical(tp)
    rng = np.random.Generator(np.random.Philox(c["seed"]))
    rows, worst = [], 0.0
    for i in range(c["n_paths"]):
        path = duality.DiscretePath(c["amplitude"] * rng.standard_normal(c["n_samples"]), c["step"])
        s_om = duality.om_action(path, tp)
        res = duality.wick_action_identity(path, tp)
        rel = abs(res) / max(abs(s_om), np.finfo(float).tiny)
        worst = max(worst, rel)
        rows.append((i, s_om, res.real, res.imag, rel))
    out.table("wick_identity", ["path", "s_om", "residual_re", "residual_im", "relative_residual"], rows)
    return {"mechanical": mp.as_dict(), "max_relative_residual": worst}


def cmd_kernel(cfg, tp, out, threads):
    c = cfg["kernel"]
    y = _grid_of(c["y_to"])
    f1 = kernels.ou_density_values(y, c["y_from"], c["dtau"], tp)
    st = kernels.stationary_density(y, tp)
    out.table("kernel", ["y_to", "f1", "stationary"], zip(y, f1, st))
    t = c["tradeoff"]
    mp = duality.to_mechanical(tp)
    rows = kernels.epsilon_tradeoff(t["eps"], t["x1"], t["x3"], t["t_a"], t["t_b"], mp, t["points"], t["half_width"])
    out.table("epsilon_tradeoff", ["epsilon", "composition_error", "regulator_bias"], rows)
    return {"flux_at_y_from": kernels.linear_flux(c["y_from"], tp)}


def cmd_ck_check(cfg, tp, out, threads):
    c = cfg["ck-check"]
    cases = [tuple(x) for x in c["cases"]]
    if not cases:
        rng = np.random.Generator(np.random.Philox(c["seed"]))
        for _ in range(c["n_cases"]):
            y1, y3 = rng.uniform(-c["y_range"], c["y_range"], 2)
            t1, t2, t3 = np.sort(rng.uniform(0.0, c["t_max"], 3))
            cases.append((y1, y3, t1, t2, t3))
    rule = QuadratureRule("gauss_legendre_panel", c["points"], half_width=c["half_width"])
    with ThreadPoolExecutor(threads) as pool:
        res = list(pool.map(lambda case: kernels.ck_residual(*case, tp, rule), cases))
    out.table("ck_residuals", ["y1", "y3", "t1", "t2", "t3", "residual"], [(*case, r) for case, r in zip(cases, res)])
    return {"max_residual": max(res), "n_cases": len(cases)}


def cmd_hermite(cfg, tp, out, threads):
    c = cfg["hermite"]
    nu = parse_complex(c["nu"])
    zs = [parse_complex(z) for z in c["z"]]
    rows, values = [], []
    for z in zs:
        rep = specfun.hermite_nu(nu, z, c["z_cross"])
        values.append(complex_json(rep.value))
        rows.append((z.real, z.imag, rep.value.real, rep.value.imag, rep.method, rep.est_error))
    out.table("hermite", ["z_re", "z_im", "value_re", "value_im", "method", "est_error"], rows)
    return {"nu": complex_json(nu), "values": values}


def cmd_eigfun(cfg, tp, out, threads):
    c = cfg["eigfun"]
    spec = oscillator.EigenSpec(c["branch"], c["sigma"])
    y = _grid_of(c["y"])
    w = oscillator.eigenfunction(spec, y)
    out.table("eigfun", ["y", "re", "im", "abs"], zip(y, w.real, w.imag, np.abs(w)))
    return {"eigen_residual": oscillator.eigen_residual(spec, y)}


def cmd_spectrum_scan(cfg, tp, out, threads):
    c = cfg["spectrum-scan"]
    sigmas = _grid_of(c["sigma"])
    y = _grid_of(c["y"])

    def row(sigma):
        rp = oscillator.eigen_residual(oscillator.EigenSpec("plus", sigma), y)
        rm = oscillator.eigen_residual(oscillator.EigenSpec("minus", sigma), y)
        return (sigma, rp, rm, max(rp, rm))

    with ThreadPoolExecutor(threads) as pool:
        rows = list(pool.map(row, sigmas))
    out.table("spectrum_scan", ["sigma", "residual_plus", "residual_minus", "max_residual"], rows)
    return {"max_residual": max(r[-1] for r in rows)}


def cmd_membership(cfg, tp, out, threads):
    c = cfg["membership"]
    spec = oscillator.EigenSpec(c["branch"], c["sigma"])
    m = oscillator.membership(spec, c["Y_max"], c["Y_min"], c["n_Y"], c["points_per_unit"])
    d = m.details
    out.table("membership", ["Y", "l1_partial", "l2_partial"], zip(d["Y"], d["l1_partial"], d["l2_partial"]))
    return {
        "in_linf": m.in_linf,
        "in_l1": m.in_l1,
        "in_l2": m.in_l2,
        "l1_growth_exponent": m.l1_growth_exponent,
        "l2_growth_exponent": m.l2_growth_exponent,
        "sup": m.sup,
        "sup_doubled": m.sup_doubled,
    }


def cmd_evolve(cfg, tp, out, threads):
    c = cfg["evolve"]
    y = _grid_of(c["grid"])
    grid = _complex_grid(c["grid"], _state_values(c["state"], y, tp))
    if c["direction"] == "incoming":
        after = semigroup.evolve_incoming(semigroup.IncomingState(grid), c["dtau"], tp).grid
    else:
        after = semigroup.evolve_outgoing(semigroup.OutgoingState(grid), c["dtau"], tp).grid
    v0, v1 = grid.values, after.values
    out.table("evolve", ["y", "before_re", "before_im", "after_re", "after_im"], zip(y, v0.real, v0.imag, v1.real, v1.imag))
    sp = c["spectral"]
    rows = []
    for sigma in sp["sigma"]:
        for tau in sp["tau"]:
            s = semigroup.spectral_evolve(oscillator.EigenSpec("plus", sigma), tau, tp)
            rows.append((sigma, tau, s.real, s.imag))
    out.table("spectral_scale", ["sigma", "tau", "scale_re", "scale_im"], rows)
    mass0, mass1 = semigroup.integrate(grid), semigroup.integrate(after)
    return {"mass_before": complex_json(mass0), "mass_after": complex_json(mass1), "sup_after": float(np.max(np.abs(v1)))}


def cmd_pairing_drift(cfg, tp, out, threads):
    c = cfg["pairing-drift"]
    y = _grid_of(c["grid"])
    psi = semigroup.OutgoingState(_complex_grid(c["grid"], _state_values(c["psi"], y, tp)))
    phi = semigroup.IncomingState(_complex_grid(c["grid"], _state_values(c["phi"], y, tp)))
    p = semigroup.pairing(psi, phi)
    d = semigroup.irreversibility_drift(psi, phi, tp, c["dtau_probe"], c["richardson"])
    out.table("pairing_drift", ["pairing_re", "pairing_im", "drift_re", "drift_im"], [(p.real, p.imag, d.real, d.imag)])
    return {"pairing": complex_json(p), "drift": complex_json(d)}


def cmd_generator_gap(cfg, tp, out, threads):
    c = cfg["generator-gap"]
    y = _grid_of(c["grid"])
    phi = semigroup.IncomingState(_complex_grid(c["grid"], _state_values(c["phi"], y, tp)))
    gap = semigroup.generator_gap(phi, tp, c["dtau_probe"], c["richardson"])
    ak, ao = gap.a_kernel, gap.a_osc
    diff = np.abs(ak - ao)
    out.table(
        "generator_gap",
        ["y", "a_kernel_re", "a_kernel_im", "a_osc_re", "a_osc_im", "abs_difference"],
        zip(y, ak.real, ak.imag, ao.real, ao.imag, diff),
    )
    return {"difference_norm": gap.difference_norm}


def cmd_mc(cfg, tp, out, threads):
    c = cfg["mc"]
    ens = montecarlo.simulate(c["y0"], c["dtau"], c["n_steps"], c["n_paths"], c["scheme"], c["seed"], tp, keep_paths=False)
    if c["write_endpoints"]:
        out.table("mc_endpoints", ["path", "y_end"], enumerate(ens.endpoints))
    counts, edges = np.histogram(ens.endpoints, bins=c["bins"])
    cdf = kernels.ou_cdf(edges, c["y0"], ens.duration, tp)
    expected = ens.n_paths * np.diff(cdf)
    out.table("mc_histogram", ["bin_lo", "bin_hi", "count", "f1_expected_count"], zip(edges[:-1], edges[1:], counts, expected))
    rep = montecarlo.transition_test(ens)
    return {
        "ks_statistic": rep.ks_statistic,
        "p_value": rep.p_value,
        "mean_err": rep.mean_err,
        "var_err": rep.var_err,
        "n_paths": rep.n_paths,
    }


def cmd_lattice(cfg, tp, out, threads):
    c = cfg["lattice"]
    exact = float(kernels.ou_density_values(c["y2"], c["y1"], c["tau"], tp))
    rows = []
    for n in c["slices"]:
        val = montecarlo.lattice_propagator(c["y1"], c["y2"], c["tau"], n, tp, boundary_term=c["boundary_term"])
        rows.append((n, val, exact, abs(val - exact) / exact))
    out.table("lattice", ["n_slices", "lattice", "ou_density", "relative_error"], rows)
    return {"relative_errors": [r[-1] for r in rows]}


def cmd_duality_compare(cfg, tp, out, threads):
    c = cfg["duality-compare"]
    y = _grid_of(c["grid"])
    rep = kernels.duality_kernel_compare(tp, c["tau"], y)
    r = rep.ratio_grid
    rows = [(y[i], y[j], r[i, j].real, r[i, j].imag) for i in range(y.size) for j in range(y.size)]
    out.table("duality_ratio", ["y1", "y2", "ratio_re", "ratio_im"], rows)
    scan = [kernels.duality_kernel_compare(tp, tau, y) for tau in c["tau_scan"]]
    out.table("duality_h_scan", ["tau", "log_h", "factorization_residual"], [(s.tau, s.log_h, s.factorization_residual) for s in scan])
    return {"factorization_residual": rep.factorization_residual, "log_h": rep.log_h}


COMMANDS = {
    "duality": cmd_duality,
    "kernel": cmd_kernel,
    "ck-check": cmd_ck_check,
    "hermite": cmd_hermite,
    "eigfun": cmd_eigfun,
    "spectrum-scan": cmd_spectrum_scan,
    "membership": cmd_membership,
    "evolve": cmd_evolve,
    "pairing-drift": cmd_pairing_drift,
    "generator-gap": cmd_generator_gap,
    "mc": cmd_mc,
    "lattice": cmd_lattice,
    "duality-compare": cmd_duality_compare,
}


# -- entry point ---------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thermodual", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--out-dir", default=".", help="directory for CSV outputs")
        p.add_argument("--prefix", default="", help="file name prefix for CSV outputs")
        p.add_argument("--threads", type=int, help=f"worker threads (default ${THREADS_ENV} or 1)")
        if name == "hermite":
            p.add_argument("--nu", help="complex order, e.g. '-0.5+0.5i'")
            p.add_argument("--z", action="append", help="complex argument; repeatable")
        if name in ("eigfun", "membership"):
            p.add_argument("--branch", choices=["plus", "minus"])
            p.add_argument("--sigma", type=float)
        if name == "mc":
            p.add_argument("--seed", type=int)
            p.add_argument("--scheme", choices=list(montecarlo.SCHEMES))
    return parser


def _flag_overrides(args) -> dict:
    block = {}
    for key in ("nu", "branch", "sigma", "seed", "scheme"):
        value = getattr(args, key, None)
        if value is not None:
            block[key] = value
    if getattr(args, "z", None):
        block["z"] = args.z
    return block


def _fail(kind: str, message: str, code: int) -> int:
    json.dump({"error": kind, "message": message, "exit_code": code}, sys.stderr)
    sys.stderr.write("\n")
    return code


def _tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        from . import __version__

        return __version__


def run(argv=None) -> int:
    args = _parser().parse_args(argv)
    start = time.perf_counter()
    try:
        raw = None
        if args.config:
            with open(args.config) as fh:
                raw = json.load(fh)
        overrides = _flag_overrides(args)
        if overrides:
            raw = dict(raw or {})
            raw[args.command] = {**raw.get(args.command, {}), **overrides}
        cfg = resolve_config(args.command, raw)
        tp = thermo_params(cfg)
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        outputs = Outputs(out_dir, args.prefix)
        summary = COMMANDS[args.command](cfg, tp, outputs, _threads(args.threads))
    except OSError as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_IO)
    except json.JSONDecodeError as exc:
        return _fail("ConfigParseError", str(exc), EXIT_VALIDATION)
    except jsonschema.ValidationError as exc:
        return _fail("ConfigSchemaError", exc.message, EXIT_VALIDATION)
    except (NumericalError, ArithmeticError) as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_NUMERICAL)
    except (ThermodualError, ValueError) as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_VALIDATION)
    envelope = {
        "command": args.command,
        "config_echo": cfg,
        "outputs": outputs.records,
        "summary": summary,
        "wall_time": time.perf_counter() - start,
        "tool_version": _tool_version(),
    }
    json.dump(envelope, sys.stdout, indent=2, default=float)
    sys.stdout.write("\n")
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

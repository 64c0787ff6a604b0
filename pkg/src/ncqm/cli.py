"""Batch experiment runner.

Each subcommand resolves a strict JSON config (defaults, then ``--config``,
then ``--set`` overrides), runs one experiment or a sweep over one config
key, and writes ``<outdir>/<experiment>-<timestamp>/summary.json`` plus CSV
data.  The run directory is assembled under a temporary name and renamed
into place, so a failed run leaves nothing behind.

Exit codes: 0 success, 2 validation error, 3 numerical failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import os
import shutil
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .algebra import BoostContext, casimir_invariants, check_exotic_algebra, moyal_star
from .core import ConvergenceError, Grid2D, PhysParams, ThetaTensor
from .dynamics import TRACE_COLUMNS, ehrenfest_residuals, evolve, gaussian_packet, potential_hash
from .hamiltonian import build_nc_hamiltonian
from .perturbation import (PerturbationSetup, first_order_shift, closed_form_delta_e, small_gamma_slope,
                           verify_integral_identities)
from .polynomial import PolynomialPotential
from .spectra import (QuantumNumbers, airy_ode_residual, linear_theta_comparison, nc_oscillator_levels,
                      solve_eigen)

EXPERIMENTS = ("algebra-check", "star", "spectrum", "linear", "evolve", "ehrenfest", "perturb", "errata")
EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

# blocks whose inner keys are checked by the consumer, not by the schema
FREE_BLOCKS = {"potential", "star.f", "star.g"}
# keys that may be null in addition to their default type
NULLABLE = {"star.max_order": int, "outdir": str, "sweep.key": str}

_GRID = {"nx": 48, "ny": 48, "lx": 8.0, "ly": 8.0, "boundary": "periodic"}
_PHYS = {"m": 1.0, "hbar": 1.0}
_COMMON = {"seed": 0, "outdir": None, "sweep": {"key": None, "values": []}}

_SECTIONS = {
    "algebra-check": {
        "grid": dict(_GRID, nx=64, ny=64), "phys": _PHYS, "theta": 0.0, "convention": "literal",
        "algebra": {"n_states": 5, "tol": 1e-6, "t": 0.0, "v": [1.0, 0.0], "casimirs": False},
    },
    "star": {
        "theta": 0.5,
        "star": {"f": {"monomials": [{"ax": 1, "ay": 0, "re": 1.0, "im": 0.0}]},
                 "g": {"monomials": [{"ax": 0, "ay": 1, "re": 1.0, "im": 0.0}]},
                 "max_order": None},
    },
    "spectrum": {
        "grid": _GRID, "phys": _PHYS, "theta": 0.5, "convention": "literal",
        "potential": {"harmonic": {"wx": 1.0, "wy": 1.0}},
        "solver": {"k": 4, "method": "dense", "tol": 1e-10, "max_iter": 2000},
    },
    "linear": {
        "grid": {"nx": 48, "ny": 48, "lx": 7.0, "ly": 4.0, "boundary": "dirichlet"}, "phys": _PHYS,
        "theta": 0.5, "convention": "literal",
        "linear": {"alpha": 0.25, "beta": 0.0, "k": 3},
    },
    "evolve": {
        "grid": dict(_GRID, nx=32, ny=32), "phys": _PHYS, "theta": 0.4, "convention": "literal",
        "potential": {"linear": {"alpha": 0.7, "beta": -0.4}},
        "evolution": {"dt": 1e-3, "steps": 1000, "center": [0.0, 0.0], "momentum": [1.0, 0.5],
                      "width": 1.0, "solver": "lu", "tol": 1e-10, "maxiter": 500},
    },
    "perturb": {
        "theta": 0.3, "convention": "literal",
        "grid": {"nx": 40, "ny": 40, "lx": 6.5, "ly": 6.5, "boundary": "periodic"},
        "perturb": {"n1": 0, "n2": 0, "omega": 1.0, "alpha_c": 0.0, "gamma": 0.01, "basis_size": 12,
                    "slope": False, "slope_gamma": 1e-3},
    },
    "errata": {"errata": {"max_n": 10, "rtol": 1e-9}},
}
_SECTIONS["ehrenfest"] = dict(copy.deepcopy(_SECTIONS["evolve"]), ehrenfest={"refine": True})


class ConfigError(ValueError):
    pass


def default_config(experiment: str) -> dict:
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    cfg = copy.deepcopy(_COMMON)
    cfg.update(copy.deepcopy(_SECTIONS[experiment]))
    cfg["experiment"] = experiment
    return cfg


def _check_type(path: str, default, value):
    if value is None and path in NULLABLE:
        return value
    want = NULLABLE.get(path, type(default))
    if want is bool:
        ok = isinstance(value, bool)
    elif want is int:
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif want is float:
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        value = float(value) if ok else value
    elif want is list:
        ok = isinstance(value, list)
    else:
        ok = isinstance(value, want)
    if not ok:
        raise ConfigError(f"{path}: expected {want.__name__}, got {value!r}")
    return value


def merge(base: dict, override: dict, prefix: str = "") -> dict:
    """Recursive strict merge; keys absent from ``base`` are rejected."""
    out = copy.deepcopy(base)
    for key, value in override.items():
        path = f"{prefix}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key {path!r}")
        if path in FREE_BLOCKS:
            if not isinstance(value, dict):
                raise ConfigError(f"{path}: expected an object")
            out[key] = copy.deepcopy(value)
        elif isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{path}: expected an object")
            out[key] = merge(base[key], value, path + ".")
        else:
            out[key] = _check_type(path, base[key], value)
    return out


def parse_assignment(text: str):
    """``a.b.c=value`` to a nested dict; the value is JSON when it parses."""
    if "=" not in text:
        raise ConfigError(f"--set expects key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    parts = key.strip().split(".")
    if not all(parts):
        raise ConfigError(f"bad key {key!r}")
    nested = value
    for part in reversed(parts):
        nested = {part: nested}
    return nested


def _set_into_free(cfg: dict, nested: dict, prefix: str = ""):
    """Apply a dotted assignment, letting it descend into free blocks."""
    for key, value in nested.items():
        path = f"{prefix}{key}"
        inside_free = any(path.startswith(b + ".") for b in FREE_BLOCKS)
        if path in FREE_BLOCKS or inside_free:
            if isinstance(value, dict):
                cfg.setdefault(key, {})
                if not isinstance(cfg[key], dict):
                    raise ConfigError(f"{path}: not an object")
                _set_into_free(cfg[key], value, path + ".")
            else:
                cfg[key] = value
        elif key not in cfg:
            raise ConfigError(f"unknown config key {path!r}")
        elif isinstance(cfg[key], dict) and isinstance(value, dict):
            _set_into_free(cfg[key], value, path + ".")
        else:
            cfg.update(merge({key: cfg[key]}, {key: value}, prefix))


def resolve_config(experiment: str, config: dict | None = None, assignments=(), seed: int | None = None,
                   outdir: str | None = None) -> dict:
    cfg = default_config(experiment)
    if config:
        config = dict(config)
        given = config.pop("experiment", experiment)
        if given != experiment:
            raise ConfigError(f"config is for {given!r}, not {experiment!r}")
        cfg = merge(cfg, config)
    for text in assignments:
        _set_into_free(cfg, parse_assignment(text))
    if seed is not None:
        cfg["seed"] = _check_type("seed", 0, seed)
    if outdir is not None:
        cfg["outdir"] = outdir
    if not 0 <= cfg["seed"] < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    sweep = cfg["sweep"]
    if sweep["key"] is not None:
        if not sweep["values"]:
            raise ConfigError("sweep.values must be non-empty when sweep.key is set")
        for v in sweep["values"]:
            _point_config(cfg, v)
    validate(cfg)
    return cfg


def _point_config(cfg: dict, value) -> dict:
    point = copy.deepcopy(cfg)
    point["sweep"] = {"key": None, "values": []}
    _set_into_free(point, parse_assignment(f"{cfg['sweep']['key']}={json.dumps(value)}"))
    return point


def validate(cfg: dict):
    """Construct every domain object once so preconditions fail before dispatch."""
    if "grid" in cfg:
        Grid2D(**cfg["grid"])
    if "phys" in cfg:
        PhysParams(**cfg["phys"])
    if "theta" in cfg:
        ThetaTensor(cfg["theta"])
    if cfg.get("convention", "literal") not in ("literal", "flipped"):
        raise ConfigError("convention must be 'literal' or 'flipped'")
    if "potential" in cfg:
        V = PolynomialPotential.from_json(cfg["potential"], cfg.get("phys", _PHYS)["m"])
        if not V.is_real:
            raise ConfigError("potential must have real coefficients")
    exp = cfg["experiment"]
    if exp == "star":
        PolynomialPotential.from_json(cfg["star"]["f"])
        PolynomialPotential.from_json(cfg["star"]["g"])
    if exp == "spectrum":
        s = cfg["solver"]
        if s["method"] not in ("dense", "lanczos"):
            raise ConfigError("solver.method must be 'dense' or 'lanczos'")
        if s["k"] < 1:
            raise ConfigError("solver.k must be positive")
    if exp in ("evolve", "ehrenfest"):
        e = cfg["evolution"]
        if e["steps"] < 2 or e["dt"] == 0 or e["width"] <= 0:
            raise ConfigError("evolution needs steps >= 2, dt != 0 and width > 0")
        if e["solver"] not in ("lu", "gmres"):
            raise ConfigError("evolution.solver must be 'lu' or 'gmres'")
        if len(e["center"]) != 2 or len(e["momentum"]) != 2:
            raise ConfigError("center and momentum need two components")
    if exp == "perturb":
        p = cfg["perturb"]
        PerturbationSetup(QuantumNumbers(p["n1"], p["n2"]), p["omega"], ThetaTensor(cfg["theta"]),
                          p["alpha_c"], p["gamma"])
    if exp == "algebra-check" and len(cfg["algebra"]["v"]) != 2:
        raise ConfigError("algebra.v needs two components")
    if exp == "linear" and cfg["linear"]["alpha"] == 0 and cfg["linear"]["beta"] == 0:
        raise ConfigError("linear.alpha and linear.beta cannot both vanish")


# ---------------------------------------------------------------------------
# serialization

def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        return _plain(obj.item())
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def format_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    return "%.17g" % x


def dumps(obj, indent: int = 2) -> str:
    """JSON with sorted keys and floats fixed at 17 significant digits."""
    def emit(o, level):
        pad, inner = " " * (indent * level), " " * (indent * (level + 1))
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{inner}{json.dumps(k)}: {emit(o[k], level + 1)}" for k in sorted(o)]
            return "{\n" + ",\n".join(items) + "\n" + pad + "}"
        if isinstance(o, list):
            if not o:
                return "[]"
            return "[\n" + ",\n".join(inner + emit(v, level + 1) for v in o) + "\n" + pad + "]"
        if isinstance(o, bool) or o is None or isinstance(o, (int, str)):
            return json.dumps(o)
        if isinstance(o, float):
            return format_float(o)
        raise TypeError(f"cannot serialize {type(o).__name__}")
    return emit(_plain(obj), 0) + "\n"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, float) else v for v in _plain(list(row))])
    return buf.getvalue()


def _write(path: str, text: str):
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# experiments; each returns (results, {filename: csv text})

def _common(cfg):
    grid = Grid2D(**cfg["grid"]) if "grid" in cfg else None
    phys = PhysParams(**cfg["phys"]) if "phys" in cfg else PhysParams()
    return grid, phys, ThetaTensor(cfg.get("theta", 0.0)), cfg.get("convention", "literal")


def _run_algebra(cfg):
    grid, phys, theta, conv = _common(cfg)
    a = cfg["algebra"]
    ctx = BoostContext(a["t"], tuple(a["v"]))
    report = check_exotic_algebra(grid, phys, theta, ctx, a["tol"], n_states=a["n_states"], seed=cfg["seed"],
                                  convention=conv)
    results = report.to_json()
    results["expected_boost_magnitude"] = phys.m**2 * abs(theta.theta)
    if a["casimirs"]:
        results["casimirs"] = casimir_invariants(grid, phys, theta, ctx, a["tol"], n_states=a["n_states"],
                                                 seed=cfg["seed"], convention=conv)[2]
    rows = [(r.name, r.residual, r.tolerance, r.passed) for r in report.relations]
    return results, {"relations.csv": csv_text(("relation", "residual", "tolerance", "passed"), rows)}


def _run_star(cfg):
    theta = ThetaTensor(cfg["theta"])
    s = cfg["star"]
    f, g = PolynomialPotential.from_json(s["f"]), PolynomialPotential.from_json(s["g"])
    fg = moyal_star(f, g, theta, s["max_order"])
    gf = moyal_star(g, f, theta, s["max_order"])
    x, y = PolynomialPotential.monomial(1, 0), PolynomialPotential.monomial(0, 1)
    xy = moyal_star(x, y, theta) - moyal_star(y, x, theta)
    results = {"product": fg.to_json(), "truncated": fg.truncated, "star_commutator": (fg - gf).to_json(),
               "x_star_y_commutator": xy.to_json()}
    rows = [(a, b, complex(c).real, complex(c).imag) for (a, b), c in sorted(fg.coefficients.items())]
    return results, {"product.csv": csv_text(("ax", "ay", "re", "im"), rows)}


def _run_spectrum(cfg):
    grid, phys, theta, conv = _common(cfg)
    s = cfg["solver"]
    V = PolynomialPotential.from_json(cfg["potential"], phys.m)
    H = build_nc_hamiltonian(V, grid, phys, theta, conv)
    res = solve_eigen(H, s["k"], s["method"], tol=s["tol"], max_iter=s["max_iter"], seed=cfg["seed"],
                      raise_on_failure=True)
    results = res.to_json()
    results["potential_hash"] = potential_hash(V)
    isotropic = V.degree == 2 and V.omega_x == V.omega_y and V.equals(PolynomialPotential.harmonic(V.omega_x, mass=phys.m))
    if isotropic and phys.m == 1 and phys.hbar == 1:
        ref = nc_oscillator_levels(V.omega_x, theta if conv == "literal" else theta.flipped(), s["k"])
        results["analytic_levels"] = ref
        results["max_level_error"] = float(np.max(np.abs(res.eigenvalues - ref)))
    files = {"eigenvalues.csv": csv_text(("index", "eigenvalue", "residual"),
                                         [(i, float(e), float(r)) for i, (e, r) in
                                          enumerate(zip(res.eigenvalues, res.residuals))])}
    for i in range(len(res.eigenvalues)):
        files[f"eigenvector-{i}.csv"] = csv_text(("x", "y", "re", "im"), res.eigenvector_csv_rows(i))
    return results, files


def _run_linear(cfg):
    grid, phys, theta, conv = _common(cfg)
    if phys.m != 1 or phys.hbar != 1:
        raise ConfigError("the linear experiment uses m = hbar = 1")
    lin = cfg["linear"]
    cmp = linear_theta_comparison(lin["alpha"], lin["beta"], grid, theta, lin["k"], conv)
    z = np.linspace(-5.0, 5.0, 101)
    e0 = float(cmp["eigenvalues_zero"][0])
    cmp["airy_ode_residual"] = float(np.max(np.abs(airy_ode_residual(lin["alpha"], lin["beta"], e0, z))))
    rows = [(i, float(a), float(b), float(s)) for i, (a, b, s) in
            enumerate(zip(cmp["eigenvalues_theta"], cmp["eigenvalues_zero"], cmp["shifts"]))]
    return cmp, {"eigenvalues.csv": csv_text(("index", "e_theta", "e_zero", "shift"), rows)}


def _evolve(cfg, dt, steps, store):
    grid, phys, theta, conv = _common(cfg)
    e = cfg["evolution"]
    V = PolynomialPotential.from_json(cfg["potential"], phys.m)
    H = build_nc_hamiltonian(V, grid, phys, theta, conv)
    psi0 = gaussian_packet(grid, e["center"], e["momentum"], e["width"], phys.hbar)
    trace = evolve(H, psi0, dt, steps, theta=theta, phys=phys, convention=conv, solver=e["solver"],
                   tol=e["tol"], maxiter=e["maxiter"], store_states=store)
    trace.metadata["potential_hash"] = potential_hash(V)
    return trace, V, theta, phys, conv


def _run_evolve(cfg):
    e = cfg["evolution"]
    trace, *_ = _evolve(cfg, e["dt"], e["steps"], False)
    return trace.to_json(), {"trace.csv": csv_text(TRACE_COLUMNS, trace.rows())}


def _run_ehrenfest(cfg):
    e = cfg["evolution"]
    trace, V, theta, phys, conv = _evolve(cfg, e["dt"], e["steps"], True)
    res = ehrenfest_residuals(trace, V, theta, phys, conv)
    results = {"trace": trace.to_json(), "residuals": res.to_json()}
    if cfg["ehrenfest"]["refine"]:
        fine, *_ = _evolve(cfg, e["dt"] / 2, 2 * e["steps"], True)
        res2 = ehrenfest_residuals(fine, V, theta, phys, conv)
        results["refined_residuals"] = res2.to_json()
        results["refinement_ratio"] = res.max_residual / max(res2.max_residual, 1e-300)
    rows = [(float(t), *(float(r[i]) for r in (*res.r_x, *res.r_p)))
            for i, t in enumerate(res.times)]
    header = ("t", "r_x1", "r_x2", "r_p1", "r_p2")
    return results, {"trace.csv": csv_text(TRACE_COLUMNS, trace.rows()), "residuals.csv": csv_text(header, rows)}


def _run_perturb(cfg):
    p = cfg["perturb"]
    theta, conv = ThetaTensor(cfg["theta"]), cfg["convention"]
    setup = PerturbationSetup(QuantumNumbers(p["n1"], p["n2"]), p["omega"], theta, p["alpha_c"], p["gamma"])
    shift = first_order_shift(setup, p["basis_size"], conv)
    if not shift.converged:
        raise ConvergenceError("basis too small for the requested state")
    printed = closed_form_delta_e(setup)
    results = {"shift": shift.shift, "cubic": shift.cubic, "quartic": shift.quartic,
               "basis_size": shift.basis_size, "converged": shift.converged,
               "closed_form": printed, "closed_form_difference": printed - shift.shift}
    if p["slope"]:
        unit = first_order_shift(PerturbationSetup(QuantumNumbers(0, 0), p["omega"], theta, 0.0, 1.0),
                                 p["basis_size"], conv).shift
        slope = small_gamma_slope(p["omega"], theta, Grid2D(**cfg["grid"]), p["slope_gamma"], conv)
        results["slope"] = dict(slope, oracle=unit, relative_error=abs(slope["slope"] - unit) / abs(unit))
    rows = [("shift", shift.shift), ("cubic", shift.cubic), ("quartic", shift.quartic), ("closed_form", printed)]
    return results, {"shift.csv": csv_text(("quantity", "value"), rows)}


def _run_errata(cfg):
    e = cfg["errata"]
    report = verify_integral_identities(e["max_n"], e["rtol"])
    rows = [(c.identity, c.n, c.m, c.closed_form, c.oracle, c.difference, c.relative_difference, c.passed)
            for c in report.checks]
    header = ("identity", "n", "m", "closed_form", "oracle", "difference", "relative_difference", "passed")
    return report.to_json(), {"identities.csv": csv_text(header, rows)}


RUNNERS = {
    "algebra-check": _run_algebra, "star": _run_star, "spectrum": _run_spectrum, "linear": _run_linear,
    "evolve": _run_evolve, "ehrenfest": _run_ehrenfest, "perturb": _run_perturb, "errata": _run_errata,
}


def _headline(exp, results) -> str:
    if exp == "algebra-check":
        return f"all_passed={results['all_passed']}"
    if exp == "spectrum":
        return f"eigenvalue[0]={results['eigenvalues'][0]:.10g}"
    if exp == "linear":
        return f"max_shift_error={results['max_shift_error']:.3g} max_moduli_difference={results['max_moduli_difference']:.3g}"
    if exp == "evolve":
        return f"norm_drift={results['norm_drift']:.3g}"
    if exp == "ehrenfest":
        return f"max_residual={results['residuals']['max_residual']:.3g}"
    if exp == "perturb":
        return f"shift={results['shift']:.12g}"
    if exp == "errata":
        bad = [k for k, v in results["summary"].items() if not v["passed"]]
        return f"mismatched identities: {', '.join(bad) or 'none'}"
    return "done"


def summary_document(cfg: dict, results: dict) -> dict:
    # the output location is not part of the experiment, so summaries compare across directories
    embedded = {k: v for k, v in cfg.items() if k != "outdir"}
    return {"version": __version__, "experiment": cfg["experiment"], "config": embedded, "results": results}


def _run_point(cfg: dict, directory: str) -> dict:
    results, files = RUNNERS[cfg["experiment"]](cfg)
    os.makedirs(directory, exist_ok=True)
    for name, text in files.items():
        _write(os.path.join(directory, name), text)
    _write(os.path.join(directory, "summary.json"), dumps(summary_document(cfg, results)))
    return _plain(results)


def _run_point_star(args):
    return _run_point(*args)


def _unique_dir(outdir: str, experiment: str) -> str:
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S%fZ")
    base = os.path.join(outdir, f"{experiment}-{stamp}")
    path, i = base, 1
    while os.path.exists(path):
        path, i = f"{base}-{i}", i + 1
    return path


def run(cfg: dict, jobs: int = 1) -> tuple[str, dict]:
    """Execute a resolved config; returns the run directory and results."""
    outdir = cfg["outdir"] or os.environ.get("NCQM_OUTDIR") or "runs"
    os.makedirs(outdir, exist_ok=True)
    final = _unique_dir(outdir, cfg["experiment"])
    tmp = os.path.join(outdir, "." + os.path.basename(final) + ".tmp")
    try:
        sweep = cfg["sweep"]
        if sweep["key"] is None:
            results = _run_point(cfg, tmp)
        else:
            os.makedirs(tmp)
            tasks = [(_point_config(cfg, v), os.path.join(tmp, f"point-{i:03d}"))
                     for i, v in enumerate(sweep["values"])]
            if jobs > 1:
                with ProcessPoolExecutor(max_workers=jobs) as pool:
                    points = list(pool.map(_run_point_star, tasks))
            else:
                points = [_run_point(*t) for t in tasks]
            results = {"points": [{"value": v, "directory": f"point-{i:03d}", "results": r}
                                  for i, (v, r) in enumerate(zip(sweep["values"], points))]}
            _write(os.path.join(tmp, "summary.json"), dumps(summary_document(cfg, results)))
        os.rename(tmp, final)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return final, results


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ncqm", description="Noncommutative quantum mechanics experiments.")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--set", dest="assignments", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config key by dotted path (repeatable)")
        p.add_argument("--outdir", help="output root (default $NCQM_OUTDIR or ./runs)")
        p.add_argument("--jobs", type=int, default=1, help="parallel sweep points")
        p.add_argument("--seed", type=int, help="seed for randomized test states")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = None
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                config = json.load(fh)
            if not isinstance(config, dict):
                raise ConfigError("config must be a JSON object")
        if args.jobs < 1:
            raise ConfigError("--jobs must be positive")
        cfg = resolve_config(args.experiment, config, args.assignments, args.seed, args.outdir)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, TypeError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        directory, results = run(cfg, args.jobs)
    except (ConvergenceError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, TypeError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    line = "sweep of %d points" % len(results["points"]) if "points" in results else _headline(args.experiment, results)
    print(f"{args.experiment}: {line} -> {directory}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

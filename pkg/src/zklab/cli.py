"""Command-line entry point: ``python -m zklab {solve,verify,resonance,report}``.

Settings come from an optional flat JSON file (``--config``) overridden by
flags.  Artifacts go to ``--output-dir``.  Exit status is 0 when every check
passes, 2 on a threshold failure and 1 on a usage or configuration error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import platform
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
import scipy

from . import __version__
from .estimates import (
    STRICHARTZ_DEFAULTS,
    EstimateReport,
    band_coefficients,
    band_field,
    verify_bilinear,
    verify_key_estimate,
    verify_linear_lemma,
    verify_regions,
    verify_resonance,
    verify_strichartz,
)
from .norms import NormSpec, TimeCutoff
from .solver import SolveConfig, SolverError, picard_solve, reference_solve
from .spectral import Field2, Grid2, fft_inverse

log = logging.getLogger("zklab")

FAMILIES = ("linear", "str1", "str2", "l4", "lpq", "bil1", "bil2", "bil3", "bil4",
            "key", "resonance", "regions")
EXIT_OK, EXIT_USAGE, EXIT_THRESHOLD = 0, 1, 2

# flat config keys, their types and defaults (None: family-specific default)
SETTINGS = {
    "seed": (int, 0),
    "output_dir": (str, "zklab-out"),
    # solve
    "nx": (int, 32),
    "ny": (int, 32),
    "T": (float, 0.5),
    "nt": (int, 64),
    "amplitude": (float, 0.05),
    "initial": (str, "cos"),
    "method": (str, "picard"),
    "max_picard_iters": (int, 50),
    "picard_tol": (float, 1e-12),
    "nonlinearity": (bool, True),
    # verify / resonance
    "family": (str, None),
    "ensemble": (int, None),
    "samples": (int, 10_000),
    "scale": (float, 16.0),
    "s": (float, None),
    "b": (float, None),
    "b_prime": (float, None),
    "p": (float, None),
    "q": (float, None),
    "k_min": (int, 0),
    "k_max": (int, 4),
    "s_weights": (list, [0.0, 0.0, 0.6]),
    "c0": (float, 4.0),
    # report
    "inputs": (list, []),
}


class UsageError(Exception):
    pass


def _schema(name):
    text = resources.files("zklab").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _write_json(path, obj, schema):
    jsonschema.validate(obj, _schema(schema))
    path.write_text(_dump(obj))


def _versions():
    return {"zklab": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="flat JSON file of settings; flags override it")
    common.add_argument("--seed", type=int)
    common.add_argument("--output-dir", dest="output_dir")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="zklab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", parents=[common], help="integrate the symmetrised equation")
    solve.add_argument("--nx", type=int)
    solve.add_argument("--ny", type=int)
    solve.add_argument("--T", type=float)
    solve.add_argument("--nt", type=int, help="number of time steps (even)")
    solve.add_argument("--amplitude", type=float)
    solve.add_argument("--initial", choices=("cos", "random"))
    solve.add_argument("--method", choices=("picard", "rk4"))
    solve.add_argument("--max-picard-iters", dest="max_picard_iters", type=int)
    solve.add_argument("--picard-tol", dest="picard_tol", type=float)
    solve.add_argument("--linear", dest="nonlinearity", action="store_const", const=False,
                       help="drop the nonlinear term")

    verify = sub.add_parser("verify", parents=[common], help="run one estimate family")
    verify.add_argument("--family", choices=FAMILIES)
    verify.add_argument("--ensemble", type=int)
    verify.add_argument("--samples", type=int, help="triples for resonance/regions")
    verify.add_argument("--scale", type=float, help="frequency scale for resonance/regions")
    for name in ("s", "b", "p", "q"):
        verify.add_argument(f"--{name}", type=float)
    verify.add_argument("--b-prime", dest="b_prime", type=float)
    verify.add_argument("--k-min", dest="k_min", type=int)
    verify.add_argument("--k-max", dest="k_max", type=int)
    verify.add_argument("--s-weights", dest="s_weights", type=_float_list,
                        help="comma separated s0,s1,s2 for bil4")
    verify.add_argument("--c0", type=float)

    res = sub.add_parser("resonance", parents=[common], help="resonance identity and region sweep")
    res.add_argument("--samples", type=int)
    res.add_argument("--scale", type=float)
    res.add_argument("--c0", type=float)

    rep = sub.add_parser("report", parents=[common], help="merge report.json files")
    rep.add_argument("inputs", nargs="*", help="directories or report.json files")
    return parser


def _float_list(text):
    try:
        return [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from exc


def resolve_config(args):
    """Merge defaults, the JSON config file and explicit flags."""
    cfg = {k: default for k, (_, default) in SETTINGS.items()}
    if args.config is not None:
        try:
            loaded = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        loaded.pop("command", None)
        unknown = sorted(set(loaded) - set(SETTINGS))
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        cfg.update(loaded)
    for key in SETTINGS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    for key, (typ, _) in SETTINGS.items():
        val = cfg[key]
        if val is None:
            continue
        if typ is float and isinstance(val, int) and not isinstance(val, bool):
            cfg[key] = float(val)
        elif not isinstance(val, typ) or (typ is int and isinstance(val, bool)):
            raise UsageError(f"config key {key!r} must be of type {typ.__name__}")
    cfg["command"] = args.command
    return cfg


def _output_dir(cfg):
    out = Path(cfg["output_dir"])
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise UsageError(f"output directory {out} is not writable: {exc}") from exc
    return out


def _echo(cfg, keys):
    return {k: cfg[k] for k in ("command", "seed", *keys)}


# --------------------------------------------------------------------------
# commands


def _initial_data(grid, cfg):
    if cfg["initial"] == "cos":
        return Field2.from_function(grid, lambda x, y: cfg["amplitude"] * np.cos(x) * np.cos(y))
    rng = np.random.default_rng([cfg["seed"], 0])
    F = band_field(grid, band_coefficients(min(4, (min(grid.shape) - 1) // 3), rng))
    f = fft_inverse(F)
    peak = np.max(np.abs(f.values))
    return f * (cfg["amplitude"] / peak if peak > 0 else 0.0)


def cmd_solve(cfg, out):
    try:
        grid = Grid2(cfg["nx"], cfg["ny"])
        scfg = SolveConfig(grid, T=cfg["T"], nt=cfg["nt"], max_picard_iters=cfg["max_picard_iters"],
                           picard_tol=cfg["picard_tol"], nonlinearity_on=cfg["nonlinearity"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    phi = _initial_data(grid, cfg)
    solver = picard_solve if cfg["method"] == "picard" else reference_solve
    try:
        result = solver(phi, scfg)
    except SolverError as exc:
        log.error("%s", exc)
        return EXIT_THRESHOLD, {"solve": str(exc)}
    traj = result.trajectory
    X, Y = grid.mesh
    with open(out / "trajectory.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "x", "y", "value"])
        for j, t in enumerate(traj.times):
            vals = traj.values[j]
            for x, y, v in zip(X.ravel(), Y.ravel(), vals.ravel()):
                w.writerow([repr(float(t)), repr(float(x)), repr(float(y)), repr(float(v))])
    summary = {
        "method": result.method,
        "converged": bool(result.converged),
        "divergent": bool(result.divergent),
        "picard_residuals": [float(r) for r in result.picard_residuals],
        "l2_drift": float(result.l2_drift),
        "energy_drift": float(result.energy_drift),
        "samples": int(traj.nt),
    }
    _write_json(out / "trajectory.json", summary, "solve")
    status = EXIT_OK if result.converged else EXIT_THRESHOLD
    return status, _echo(cfg, ("nx", "ny", "T", "nt", "amplitude", "initial", "method",
                               "max_picard_iters", "picard_tol", "nonlinearity"))


def run_family(cfg):
    """Dispatch one ``verify`` family; raises ``ValueError`` on bad hypotheses."""
    fam, seed = cfg["family"], cfg["seed"]
    pick = lambda key, default: default if cfg[key] is None else cfg[key]
    if fam == "linear":
        spec = NormSpec(pick("s", 0.5), pick("b", 0.55), pick("b_prime", -1 / 3))
        return verify_linear_lemma(spec, TimeCutoff(1.0), ensemble=pick("ensemble", 100), seed=seed)
    if fam in STRICHARTZ_DEFAULTS:
        d = STRICHARTZ_DEFAULTS[fam]
        return verify_strichartz(fam, pick("p", d["p"]), pick("q", d["q"]), pick("b", d["b"]),
                                 ensemble=pick("ensemble", 100), seed=seed)
    if fam.startswith("bil"):
        ks = range(cfg["k_min"], cfg["k_max"] + 1)
        return verify_bilinear(fam, ks, b=pick("b", 0.55), ensemble=pick("ensemble", 8), seed=seed,
                               s_weights=tuple(cfg["s_weights"]))
    if fam == "key":
        return verify_key_estimate(pick("s", 0.6), pick("b", 0.55), pick("b_prime", -1 / 3),
                                   ensemble=pick("ensemble", 50), seed=seed)
    if fam == "resonance":
        return verify_resonance(samples=cfg["samples"], seed=seed, scale=cfg["scale"])
    if fam == "regions":
        return verify_regions(samples=cfg["samples"], seed=seed, scale=cfg["scale"], c0=cfg["c0"])
    raise ValueError(f"unknown family {fam!r}")


def _write_reports(out, reports):
    dicts = [r.to_dict() if isinstance(r, EstimateReport) else r for r in reports]
    _write_json(out / "report.json", {"reports": dicts}, "report")
    with open(out / "report.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["name", "sample", "ratio"])
        for d in dicts:
            for i, r in enumerate(d["ratios"]):
                w.writerow([d["name"], i, repr(float(r))])
    return EXIT_OK if all(d["passed"] for d in dicts) else EXIT_THRESHOLD


def cmd_verify(cfg, out):
    if cfg["family"] not in FAMILIES:
        raise UsageError(f"--family must be one of {', '.join(FAMILIES)}")
    try:
        rep = run_family(cfg)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return _write_reports(out, [rep]), _echo(cfg, ("family", "ensemble", "samples", "scale", "s", "b",
                                                   "b_prime", "p", "q", "k_min", "k_max",
                                                   "s_weights", "c0"))


def cmd_resonance(cfg, out):
    try:
        reps = [verify_resonance(samples=cfg["samples"], seed=cfg["seed"], scale=cfg["scale"]),
                verify_regions(samples=cfg["samples"], seed=cfg["seed"], scale=cfg["scale"], c0=cfg["c0"])]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return _write_reports(out, reps), _echo(cfg, ("samples", "scale", "c0"))


def cmd_report(cfg, out):
    if not cfg["inputs"]:
        raise UsageError("report needs at least one input directory or report.json")
    merged = []
    for item in cfg["inputs"]:
        path = Path(item)
        path = path / "report.json" if path.is_dir() else path
        try:
            data = json.loads(path.read_text())
            jsonschema.validate(data, _schema("report"))
        except (OSError, json.JSONDecodeError, jsonschema.ValidationError) as exc:
            raise UsageError(f"cannot use {path}: {exc}") from exc
        merged.extend(data["reports"])
    return _write_reports(out, merged), _echo(cfg, ("inputs",))


COMMANDS = {"solve": cmd_solve, "verify": cmd_verify, "resonance": cmd_resonance, "report": cmd_report}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        out = _output_dir(cfg)
        status, echo = COMMANDS[args.command](cfg, out)
        _write_json(out / "meta.json", {"config": echo, "seed": cfg["seed"], "versions": _versions()}, "meta")
    except UsageError as exc:
        print(f"zklab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if status == EXIT_THRESHOLD:
        print("zklab: threshold check failed; see report artifacts", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())

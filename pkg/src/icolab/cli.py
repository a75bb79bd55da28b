"""Command-line front end.

Usage::

    icolab run switch.json --stage all --out results/ --emit-plot-data

Exit codes: 0 success, 2 rejected configuration or scenario, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import causal_order as co
from . import frames, quantum, scenarios
from .errors import ConfigurationError, NumericalError, ValidationError

log = logging.getLogger("icolab")

STAGES = ("verdict", "align", "lightcones", "sweep", "protocol")
EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


def load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"malformed config {path}: {exc}") from None
    if not isinstance(cfg, dict) or "scenario" not in cfg or "name" not in cfg["scenario"]:
        raise ConfigurationError("config needs a scenario section with a name")
    return cfg


def _complex(v, what):
    try:
        re, im = v
        return complex(float(re), float(im))
    except (TypeError, ValueError):
        raise ConfigurationError(f"amplitude {what} must be [re, im], got {v!r}") from None


def scenario_from_config(cfg):
    sc_cfg = cfg["scenario"]
    sc = scenarios.build_scenario(sc_cfg["name"], sc_cfg.get("params"))
    amps = cfg.get("amplitudes")
    if amps:
        sc = sc.with_amplitudes(_complex(amps.get("alpha", [1, 0]), "alpha"),
                                _complex(amps.get("beta", [0, 0]), "beta"))
    return sc


def resolve_stages(requested):
    out = []
    for s in requested:
        if s == "all":
            out.extend(STAGES)
        elif s in STAGES:
            out.append(s)
        else:
            raise ConfigurationError(f"unknown stage {s!r}; choose from {STAGES + ('all',)}")
    return list(dict.fromkeys(out))


def run_pipeline(cfg, stages, trials=None, seed=None):
    """Execute ``stages`` on the configured scenario; returns the result record."""
    numerics = cfg.get("numerics", {})
    tols = numerics.get("tolerances", {})
    seed = numerics.get("seed", 0) if seed is None else seed
    trials = numerics.get("trials", 200) if trials is None else trials

    sc = scenario_from_config(cfg)
    result = {"scenario": {"name": sc.name, "params": cfg["scenario"].get("params", {})},
              "amplitudes": {"alpha": [sc.amp_a.real, sc.amp_a.imag],
                             "beta": [sc.amp_b.real, sc.amp_b.imag]},
              "stages": stages}
    artifacts = {"scenario": sc}
    if "verdict" in stages:
        result.update(co.to_record(sc))
        if co.order_product(sc) == -1:
            r = co.reparametrization_no_go_check(sc)
            result["reparametrization"] = {"delta": r.delta, "tau_star": r.tau_star,
                                           "tau2_a": r.tau2_a, "tau2_b": r.tau2_b,
                                           "straddles": r.straddles}
    if "align" in stages:
        aligned = co.apply_quantum_diffeo(sc, *co.align_events(sc))
        result["align"] = {"event_mismatch": co.event_mismatch(aligned),
                           "product": co.order_product(aligned)}
        artifacts["aligned"] = aligned
    if "lightcones" in stages:
        out, reports = frames.make_lightcones_definite(sc)
        result["lightcones"] = [r.to_dict() for r in reports]
        result["lightcones_product"] = co.order_product(out)
        artifacts["normalized"] = out
    if "sweep" in stages:
        sw = co.invariance_sweep(sc, trials=trials, seed=seed, rel_tol=tols.get("invariance", 1e-6))
        result["sweep"] = {"trials": len(sw.trials), "passed": sw.n_passed, "seed": seed,
                           "max_tau_rel_err": sw.max_tau_rel_err,
                           "products": sorted({t.product for t in sw.trials})}
    if "protocol" in stages:
        result["order_qubit"] = quantum.order_qubit_summary(sc)
    return result, artifacts


def write_worldlines_csv(path, sc, n=200):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["branch", "curve", "lambda"] + [f"x{k}" for k in range(sc.branch_a.dim)])
        for name, br in zip("AB", sc.branches):
            for curve in (br.gamma0, br.gamma1, br.gamma2):
                lam, pts = curve.samples(n)
                for l, p in zip(lam, pts):
                    w.writerow([name, curve.label, repr(float(l))] + [repr(float(c)) for c in p])


def write_bloch_csv(path, order_qubit):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "z", "class"])
        w.writerow([*order_qubit["bloch"], order_qubit["class"]])


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o)}")


def cmd_run(args):
    cfg = load_config(args.config)
    stages = resolve_stages(args.stage or cfg.get("stages") or ["verdict"])
    log.info("running stages %s", stages)
    result, artifacts = run_pipeline(cfg, stages, args.trials, args.seed)
    result["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "result.json", "w") as fh:
        json.dump(result, fh, indent=2, sort_keys=True, default=_json_default)
    if args.emit_plot_data:
        write_worldlines_csv(out / "worldlines.csv", artifacts["scenario"])
        if "order_qubit" in result:
            write_bloch_csv(out / "bloch.csv", result["order_qubit"])
    summary = result.get("verdict") or ", ".join(stages)
    print(f"{result['scenario']['name']}: {summary} -> {out / 'result.json'}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="icolab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run pipeline stages on a scenario config")
    r.add_argument("config")
    r.add_argument("--stage", action="append", help=f"one of {', '.join(STAGES)}, all; repeatable")
    r.add_argument("--trials", type=int, default=None)
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--out", default=".")
    r.add_argument("--emit-plot-data", action="store_true")
    r.add_argument("-v", "--verbose", action="store_true")
    r.set_defaults(func=cmd_run)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

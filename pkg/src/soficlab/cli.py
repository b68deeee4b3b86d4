"""Batch command-line front end: model loading, experiment dispatch, CSV/JSON output."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time

import numpy as np
from jsonschema import Draft202012Validator

from . import groups
from .constraints import check_tssm
from .errors import SchemaError, SoficLabError
from .finitemodel import DerivedSpace, pressure_estimate
from .gibbs import entropy_rate_estimate, ssm_profile, uniform_bound_c
from .marginals import make_oracle
from .modelbuild import build_sofic
from .modelfile import Model, load_graph, load_model
from .randominfo import kp_pressure_at_fixed_point, kp_pressure_at_measure
from .saw import hardcore_marginal_via_saw
from .soficmaps import good_vertices
from .version import __version__

RUNCONFIG_SCHEMA = {
    "type": "object",
    "required": ["experiment"],
    "properties": {
        "experiment": {
            "enum": [
                "pressure",
                "entropy",
                "tssm-check",
                "ssm-profile",
                "kp-estimate",
                "saw-marginal",
                "sofic-stats",
            ]
        },
        "model": {"type": "string"},
        "graph": {"type": "string"},
        "params": {"type": "object"},
        "seed": {"type": "integer"},
        "output": {"type": "string"},
    },
}


def _record(experiment: str, inputs: dict, outputs, started: float, seed) -> dict:
    return {
        "experiment": experiment,
        "inputs": inputs,
        "outputs": outputs,
        "seed": seed,
        "version": __version__,
        "wall_time_s": round(time.time() - started, 3),
    }


def _emit(record: dict, fmt: str, out_path: str | None, csv_fields=None):
    if fmt == "csv":
        buf = io.StringIO()
        rows = record["outputs"]
        writer = csv.DictWriter(buf, fieldnames=csv_fields or list(rows[0].keys()))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k, "") for k in writer.fieldnames})
        text = buf.getvalue()
    else:
        text = json.dumps(record, indent=2, default=_jsonable) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _jsonable(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def _builder_desc(args, model: Model | None) -> dict:
    if getattr(args, "builder", None):
        desc = {"builder": args.builder}
        if args.builder in ("torus", "folner"):
            desc["d"] = args.d
        else:
            desc["k"] = args.k
        if getattr(args, "seed", None) is not None:
            desc["seed"] = args.seed
        return desc
    if model is not None and model.sofic:
        return {
            "builder": model.sofic["builder"],
            **model.sofic.get("params", {}),
            "seed": model.sofic.get("seed", 0),
        }
    raise SchemaError("no sofic builder given (flag --builder or model 'sofic' block)")


def _load_model_with_override(args) -> Model:
    model = load_model(args.model)
    lam = getattr(args, "lam", None)
    if lam is not None:
        data = dict(model.raw)
        weights = list(data["vertex_log_weights"])
        if len(weights) != 2:
            raise SchemaError("--lambda override needs a binary alphabet")
        weights[1] = math.log(lam)
        data["vertex_log_weights"] = weights
        from .modelfile import parse_model

        model = parse_model(data)
    return model


# ---------------------------------------------------------------- experiments


def run_sofic_stats(params: dict, seed: int) -> dict:
    desc = {
        "builder": params["builder"],
        **{k: v for k, v in params.items() if k in ("d", "k", "m", "n", "size")},
        "seed": seed,
    }
    sm = build_sofic(desc, seed=seed)
    report = good_vertices(sm, groups.ball(sm.spec, int(params.get("r", 2))))
    return {"provenance": sm.provenance, **report.to_dict()}


def run_tssm_check(model: Model, params: dict) -> dict:
    verdict = check_tssm(
        model.structure,
        model.spec,
        m=int(params.get("range", 1)),
        radius=int(params.get("radius", 3)),
        k_max=int(params.get("kmax", 3)),
    )
    out = {
        "kind": verdict.kind,
        "range_radius": verdict.range_radius,
        "tested_radius": verdict.tested_radius,
        "tested_support": verdict.tested_support,
        "complete": verdict.complete,
        "safe_symbol": verdict.safe_symbol,
    }
    if verdict.witness is not None:
        out["witness"] = {
            "sites": [list(g) for g in verdict.witness.sites],
            "values": list(verdict.witness.values),
        }
    return out


def run_pressure(model: Model, params: dict, seed: int):
    builder = params["builder_desc"]
    sizes = params["sizes"]
    return pressure_estimate(
        model.structure,
        model.potential,
        builder,
        sizes,
        method=params.get("method", "auto"),
        seed=seed,
        mcmc_kwargs=params.get("mcmc"),
    )


def run_entropy(model: Model, params: dict, seed: int):
    builder = params["builder_desc"]
    return entropy_rate_estimate(
        model.structure,
        model.potential,
        builder,
        params["sizes"],
        method=params.get("method", "auto"),
        seed=seed,
    )


def run_ssm_profile(model: Model, params: dict):
    rmax = int(params.get("rmax", 8))
    prof = ssm_profile(model.structure, model.potential, model.spec, rmax)
    return [{"r": r + 1, "beta_hat": float(b)} for r, b in enumerate(prof)]


def run_kp_estimate(model: Model, params: dict, seed: int) -> dict:
    r = int(params.get("r", 16))
    N = int(params.get("N", 200_000))
    nu = params.get("nu", "fixed0")
    oracle_kind = params.get("oracle", "auto")
    if oracle_kind == "auto":
        oracle_kind = "transfer" if model.spec.rank == 1 else "ball"
    oracle = make_oracle(
        oracle_kind,
        model.structure,
        model.potential,
        model.spec,
        r,
        pad=int(params.get("pad", 4)),
        saw_boundary=params.get("saw_boundary", "free"),
    )
    if nu == "mu":
        est = kp_pressure_at_measure(
            model.structure,
            model.potential,
            model.spec,
            oracle,
            r,
            N_inner=int(params.get("N_inner", 100)),
            M_outer=int(params.get("M_outer", max(1, N // int(params.get("N_inner", 100))))),
            seed=seed,
            nu="mu",
        )
    else:
        est = kp_pressure_at_fixed_point(
            model.structure, model.potential, model.spec, oracle, r, N, seed,
            past=params.get("past", "percolation"),
        )
    budget_r = min(r, int(params.get("budget_profile_radius", 12 if model.spec.rank == 1 else 1)))
    beta = float(ssm_profile(model.structure, model.potential, model.spec, budget_r)[-1])
    c_radius = min(r, 2) if model.spec.rank == 1 else 1
    c_hat = uniform_bound_c(model.structure, model.potential, model.spec, c_radius).c_hat
    return {
        "value": est.value,
        "stderr": est.stderr,
        "r": est.r,
        "N": est.n_samples,
        "oracle": est.oracle,
        "nu": nu,
        "budget_beta": beta,
        "budget_c": c_hat,
        "budget_total": 3.0 * beta / c_hat,
        "parts": est.parts,
    }


def run_saw_marginal(params: dict) -> dict:
    adj, lam, pins = load_graph(params["graph"])
    if "lambda" in params and params["lambda"] is not None:
        lam = params["lambda"]
    root = int(params.get("root", 0))
    p = hardcore_marginal_via_saw(adj, root, lam, pins)
    return {"root": root, "lambda": lam, "p_occupied": p, "pins": pins}


# ---------------------------------------------------------------- dispatch


def run_config(config: dict) -> dict:
    errors = sorted(Draft202012Validator(RUNCONFIG_SCHEMA).iter_errors(config), key=str)
    if errors:
        raise SchemaError("; ".join(e.message for e in errors[:3]))
    experiment = config["experiment"]
    params = dict(config.get("params", {}))
    seed = int(config.get("seed", 0))
    started = time.time()
    model = load_model(config["model"]) if "model" in config else None
    if experiment == "sofic-stats":
        outputs = run_sofic_stats(params, seed)
    elif experiment == "tssm-check":
        outputs = run_tssm_check(model, params)
    elif experiment == "ssm-profile":
        outputs = run_ssm_profile(model, params)
    elif experiment == "kp-estimate":
        outputs = run_kp_estimate(model, params, seed)
    elif experiment == "saw-marginal":
        if "graph" in config:
            params["graph"] = config["graph"]
        outputs = run_saw_marginal(params)
    elif experiment in ("pressure", "entropy"):
        if "builder_desc" not in params:
            if model.sofic is None:
                raise SchemaError("pressure/entropy need a builder block in model or params")
            params["builder_desc"] = {
                "builder": model.sofic["builder"],
                **model.sofic.get("params", {}),
                "seed": model.sofic.get("seed", 0),
            }
        runner = run_pressure if experiment == "pressure" else run_entropy
        outputs = runner(model, params, seed)
    else:  # pragma: no cover - schema guards
        raise SchemaError(f"unknown experiment {experiment!r}")
    record = _record(experiment, {k: v for k, v in config.items() if k != "output"}, outputs, started, seed)
    return record


def _scalar_of(record: dict):
    out = record["outputs"]
    if isinstance(out, dict) and "value" in out:
        return float(out["value"]), float(out.get("stderr", 0.0))
    if isinstance(out, list) and out and "pressure_estimate" in out[-1]:
        return float(out[-1]["pressure_estimate"]), float(out[-1].get("stderr", 0.0))
    if isinstance(out, list) and out and "entropy_rate" in out[-1]:
        return float(out[-1]["entropy_rate"]), float(out[-1].get("stderr", 0.0))
    raise SchemaError("experiment type does not expose a comparable scalar")


def compare_configs(config_a: dict, config_b: dict, tolerance: float) -> dict:
    ra = run_config(config_a)
    rb = run_config(config_b)
    if ra["experiment"] != rb["experiment"]:
        raise SchemaError("compare needs two runs of the same experiment type")
    va, sa = _scalar_of(ra)
    vb, sb = _scalar_of(rb)
    joint = math.hypot(sa, sb)
    margin = tolerance + 3.0 * joint
    diff = abs(va - vb)
    return {
        "experiment": ra["experiment"],
        "value_a": va,
        "value_b": vb,
        "stderr_a": sa,
        "stderr_b": sb,
        "difference": diff,
        "tolerance": tolerance,
        "joint_stderr": joint,
        "margin": margin,
        "arithmetic": f"|{va:.9g} - {vb:.9g}| = {diff:.3g} vs {tolerance:.3g} + 3*{joint:.3g} = {margin:.3g}",
        "verdict": "PASS" if diff <= margin else "FAIL",
        "records": [ra, rb],
    }


# ---------------------------------------------------------------- arg parsing


def _add_builder_flags(p: argparse.ArgumentParser):
    p.add_argument("--builder", choices=["torus", "folner", "random_perm"])
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--k", type=int, default=1)


def _run_and_exit(fn):
    try:
        return fn()
    except SoficLabError as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        sys.exit(exc.exit_code)


def main_sofic_stats(argv=None):
    p = argparse.ArgumentParser(prog="sofic-stats", description="Window-goodness report for a sofic builder")
    _add_builder_flags(p)
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    args = p.parse_args(argv)

    def go():
        started = time.time()
        params = {"builder": args.builder, "d": args.d, "k": args.k, "r": args.r}
        if args.m is not None:
            params["m"] = args.m
        if args.n is not None:
            params["n"] = args.n
        outputs = run_sofic_stats(params, args.seed)
        _emit(_record("sofic-stats", params, outputs, started, args.seed), "json", args.out)

    _run_and_exit(go)


def main_tssm_check(argv=None):
    p = argparse.ArgumentParser(prog="tssm-check", description="Bounded TSSM verdict for a model")
    p.add_argument("--model", required=True)
    p.add_argument("--range", type=int, default=1)
    p.add_argument("--radius", type=int, default=3)
    p.add_argument("--kmax", type=int, default=3)
    p.add_argument("--out")
    args = p.parse_args(argv)

    def go():
        started = time.time()
        model = load_model(args.model)
        outputs = run_tssm_check(model, {"range": args.range, "radius": args.radius, "kmax": args.kmax})
        _emit(_record("tssm-check", vars(args), outputs, started, 0), "json", args.out)

    _run_and_exit(go)


def _sizes(text: str):
    return [int(x) for x in text.split(",") if x]


def main_pressure(argv=None):
    p = argparse.ArgumentParser(prog="pressure", description="Normalized log partition values per size")
    p.add_argument("--model", required=True)
    _add_builder_flags(p)
    p.add_argument("--sizes", required=True)
    p.add_argument("--method", default="auto", choices=["auto", "exact", "transfer", "cycles", "mcmc"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    args = p.parse_args(argv)

    def go():
        started = time.time()
        model = _load_model_with_override(args)
        params = {"builder_desc": _builder_desc(args, model), "sizes": _sizes(args.sizes), "method": args.method}
        outputs = run_pressure(model, params, args.seed)
        record = _record("pressure", {**params, "model": args.model}, outputs, started, args.seed)
        _emit(record, "json" if args.json else "csv", args.out,
              csv_fields=["n", "log_Z", "pressure_estimate", "stderr", "method", "seed"])

    _run_and_exit(go)


def main_entropy(argv=None):
    p = argparse.ArgumentParser(prog="entropy", description="Entropy-rate estimates per size")
    p.add_argument("--model", required=True)
    _add_builder_flags(p)
    p.add_argument("--sizes", required=True)
    p.add_argument("--method", default="auto", choices=["auto", "exact", "transfer", "cycles", "mcmc"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    args = p.parse_args(argv)

    def go():
        started = time.time()
        model = _load_model_with_override(args)
        params = {"builder_desc": _builder_desc(args, model), "sizes": _sizes(args.sizes), "method": args.method}
        outputs = run_entropy(model, params, args.seed)
        record = _record("entropy", {**params, "model": args.model}, outputs, started, args.seed)
        _emit(record, "json" if args.json else "csv", args.out,
              csv_fields=["n", "entropy_rate", "stderr", "method"])

    _run_and_exit(go)


def main_ssm_profile(argv=None):
    p = argparse.ArgumentParser(prog="ssm-profile", description="Empirical mixing profile beta(r)")
    p.add_argument("--model", required=True)
    p.add_argument("--rmax", type=int, default=8)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    args = p.parse_args(argv)

    def go():
        started = time.time()
        model = _load_model_with_override(args)
        outputs = run_ssm_profile(model, {"rmax": args.rmax})
        record = _record("ssm-profile", {"model": args.model, "rmax": args.rmax}, outputs, started, 0)
        _emit(record, "json" if args.json else "csv", args.out, csv_fields=["r", "beta_hat"])

    _run_and_exit(go)


def main_kp_estimate(argv=None):
    p = argparse.ArgumentParser(prog="kp-estimate", description="Random-past pressure estimate")
    p.add_argument("--model", required=True)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--oracle", default="auto", choices=["auto", "transfer", "ball", "saw"])
    p.add_argument("--r", type=int, default=16)
    p.add_argument("--N", type=int, default=200_000)
    p.add_argument("--nu", default="fixed0", choices=["fixed0", "mu"])
    p.add_argument("--past", default="percolation", choices=["percolation", "lex"])
    p.add_argument("--saw-boundary", default="free", choices=["free", "self_consistent"])
    p.add_argument("--N-inner", type=int, default=100)
    p.add_argument("--M-outer", type=int)
    p.add_argument("--pad", type=int, default=4)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out")
    args = p.parse_args(argv)

    def go():
        started = time.time()
        model = _load_model_with_override(args)
        params = {"r": args.r, "N": args.N, "nu": args.nu, "oracle": args.oracle, "pad": args.pad,
                  "N_inner": args.N_inner, "past": args.past, "saw_boundary": args.saw_boundary}
        if args.M_outer:
            params["M_outer"] = args.M_outer
        outputs = run_kp_estimate(model, params, args.seed)
        record = _record("kp-estimate", {**params, "model": args.model}, outputs, started, args.seed)
        _emit(record, "json", args.out)

    _run_and_exit(go)


def main_saw_marginal(argv=None):
    p = argparse.ArgumentParser(prog="saw-marginal", description="Hardcore root marginal via the SAW tree")
    p.add_argument("--graph", required=True)
    p.add_argument("--root", type=int, default=0)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--out")
    args = p.parse_args(argv)

    def go():
        started = time.time()
        outputs = run_saw_marginal({"graph": args.graph, "root": args.root, "lambda": args.lam})
        record = _record("saw-marginal", vars(args), outputs, started, 0)
        _emit(record, "json", args.out)

    _run_and_exit(go)


def main(argv=None):
    p = argparse.ArgumentParser(prog="soficlab", description="Finite-model laboratory for Gibbs measures on sofic groups")
    sub = p.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run a JSON RunConfig")
    runp.add_argument("config")
    cmpp = sub.add_parser("compare", help="run two configs and compare their scalar outputs")
    cmpp.add_argument("config_a")
    cmpp.add_argument("config_b")
    cmpp.add_argument("--tolerance", type=float, default=0.0)
    cmpp.add_argument("--out")
    args = p.parse_args(argv)

    def go():
        if args.command == "run":
            with open(args.config) as fh:
                config = json.load(fh)
            record = run_config(config)
            out_path = config.get("output")
            _emit(record, "json", out_path)
        else:
            with open(args.config_a) as fh:
                ca = json.load(fh)
            with open(args.config_b) as fh:
                cb = json.load(fh)
            result = compare_configs(ca, cb, args.tolerance)
            _emit({"experiment": "compare", "outputs": result, "inputs": {}, "seed": None,
                   "version": __version__, "wall_time_s": 0}, "json", args.out)
            if result["verdict"] != "PASS":
                sys.exit(1)

    _run_and_exit(go)


if __name__ == "__main__":
    main()

"""Batch experiment runner.

Usage::

    python -m flexkrylov run heat512 --out out/heat
    python -m flexkrylov report out/heat
    python -m flexkrylov list-problems
    python -m flexkrylov list-solvers

A config is a JSON file (or the name of a bundled config) of the form::

    {
      "schema_version": 1,
      "name": "heat512",
      "problem": {"generator": "heat", "params": {"n": 512}, "noise_level": 1e-4, "seed": 0},
      "solvers": [
        {"name": "lsqr", "method": "lsqr", "maxiter": 100},
        {"name": "flsqr-i", "method": "flsqr-i", "maxiter": 100,
         "weights": {"tau1_rel": 0.1, "clip": true}, "param": {"kind": "optimal"}},
        {"name": "fista", "method": "fista", "maxiter": 100, "lam_from": "flsqr-i"}
      ],
      "output": {"dir": "out/heat512", "pgm": false},
      "metrics": {"wall_time": false}
    }

Discrepancy-based policies without an explicit ``eps`` use the norm of the
generated noise.  Wall-clock times are written as ``nan`` unless
``metrics.wall_time`` is true, so that repeated runs give identical bytes.

Exit codes: 0 success, 1 malformed config or missing traces, 2 solver abort.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .baselines import FistaConfig, IrnConfig, run_fista, run_irn, run_pirn
from .linop import ConfigurationError
from .problems import GENERATORS, TestProblem, add_noise, generate
from .regparam import ParamPolicy
from .solvers import METHODS, SolverAbort, SolverConfig, SolverRun, solve
from .weights import WeightPolicy

SCHEMA_VERSION = 1
TRACE_HEADER = ["iter", "lambda", "res_norm", "ne_res_norm", "rel_err", "matvecs", "wall_ms"]
BASELINES = ("irn", "pirn", "fista")

_KRYLOV_KEYS = {"stop", "stagnation_tol", "stagnation_window"}
_IRN_KEYS = {"outer", "inner", "inner_tol", "inner_solver"}
_FISTA_KEYS = {"step", "norm_iterations"}
_COMMON_KEYS = {"name", "method", "maxiter", "weights", "param", "lam", "lam_from", "transform"}


@dataclass
class ProblemSpec:
    generator: str
    params: dict[str, Any] = field(default_factory=dict)
    noise_level: float = 0.0
    seed: int = 0


@dataclass
class SolverSpec:
    name: str
    method: str
    options: dict[str, Any]


@dataclass
class ExperimentConfig:
    name: str
    problem: ProblemSpec
    solvers: list[SolverSpec]
    output_dir: Path
    pgm: bool = False
    wall_time: bool = False


def bundled_configs() -> list[str]:
    root = resources.files("flexkrylov") / "configs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def _read_config_text(path_or_name: str) -> str:
    path = Path(path_or_name)
    if path.is_file():
        return path.read_text()
    stem = path_or_name[:-5] if path_or_name.endswith(".json") else path_or_name
    if stem in bundled_configs():
        return (resources.files("flexkrylov") / "configs" / f"{stem}.json").read_text()
    raise ConfigurationError(f"no config file {path_or_name!r} and no bundled config of that name (bundled: {bundled_configs()})")


def _expect(cond: bool, msg: str):
    if not cond:
        raise ConfigurationError(msg)


def parse_config(raw: dict, out: str | None = None, seed: int | None = None) -> ExperimentConfig:
    """Validate a decoded config; raises ``ConfigurationError`` with the offending field."""
    _expect(isinstance(raw, dict), "config must be a JSON object")
    _expect(raw.get("schema_version") == SCHEMA_VERSION, f"schema_version must be {SCHEMA_VERSION}")
    name = str(raw.get("name", "experiment"))

    prob = raw.get("problem")
    _expect(isinstance(prob, dict), "missing 'problem' object")
    gen = prob.get("generator")
    _expect(gen in GENERATORS, f"problem.generator must be one of {sorted(GENERATORS)}, got {gen!r}")
    unknown = set(prob) - {"generator", "params", "noise_level", "seed"}
    _expect(not unknown, f"unknown problem keys {sorted(unknown)}")
    params = prob.get("params", {})
    _expect(isinstance(params, dict), "problem.params must be an object")
    noise = float(prob.get("noise_level", 0.0))
    _expect(noise >= 0, "problem.noise_level must be nonnegative")
    pspec = ProblemSpec(gen, params, noise, int(prob.get("seed", 0) if seed is None else seed))

    entries = raw.get("solvers")
    _expect(isinstance(entries, list) and entries, "'solvers' must be a nonempty list")
    solvers, seen = [], set()
    for i, entry in enumerate(entries):
        _expect(isinstance(entry, dict), f"solvers[{i}] must be an object")
        method = str(entry.get("method", "")).lower()
        _expect(method in METHODS or method in BASELINES,
                f"solvers[{i}].method {method!r} is unknown; see list-solvers")
        sname = str(entry.get("name", method))
        _expect(sname not in seen, f"duplicate solver name {sname!r}")
        _expect(sname.replace("-", "").replace("_", "").isalnum(), f"solver name {sname!r} must be alphanumeric (plus - and _)")
        allowed = _COMMON_KEYS | (_IRN_KEYS if method in ("irn", "pirn") else _FISTA_KEYS if method == "fista" else _KRYLOV_KEYS)
        unknown = set(entry) - allowed
        _expect(not unknown, f"solvers[{i}] ({sname}): unknown keys {sorted(unknown)}")
        if "lam_from" in entry:
            _expect(entry["lam_from"] in seen, f"solvers[{i}] ({sname}): lam_from {entry['lam_from']!r} must name an earlier solver")
        opts = {k: v for k, v in entry.items() if k not in ("name", "method")}
        # build once so that bad values fail before anything is written
        try:
            _check_options(method, opts)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"solvers[{i}] ({sname}): {exc}") from None
        solvers.append(SolverSpec(sname, method, opts))
        seen.add(sname)

    output = raw.get("output", {})
    metrics = raw.get("metrics", {})
    _expect(isinstance(output, dict) and isinstance(metrics, dict), "'output' and 'metrics' must be objects")
    out_dir = Path(out if out is not None else output.get("dir", f"out/{name}"))
    return ExperimentConfig(name, pspec, solvers, out_dir, bool(output.get("pgm", False)), bool(metrics.get("wall_time", False)))


def _weights(opts) -> WeightPolicy:
    return WeightPolicy(**opts.get("weights", {}))


def _param(opts, eps: float | None) -> ParamPolicy:
    kw = dict(opts.get("param", {}))
    if kw.get("kind", "fixed").startswith("dp") and kw.get("eps") is None and kw.get("noise_level") is None:
        kw["eps"] = 1.0 if eps is None else eps
    return ParamPolicy(**kw)


def _check_options(method, opts):
    _weights(opts)
    if method in BASELINES:
        lam = float(opts.get("lam", 1e-3))
        if method == "fista":
            FistaConfig(lam=lam, maxiter=int(opts.get("maxiter", 100)))
        else:
            IrnConfig(lam=lam, **{k: opts[k] for k in _IRN_KEYS if k in opts})
        return
    param = _param(opts, 1.0)
    if param.kind == "optimal":
        return  # needs x_true, which every generated problem has
    SolverConfig(method=method, maxiter=int(opts.get("maxiter", 50)), param=param,
                 **{k: opts[k] for k in _KRYLOV_KEYS if k in opts})


def build_problem(spec: ProblemSpec) -> TestProblem:
    p = generate(spec.generator, **spec.params)
    return add_noise(p, spec.noise_level, seed=spec.seed)


def run_solver(s: SolverSpec, prob: TestProblem, finished: dict[str, SolverRun]) -> SolverRun:
    opts = s.options
    psi = prob.psi if opts.get("transform", True) else None
    weights = _weights(opts)
    lam = float(opts.get("lam", 1e-3))
    if "lam_from" in opts:
        lam = float(finished[opts["lam_from"]].final_lambda)
    if s.method == "fista":
        cfg = FistaConfig(lam=lam, maxiter=int(opts.get("maxiter", 100)), x_true=prob.x_true, transform=psi,
                          **{k: opts[k] for k in _FISTA_KEYS if k in opts})
        run = run_fista(prob.a, prob.b, cfg)
    elif s.method in ("irn", "pirn"):
        cfg = IrnConfig(lam=lam, weights=weights, x_true=prob.x_true, transform=psi,
                        **{k: opts[k] for k in _IRN_KEYS if k in opts})
        run = (run_irn if s.method == "irn" else run_pirn)(prob.a, prob.b, cfg)
    else:
        eps = float(np.linalg.norm(prob.e))
        cfg = SolverConfig(method=s.method, maxiter=int(opts.get("maxiter", 50)), weights=weights,
                           param=_param(opts, eps), x_true=prob.x_true, transform=psi,
                           **{k: opts[k] for k in _KRYLOV_KEYS if k in opts})
        run = solve(prob.a, prob.b, cfg)
    run.method = s.name
    return run


def _fmt(v) -> str:
    return "%.17g" % v


def write_trace(run: SolverRun, path: Path, wall_time: bool = False):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for r in run.records:
            wall = _fmt(r.wall_ms) if wall_time else "nan"
            w.writerow([r.k, _fmt(r.lam), _fmt(r.res_norm), _fmt(r.ne_res_norm), _fmt(r.rel_err), r.matvecs, wall])


def write_pgm(image: np.ndarray, path: Path) -> dict:
    """8-bit binary PGM with linear min/max scaling; returns the scaling record."""
    lo, hi = float(image.min()), float(image.max())
    scaled = np.zeros(image.shape) if hi == lo else (image - lo) / (hi - lo)
    pix = np.rint(255.0 * scaled).astype(np.uint8)
    h, w = pix.shape
    path.write_bytes(f"P5\n{w} {h}\n255\n".encode("ascii") + pix.tobytes())
    return {"file": path.name, "min": lo, "max": hi, "shape": [h, w]}


def _clean(v):
    return None if isinstance(v, float) and not math.isfinite(v) else v


def summarize(run: SolverRun) -> dict:
    last = run.records[-1] if run.records else None
    best = run.records[run.best_iter - 1] if run.best_iter else None
    return {
        "method": run.method,
        "best_rel_err": _clean(best.rel_err) if best else None,
        "best_iter": run.best_iter,
        "stop_reason": run.stop_reason,
        "final_lambda": _clean(run.final_lambda),
        "iterations": run.iterations,
        "matvecs": last.matvecs if last else 0,
    }


def run_experiment(config: ExperimentConfig) -> int:
    prob = build_problem(config.problem)
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    summary = {"schema_version": SCHEMA_VERSION, "name": config.name, "problem": prob.spec, "solvers": {}}
    finished: dict[str, SolverRun] = {}
    code = 0
    for s in config.solvers:
        try:
            run = run_solver(s, prob, finished)
        except SolverAbort as exc:
            summary["solvers"][s.name] = {"method": s.method, "error": str(exc)}
            print(f"solver {s.name} aborted: {exc}", file=sys.stderr)
            code = 2
            break
        finished[s.name] = run
        write_trace(run, out / f"{s.name}_trace.csv", config.wall_time)
        entry = summarize(run)
        entry["method"] = s.method
        if config.pgm and prob.image_shape is not None and run.x_best is not None:
            entry["image"] = write_pgm(np.asarray(run.x_best).reshape(prob.image_shape), out / f"{s.name}_best.pgm")
            (out / f"{s.name}_best.json").write_text(json.dumps(entry["image"], indent=2) + "\n")
        summary["solvers"][s.name] = entry
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return code


def read_trace(path: Path) -> dict:
    with Path(path).open() as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ConfigurationError(f"{path} has no iterations")
    err = np.array([float(r["rel_err"]) for r in rows])
    mv = np.array([int(r["matvecs"]) for r in rows])
    if np.all(np.isnan(err)):
        i = len(rows) - 1
    else:
        i = int(np.nanargmin(err))
    return {"solver": Path(path).name[: -len("_trace.csv")], "best_rel_err": float(err[i]),
            "iter": int(rows[i]["iter"]), "matvecs": int(mv[i])}


def compare_report(trace_dir) -> str:
    """Markdown table, one row per trace, sorted by best error then by matvecs."""
    paths = sorted(Path(trace_dir).glob("*_trace.csv"))
    if not paths:
        raise FileNotFoundError(f"no *_trace.csv files in {trace_dir}")
    rows = [read_trace(p) for p in paths]
    rows.sort(key=lambda r: (math.inf if math.isnan(r["best_rel_err"]) else r["best_rel_err"], r["matvecs"], r["solver"]))
    lines = ["| solver | best rel err | iteration | matvecs |", "|---|---|---|---|"]
    lines += [f"| {r['solver']} | {r['best_rel_err']:.4f} | {r['iter']} | {r['matvecs']} |" for r in rows]
    return "\n".join(lines)


def _cmd_run(args) -> int:
    try:
        raw = json.loads(_read_config_text(args.config))
        config = parse_config(raw, out=args.out, seed=args.seed)
    except (json.JSONDecodeError, ConfigurationError, TypeError, ValueError) as exc:
        print(f"error: malformed config: {exc}", file=sys.stderr)
        return 1
    try:
        code = run_experiment(config)
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return 1
    if code == 0:
        print(f"wrote {len(config.solvers)} traces to {config.output_dir}")
    return code


def _cmd_report(args) -> int:
    try:
        print(compare_report(args.dir))
    except (FileNotFoundError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def _cmd_list_problems(args) -> int:
    for name, (_, desc) in sorted(GENERATORS.items()):
        print(f"{name:10s} {desc}")
    return 0


def _cmd_list_solvers(args) -> int:
    for m in METHODS:
        print(m)
    for m in BASELINES:
        print(f"{m} (baseline; fixed lambda or lam_from)")
    print("bundled configs: " + ", ".join(bundled_configs()))
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="flexkrylov", description="Flexible Krylov experiment runner")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("config", help="path to a JSON config or the name of a bundled config")
    p.add_argument("--out", help="output directory (overrides output.dir)")
    p.add_argument("--seed", type=int, help="noise seed (overrides problem.seed)")
    p.set_defaults(func=_cmd_run)
    p = sub.add_parser("report", help="markdown table of the traces in a directory")
    p.add_argument("dir")
    p.set_defaults(func=_cmd_report)
    sub.add_parser("list-problems").set_defaults(func=_cmd_list_problems)
    sub.add_parser("list-solvers").set_defaults(func=_cmd_list_solvers)
    args = ap.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

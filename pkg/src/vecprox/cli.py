"""Command-line interface: ``vecprox run | check | compare``.

Exit codes
----------
0  success (``run``: step_converged; ``check``: every property passed;
   ``compare``: traces agree)
1  configuration or usage error (including unknown suites and
   non-Euclidean ``compare`` configs)
2  ``run`` stopped at ``max_outer``
3  ``run`` stopped on an inner-solver failure
4  ``check`` found a failing property, or ``compare`` found disagreement
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import warnings

import numpy as np

from .checks import SUITES, run_suite
from .config import ConfigError, RunConfig, build, load_config
from .manifold import Euclidean
from .proxpoint import SCHEMA_VERSION, descent_audit, dump_result, fejer_audit, run, write_trace_csv

__all__ = ["main", "cmd_run", "cmd_check", "cmd_compare", "EXIT_CODES", "COMPARE_TOL"]

EXIT_CODES = {"step_converged": 0, "config_error": 1, "max_outer": 2, "inner_failure": 3, "failed": 4}
COMPARE_TOL = 1e-6


def _err(msg: str) -> None:
    print(f"vecprox: error: {msg}", file=sys.stderr)


def _outputs(cfg: RunConfig, out_dir):
    out_dir = out_dir or "."
    os.makedirs(out_dir, exist_ok=True)
    return (os.path.join(out_dir, cfg.output.trace_csv), os.path.join(out_dir, cfg.output.result_json))


def _load(config_path, seed):
    cfg = load_config(config_path)
    if seed is not None:
        cfg.outer.seed = int(seed)
    problem, p0, outer = build(cfg)
    return cfg, problem, p0, outer


def cmd_run(config_path, out_dir=None, *, seed=None, verbose=False) -> int:
    try:
        cfg, problem, p0, outer = _load(config_path, seed)
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_CODES["config_error"]
    if verbose:
        cfg.inner.verbose = True
        outer = cfg.outer_config()
    trace = run(problem, p0, outer, record_time=cfg.output.record_time)
    audits = [descent_audit(trace)]
    w = problem.witness
    audits.append(fejer_audit(trace, w, objective=problem.objective) if w is not None else fejer_audit(trace))
    csv_path, json_path = _outputs(cfg, out_dir)
    write_trace_csv(trace, csv_path)
    dump_result(trace, json_path, audits)
    t = trace.terminal
    print(f"status={trace.status} iterations={trace.n_iter} f_k={t.fk_value:.6e} step={t.step:.3e}")
    return EXIT_CODES[trace.status]


def cmd_check(suite: str, seed: int = 0, *, verbose=False) -> int:
    if suite != "all" and suite not in SUITES:
        _err(f"unknown suite {suite!r}; choose from {sorted(SUITES) + ['all']}")
        return EXIT_CODES["config_error"]
    results = run_suite(suite, seed)
    ok = all(r.passed for r in results)
    report = {"schema_version": SCHEMA_VERSION, "suite": suite, "seed": seed, "passed": ok,
              "properties": [r.to_dict() for r in results]}
    print(json.dumps(report, indent=2 if verbose else None))
    return 0 if ok else EXIT_CODES["failed"]


def cmd_compare(config_path, out_dir=None, *, seed=None, verbose=False) -> int:
    from .cone import default_direction
    from .reference import flat_reference_run

    try:
        cfg, problem, p0, outer = _load(config_path, seed)
        M = problem.manifold
        if not isinstance(M, Euclidean):
            raise ConfigError("compare needs a Euclidean manifold")
        if cfg.problem.name not in ("sq_distances", "norm_sq"):
            raise ConfigError("compare supports the sq_distances and norm_sq problems only")
        Z = problem.Z
        if not (Z.kind in ("scalar", "orthant") or Z.is_orthant):
            raise ConfigError("compare needs the orthant cone")
        e = default_direction(Z)
        for d in outer.direction_list(Z):
            if np.linalg.norm(d - e) > 1e-12:
                raise ConfigError("compare needs the fixed direction (1,...,1)/sqrt(m)")
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_CODES["config_error"]

    trace = run(problem, p0, outer, record_time=cfg.output.record_time)
    if cfg.problem.name == "norm_sq":
        anchors = np.zeros((1, M.ambient_dim))
    else:
        anchors = np.asarray(problem.objective.params["anchors"], dtype=float)
    lams = [outer.lambda_at(k) for k in range(outer.max_outer)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        ref = flat_reference_run(anchors, p0, lams, e, tol_step=outer.tol_step, max_outer=outer.max_outer)

    gen = trace.points
    n = min(len(gen), len(ref))
    gaps = np.linalg.norm(gen[:n] - ref[:n], axis=1)
    worst = float(gaps.max())
    agree = worst <= COMPARE_TOL and len(gen) == len(ref)

    csv_path, json_path = _outputs(cfg, out_dir)
    write_trace_csv(trace, csv_path)
    root, ext = os.path.splitext(csv_path)
    with open(f"{root}_reference{ext or '.csv'}", "w") as fh:
        fh.write(",".join(["k"] + [f"x_{i}" for i in range(ref.shape[1])]) + "\n")
        for k, p in enumerate(ref):
            fh.write(",".join([str(k)] + [format(float(v), ".16e") for v in p]) + "\n")
    report = {"schema_version": SCHEMA_VERSION, "agree": agree, "worst_distance": worst,
              "tolerance": COMPARE_TOL, "general_iterates": len(gen), "reference_iterates": len(ref)}
    if verbose:
        report["distances"] = gaps.tolist()
    print(json.dumps(report))
    return 0 if agree else EXIT_CODES["failed"]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vecprox", description="Proximal point method for vector optimization "
                                 "on Hadamard manifolds.")
    sub = ap.add_subparsers(dest="verb", required=True)
    for verb in ("run", "compare"):
        p = sub.add_parser(verb)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None, help="output directory (default: current)")
        p.add_argument("--seed", type=int, default=None, help="override outer.seed")
        p.add_argument("--verbose", action="store_true")
    p = sub.add_parser("check")
    p.add_argument("suite_pos", nargs="?", default=None, metavar="suite")
    p.add_argument("--suite", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.verb == "run":
        return cmd_run(args.config, args.out, seed=args.seed, verbose=args.verbose)
    if args.verb == "compare":
        return cmd_compare(args.config, args.out, seed=args.seed, verbose=args.verbose)
    suite = args.suite or args.suite_pos or "all"
    return cmd_check(suite, args.seed, verbose=args.verbose)


if __name__ == "__main__":
    sys.exit(main())

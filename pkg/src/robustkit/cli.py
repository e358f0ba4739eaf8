"""Batch front-end: solve one robust instance, or run a suite config into a
deterministic CSV report.

``robustkit solve`` prints the RobustSolution JSON on stdout and exits 0 on
success, 2 on input/precondition problems (with a machine-readable "error"
field), and 1 on internal errors.  ``robustkit experiment`` expands a suite
config into one row per (instance, algorithm, seed); rows run in a thread
pool sized by ROBUSTKIT_THREADS and are sorted before writing, so the CSV
is byte-identical across runs and thread counts.  Runtimes are recorded
only with --timings, since wall-clock jitter would break that promise.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import json
import os
import sys
import time

import numpy as np

from robustkit import corpus, lp_core
from robustkit.errors import (
    DimensionTooLarge,
    GridCapExceeded,
    PreconditionViolated,
    RobustKitError,
    SchemaError,
    StalledDecomposition,
    VariantMismatch,
)
from robustkit.instances import parse_instance, random_instance
from robustkit.oracle import exact_robust_opt, verdict
from robustkit.reductions import ALGORITHMS, ReductionConfig
from robustkit.relaxation import solve_robust_relaxation
from robustkit.uncertainty import (
    EllipsoidAffine,
    EllipsoidDirect,
    PolyhedralAffine,
    PolyhedralDirect,
    fold_box_into_rows,
    normalize,
    parse_uncertainty,
    width_params,
)
from robustkit.verifiers import make_verifier

CSV_COLUMNS = [
    "instance_id", "algorithm", "seed", "n", "m", "k",
    "width_poly", "width_eig", "width_gen",
    "z_R", "opt_r", "robust_objective", "claimed_factor", "observed_ratio",
    "runtime_ms", "status",
]

_ERROR_CODES = {
    VariantMismatch: "variant-mismatch",
    PreconditionViolated: "precondition-violated",
    SchemaError: "schema-error",
    GridCapExceeded: "grid-cap-exceeded",
    DimensionTooLarge: "dimension-too-large",
    StalledDecomposition: "stalled-decomposition",
}


def _error_code(exc: Exception) -> str:
    for klass, code in _ERROR_CODES.items():
        if isinstance(exc, klass):
            return code
    return "internal-error"


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".10g")
    return str(value)


def _set_ratios(U) -> dict:
    """Width ratio columns for a report row; empty when undefined."""
    out = {"width_poly": None, "width_eig": None, "width_gen": None, "k": None}
    try:
        Un, _ = normalize(U)
        if isinstance(Un, PolyhedralDirect):
            wp = width_params(fold_box_into_rows(Un))
            out["width_poly"] = wp.gamma / wp.beta
        elif isinstance(Un, PolyhedralAffine):
            wp = width_params(Un)
            out["width_poly"] = wp.gamma / wp.beta
            out["width_gen"] = wp.c_max / wp.c_min
            out["k"] = Un.k
        elif isinstance(Un, EllipsoidDirect):
            wp = width_params(Un)
            out["width_eig"] = wp.lambda_max / wp.lambda_min
        elif isinstance(Un, EllipsoidAffine):
            wp = width_params(Un)
            out["width_eig"] = wp.lambda_max / wp.lambda_min
            if wp.c_min:
                out["width_gen"] = wp.c_max / wp.c_min
            out["k"] = Un.k
    except RobustKitError:
        pass
    return out


def run_solve(args) -> int:
    if args.algorithm not in ALGORITHMS:
        print(json.dumps({"error": "unknown-algorithm",
                          "message": f"unknown algorithm {args.algorithm!r}"}))
        return 2
    if args.verifier not in ("greedy", "ancrr"):
        print(json.dumps({"error": "unknown-verifier",
                          "message": f"unknown verifier {args.verifier!r}"}))
        return 2
    try:
        with open(args.instance) as fh:
            instance = parse_instance(fh.read())
        with open(args.uncertainty) as fh:
            U = parse_uncertainty(fh.read())
        if U.n != instance.n_sets:
            raise SchemaError("uncertainty dimension does not match the instance")
        verifier = make_verifier(args.verifier, instance)
        config = ReductionConfig(
            epsilon=args.epsilon, whp_repeats=args.repeats, rng_seed=args.seed
        )
        lp_core.set_default_tolerances(lp_core.SolverTolerances(
            feas_tol=args.feas_tol, gap_tol=args.gap_tol,
            pivot_tol=args.pivot_tol, max_pivots=args.max_pivots,
        ))
        solution = ALGORITHMS[args.algorithm](instance, U, verifier, config)
    except FileNotFoundError as exc:
        print(json.dumps({"error": "io-error", "message": str(exc)}))
        return 2
    except ValueError as exc:
        # unknown verifier names and malformed numerics are caller mistakes
        print(json.dumps({"error": "invalid-argument", "message": str(exc)}))
        return 2
    except RobustKitError as exc:
        code = _error_code(exc)
        print(json.dumps({"error": code, "message": str(exc)}))
        return 2 if code != "internal-error" else 1
    except Exception as exc:  # noqa: BLE001 - the contract wants exit 1 here
        print(json.dumps({"error": "internal-error", "message": str(exc)}))
        return 1
    print(json.dumps(solution.to_json_dict()))
    return 0


def _build_uncertainty(conf: dict, rng, c0):
    kind = conf.get("kind")
    params = dict(conf.get("params", {}))
    return corpus.generate_uncertainty(kind, rng, c0, **params)


def _run_row(task) -> dict:
    instance, U, instance_id, algorithm, verifier_name, seed, cfg, timings, oracle_cap = task
    row = {c: None for c in CSV_COLUMNS}
    row.update(
        instance_id=instance_id,
        algorithm=algorithm,
        seed=seed,
        n=instance.n_sets,
        m=instance.universe_size,
        status="ok",
        runtime_ms=0,
    )
    row.update(_set_ratios(U))
    started = time.perf_counter()
    try:
        verifier = make_verifier(verifier_name, instance)
        config = ReductionConfig(
            epsilon=cfg["epsilon"], whp_repeats=cfg["whp_repeats"], rng_seed=seed
        )
        solution = ALGORITHMS[algorithm](instance, U, verifier, config)
        Un, _ = normalize(U)
        relax = solve_robust_relaxation(instance, Un)
        row["z_R"] = relax.z_R
        row["robust_objective"] = solution.robust_objective
        row["claimed_factor"] = solution.claimed_factor
        if instance.n_sets <= oracle_cap:
            oracle = exact_robust_opt(instance, Un)
            row["opt_r"] = oracle.opt_r
            v = verdict(solution, oracle)
            row["observed_ratio"] = v.ratio
            if not v.passed:
                row["status"] = "guarantee-violated"
        else:
            row["status"] = "oracle-skipped"
    except Exception as exc:  # per-row failures must not abort the suite
        row["status"] = f"error:{_error_code(exc)}"
    if timings:
        row["runtime_ms"] = int(round(1000 * (time.perf_counter() - started)))
    return row


def run_experiment(args) -> int:
    try:
        with open(args.suite) as fh:
            suite = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": "io-error", "message": str(exc)}))
        return 2

    cfg = {
        "epsilon": float(suite.get("epsilon", 0.25)),
        "whp_repeats": int(suite.get("whp_repeats", 16)),
    }
    oracle_cap = int(suite.get("oracle_max_n", 15))
    master_seed = int(suite.get("master_seed", 0))
    tasks = []
    try:
        for g_idx, group in enumerate(suite["groups"]):
            gid = group.get("id", f"group{g_idx}")
            count = int(group.get("count", 1))
            g_rng = np.random.default_rng([master_seed, g_idx])
            for i in range(count):
                inst_seed = int(g_rng.integers(2**31))
                instance = random_instance(
                    inst_seed,
                    int(group["n"]),
                    int(group["m"]),
                    float(group.get("density", 0.4)),
                    tuple(group.get("cost_range", (0.5, 2.0))),
                )
                U = _build_uncertainty(
                    group["uncertainty"], g_rng, instance.nominal_cost
                )
                instance_id = f"{gid}-{i:03d}"
                for algorithm in group["algorithms"]:
                    if algorithm not in ALGORITHMS:
                        raise SchemaError(f"unknown algorithm {algorithm!r}")
                    for seed in group.get("seeds", [0]):
                        tasks.append((
                            instance, U, instance_id, algorithm,
                            group.get("verifier", "greedy"), int(seed),
                            cfg, args.timings, oracle_cap,
                        ))
    except (KeyError, TypeError, ValueError, SchemaError) as exc:
        print(json.dumps({"error": "schema-error", "message": str(exc)}))
        return 2

    threads = int(os.environ.get("ROBUSTKIT_THREADS", "1"))
    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_run_row, tasks))
    else:
        rows = [_run_row(t) for t in tasks]

    rows.sort(key=lambda r: (r["instance_id"], r["algorithm"], r["seed"]))
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    print(json.dumps({"rows": len(rows), "out": args.out}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robustkit",
        description="Robust covering optimization with verifier-based reductions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="run one algorithm on one instance")
    ps.add_argument("--instance", required=True)
    ps.add_argument("--uncertainty", required=True)
    ps.add_argument("--algorithm", required=True)
    ps.add_argument("--verifier", default="greedy")
    ps.add_argument("--epsilon", type=float, default=0.25)
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--repeats", type=int, default=16)
    ps.add_argument("--feas-tol", type=float, default=1e-9)
    ps.add_argument("--gap-tol", type=float, default=1e-7)
    ps.add_argument("--pivot-tol", type=float, default=1e-10)
    ps.add_argument("--max-pivots", type=int, default=20000)
    ps.set_defaults(func=run_solve)

    pe = sub.add_parser("experiment", help="run a suite config into a CSV report")
    pe.add_argument("--suite", required=True)
    pe.add_argument("--out", required=True)
    pe.add_argument("--timings", action="store_true",
                    help="record wall-clock runtimes (breaks byte-determinism)")
    pe.set_defaults(func=run_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

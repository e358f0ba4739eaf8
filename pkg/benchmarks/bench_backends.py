#!/usr/bin/env python3
"""Compare the numba-jitted kernels against the pure-numpy fallback.

Runs the same workload in two subprocesses (the backend is fixed at import
time by ROBUSTKIT_BACKEND) and prints wall times, the speedup, and an
agreement check on the summed objectives.

Usage: python benchmarks/bench_backends.py [--lps 300] [--reductions 6]
"""

import argparse
import json
import os
import subprocess
import sys
import textwrap

WORKLOAD = textwrap.dedent(
    """
    import json
    import time

    import numpy as np

    from robustkit._backend import backend_name
    from robustkit.corpus import random_budget
    from robustkit.instances import lp_relaxation, random_instance
    from robustkit.lp_core import solve_lp
    from robustkit.reductions import ReductionConfig, budget_enumerate
    from robustkit.uncertainty import normalize
    from robustkit.verifiers import GreedyVerifier, greedy_verify

    n_lps = %(lps)d
    n_red = %(reductions)d

    rng = np.random.default_rng(0)
    instances = [random_instance(s, n=14, m=10, density=0.4) for s in range(n_lps)]
    # one warmup call so jit compilation stays out of the timings
    solve_lp(lp_relaxation(instances[0]))
    greedy_verify(instances[0], instances[0].nominal_cost, np.ones(14))

    t0 = time.perf_counter()
    obj = 0.0
    for inst in instances:
        obj += solve_lp(lp_relaxation(inst)).objective
    t_lp = time.perf_counter() - t0

    t0 = time.perf_counter()
    g = 0.0
    for inst in instances:
        sol = solve_lp(lp_relaxation(inst))
        g += float(inst.nominal_cost @ greedy_verify(inst, inst.nominal_cost, sol.primal))
    t_greedy = time.perf_counter() - t0

    t0 = time.perf_counter()
    red = 0.0
    for s in range(n_red):
        inst = random_instance(1000 + s, n=10, m=7, density=0.45)
        U, _ = normalize(random_budget(np.random.default_rng(s), inst.nominal_cost))
        out = budget_enumerate(inst, U, GreedyVerifier(inst), ReductionConfig(rng_seed=s))
        red += out.robust_objective
    t_red = time.perf_counter() - t0

    print(json.dumps({
        "backend": backend_name(),
        "lp_s": t_lp, "greedy_s": t_greedy, "reduction_s": t_red,
        "lp_obj": obj, "greedy_obj": g, "reduction_obj": red,
    }))
    """
)


def run(backend: str, lps: int, reductions: int) -> dict:
    env = {**os.environ, "ROBUSTKIT_BACKEND": backend}
    code = WORKLOAD % {"lps": lps, "reductions": reductions}
    proc = subprocess.run([sys.executable, "-c", code], env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--lps", type=int, default=300)
    ap.add_argument("--reductions", type=int, default=6)
    args = ap.parse_args()

    results = {b: run(b, args.lps, args.reductions) for b in ("numba", "numpy")}
    print(f"{'stage':<12} {'numba (s)':>10} {'numpy (s)':>10} {'speedup':>8}")
    for stage, key in (("simplex", "lp_s"), ("greedy", "greedy_s"),
                       ("reduction", "reduction_s")):
        a = results["numba"][key]
        b = results["numpy"][key]
        print(f"{stage:<12} {a:>10.3f} {b:>10.3f} {b / a:>7.1f}x")
    for key in ("lp_obj", "greedy_obj", "reduction_obj"):
        da = results["numba"][key]
        db = results["numpy"][key]
        if abs(da - db) > 1e-9 * max(1.0, abs(da)):
            print(f"MISMATCH in {key}: {da} vs {db}")
            return 1
    print("objectives agree across backends")
    return 0


if __name__ == "__main__":
    sys.exit(main())

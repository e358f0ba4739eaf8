"""Ground truth at desk scale: exact robust optima by enumeration, exact
mixture expectations of decompositions, and pass/fail verdicts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from robustkit.decomposition import ConvexDecomposition
from robustkit.errors import DimensionTooLarge, MismatchedInstance, NoFeasibleSolution
from robustkit.instances import SetCoverInstance
from robustkit.uncertainty import UncertaintySet, worst_case


@dataclass
class OracleResult:
    opt_r: float
    argmin: np.ndarray
    evaluated_count: int


def exact_robust_opt(instance: SetCoverInstance, U: UncertaintySet) -> OracleResult:
    """Minimum worst-case cost over all feasible selections, by enumeration.

    The worst-case objective is monotone in the selection for every
    implemented shape (all perturbation data nonnegative), so only minimal
    covers are priced; feasibility and minimality are batched over the full
    2^n - 1 grid first.  Ties break toward the lexicographically smallest
    selection.  Capped at n = 15.
    """
    n = instance.n_sets
    if n > 15:
        raise DimensionTooLarge(f"exact oracle capped at 15 sets, got {n}")
    memb = instance.membership.astype(np.float64)

    # all nonzero selections; with x_0 as the most significant bit, ascending
    # code order is ascending lexicographic order over tuples
    count = (1 << n) - 1
    codes = np.arange(1, count + 1, dtype=np.uint32)
    bits = ((codes[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1).astype(np.float64)
    cover = bits @ memb.T                      # (count, m) coverage multiplicity
    feasible = (cover >= 1.0).all(axis=1)
    if not np.any(feasible):
        raise NoFeasibleSolution("no selection covers the universe")

    if _worst_case_monotone(U):
        # minimal covers only: every chosen set uniquely covers some element
        critical = (cover == 1.0).astype(np.float64) @ memb   # (count, n)
        chosen_redundant = (bits > 0) & (critical == 0)
        candidates = feasible & ~chosen_redundant.any(axis=1)
    else:
        candidates = feasible

    best_val = np.inf
    best_x = None
    evaluated = 0
    for idx in np.nonzero(candidates)[0]:
        x = bits[idx]
        evaluated += 1
        val = float(instance.nominal_cost @ x) + worst_case(U, x).value
        if val < best_val - 1e-12:
            best_val = val
            best_x = x
    return OracleResult(best_val, best_x.copy(), evaluated)


def _worst_case_monotone(U: UncertaintySet) -> bool:
    """Minimal-cover pruning is sound iff the worst-case value never drops
    when a coordinate grows.  That holds for every shape except the free-sign
    affine ellipsoid with mixed-sign rotated generators D C^T."""
    from robustkit.uncertainty import EllipsoidAffine

    if isinstance(U, EllipsoidAffine) and not U.sign_constrained:
        return bool(np.min(U.D @ U.C.T, initial=0.0) >= -1e-15)
    return True


def mixture_expectation(
    decomposition: ConvexDecomposition,
    U: UncertaintySet,
    probes: list | None = None,
    rng: np.random.Generator | None = None,
    n_random: int = 20,
) -> dict:
    """Exact expectation sum_x mu_x (c @ x) for each probe scenario c.

    Default probes: the nominal vector plus ``n_random`` boundary scenarios
    obtained as worst-case witnesses of random nonnegative directions.
    Returns {probe_name: expectation}; extra probes may be passed as a list
    of (name, c) pairs.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    mean = decomposition.mean()
    probe_list = list(probes) if probes else []
    if not probes:
        probe_list.append(("c0", np.asarray(U.c0, dtype=float)))
        for i in range(n_random):
            direction = rng.random(U.n)
            witness = worst_case(U, direction).witness_c
            probe_list.append((f"boundary_{i:03d}", witness))
    return {name: float(np.asarray(c) @ mean) for name, c in probe_list}


@dataclass
class GuaranteeVerdict:
    passed: bool
    ratio: float
    opt_r: float
    claimed_factor: float


def verdict(solution, oracle_result: OracleResult) -> GuaranteeVerdict:
    """Compare an algorithm's exact robust objective to the enumerated
    optimum: pass iff objective / opt_r <= claimed factor + 1e-9."""
    if np.asarray(solution.x_hat).size != oracle_result.argmin.size:
        raise MismatchedInstance("solution and oracle differ in dimension")
    ratio = solution.robust_objective / oracle_result.opt_r
    return GuaranteeVerdict(
        passed=bool(ratio <= solution.claimed_factor + 1e-9),
        ratio=float(ratio),
        opt_r=float(oracle_result.opt_r),
        claimed_factor=float(solution.claimed_factor),
    )

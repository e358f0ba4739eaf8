import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_lp
from robustkit.errors import DimensionTooLarge, MaxIterationsError
from robustkit.lp_core import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    LpProblem,
    SolverTolerances,
    solve_lp,
    solve_lp_bruteforce,
)


def test_single_variable_forcing():
    p = LpProblem("min", [1.0], [[1.0]], [">="], [1.0])
    s = solve_lp(p)
    assert s.status == OPTIMAL
    assert s.objective == pytest.approx(1.0, abs=1e-12)
    assert s.primal == pytest.approx([1.0], abs=1e-12)
    assert s.dual == pytest.approx([1.0], abs=1e-12)


def test_separable():
    p = LpProblem("min", [1, 1], np.eye(2), [">=", ">="], [1, 1])
    assert solve_lp(p).objective == pytest.approx(2.0, abs=1e-12)


def test_tiny1_cover_lp():
    # vertex enumeration over the 3-variable polytope puts the optimum at
    # the single full set
    p = LpProblem("min", [1, 1, 1.5], [[1, 0, 1], [0, 1, 1]], [">=", ">="],
                  [1, 1], np.zeros(3), np.ones(3))
    s = solve_lp(p)
    assert s.objective == pytest.approx(1.5, abs=1e-12)
    assert s.primal == pytest.approx([0, 0, 1], abs=1e-12)
    bf = solve_lp_bruteforce(p)
    assert bf.objective == pytest.approx(s.objective, abs=1e-8)


def test_bruteforce_upper_bound_and_infeasible():
    p = LpProblem("min", [-1.0], [[1.0]], ["<="], [1.0])
    assert solve_lp_bruteforce(p).objective == pytest.approx(-1.0)
    p = LpProblem("min", [1.0], [[1.0], [1.0]], [">=", "<="], [1.0, 0.0])
    assert solve_lp_bruteforce(p).status == INFEASIBLE
    assert solve_lp(p).status == INFEASIBLE


def test_unbounded_detected_by_both():
    p = LpProblem("min", [-1.0], [[1.0]], [">="], [1.0])
    assert solve_lp(p).status == UNBOUNDED
    assert solve_lp_bruteforce(p).status == UNBOUNDED


def test_bruteforce_dimension_cap():
    n = 9
    p = LpProblem("min", np.ones(n), np.ones((1, n)), [">="], [1.0])
    with pytest.raises(DimensionTooLarge):
        solve_lp_bruteforce(p)


def test_invalid_problem_rejected():
    with pytest.raises(Exception):
        LpProblem("min", [1.0], [[1.0, 2.0]], [">="], [1.0])
    with pytest.raises(ValueError):
        LpProblem("min", [1.0], [[np.nan]], [">="], [1.0])
    with pytest.raises(ValueError):
        LpProblem("min", [1.0], [[1.0]], [">="], [1.0],
                  [2.0], [1.0])  # lb > ub


def test_max_sense():
    p = LpProblem("max", [1.0, 2.0], [[1, 1]], ["<="], [1.0])
    s = solve_lp(p)
    assert s.objective == pytest.approx(2.0, abs=1e-12)
    assert s.primal == pytest.approx([0, 1], abs=1e-12)


def test_pivot_cap_raises():
    rng = np.random.default_rng(0)
    A = rng.uniform(0, 1, (6, 8))
    p = LpProblem("min", rng.uniform(0.1, 1, 8), A, [">="] * 6, np.ones(6),
                  np.zeros(8), np.ones(8))
    with pytest.raises(MaxIterationsError):
        solve_lp(p, SolverTolerances(max_pivots=1))


def test_agreement_and_duality_on_random_lps():
    rng = np.random.default_rng(1234)
    optimal_seen = 0
    for _ in range(120):
        p = random_lp(rng)
        s = solve_lp(p)
        bf = solve_lp_bruteforce(p)
        assert s.status == bf.status
        if s.status == OPTIMAL:
            optimal_seen += 1
            assert s.objective == pytest.approx(bf.objective, abs=1e-8)
            assert s.primal_residual <= 1e-7
            # weak-duality sandwich with bound multipliers folded in
            assert abs(s.duality_gap) <= 1e-6
    assert optimal_seen > 30


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**9))
def test_weak_duality_sandwich_property(seed):
    # every Optimal result keeps cost @ x - rhs @ y (plus bound terms)
    # within gap_tol, and the primal inside feasibility tolerance
    p = random_lp(np.random.default_rng(seed))
    s = solve_lp(p)
    if s.status != OPTIMAL:
        return
    assert s.primal_residual <= 1e-7
    assert abs(s.duality_gap) <= 1e-6
    sgn = 1.0 if p.objective_sense == "min" else -1.0
    # plain weak duality: primal objective dominates the row-dual value once
    # finite upper-bound contributions are discounted
    d = sgn * p.cost - p.constraint_matrix.T @ (sgn * s.dual)
    bound_gain = sum(
        d[j] * p.variable_upper_bounds[j]
        for j in range(p.n_vars)
        if d[j] < 0 and np.isfinite(p.variable_upper_bounds[j])
    )
    assert sgn * s.objective - (p.rhs @ (sgn * s.dual) + bound_gain) >= -1e-6


def test_against_scipy_highs_when_available():
    # beyond the 8-variable enumeration cap, cross-check a second solver
    scipy_opt = pytest.importorskip("scipy.optimize")
    rng = np.random.default_rng(99)
    status_map = {0: OPTIMAL, 2: INFEASIBLE, 3: UNBOUNDED}
    for _ in range(60):
        n = int(rng.integers(5, 26))
        m = int(rng.integers(3, 21))
        A = np.round(rng.uniform(-2, 3, (m, n)), 4)
        senses = [str(rng.choice(["<=", ">=", "="], p=[0.4, 0.4, 0.2]))
                  for _ in range(m)]
        b = np.round(rng.uniform(-1, 5, m), 4)
        c = np.round(rng.uniform(-2, 3, n), 4)
        ub = np.where(rng.random(n) < 0.5, rng.uniform(0.5, 4, n), np.inf)
        p = LpProblem("min", c, A, senses, b, np.zeros(n), ub)
        s = solve_lp(p)
        A_ub, b_ub, A_eq, b_eq = [], [], [], []
        for i, sen in enumerate(senses):
            if sen == "<=":
                A_ub.append(A[i]); b_ub.append(b[i])
            elif sen == ">=":
                A_ub.append(-A[i]); b_ub.append(-b[i])
            else:
                A_eq.append(A[i]); b_eq.append(b[i])
        r = scipy_opt.linprog(
            c,
            A_ub=np.array(A_ub) if A_ub else None,
            b_ub=np.array(b_ub) if b_ub else None,
            A_eq=np.array(A_eq) if A_eq else None,
            b_eq=np.array(b_eq) if b_eq else None,
            bounds=[(0, u if np.isfinite(u) else None) for u in ub],
            method="highs",
        )
        assert s.status == status_map.get(r.status, "?")
        if s.status == OPTIMAL:
            assert s.objective == pytest.approx(r.fun, rel=1e-7, abs=1e-7)


def test_dual_signs_match_row_senses():
    rng = np.random.default_rng(42)
    for _ in range(40):
        p = random_lp(rng)
        s = solve_lp(p)
        if s.status != OPTIMAL:
            continue
        for i, sense in enumerate(p.constraint_senses):
            if sense == ">=":
                assert s.dual[i] >= -1e-9
            elif sense == "<=":
                assert s.dual[i] <= 1e-9


def test_cost_scaling_invariance():
    rng = np.random.default_rng(7)
    for _ in range(20):
        p = random_lp(rng)
        s = solve_lp(p)
        if s.status != OPTIMAL:
            continue
        lam = 3.5
        scaled = LpProblem(p.objective_sense, lam * p.cost, p.constraint_matrix,
                           p.constraint_senses, p.rhs,
                           p.variable_lower_bounds, p.variable_upper_bounds)
        s2 = solve_lp(scaled)
        assert s2.objective == pytest.approx(lam * s.objective, rel=1e-9, abs=1e-9)
        assert s2.primal == pytest.approx(s.primal, abs=1e-9)

import math

import numpy as np
import pytest

from robustkit.errors import InfeasibleInput
from robustkit.instances import SetCoverInstance, is_feasible, lp_relaxation, random_instance
from robustkit.lp_core import solve_lp
from robustkit.verifiers import (
    GreedyVerifier,
    RoundingVerifier,
    VerifierSpec,
    amplify,
    amplify_trials,
    ancrr_round,
    greedy_verify,
    harmonic,
    make_verifier,
    rounding_alpha,
)


def test_spec_validation():
    with pytest.raises(ValueError):
        VerifierSpec(0.5, "Deterministic")
    assert harmonic(2) == pytest.approx(1.5)
    assert rounding_alpha(2) == pytest.approx(6 * math.log(2) + 1)


def test_greedy_tiny1(tiny1):
    # ratios 1, 1, 0.75: the full set wins immediately
    x = greedy_verify(tiny1, tiny1.nominal_cost, [0, 0, 1])
    assert x == pytest.approx([0, 0, 1])
    assert tiny1.nominal_cost @ x == pytest.approx(1.5)


def test_greedy_tiny2_forced(tiny2):
    x = greedy_verify(tiny2, [1.0, 1.0], [1.0, 1.0])
    assert x == pytest.approx([1, 1])


def test_greedy_zero_cost_priority():
    inst = SetCoverInstance(2, ((0,), (0, 1)), [1.0, 0.0])
    x = greedy_verify(inst, inst.nominal_cost, [1.0, 1.0])
    assert x == pytest.approx([0, 1])


def test_greedy_rejects_infeasible_point(tiny1):
    with pytest.raises(InfeasibleInput):
        greedy_verify(tiny1, tiny1.nominal_cost, [1, 0, 0])


def test_greedy_harmonic_bound_random():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        inst = random_instance(int(rng.integers(1 << 30)),
                               n=int(rng.integers(3, 21)),
                               m=int(rng.integers(2, 13)),
                               density=float(rng.uniform(0.25, 0.7)))
        cost = rng.uniform(0.0, 2.0, inst.n_sets)
        lp = solve_lp(lp_relaxation(inst, cost))
        x = greedy_verify(inst, cost, lp.primal)
        assert is_feasible(inst, x)
        assert cost @ x <= harmonic(inst.universe_size) * lp.objective + 1e-9


def _uniform_fractional(inst):
    """Feasible uniform point 1/min-cover, kept below the clipping level."""
    cover = inst.membership.sum(axis=1)
    return np.full(inst.n_sets, 1.0 / cover.min())


def test_ancrr_clipping_boundary():
    # five copies of the full set keep weight 1/(6 ln m) feasible; the value
    # is nudged so that 6 x ln m reaches 1.0 exactly in floats
    inst = SetCoverInstance(2, (((0, 1),) * 5), np.ones(5))
    L = 6 * math.log(2)
    x = 1.0 / L
    while x * L < 1.0:
        x = np.nextafter(x, np.inf)
    rng = np.random.default_rng(0)
    for _ in range(50):
        _, pre = ancrr_round(inst, np.full(5, x), rng)
        assert pre == pytest.approx(np.ones(5))


def test_ancrr_all_ones(tiny1):
    rng = np.random.default_rng(1)
    final, pre = ancrr_round(tiny1, [1.0, 1.0, 1.0], rng)
    assert pre == pytest.approx([1, 1, 1])
    assert final == pytest.approx([1, 1, 1])


def test_ancrr_tiny2_degenerate_mean(tiny2):
    rng = np.random.default_rng(2)
    total = 0.0
    for _ in range(10_000):
        final, _ = ancrr_round(tiny2, [1.0, 1.0], rng)
        total += float(tiny2.nominal_cost @ final)
    assert total / 10_000 == pytest.approx(2.0, abs=0)


def test_ancrr_negative_correlation_empirical():
    inst = random_instance(77, n=30, m=10, density=0.7)
    x = _uniform_fractional(inst)
    p = np.minimum(6 * x * math.log(10), 1.0)
    assert 0 < p[0] < 1  # pairs below the clipping level exist
    rng = np.random.default_rng(5)
    draws = 100_000
    pre = rng.random((draws, inst.n_sets)) < p  # the rounding's own law
    pairs_rng = np.random.default_rng(6)
    for _ in range(50):
        i, j = pairs_rng.choice(inst.n_sets, size=2, replace=False)
        joint = float(np.mean(pre[:, i] & pre[:, j]))
        prod = p[i] * p[j]
        stderr = math.sqrt(prod * (1 - prod) / draws)
        assert abs(joint - prod) <= 4 * stderr + 1e-12


def test_ancrr_expectation_bound():
    inst = random_instance(78, n=30, m=10, density=0.7)
    x = _uniform_fractional(inst)
    c = inst.nominal_cost
    rng = np.random.default_rng(7)
    draws = 100_000
    vals = np.empty(draws)
    for t in range(draws // 1000):
        # batch the pre-alteration law directly for speed
        pre = rng.random((1000, inst.n_sets)) < np.minimum(6 * x * math.log(10), 1.0)
        vals[t * 1000:(t + 1) * 1000] = pre @ c
    bound = 6 * math.log(10) * float(c @ x)
    stderr = vals.std(ddof=1) / math.sqrt(draws)
    assert vals.mean() <= bound + 3 * stderr


def test_ancrr_alteration_overhead():
    inst = random_instance(79, n=30, m=10, density=0.7)
    x = _uniform_fractional(inst)
    c = inst.nominal_cost
    rng = np.random.default_rng(8)
    draws = 100_000
    extras = np.empty(draws)
    for t in range(draws):
        final, pre = ancrr_round(inst, x, rng)
        extras[t] = c @ (final - pre)
    cheap_total = float(c[inst.cheapest_cover_per_element].sum())
    stderr = extras.std(ddof=1) / math.sqrt(draws) if extras.std() > 0 else 0.0
    assert extras.mean() <= 10.0 ** -4 * cheap_total + 3 * stderr + 1e-12


def test_ancrr_final_always_feasible():
    inst = random_instance(80, n=12, m=8, density=0.3)
    lp = solve_lp(lp_relaxation(inst))
    rng = np.random.default_rng(9)
    for _ in range(200):
        final, _ = ancrr_round(inst, lp.primal, rng)
        assert is_feasible(inst, final)


def test_amplify_deterministic_passthrough(tiny1):
    ver = GreedyVerifier(tiny1)

    def det_round(instance, x_frac, rng):
        return ver.round(instance.nominal_cost, x_frac)

    rng = np.random.default_rng(0)
    out = amplify(det_round, tiny1, tiny1.nominal_cost, [0, 0, 1], 0.1, 5, rng)
    assert out == pytest.approx([0, 0, 1])
    one = amplify(ancrr_round, tiny1, tiny1.nominal_cost, [0, 0, 1], 0.1, 1,
                  np.random.default_rng(3))
    assert is_feasible(tiny1, one)


def test_amplify_tiny1_monte_carlo(tiny1):
    assert amplify_trials(0.1) == math.ceil(math.log(100) / math.log(1.1))
    bound = 1.1 * rounding_alpha(2) * 1.5
    hits = 0
    for seed in range(100):
        out = amplify(ancrr_round, tiny1, tiny1.nominal_cost, [0, 0, 1],
                      0.1, 200, np.random.default_rng(seed))
        cost = float(tiny1.nominal_cost @ out)
        assert cost <= bound
        hits += cost == pytest.approx(1.5)
    assert hits >= 99


def test_make_verifier(tiny2):
    assert isinstance(make_verifier("greedy", tiny2), GreedyVerifier)
    assert isinstance(make_verifier("ancrr", tiny2), RoundingVerifier)
    with pytest.raises(ValueError):
        make_verifier("magic", tiny2)

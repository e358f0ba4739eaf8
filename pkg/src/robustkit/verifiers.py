"""Integrality-gap verifiers for the covering problem.

Two flavors: the deterministic ratio-greedy verifier (factor H_m), and an
independent randomized rounding whose pre-alteration coordinates are
mutually independent, patched to feasibility by adding the cheapest cover
of every missed element.  ``amplify`` converts an expectation guarantee
into a best-of-many high-probability one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from robustkit import _kernels
from robustkit.errors import InfeasibleInput, LengthMismatch
from robustkit.instances import SetCoverInstance

DETERMINISTIC = "Deterministic"
ANCRR = "Ancrr"


@dataclass(frozen=True)
class VerifierSpec:
    alpha: float
    kind: str
    objective_class: str = "AllNonnegative"

    def __post_init__(self):
        if self.alpha < 1.0:
            raise ValueError("guarantee factor must be >= 1")


def harmonic(m: int) -> float:
    """H_m = sum_{i=1..m} 1/i."""
    return float(sum(1.0 / i for i in range(1, m + 1)))


def rounding_alpha(m: int) -> float:
    """Expectation factor reported by the randomized verifier: the rounding
    term 6 ln m plus one unit of alteration slack."""
    return 6.0 * math.log(m) + 1.0


def check_fractional(instance: SetCoverInstance, x_frac, feas_tol: float = 1e-7):
    x = np.asarray(x_frac, dtype=float)
    if x.size != instance.n_sets:
        raise LengthMismatch("fractional point has wrong length")
    cover = instance.membership @ x
    worst = float(np.max(1.0 - cover, initial=0.0))
    if worst > feas_tol:
        raise InfeasibleInput(f"covering row violated by {worst:.3e}")
    if np.min(x) < -feas_tol or np.max(x) > 1.0 + feas_tol:
        raise InfeasibleInput("fractional point outside [0, 1]")
    return x


def greedy_verify(
    instance: SetCoverInstance, cost, x_frac, feas_tol: float = 1e-7
) -> np.ndarray:
    """Ratio-greedy cover under ``cost``.

    Returns a 0/1 selection with cost <= H_m times the covering-LP optimum
    under the same cost, hence <= H_m * cost @ x_frac for any fractional
    cover x_frac.  The output never looks at x_frac beyond the feasibility
    precondition, only at the cost vector.
    """
    check_fractional(instance, x_frac, feas_tol)
    c = np.asarray(cost, dtype=float)
    if c.size != instance.n_sets:
        raise LengthMismatch("cost length mismatch")
    if np.any(c < 0):
        raise ValueError("greedy verifier needs nonnegative costs")
    return _kernels.greedy_cover(instance.membership, c)


def ancrr_round(
    instance: SetCoverInstance,
    x_frac,
    rng: np.random.Generator,
    feas_tol: float = 1e-7,
):
    """One independent randomized rounding of a fractional cover.

    Each set enters the pre-alteration vector independently with probability
    min(6 * x_j * ln m, 1); uncovered elements are then patched with their
    cheapest covering set under the nominal cost.  Returns
    (final_selection, pre_alteration); negative-correlation checks apply to
    the pre-alteration vector, whose coordinates are literally independent.
    """
    x = check_fractional(instance, x_frac, feas_tol)
    m = instance.universe_size
    if m < 2:
        raise ValueError("randomized rounding needs a universe of size >= 2")
    p = np.minimum(6.0 * x * math.log(m), 1.0)
    p = np.clip(p, 0.0, 1.0)
    pre = (rng.random(instance.n_sets) < p).astype(float)
    final = pre.copy()
    covered = instance.membership @ final >= 1
    for e in np.nonzero(~covered)[0]:
        final[instance.cheapest_cover_per_element[e]] = 1.0
    return final, pre


def amplify_trials(epsilon: float) -> int:
    """Repetitions required for >= 0.99 success of the Markov best-of bound."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return math.ceil(math.log(100.0) / math.log(1.0 / (1.0 - epsilon / (1.0 + epsilon))))


def amplify(
    round_fn,
    instance: SetCoverInstance,
    cost,
    x_frac,
    epsilon: float,
    trials: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Cheapest of ``trials`` independent roundings under ``cost``.

    With trials >= amplify_trials(epsilon), the result costs at most
    (1 + epsilon) * alpha * cost @ x_frac with probability >= 0.99 whenever
    round_fn has expectation factor alpha.  Trials draw from disjoint child
    streams of ``rng`` so parallel evaluation stays reproducible.
    """
    c = np.asarray(cost, dtype=float)
    best = None
    best_cost = np.inf
    for child in rng.spawn(max(1, int(trials))):
        cand = round_fn(instance, x_frac, child)
        if isinstance(cand, tuple):
            cand = cand[0]
        val = float(c @ cand)
        if val < best_cost:
            best, best_cost = cand, val
    return best


class GreedyVerifier:
    """Deterministic H_m verifier; ignores the fractional point."""

    kind = DETERMINISTIC

    def __init__(self, instance: SetCoverInstance):
        self.instance = instance
        self.spec = VerifierSpec(harmonic(instance.universe_size), DETERMINISTIC)

    @property
    def alpha(self) -> float:
        return self.spec.alpha

    def round(self, cost, x_frac, rng=None) -> np.ndarray:
        return greedy_verify(self.instance, cost, x_frac)


class RoundingVerifier:
    """Randomized independent-rounding verifier with expectation factor
    6 ln m + 1; oblivious (the rounding itself never reads the cost)."""

    kind = ANCRR

    def __init__(self, instance: SetCoverInstance):
        self.instance = instance
        self.spec = VerifierSpec(rounding_alpha(instance.universe_size), ANCRR)

    @property
    def alpha(self) -> float:
        return self.spec.alpha

    def round(self, cost, x_frac, rng) -> np.ndarray:
        final, _ = ancrr_round(self.instance, x_frac, rng)
        return final

    def round_amplified(self, cost, x_frac, epsilon, trials, rng) -> np.ndarray:
        return amplify(ancrr_round, self.instance, cost, x_frac, epsilon, trials, rng)


def make_verifier(name: str, instance: SetCoverInstance):
    if name == "greedy":
        return GreedyVerifier(instance)
    if name == "ancrr":
        return RoundingVerifier(instance)
    raise ValueError(f"unknown verifier {name!r}")

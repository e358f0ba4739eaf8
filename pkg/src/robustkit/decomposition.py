"""Dominated convex decompositions of fractional covers.

Column generation over verifier-produced integral solutions: the master
minimizes the domination slack s in  sum_x mu_x x <= alpha x* + s,
sum mu = 1; its coordinate duals (clipped at zero) are handed to the
verifier as the next cost vector.  When the verifier really achieves
factor alpha the optimal slack is nonpositive and the loop stops with a
distribution whose mean is dominated by alpha x*."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from robustkit.errors import StalledDecomposition
from robustkit.instances import SetCoverInstance, is_feasible
from robustkit.lp_core import EQ, LE, MIN, LpProblem, SolverTolerances, solve_lp
from robustkit.verifiers import ANCRR

SLACK_TOL = 1e-7
REDUCED_COST_TOL = 1e-9
AMPLIFY_EPS = 0.05
AMPLIFY_TRIALS = 64


@dataclass
class ConvexDecomposition:
    """Atoms with convex weights whose mean is coordinatewise below
    alpha_used * x_star + slack."""

    atoms: list
    weights: np.ndarray
    alpha_used: float
    slack: float

    def mean(self) -> np.ndarray:
        return np.sum([w * a for w, a in zip(self.weights, self.atoms)], axis=0)

    def to_json_dict(self) -> dict:
        return {
            "alpha": float(self.alpha_used),
            "atoms": [[int(v) for v in a] for a in self.atoms],
            "weights": [float(w) for w in self.weights],
            "slack": float(self.slack),
        }


def decompose(
    instance: SetCoverInstance,
    verifier,
    alpha: float,
    x_star,
    rng: np.random.Generator | None = None,
    tolerances: SolverTolerances | None = None,
) -> ConvexDecomposition:
    """Express alpha * x_star as dominating a convex combination of feasible
    integral solutions, using only verifier calls.

    Randomized verifiers are wrapped in best-of-64 amplification so each
    column satisfies its cost bound, not just in expectation.  Raises
    :class:`StalledDecomposition` when the slack cannot be driven below
    SLACK_TOL, which certifies that the verifier's factor exceeds alpha.
    """
    x_star = np.asarray(x_star, dtype=float)
    n = instance.n_sets
    if rng is None:
        rng = np.random.default_rng(0)

    def column(cost) -> np.ndarray:
        if getattr(verifier, "kind", None) == ANCRR:
            return verifier.round_amplified(
                cost, x_star, AMPLIFY_EPS, AMPLIFY_TRIALS, rng.spawn(1)[0]
            )
        return verifier.round(cost, x_star)

    atoms = [column(np.ones(n))]
    cap = 50 * n
    while True:
        k = len(atoms)
        # master over (mu_1..mu_k, s)
        rows = np.zeros((n + 1, k + 1))
        for p, atom in enumerate(atoms):
            rows[:n, p] = atom
        rows[:n, k] = -1.0
        rows[n, :k] = 1.0
        senses = [LE] * n + [EQ]
        rhs = np.concatenate([alpha * x_star, [1.0]])
        prob = LpProblem(
            MIN,
            np.concatenate([np.zeros(k), [1.0]]),
            rows,
            senses,
            rhs,
            np.zeros(k + 1),
        )
        sol = solve_lp(prob, tolerances)
        s_val = float(sol.objective)
        mu = sol.primal[:k]
        if s_val <= SLACK_TOL:
            break
        if k >= cap:
            raise StalledDecomposition(
                f"slack {s_val:.3e} after {k} columns; verifier factor exceeds alpha={alpha}"
            )
        w = np.clip(-sol.dual[:n], 0.0, None)  # duals of <= rows are nonpositive
        v = float(sol.dual[n])
        new_atom = column(w)
        reduced = float(w @ new_atom) - v
        if reduced >= -REDUCED_COST_TOL:
            raise StalledDecomposition(
                f"no improving column at slack {s_val:.3e}; verifier factor exceeds alpha={alpha}"
            )
        atoms.append(new_atom)

    keep = mu > 1e-12
    atoms = [a for a, kf in zip(atoms, keep) if kf]
    weights = mu[keep]
    weights = weights / weights.sum()
    mean = np.sum([wt * a for wt, a in zip(weights, atoms)], axis=0)
    slack = float(np.max(mean - alpha * x_star, initial=0.0))
    for atom in atoms:
        if not is_feasible(instance, atom):
            raise StalledDecomposition("verifier produced an infeasible atom")
    return ConvexDecomposition(atoms, weights, float(alpha), slack)


def sample(decomposition: ConvexDecomposition, rng: np.random.Generator) -> np.ndarray:
    """Draw one atom with its convex weight as probability."""
    idx = rng.choice(len(decomposition.atoms), p=decomposition.weights)
    return np.asarray(decomposition.atoms[idx], dtype=float).copy()

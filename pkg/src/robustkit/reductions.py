"""The six robust approximation algorithms.

Each consumes a nominal-problem verifier plus an uncertainty set and emits
a :class:`RobustSolution` carrying the claimed guarantee factor; the
reported robust objective is always recomputed through the exact
worst-case oracle, never trusted from internal bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from robustkit.decomposition import decompose, sample
from robustkit.errors import (
    GridCapExceeded,
    PreconditionViolated,
    SchemaError,
    VariantMismatch,
)
from robustkit.instances import SetCoverInstance, lp_relaxation
from robustkit.lp_core import INFEASIBLE, LpProblem, solve_lp
from robustkit.relaxation import DUAL_REFORMULATION, solve_robust_relaxation
from robustkit.uncertainty import (
    EllipsoidAffine,
    EllipsoidDirect,
    PolyhedralAffine,
    PolyhedralDirect,
    fold_box_into_rows,
    normalize,
    width_params,
    worst_case,
)
from robustkit.verifiers import ANCRR, RoundingVerifier, amplify_trials

EXPECTATION = "Expectation"
WITH_HIGH_PROBABILITY = "WithHighProbability"
DETERMINISTIC = "Deterministic"


@dataclass
class RobustSolution:
    x_hat: np.ndarray
    guarantee_kind: str
    claimed_factor: float
    robust_objective: float
    trace: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "x": [int(v) for v in self.x_hat],
            "kind": self.guarantee_kind,
            "claimed_factor": float(self.claimed_factor),
            "robust_objective": float(self.robust_objective),
            "trace": self.trace,
        }


@dataclass(frozen=True)
class ReductionConfig:
    epsilon: float = 0.25
    whp_repeats: int = 16
    rng_seed: int = 0
    max_guesses: int = 1_000_000

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.whp_repeats < 1 or self.max_guesses < 1:
            raise ValueError("caps must be >= 1")


def _finish(U, x_hat, kind, factor, trace) -> RobustSolution:
    x_hat = np.asarray(x_hat, dtype=float)
    wc = worst_case(U, x_hat)
    objective = float(U.c0 @ x_hat) + wc.value
    return RobustSolution(x_hat, kind, float(factor), objective, trace)


def _verifier_call(verifier, cost, x_frac, rng):
    """One integral column from the verifier; randomized verifiers are
    amplified so each call carries a per-call cost bound."""
    if getattr(verifier, "kind", None) == ANCRR:
        return verifier.round_amplified(cost, x_frac, 0.05, 64, rng)
    return verifier.round(cost, x_frac)


def robust_in_expectation(
    instance: SetCoverInstance, U, verifier, config: ReductionConfig = ReductionConfig()
) -> RobustSolution:
    """Relax, decompose at the verifier's factor, sample one atom.

    The sampled distribution satisfies E[c @ x_hat] <= alpha * OPT_R for
    every scenario c in the set, by domination plus the relaxation bound.
    """
    U, _ = normalize(U)
    rng = np.random.default_rng(config.rng_seed)
    relax = solve_robust_relaxation(instance, U)
    dec = decompose(instance, verifier, verifier.alpha, relax.x_star, rng=rng.spawn(1)[0])
    x_hat = sample(dec, rng)
    trace = {
        "z_R": relax.z_R,
        "decomposition": dec.to_json_dict(),
        "scenarios": len(relax.active_scenarios),
    }
    return _finish(U, x_hat, EXPECTATION, verifier.alpha, trace)


def _budget_widths(U: PolyhedralDirect):
    """Per-coordinate width max(column max of A, 1/d_j) over active
    coordinates; matches the enumeration analysis, which keeps the box
    u <= d separate from the rows."""
    active = U.d > 0
    colmax = U.A.max(axis=0) if U.A.shape[0] else np.zeros(U.n)
    inv_d = np.where(np.isfinite(U.d) & active, 1.0 / np.where(U.d > 0, U.d, 1.0), 0.0)
    beta_j = np.maximum(colmax, inv_d)
    return active, beta_j


def enumeration_bound_l(U: PolyhedralDirect, epsilon: float) -> float:
    """The instance-size quantity controlling the guess-grid length: n times
    the larger of the nominal-cost spread and ((m+n)/eps) times the larger of
    the row-coefficient spread and the box spread (rows taken after scaling
    to unit right-hand sides)."""
    Un, _ = normalize(U)
    n = Un.n
    m = max(Un.A.shape[0], 1)
    c0 = Un.c0
    active, _ = _budget_widths(Un)
    ratio_c = float(np.max(c0) / np.min(c0)) if np.min(c0) > 0 else np.inf
    colmax = Un.A.max(axis=0) if Un.A.shape[0] else np.zeros(Un.n)
    spread_a = spread_d = 1.0
    pos = colmax[active & (colmax > 0)]
    if pos.size:
        spread_a = float(pos.max() / pos.min())
    d_act = Un.d[active & np.isfinite(Un.d)]
    if d_act.size and d_act.min() > 0:
        spread_d = float(d_act.max() / d_act.min())
    return float(n * max(ratio_c, (m + n) / epsilon * max(spread_a, spread_d)))


def budget_enumerate(
    instance: SetCoverInstance,
    U: PolyhedralDirect,
    verifier,
    config: ReductionConfig = ReductionConfig(),
) -> RobustSolution:
    """Deterministic guarantee for box-and-few-rows polyhedral sets by
    guessing the inner dual vector over geometric grids.

    Pipeline: clip tiny nominal costs up to eps/(gamma n); guess the robust
    optimum over a (1+eps)-geometric grid; for each guess, grid each dual
    coordinate over [eps z / m, (1+eps) z]; price the guess into the modified
    cost c(theta)_j = c_j + d_j max(1 - a_j @ theta, 0), run the verifier on
    the priced LP optimum, and keep the best score.  Factor alpha (1 + 5 eps).
    """
    if not isinstance(U, PolyhedralDirect):
        raise VariantMismatch("budget enumeration needs a direct polyhedral set")
    U, _ = normalize(U)
    m_a = U.A.shape[0]
    if m_a > 3:
        raise PreconditionViolated(
            f"enumeration grid is exponential in the row count; got {m_a} > 3 rows"
        )
    eps = config.epsilon
    alpha = verifier.alpha
    n = U.n
    rng = np.random.default_rng(config.rng_seed)
    active, beta_j = _budget_widths(U)
    factor = alpha * (1.0 + 5.0 * eps)

    if not np.any(active):
        # zero width: every priced cost collapses to the nominal one
        sol = solve_lp(lp_relaxation(instance, U.c0))
        x_hat = _verifier_call(verifier, U.c0, sol.primal, rng)
        trace = {"guesses": 1, "theta": [0.0] * m_a, "zero_width": True}
        return _finish(U, x_hat, DETERMINISTIC, factor, trace)

    beta = float(beta_j[active].min())
    gamma = float(beta_j[active].max())
    floor = eps / (gamma * n)
    c_clip = np.maximum(U.c0, floor)

    z_lo = max(float(np.min(U.c0)), floor)
    z_hi = float(n * max(np.max(U.c0), floor) + (m_a + n) / beta)
    ratio = math.log1p(eps)
    L = math.log(z_hi / z_lo) / ratio if z_hi > z_lo else 0.0
    L_prime = math.log((1.0 + eps) * m_a / eps) / ratio
    n_z = int(math.ceil(L)) + 1
    n_theta = int(math.ceil(L_prime)) + 1
    guesses = n_z * n_theta ** m_a
    if guesses > config.max_guesses:
        raise GridCapExceeded(f"{guesses} guesses exceed cap {config.max_guesses}")

    # valid tightening: the rows already imply u_j <= 1 / colmax_j, so the
    # priced costs stay finite even for d_j = +inf
    colmax = U.A.max(axis=0) if m_a else np.zeros(n)
    with np.errstate(divide="ignore"):
        implied = np.where(colmax > 0, 1.0 / np.where(colmax > 0, colmax, 1.0), np.inf)
    d_eff = np.minimum(U.d, implied)
    d_eff = np.where(active, d_eff, 0.0)
    if not np.all(np.isfinite(d_eff)):
        raise PreconditionViolated("active coordinate with no finite implied bound")

    best = None
    levels = [(1.0 + eps) ** t for t in range(n_theta)]
    base_lp_cache = lp_relaxation(instance, U.c0)
    for t in range(n_z):
        z_tilde = z_lo * (1.0 + eps) ** t
        theta_floor = eps * z_tilde / m_a
        grids = [[theta_floor * lv for lv in levels]] * m_a
        for combo in _product_indices(n_theta, m_a):
            theta = np.array([grids[i][combo[i]] for i in range(m_a)])
            slack_term = np.clip(1.0 - U.A.T @ theta, 0.0, None) if m_a else np.ones(n)
            priced = c_clip + d_eff * slack_term
            prob = LpProblem(
                "min", priced, base_lp_cache.constraint_matrix,
                base_lp_cache.constraint_senses, base_lp_cache.rhs,
                base_lp_cache.variable_lower_bounds,
                base_lp_cache.variable_upper_bounds,
            )
            sol = solve_lp(prob)
            x_hat = _verifier_call(verifier, priced, sol.primal, rng.spawn(1)[0])
            score = float(priced @ x_hat) + float(U.b @ theta)
            if best is None or score < best[0] - 1e-15:
                best = (score, x_hat, theta, z_tilde)

    score, x_hat, theta, z_tilde = best
    trace = {
        "guesses": guesses,
        "z_grid": n_z,
        "theta_grid": n_theta,
        "L": L,
        "L_prime": L_prime,
        "theta": [float(v) for v in theta],
        "z_tilde": z_tilde,
        "score": score,
    }
    result = _finish(U, x_hat, DETERMINISTIC, factor, trace)
    # weak duality: the winning score upper-bounds the exact robust objective
    assert result.robust_objective <= score + 1e-9, (result.robust_objective, score)
    return result


def _product_indices(levels: int, dims: int):
    if dims == 0:
        yield ()
        return
    idx = [0] * dims
    while True:
        yield tuple(idx)
        pos = dims - 1
        while pos >= 0:
            idx[pos] += 1
            if idx[pos] < levels:
                break
            idx[pos] = 0
            pos -= 1
        if pos < 0:
            return


def covering_dual_fit(
    instance: SetCoverInstance,
    U: PolyhedralDirect,
    verifier,
    config: ReductionConfig = ReductionConfig(),
) -> RobustSolution:
    """Deterministic guarantee for covering problems under direct polyhedral
    uncertainty with any number of rows, by decompose-then-lift.

    Solves the dual-reformulated relaxation, decomposes its optimum, keeps
    the atom with the best off-threshold score, and forces the heavy
    coordinates (x*_j >= tau) to one; covering closure keeps that feasible.
    Factor alpha + 1/tau + alpha gamma tau n / beta at
    tau = sqrt(beta / (alpha gamma n)).
    """
    if not isinstance(U, PolyhedralDirect):
        raise VariantMismatch("dual fit needs a direct polyhedral set")
    U, _ = normalize(U)
    folded = fold_box_into_rows(U)
    wp = width_params(folded)
    beta, gamma = wp.beta, wp.gamma
    alpha = verifier.alpha
    n = U.n
    rng = np.random.default_rng(config.rng_seed)

    relax = solve_robust_relaxation(instance, folded, method=DUAL_REFORMULATION)
    x_star = relax.x_star
    dec = decompose(instance, verifier, alpha, x_star, rng=rng.spawn(1)[0])

    tau = math.sqrt(beta / (alpha * gamma * n))
    J = x_star >= tau
    off = ~J

    def light_score(x):
        x = np.asarray(x, dtype=float)
        return float(U.c0[off] @ x[off] + x[off].sum() / beta)

    scores = [light_score(a) for a in dec.atoms]
    chosen = dec.atoms[int(np.argmin(scores))]
    x_hat = np.asarray(chosen, dtype=float).copy()
    x_hat[J] = 1.0

    # the expectation argument guarantees an atom at most alpha times the
    # fractional light score
    star_score = light_score(x_star)
    assert min(scores) <= alpha * star_score + 1e-6, (min(scores), star_score)

    factor = alpha + 1.0 / tau + alpha * gamma * tau * n / beta
    trace = {
        "tau": tau,
        "J": [int(j) for j in np.nonzero(J)[0]],
        "z_R": relax.z_R,
        "slack": dec.slack,
        "atom_score": min(scores),
        "beta": beta,
        "gamma": gamma,
    }
    return _finish(U, x_hat, DETERMINISTIC, factor, trace)


def _generator_free_candidate(instance, U, verifier, config, rng):
    """Rounded solution supported away from every generator coordinate, when
    one exists; its worst-case perturbation is exactly zero."""
    gen_support = U.C.max(axis=1) > 0 if U.C.size else np.zeros(U.n, dtype=bool)
    keep = np.nonzero(~gen_support)[0]
    if keep.size == 0:
        return None
    try:
        sub = SetCoverInstance(
            instance.universe_size,
            tuple(instance.sets[j] for j in keep),
            instance.nominal_cost[keep],
        )
    except SchemaError:
        return None  # some element is only coverable through generator sets
    sol = solve_lp(lp_relaxation(sub, sub.nominal_cost))
    if sol.status == INFEASIBLE:
        return None
    sub_ver = RoundingVerifier(sub)
    trials = max(amplify_trials(config.epsilon), 1)
    x_sub = sub_ver.round_amplified(
        sub.nominal_cost, sol.primal, config.epsilon, trials, rng
    )
    x_full = np.zeros(U.n)
    x_full[keep] = x_sub
    return x_full


def _whp_best_of(instance, U, verifier, x_star, repeats, rng):
    best_x = None
    best_obj = np.inf
    for child in rng.spawn(repeats):
        cand = verifier.round(U.c0, x_star, child)
        obj = float(U.c0 @ cand) + worst_case(U, cand).value
        if obj < best_obj:
            best_x, best_obj = cand, obj
    return best_x, best_obj


def polyhedral_whp(
    instance: SetCoverInstance,
    U: PolyhedralAffine,
    verifier,
    config: ReductionConfig = ReductionConfig(),
) -> RobustSolution:
    """High-probability guarantee for affine polyhedral uncertainty via
    negatively correlated rounding of the reformulated relaxation optimum.

    Returns the better (by exact robust objective) of the rounded main
    candidate and, when feasible, a candidate supported away from all
    generators whose perturbation cost is exactly zero.
    """
    if not isinstance(U, PolyhedralAffine):
        raise VariantMismatch("this reduction needs an affine polyhedral set")
    if getattr(verifier, "kind", None) != ANCRR:
        raise PreconditionViolated("a negatively correlated randomized verifier is required")
    U, _ = normalize(U)
    wp = width_params(U)
    k = U.k
    eps = config.epsilon
    alpha = verifier.alpha
    tau = math.sqrt(
        6.0 * wp.beta * math.log(2.0 * k) * wp.c_min
        / ((1.0 + eps) * alpha * wp.gamma * wp.c_max * k)
    )
    rho = 6.0 * math.log(2.0 * k) / tau
    factor = alpha * (
        (1.0 + rho)
        + (1.0 + eps) * wp.gamma * tau * wp.c_max * k / (wp.beta * wp.c_min)
    )

    rng = np.random.default_rng(config.rng_seed)
    rng_a, rng_b = rng.spawn(2)

    relax = solve_robust_relaxation(instance, U, method=DUAL_REFORMULATION)
    best_x, best_obj = _whp_best_of(
        instance, U, verifier, relax.x_star, config.whp_repeats, rng_b
    )
    branch = "rounding"

    cand = _generator_free_candidate(instance, U, verifier, config, rng_a)
    if cand is not None:
        obj = float(U.c0 @ cand) + worst_case(U, cand).value
        if obj < best_obj:
            best_x, best_obj, branch = cand, obj, "generator-free"

    trace = {
        "tau": tau,
        "rho": rho,
        "z_R": relax.z_R,
        "branch": branch,
        "repeats": config.whp_repeats,
    }
    return _finish(U, best_x, WITH_HIGH_PROBABILITY, factor, trace)


def ellipsoid_min_decomp(
    instance: SetCoverInstance,
    U: EllipsoidAffine,
    verifier,
    config: ReductionConfig = ReductionConfig(),
) -> RobustSolution:
    """Deterministic factor alpha sqrt(k) for free-sign affine ellipsoids
    whose rotated generators D C^T stay entrywise nonnegative: decompose the
    relaxation optimum and keep the atom with the smallest exact objective
    c0 @ x + ||D C^T x||."""
    if not isinstance(U, EllipsoidAffine):
        raise VariantMismatch("this reduction needs an affine ellipsoidal set")
    if U.sign_constrained:
        raise PreconditionViolated("free-sign perturbations required here")
    DCt = U.D @ U.C.T
    if np.min(DCt, initial=0.0) < -1e-12:
        raise PreconditionViolated("D C^T has a negative entry")
    U, _ = normalize(U)
    alpha = verifier.alpha
    rng = np.random.default_rng(config.rng_seed)

    relax = solve_robust_relaxation(instance, U)
    dec = decompose(instance, verifier, alpha, relax.x_star, rng=rng.spawn(1)[0])

    def ell_obj(x):
        x = np.asarray(x, dtype=float)
        return float(U.c0 @ x + np.linalg.norm(U.D @ (U.C.T @ x)))

    vals = [ell_obj(a) for a in dec.atoms]
    x_hat = dec.atoms[int(np.argmin(vals))]
    factor = alpha * math.sqrt(U.k)
    trace = {
        "z_R": relax.z_R,
        "slack": dec.slack,
        "atom_objective": min(vals),
    }
    if U.k > U.n:
        trace["factor_note"] = "sqrt(k) exceeds sqrt(n) for this set"
    return _finish(U, x_hat, DETERMINISTIC, factor, trace)


def ellipsoid_covering(
    instance: SetCoverInstance,
    U: EllipsoidDirect,
    verifier,
    config: ReductionConfig = ReductionConfig(),
) -> RobustSolution:
    """Deterministic guarantee for covering problems under direct ellipsoidal
    uncertainty with nonnegative inverse shape: decompose-then-lift with the
    eigenvalue widths replacing the polyhedral ones."""
    if not isinstance(U, EllipsoidDirect):
        raise VariantMismatch("this reduction needs a direct ellipsoidal set")
    Dinv = np.linalg.inv(U.D)
    if np.min(Dinv) < -1e-12:
        raise PreconditionViolated("inverse of D has a negative entry")
    alpha = verifier.alpha
    n = U.n
    wp = width_params(U)
    rng = np.random.default_rng(config.rng_seed)

    relax = solve_robust_relaxation(instance, U)
    x_star = relax.x_star
    dec = decompose(instance, verifier, alpha, x_star, rng=rng.spawn(1)[0])

    tau = math.sqrt(wp.lambda_min / (alpha * wp.lambda_max * n))
    J = x_star >= tau
    off = ~J

    def light_score(x):
        x = np.asarray(x, dtype=float)
        return float(U.c0[off] @ x[off] + wp.lambda_max * x[off].sum())

    scores = [light_score(a) for a in dec.atoms]
    chosen = dec.atoms[int(np.argmin(scores))]
    x_hat = np.asarray(chosen, dtype=float).copy()
    x_hat[J] = 1.0
    assert min(scores) <= alpha * light_score(x_star) + 1e-6

    factor = alpha + 1.0 / tau + alpha * wp.lambda_max * tau * n / wp.lambda_min
    trace = {
        "tau": tau,
        "J": [int(j) for j in np.nonzero(J)[0]],
        "z_R": relax.z_R,
        "slack": dec.slack,
        "lambda_min": wp.lambda_min,
        "lambda_max": wp.lambda_max,
    }
    return _finish(U, x_hat, DETERMINISTIC, factor, trace)


def ellipsoid_whp(
    instance: SetCoverInstance,
    U: EllipsoidAffine,
    verifier,
    config: ReductionConfig = ReductionConfig(),
) -> RobustSolution:
    """High-probability guarantee for sign-constrained affine ellipsoids,
    mirroring the polyhedral recipe with the cutting-plane inner maximizer
    and eigenvalue widths in place of row widths.  The constants are
    transplanted from the polyhedral analysis and flagged as such."""
    if not isinstance(U, EllipsoidAffine):
        raise VariantMismatch("this reduction needs an affine ellipsoidal set")
    if not U.sign_constrained:
        raise PreconditionViolated("sign-constrained perturbations required here")
    if getattr(verifier, "kind", None) != ANCRR:
        raise PreconditionViolated("a negatively correlated randomized verifier is required")
    Dinv = np.linalg.inv(U.D)
    if np.min(Dinv) < -1e-12:
        raise PreconditionViolated("inverse of D has a negative entry")
    U, _ = normalize(U)
    wp = width_params(U)
    k = U.k
    eps = config.epsilon
    alpha = verifier.alpha
    tau = math.sqrt(
        6.0 * wp.lambda_min * math.log(2.0 * k) * wp.c_min
        / ((1.0 + eps) * alpha * wp.lambda_max * wp.c_max * k)
    )
    rho = 6.0 * math.log(2.0 * k) / tau
    factor = alpha * (
        (1.0 + rho)
        + (1.0 + eps) * wp.lambda_max * tau * wp.c_max * k / (wp.lambda_min * wp.c_min)
    )

    rng = np.random.default_rng(config.rng_seed)
    rng_a, rng_b = rng.spawn(2)

    relax = solve_robust_relaxation(instance, U)
    best_x, best_obj = _whp_best_of(
        instance, U, verifier, relax.x_star, config.whp_repeats, rng_b
    )
    branch = "rounding"

    cand = _generator_free_candidate(instance, U, verifier, config, rng_a)
    if cand is not None:
        obj = float(U.c0 @ cand) + worst_case(U, cand).value
        if obj < best_obj:
            best_x, best_obj, branch = cand, obj, "generator-free"

    trace = {
        "tau": tau,
        "rho": rho,
        "z_R": relax.z_R,
        "branch": branch,
        "repeats": config.whp_repeats,
        "constants": "transplanted",
    }
    return _finish(U, best_x, WITH_HIGH_PROBABILITY, factor, trace)


ALGORITHMS = {
    "expectation": robust_in_expectation,
    "budget": budget_enumerate,
    "dualfit": covering_dual_fit,
    "poly-whp": polyhedral_whp,
    "ell-decomp": ellipsoid_min_decomp,
    "ell-cover": ellipsoid_covering,
    "ell-whp": ellipsoid_whp,
}

"""Dense linear programming: a two-phase bounded-variable primal simplex
plus a vertex-enumeration oracle used by the test suite.

The simplex works on an equality form with one slack column per inequality
row; variable bounds are handled inside the ratio test, never as extra
rows.  Bland's rule keeps the walk finite; ratio-test ties break on the
smallest variable index so repeated solves are bit-identical.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from robustkit import _kernels
from robustkit.errors import DimensionTooLarge, LengthMismatch, MaxIterationsError

MIN = "min"
MAX = "max"

LE, GE, EQ = "<=", ">=", "="

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"


@dataclass(frozen=True)
class SolverTolerances:
    feas_tol: float = 1e-9
    gap_tol: float = 1e-7
    pivot_tol: float = 1e-10
    opt_tol: float = 1e-9
    max_pivots: int = 20000


_default_tolerances = SolverTolerances()


def set_default_tolerances(tol: SolverTolerances) -> None:
    """Process-wide default used when a caller passes no tolerances; meant
    for CLI startup, before any solving begins."""
    global _default_tolerances
    _default_tolerances = tol


def default_tolerances() -> SolverTolerances:
    return _default_tolerances


@dataclass(frozen=True, eq=False)
class LpProblem:
    """min/max  cost @ x  subject to  A x {<=,>=,=} rhs,  lb <= x <= ub.

    Frozen after construction so problems can be shared read-only across
    threads."""

    objective_sense: str
    cost: np.ndarray
    constraint_matrix: np.ndarray
    constraint_senses: list[str]
    rhs: np.ndarray
    variable_lower_bounds: np.ndarray = None
    variable_upper_bounds: np.ndarray = None

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)
        set_("cost", np.asarray(self.cost, dtype=float))
        set_("constraint_matrix", np.atleast_2d(
            np.asarray(self.constraint_matrix, dtype=float)))
        set_("rhs", np.asarray(self.rhs, dtype=float))
        set_("constraint_senses", list(self.constraint_senses))
        n = self.cost.size
        m = self.rhs.size
        if self.variable_lower_bounds is None:
            set_("variable_lower_bounds", np.zeros(n))
        if self.variable_upper_bounds is None:
            set_("variable_upper_bounds", np.full(n, np.inf))
        set_("variable_lower_bounds",
             np.asarray(self.variable_lower_bounds, dtype=float))
        set_("variable_upper_bounds",
             np.asarray(self.variable_upper_bounds, dtype=float))
        if self.objective_sense not in (MIN, MAX):
            raise ValueError(f"objective_sense must be '{MIN}' or '{MAX}'")
        if self.constraint_matrix.shape != (m, n):
            raise LengthMismatch(
                f"matrix shape {self.constraint_matrix.shape} != ({m}, {n})"
            )
        if len(self.constraint_senses) != m:
            raise LengthMismatch("one sense per row required")
        if any(s not in (LE, GE, EQ) for s in self.constraint_senses):
            raise ValueError("senses must be one of <=, >=, =")
        if self.variable_lower_bounds.size != n or self.variable_upper_bounds.size != n:
            raise LengthMismatch("bounds must have one entry per variable")
        if not np.all(self.variable_lower_bounds <= self.variable_upper_bounds):
            raise ValueError("lower bound exceeds upper bound")
        for name, arr in (("cost", self.cost), ("matrix", self.constraint_matrix),
                          ("rhs", self.rhs)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"non-finite entries in {name}")

    @property
    def n_vars(self) -> int:
        return self.cost.size

    @property
    def n_rows(self) -> int:
        return self.rhs.size


@dataclass
class LpSolution:
    status: str
    primal: np.ndarray
    dual: np.ndarray
    objective: float
    primal_residual: float = 0.0
    duality_gap: float = 0.0
    iterations: int = 0


def _standardize(problem: LpProblem):
    """Equality form for the kernel: shift variables to lb 0, mirror
    upper-bounded-only variables, append one slack per inequality row."""
    n = problem.n_vars
    m = problem.n_rows
    A0 = problem.constraint_matrix
    lb0 = problem.variable_lower_bounds.copy()
    ub0 = problem.variable_upper_bounds.copy()

    flip = np.zeros(n, dtype=bool)
    shift = np.zeros(n)
    for j in range(n):
        if np.isfinite(lb0[j]):
            shift[j] = lb0[j]
        elif np.isfinite(ub0[j]):
            flip[j] = True  # x = ub - x', x' in [0, inf)
            shift[j] = ub0[j]
        else:
            raise ValueError("variables must have a finite lower or upper bound")

    sign = np.where(flip, -1.0, 1.0)
    A = A0 * sign  # columns of flipped vars negated
    b = problem.rhs - A0 @ shift
    lb = np.zeros(n)
    ub = np.where(
        flip, np.inf, np.where(np.isfinite(ub0), ub0 - shift, np.inf)
    )

    n_slack = sum(1 for s in problem.constraint_senses if s != EQ)
    N = n + n_slack
    A_eq = np.zeros((m, N))
    A_eq[:, :n] = A
    ub_eq = np.concatenate([ub, np.full(n_slack, np.inf)])
    k = n
    for i, s in enumerate(problem.constraint_senses):
        if s == LE:
            A_eq[i, k] = 1.0
            k += 1
        elif s == GE:
            A_eq[i, k] = -1.0
            k += 1

    c = problem.cost * sign
    if problem.objective_sense == MAX:
        c = -c
    c_eq = np.concatenate([c, np.zeros(n_slack)])
    return A_eq, b, c_eq, np.zeros(N), ub_eq, shift, sign, n


def solve_lp(problem: LpProblem, tolerances: SolverTolerances | None = None) -> LpSolution:
    """Two-phase primal simplex.  Statuses front infeasibility/unboundedness;
    a pivot count above ``max_pivots`` raises :class:`MaxIterationsError`.

    Highly degenerate bases (near-identical rows from cut loops) can turn
    numerically singular at the default pivot tolerance; the solve is then
    retried deterministically with the tolerance raised two decades at a
    time, which forces the ratio test away from tiny pivots."""
    tol = tolerances or _default_tolerances
    if problem.n_rows == 0:
        return _solve_box_only(problem)
    last_exc = None
    pivot_tol = tol.pivot_tol
    for _ in range(3):
        try:
            return _solve_lp_once(
                problem,
                SolverTolerances(tol.feas_tol, tol.gap_tol, pivot_tol,
                                 tol.opt_tol, tol.max_pivots),
            )
        except np.linalg.LinAlgError as exc:
            last_exc = exc
            pivot_tol *= 1e2
    raise MaxIterationsError(f"numerically singular basis: {last_exc}")


def _solve_lp_once(problem: LpProblem, tol: SolverTolerances) -> LpSolution:
    A, b, c, lb, ub, shift, sign, n = _standardize(problem)
    m, N = A.shape

    # phase 1: artificial basis
    art_sign = np.where(b >= 0.0, 1.0, -1.0)
    A1 = np.hstack([A, np.diag(art_sign)])
    lb1 = np.concatenate([lb, np.zeros(m)])
    ub1 = np.concatenate([ub, np.full(m, np.inf)])
    c1 = np.concatenate([np.zeros(N), np.ones(m)])
    basis = np.arange(N, N + m, dtype=np.int64)
    vstat = np.zeros(N + m, dtype=np.int8)
    vstat[N:] = 2
    xval = np.zeros(N + m)
    xval[N:] = np.abs(b)

    code, it1 = _kernels.simplex_loop(
        A1, b, c1, lb1, ub1, basis, vstat, xval,
        tol.max_pivots, tol.pivot_tol, tol.opt_tol,
    )
    if code == _kernels.MAXITER:
        raise MaxIterationsError(f"phase 1 exceeded {tol.max_pivots} pivots")
    phase1_obj = float(c1 @ xval)
    if phase1_obj > max(tol.feas_tol, tol.feas_tol * np.abs(b).max(initial=1.0)):
        return LpSolution(INFEASIBLE, np.zeros(problem.n_vars), np.zeros(m),
                          float("nan"), iterations=it1)

    # pin artificials at zero for phase 2; basic ones only ever make
    # degenerate moves afterwards
    ub1[N:] = 0.0
    xval[N:] = np.where(vstat[N:] == 2, xval[N:], 0.0)
    c2 = np.concatenate([c, np.zeros(m)])

    code, it2 = _kernels.simplex_loop(
        A1, b, c2, lb1, ub1, basis, vstat, xval,
        tol.max_pivots, tol.pivot_tol, tol.opt_tol,
    )
    if code == _kernels.MAXITER:
        raise MaxIterationsError(f"phase 2 exceeded {tol.max_pivots} pivots")
    iters = it1 + it2
    if code == _kernels.UNBOUNDED:
        return LpSolution(UNBOUNDED, np.zeros(problem.n_vars), np.zeros(m),
                          float("nan"), iterations=iters)

    x_shifted = xval[:n]
    primal = shift + sign * x_shifted
    B = A1[:, basis]
    y = np.linalg.solve(B.T, c2[basis])
    if problem.objective_sense == MAX:
        dual = -y
    else:
        dual = y.copy()
    objective = float(problem.cost @ primal)
    residual = _primal_residual(problem, primal)
    gap = _duality_gap(problem, primal, dual)
    return LpSolution(OPTIMAL, primal, dual, objective, residual, gap, iters)


def _solve_box_only(problem: LpProblem) -> LpSolution:
    """Separable optimum of a row-free problem: each variable sits at the
    bound its cost prefers."""
    sgn = 1.0 if problem.objective_sense == MIN else -1.0
    c = sgn * problem.cost
    lb = problem.variable_lower_bounds
    ub = problem.variable_upper_bounds
    neutral = np.where(np.isfinite(lb), lb, np.where(np.isfinite(ub), ub, 0.0))
    x = np.where(c > 0.0, lb, np.where(c < 0.0, ub, neutral))
    if not np.all(np.isfinite(x)):
        return LpSolution(UNBOUNDED, np.zeros(problem.n_vars), np.zeros(0), float("nan"))
    objective = float(problem.cost @ x)
    return LpSolution(OPTIMAL, x.astype(float), np.zeros(0), objective,
                      _primal_residual(problem, x), 0.0)


def _primal_residual(problem: LpProblem, x: np.ndarray) -> float:
    ax = problem.constraint_matrix @ x
    r = 0.0
    for i, s in enumerate(problem.constraint_senses):
        diff = ax[i] - problem.rhs[i]
        if s == LE:
            r = max(r, diff)
        elif s == GE:
            r = max(r, -diff)
        else:
            r = max(r, abs(diff))
    r = max(r, np.max(problem.variable_lower_bounds - x, initial=0.0))
    r = max(r, np.max(x - problem.variable_upper_bounds, initial=0.0))
    return float(r)


def _duality_gap(problem: LpProblem, x: np.ndarray, dual: np.ndarray) -> float:
    """Lagrangian gap including bound multipliers; zero in exact arithmetic
    at an optimal basis."""
    sgn = 1.0 if problem.objective_sense == MIN else -1.0
    c = sgn * problem.cost
    y = sgn * dual
    d = c - problem.constraint_matrix.T @ y
    bound_term = 0.0
    lbv = problem.variable_lower_bounds
    ubv = problem.variable_upper_bounds
    for j in range(problem.n_vars):
        if d[j] >= 0.0:
            if np.isfinite(lbv[j]):
                bound_term += d[j] * lbv[j]
        else:
            if np.isfinite(ubv[j]):
                bound_term += d[j] * ubv[j]
    gap = float(c @ x - problem.rhs @ y - bound_term)
    return gap


def solve_lp_bruteforce(problem: LpProblem) -> LpSolution:
    """Exact optimum by enumerating basic feasible points (test oracle).

    Every vertex of a pointed polyhedron makes n constraints tight, so all
    n-subsets of {rows, finite bounds} are solved in one batched pass.
    Unboundedness is decided from the recession cone.  Limited to 8
    variables and 12 rows.
    """
    n = problem.n_vars
    m = problem.n_rows
    if n > 8 or m > 12:
        raise DimensionTooLarge(f"bruteforce oracle capped at 8 vars/12 rows, got {n}/{m}")

    A = problem.constraint_matrix
    b = problem.rhs
    lb = problem.variable_lower_bounds
    ub = problem.variable_upper_bounds
    feas_tol = 1e-8

    # constraint stack: rows first, then finite bounds as e_j x = bound
    G_rows = [A[i] for i in range(m)]
    h_rows = [b[i] for i in range(m)]
    bound_rows = []
    for j in range(n):
        if np.isfinite(lb[j]):
            e = np.zeros(n)
            e[j] = 1.0
            bound_rows.append((e, lb[j]))
        if np.isfinite(ub[j]) and ub[j] != lb[j]:
            e = np.zeros(n)
            e[j] = 1.0
            bound_rows.append((e, ub[j]))
    G = np.array(G_rows + [g for g, _ in bound_rows])
    h = np.array(h_rows + [v for _, v in bound_rows])

    feas = _enumerate_feasible_vertices(G, h, n, A, b, problem.constraint_senses,
                                        lb, ub, feas_tol)
    if feas.shape[0] == 0:
        return LpSolution(INFEASIBLE, np.zeros(n), np.zeros(m), float("nan"))

    sgn = 1.0 if problem.objective_sense == MIN else -1.0
    if _has_improving_ray(problem, sgn):
        return LpSolution(UNBOUNDED, np.zeros(n), np.zeros(m), float("nan"))

    vals = feas @ (sgn * problem.cost)
    best = int(np.argmin(vals))
    x = feas[best]
    objective = float(problem.cost @ x)
    return LpSolution(OPTIMAL, x, np.zeros(m), objective,
                      _primal_residual(problem, x), 0.0)


def _enumerate_feasible_vertices(G, h, n, A, b, senses, lb, ub, feas_tol):
    """Solve all n-subsets of the stacked constraints in a batched pass and
    keep the feasible solutions."""
    total = G.shape[0]
    if total < n:
        return np.zeros((0, n))
    combos = np.array(list(itertools.combinations(range(total), n)), dtype=np.int64)
    mats = G[combos]                  # (k, n, n)
    rhs = h[combos]                   # (k, n)
    dets = np.abs(np.linalg.det(mats))
    hadamard = np.sqrt((mats ** 2).sum(axis=2)).prod(axis=1)  # rowwise norm product
    ok = dets > 1e-10 * np.maximum(hadamard, 1e-300)
    if not np.any(ok):
        return np.zeros((0, n))
    try:
        pts = np.linalg.solve(mats[ok], rhs[ok][..., None])[..., 0]  # (k', n)
    except np.linalg.LinAlgError:
        # a batch member slipped past the determinant filter; fall back to
        # one-at-a-time solves
        kept = []
        for M, r in zip(mats[ok], rhs[ok]):
            try:
                kept.append(np.linalg.solve(M, r))
            except np.linalg.LinAlgError:
                continue
        if not kept:
            return np.zeros((0, n))
        pts = np.array(kept)

    av = pts @ A.T
    feas_mask = np.ones(pts.shape[0], dtype=bool)
    for i, s in enumerate(senses):
        if s == LE:
            feas_mask &= av[:, i] <= b[i] + feas_tol
        elif s == GE:
            feas_mask &= av[:, i] >= b[i] - feas_tol
        else:
            feas_mask &= np.abs(av[:, i] - b[i]) <= feas_tol
    for j in range(n):
        if np.isfinite(lb[j]):
            feas_mask &= pts[:, j] >= lb[j] - feas_tol
        if np.isfinite(ub[j]):
            feas_mask &= pts[:, j] <= ub[j] + feas_tol
    return pts[feas_mask]


def _has_improving_ray(problem: LpProblem, sgn: float) -> bool:
    """Check for a recession direction with negative (min-sense) objective.

    The oracle requires a finite lower bound on every variable, which makes
    the recession cone a subset of the nonnegative orthant; its extreme rays
    are then vertices of the section sum(d) = 1.
    """
    n = problem.n_vars
    lb = problem.variable_lower_bounds
    ub = problem.variable_upper_bounds
    if not np.all(np.isfinite(lb)):
        raise ValueError("bruteforce oracle requires finite lower bounds")
    if np.all(np.isfinite(ub)):
        return False  # box-bounded: no rays at all

    dir_lb = np.zeros(n)
    dir_ub = np.where(np.isfinite(ub), 0.0, np.inf)
    A = problem.constraint_matrix
    section = LpProblem(
        MIN,
        sgn * problem.cost,
        np.vstack([A, np.ones((1, n))]),
        list(problem.constraint_senses) + [EQ],
        np.concatenate([np.zeros(problem.n_rows), [1.0]]),
        dir_lb,
        dir_ub,
    )
    G = np.vstack([section.constraint_matrix, np.eye(n)])
    h = np.concatenate([section.rhs, np.zeros(n)])
    feas = _enumerate_feasible_vertices(
        G, h, n, section.constraint_matrix, section.rhs,
        section.constraint_senses, dir_lb, dir_ub, 1e-8,
    )
    return bool(feas.shape[0] and np.min(feas @ (sgn * problem.cost)) < -1e-9)

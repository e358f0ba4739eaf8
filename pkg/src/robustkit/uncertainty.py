"""Cost uncertainty sets and their worst-case machinery.

Five shapes, all perturbations of a nonnegative nominal vector c0:

* ``PolyhedralDirect``  c = c0 + u,      u >= 0, u <= d, A u <= b
* ``PolyhedralAffine``  c = c0 + C delta, delta >= 0, A delta <= b
* ``EllipsoidDirect``   c = c0 + u,      u >= 0, ||D^-1 u||_2 <= 1
* ``EllipsoidAffine``   c = c0 + C delta, ||D^-1 delta||_2 <= 1,
  with delta either sign-constrained or free
* budget sets (interval growth on at most k coordinates) are stored in
  their PolyhedralDirect normal form by :func:`budget_set`.

``worst_case`` evaluates max_{c in C} c @ x - c0 @ x by LP for the
polyhedral shapes, in closed form for the free-sign ellipsoid, and by
tangent cutting planes for the sign-constrained ellipsoids.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from robustkit.errors import (
    DegenerateWidth,
    LengthMismatch,
    SchemaError,
    UnboundedUncertainty,
    VariantMismatch,
)
from robustkit.lp_core import (
    GE,
    LE,
    MAX,
    MIN,
    UNBOUNDED,
    LpProblem,
    SolverTolerances,
    solve_lp,
)


def _nonneg(name, arr, allow_inf=False):
    arr = np.asarray(arr, dtype=float)
    if arr.size and np.min(arr) < 0:
        raise ValueError(f"{name} must be nonnegative")
    if not allow_inf and arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def _check_spd(D: np.ndarray) -> np.ndarray:
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError("D must be square")
    asym = np.max(np.abs(D - D.T), initial=0.0)
    if asym > 1e-12 * max(1.0, np.max(np.abs(D))):
        warnings.warn("D not symmetric; using (D + D.T)/2", stacklevel=3)
    D = 0.5 * (D + D.T)
    eig = np.linalg.eigvalsh(D)
    if eig[0] <= 1e-12 * max(1.0, eig[-1]):
        raise ValueError("D must be positive definite")
    return D


@dataclass(frozen=True, eq=False)
class PolyhedralDirect:
    """c = c0 + u with u >= 0, u <= d (entries may be +inf), A u <= b."""

    c0: np.ndarray
    d: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "c0", _nonneg("c0", self.c0))
        object.__setattr__(self, "d", _nonneg("d", self.d, allow_inf=True))
        A = np.asarray(self.A, dtype=float)
        if A.size == 0:
            A = A.reshape(0, self.c0.size)
        object.__setattr__(self, "A", _nonneg("A", np.atleast_2d(A)))
        object.__setattr__(self, "b", _nonneg("b", np.atleast_1d(np.asarray(self.b, dtype=float))))
        n = self.c0.size
        if self.d.size != n or self.A.shape[1] != n or self.A.shape[0] != self.b.size:
            raise LengthMismatch("inconsistent polyhedral dimensions")

    @property
    def n(self) -> int:
        return self.c0.size


@dataclass(frozen=True, eq=False)
class PolyhedralAffine:
    """c = c0 + C delta with delta >= 0, A delta <= b; C columns are the
    perturbation generators."""

    c0: np.ndarray
    C: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "c0", _nonneg("c0", self.c0))
        C = np.asarray(self.C, dtype=float)
        if C.ndim != 2:
            raise ValueError("C must be an (n, k) matrix")
        object.__setattr__(self, "C", _nonneg("C", C))
        A = np.asarray(self.A, dtype=float)
        if A.size == 0:
            A = A.reshape(0, C.shape[1])
        object.__setattr__(self, "A", _nonneg("A", np.atleast_2d(A)))
        object.__setattr__(self, "b", _nonneg("b", np.atleast_1d(np.asarray(self.b, dtype=float))))
        if self.C.shape[0] != self.c0.size:
            raise LengthMismatch("C row count must match c0")
        if self.A.shape[1] != self.C.shape[1] or self.A.shape[0] != self.b.size:
            raise LengthMismatch("inconsistent affine dimensions")
        if self.C.shape[1] and np.any(self.C.max(axis=0) == 0):
            raise ValueError("generator matrix has an all-zero column")

    @property
    def n(self) -> int:
        return self.c0.size

    @property
    def k(self) -> int:
        return self.C.shape[1]


@dataclass(frozen=True, eq=False)
class EllipsoidDirect:
    """c = c0 + u with u >= 0 and ||D^-1 u||_2 <= 1; D symmetric PD."""

    c0: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "c0", _nonneg("c0", self.c0))
        object.__setattr__(self, "D", _check_spd(self.D))
        if self.D.shape[0] != self.c0.size:
            raise LengthMismatch("D must be n x n")

    @property
    def n(self) -> int:
        return self.c0.size


@dataclass(frozen=True, eq=False)
class EllipsoidAffine:
    """c = c0 + C delta with ||D^-1 delta||_2 <= 1; delta >= 0 when
    sign_constrained, free otherwise."""

    c0: np.ndarray
    C: np.ndarray
    D: np.ndarray
    sign_constrained: bool = True

    def __post_init__(self):
        object.__setattr__(self, "c0", _nonneg("c0", self.c0))
        C = np.asarray(self.C, dtype=float)
        if C.ndim != 2:
            raise ValueError("C must be an (n, k) matrix")
        object.__setattr__(self, "C", _nonneg("C", C))
        object.__setattr__(self, "D", _check_spd(self.D))
        if self.C.shape[0] != self.c0.size:
            raise LengthMismatch("C row count must match c0")
        if self.D.shape[0] != self.C.shape[1]:
            raise LengthMismatch("D must be k x k")
        if self.C.shape[1] and np.any(self.C.max(axis=0) == 0):
            raise ValueError("generator matrix has an all-zero column")

    @property
    def n(self) -> int:
        return self.c0.size

    @property
    def k(self) -> int:
        return self.C.shape[1]


UncertaintySet = PolyhedralDirect | PolyhedralAffine | EllipsoidDirect | EllipsoidAffine


def budget_set(c0, d, k_budget: int) -> PolyhedralDirect:
    """Interval growth d on at most ``k_budget`` coordinates, stored in
    PolyhedralDirect normal form: after substituting u for d*u the budget row
    reads sum_j u_j / d_j <= k.  Coordinates with d_j = 0 cannot move and get
    a zero column."""
    c0 = _nonneg("c0", c0)
    d = _nonneg("d", d)
    if int(k_budget) < 1:
        raise ValueError("k_budget must be >= 1")
    if d.size != c0.size:
        raise LengthMismatch("d length mismatch")
    row = np.where(d > 0, 1.0 / np.where(d > 0, d, 1.0), 0.0)
    return PolyhedralDirect(c0, d, row.reshape(1, -1), [float(k_budget)])


@dataclass
class FoldReport:
    """What normalization did, so callers can map results back."""

    scaled_rows: list = field(default_factory=list)      # (row, 1/b_i factor)
    dropped_rows: list = field(default_factory=list)     # rows with b_i = 0
    forced_zero: list = field(default_factory=list)      # coordinates pinned to 0
    folded: list = field(default_factory=list)           # (coordinate, amount added to c0)
    removed_generators: list = field(default_factory=list)


@dataclass
class WorstCase:
    """value = max_{c in C} c @ x - c0 @ x, with the attaining scenario."""

    value: float
    witness_c: np.ndarray
    witness_perturbation: np.ndarray


def normalize(U: UncertaintySet):
    """Scale polyhedral rows to b = 1, drop b = 0 rows after pinning their
    perturbation coordinates to zero, and fold unconstrained box coordinates
    (zero A-column, finite d) into the nominal vector.  Ellipsoids pass
    through unchanged.  Returns (normalized_set, FoldReport)."""
    report = FoldReport()
    if isinstance(U, PolyhedralDirect):
        A = U.A.copy()
        b = U.b.copy()
        d = U.d.copy()
        c0 = U.c0.copy()
        keep = []
        for i in range(b.size):
            if b[i] == 0.0:
                for j in np.nonzero(A[i] > 0)[0]:
                    if d[j] != 0.0:
                        report.forced_zero.append(int(j))
                    d[j] = 0.0
                    A[:, j] = 0.0
                report.dropped_rows.append(i)
            else:
                keep.append(i)
        A = A[keep]
        b = b[keep]
        for idx, i in enumerate(keep):
            if b[idx] != 1.0:
                report.scaled_rows.append((i, 1.0 / U.b[i]))
        A = A / np.where(b > 0, b, 1.0)[:, None]
        b = np.ones(len(keep))
        colmax = A.max(axis=0) if A.shape[0] else np.zeros(A.shape[1])
        for j in range(U.n):
            if colmax[j] == 0.0 and d[j] > 0.0:
                if not np.isfinite(d[j]):
                    raise UnboundedUncertainty(
                        f"coordinate {j} has no row and no finite bound"
                    )
                c0[j] += d[j]
                report.folded.append((int(j), float(d[j])))
                d[j] = 0.0
        return PolyhedralDirect(c0, d, A, b), report
    if isinstance(U, PolyhedralAffine):
        A = U.A.copy()
        b = U.b.copy()
        keep_rows = []
        removed = np.zeros(U.k, dtype=bool)
        for i in range(b.size):
            if b[i] == 0.0:
                removed |= A[i] > 0
                report.dropped_rows.append(i)
            else:
                keep_rows.append(i)
        A = A[keep_rows]
        b = b[keep_rows]
        gen_keep = np.nonzero(~removed)[0]
        report.removed_generators = [int(r) for r in np.nonzero(removed)[0]]
        A = A[:, gen_keep]
        C = U.C[:, gen_keep]
        if A.shape[1] and (A.shape[0] == 0 or np.any(A.max(axis=0) == 0.0)):
            raise UnboundedUncertainty("a generator has no constraining row")
        for idx, i in enumerate(keep_rows):
            if b[idx] != 1.0:
                report.scaled_rows.append((i, 1.0 / U.b[i]))
        A = A / np.where(b > 0, b, 1.0)[:, None]
        b = np.ones(len(keep_rows))
        return PolyhedralAffine(U.c0.copy(), C, A, b), report
    if isinstance(U, (EllipsoidDirect, EllipsoidAffine)):
        return U, report
    raise VariantMismatch(f"unknown uncertainty variant {type(U).__name__}")


def fold_box_into_rows(U: PolyhedralDirect) -> PolyhedralDirect:
    """Rewrite finite upper bounds u_j <= d_j as rows u_j / d_j <= 1 so the
    whole perturbation polytope reads A u <= 1.  Coordinates pinned at zero
    keep their zero bound."""
    extra = []
    d = U.d.copy()
    for j in range(U.n):
        if np.isfinite(d[j]) and d[j] > 0.0:
            row = np.zeros(U.n)
            row[j] = 1.0 / d[j]
            extra.append(row)
            d[j] = np.inf
    if not extra:
        return U
    A = np.vstack([U.A, np.array(extra)])
    b = np.concatenate([U.b, np.ones(len(extra))])
    return PolyhedralDirect(U.c0, d, A, b)


def worst_case(U: UncertaintySet, x, tolerances: SolverTolerances | None = None) -> WorstCase:
    """Worst-case excess cost of selection x over the nominal cost.

    Polyhedral shapes solve the inner LP; the free-sign ellipsoid uses the
    closed form ||D C^T x||_2; sign-constrained ellipsoids run the tangent
    cutting-plane loop.  The feasible region always contains the zero
    perturbation, so a value is always returned (within 1e-6 of the true
    maximum)."""
    x = np.asarray(x, dtype=float)
    if x.size != U.n:
        raise LengthMismatch("x length mismatch")
    if np.any(x < -1e-12):
        raise ValueError("worst_case expects x >= 0")

    if isinstance(U, PolyhedralDirect):
        if np.any(~np.isfinite(U.d) & (U.A.max(axis=0, initial=0.0) == 0.0) & (x > 0)):
            raise UnboundedUncertainty("unbounded perturbation coordinate in the support of x")
        prob = LpProblem(MAX, x, U.A, [LE] * U.A.shape[0], U.b,
                         np.zeros(U.n), U.d)
        sol = solve_lp(prob, tolerances)
        if sol.status == UNBOUNDED:
            raise UnboundedUncertainty("inner maximization unbounded")
        u = sol.primal
        return WorstCase(float(x @ u), U.c0 + u, u)

    if isinstance(U, PolyhedralAffine):
        if U.k == 0:
            return WorstCase(0.0, U.c0.copy(), np.zeros(0))
        q = U.C.T @ x
        prob = LpProblem(MAX, q, U.A, [LE] * U.A.shape[0], U.b, np.zeros(U.k))
        sol = solve_lp(prob, tolerances)
        if sol.status == UNBOUNDED:
            raise UnboundedUncertainty("inner maximization unbounded")
        delta = sol.primal
        return WorstCase(float(q @ delta), U.c0 + U.C @ delta, delta)

    if isinstance(U, EllipsoidDirect):
        value, u = _ellipsoid_max(x, U.D, sign_constrained=True)
        return WorstCase(value, U.c0 + u, u)

    if isinstance(U, EllipsoidAffine):
        q = U.C.T @ x
        if U.sign_constrained:
            value, delta = _ellipsoid_max(q, U.D, sign_constrained=True)
        else:
            value, delta = _ellipsoid_max_free(q, U.D)
        return WorstCase(value, U.c0 + U.C @ delta, delta)

    raise VariantMismatch(f"unknown uncertainty variant {type(U).__name__}")


def _ellipsoid_max_free(q: np.ndarray, D: np.ndarray):
    """max q @ delta over ||D^-1 delta|| <= 1 with free sign:
    value ||D q||, witness D^2 q / ||D q||."""
    v = D @ q
    norm = float(np.linalg.norm(v))
    if norm <= 1e-300:
        return 0.0, np.zeros(q.size)
    delta = D @ v / norm
    return float(q @ delta), delta


def kelley_norm_max(q, D, sign_constrained=True, tol=1e-8, obj_eps=1e-8, max_iter=500):
    """max q @ u s.t. ||D^-1 u|| <= 1 (and u >= 0 when sign-constrained) by
    accumulating tangent cuts v @ u <= 1, v = D^-2 u_t / ||D^-1 u_t||.

    Pure cutting-plane loop with no closed-form shortcut, so the free-sign
    mode can cross-check the closed form.  The master stays bounded by the
    valid box |u_j| <= lambda_max(D); an infeasible master optimum is scaled
    back to the ball for the incumbent."""
    k = q.size
    if k == 0:
        return 0.0, np.zeros(0)
    Dinv = np.linalg.inv(D)
    M = Dinv.T @ Dinv  # D^-2 for symmetric D
    lam_max = float(np.linalg.eigvalsh(D)[-1])
    lo = np.zeros(k) if sign_constrained else np.full(k, -lam_max)
    hi = np.full(k, lam_max)
    cuts: list[np.ndarray] = []
    best_val = 0.0 if sign_constrained else -np.inf
    best_u = np.zeros(k)
    prev_obj = np.inf
    for _ in range(max_iter):
        if cuts:
            prob = LpProblem(MAX, q, np.array(cuts), [LE] * len(cuts),
                             np.ones(len(cuts)), lo, hi)
        else:
            prob = LpProblem(MAX, q, np.zeros((0, k)), [], np.zeros(0), lo, hi)
        sol = solve_lp(prob)
        u_t = sol.primal
        upper = float(sol.objective)
        g = float(np.sqrt(max(u_t @ M @ u_t, 0.0)))
        if g <= 1.0 + 1e-12:
            # master optimum is feasible, hence globally optimal
            return float(q @ u_t), u_t
        u_feas = u_t / g
        val = float(q @ u_feas)
        if val > best_val:
            best_val, best_u = val, u_feas
        if g <= 1.0 + tol and prev_obj - upper < obj_eps:
            break
        if upper - best_val <= 1e-9 * (1.0 + abs(upper)):
            break
        cuts.append(M @ u_t / g)
        prev_obj = upper
    return best_val, best_u


def _ellipsoid_max(q, D, sign_constrained=True):
    """Sign-respecting inner maximizer: when the unconstrained witness is
    already (numerically) nonnegative the closed form wins, otherwise the
    cutting-plane loop runs."""
    if q.size == 0:
        return 0.0, np.zeros(0)
    val_free, delta_free = _ellipsoid_max_free(q, D)
    if not sign_constrained:
        return val_free, delta_free
    if np.min(delta_free, initial=0.0) >= -1e-12:
        delta = np.clip(delta_free, 0.0, None)
        return float(q @ delta), delta
    return kelley_norm_max(q, D, sign_constrained=True)


def dual_reformulation(U, base_lp: LpProblem) -> LpProblem:
    """Single LP whose optimum equals the robust relaxation value, by strong
    duality on the inner maximization.

    Direct shape: min c0 @ x + b @ theta + d @ y over x in Q, theta >= 0,
    y >= 0 with A^T theta + y >= x.  Affine shape: min c0 @ x + b @ theta
    with A^T theta >= C^T x.  Coordinates with d_j = +inf force y_j = 0."""
    if isinstance(U, PolyhedralDirect):
        n = U.n
        if base_lp.n_vars != n:
            raise LengthMismatch("base LP variable count != n")
        m_a = U.A.shape[0]
        m_q = base_lp.n_rows
        n_tot = n + m_a + n
        cost = np.concatenate([
            U.c0,
            U.b,
            np.where(np.isfinite(U.d), U.d, 0.0),
        ])
        rows = np.zeros((m_q + n, n_tot))
        rows[:m_q, :n] = base_lp.constraint_matrix
        senses = list(base_lp.constraint_senses)
        rhs = list(base_lp.rhs)
        for j in range(n):
            r = m_q + j
            rows[r, j] = -1.0
            rows[r, n:n + m_a] = U.A[:, j]
            rows[r, n + m_a + j] = 1.0
            senses.append(GE)
            rhs.append(0.0)
        lb = np.concatenate([base_lp.variable_lower_bounds, np.zeros(m_a + n)])
        ub = np.concatenate([
            base_lp.variable_upper_bounds,
            np.full(m_a, np.inf),
            np.where(np.isfinite(U.d), np.inf, 0.0),
        ])
        return LpProblem(MIN, cost, rows, senses, np.array(rhs), lb, ub)

    if isinstance(U, PolyhedralAffine):
        n = U.n
        if base_lp.n_vars != n:
            raise LengthMismatch("base LP variable count != n")
        k = U.k
        m_a = U.A.shape[0]
        m_q = base_lp.n_rows
        n_tot = n + m_a
        cost = np.concatenate([U.c0, U.b])
        rows = np.zeros((m_q + k, n_tot))
        rows[:m_q, :n] = base_lp.constraint_matrix
        senses = list(base_lp.constraint_senses)
        rhs = list(base_lp.rhs)
        for r in range(k):
            row = m_q + r
            rows[row, :n] = -U.C[:, r]
            rows[row, n:] = U.A[:, r]
            senses.append(GE)
            rhs.append(0.0)
        lb = np.concatenate([base_lp.variable_lower_bounds, np.zeros(m_a)])
        ub = np.concatenate([base_lp.variable_upper_bounds, np.full(m_a, np.inf)])
        return LpProblem(MIN, cost, rows, senses, np.array(rhs), lb, ub)

    raise VariantMismatch("dual reformulation exists only for polyhedral shapes")


@dataclass(frozen=True)
class WidthParams:
    """Width descriptors of a normalized set; fields are None when the
    variant does not define them."""

    beta: float | None = None
    gamma: float | None = None
    c_min: float | None = None
    c_max: float | None = None
    lambda_min: float | None = None
    lambda_max: float | None = None


def width_params(U: UncertaintySet) -> WidthParams:
    """beta = min over active columns of the column max of A, gamma = max
    entry of A; c_min / c_max over generator entries; lambda extremes of D."""
    if isinstance(U, PolyhedralDirect):
        active = U.d > 0
        if not np.any(active):
            raise DegenerateWidth("no active perturbation coordinates")
        A = U.A[:, active]
        if A.shape[0] == 0:
            raise DegenerateWidth("no rows left after normalization")
        colmax = A.max(axis=0)
        if np.any(colmax == 0.0):
            raise DegenerateWidth("active column with no positive row entry")
        return WidthParams(beta=float(colmax.min()), gamma=float(A.max()))
    if isinstance(U, PolyhedralAffine):
        if U.k == 0:
            raise DegenerateWidth("no generators")
        colmax = U.A.max(axis=0) if U.A.shape[0] else np.zeros(U.k)
        if np.any(colmax == 0.0):
            raise DegenerateWidth("generator column with no positive row entry")
        pos = U.C[U.C > 0]
        return WidthParams(
            beta=float(colmax.min()),
            gamma=float(U.A.max()),
            c_min=float(pos.min()),
            c_max=float(U.C.max()),
        )
    if isinstance(U, EllipsoidDirect):
        eig = np.linalg.eigvalsh(U.D)
        return WidthParams(lambda_min=float(eig[0]), lambda_max=float(eig[-1]))
    if isinstance(U, EllipsoidAffine):
        eig = np.linalg.eigvalsh(U.D)
        pos = U.C[U.C > 0]
        return WidthParams(
            c_min=float(pos.min()) if pos.size else None,
            c_max=float(U.C.max()) if U.C.size else None,
            lambda_min=float(eig[0]),
            lambda_max=float(eig[-1]),
        )
    raise VariantMismatch(f"unknown uncertainty variant {type(U).__name__}")


def parse_uncertainty(document) -> UncertaintySet:
    """Build an uncertainty set from its JSON form.  ``d`` entries may be
    numbers, the string "inf", or null for an unbounded coordinate."""
    import json

    if isinstance(document, str):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}") from exc
    else:
        doc = document
    if not isinstance(doc, dict) or "type" not in doc:
        raise SchemaError("uncertainty document must be an object with a 'type'")
    kind = doc["type"]

    def need(*keys):
        for key in keys:
            if key not in doc:
                raise SchemaError(f"{kind}: missing field {key!r}")

    def vec_d(raw):
        out = []
        for v in raw:
            if v is None or (isinstance(v, str) and v.lower() == "inf"):
                out.append(np.inf)
            else:
                out.append(float(v))
        return np.array(out)

    try:
        if kind == "budget":
            need("c0", "d", "k_budget")
            return budget_set(doc["c0"], doc["d"], int(doc["k_budget"]))
        if kind == "poly_direct":
            need("c0", "d", "A", "b")
            return PolyhedralDirect(doc["c0"], vec_d(doc["d"]), doc["A"], doc["b"])
        if kind == "poly_affine":
            need("c0", "C", "A", "b")
            return PolyhedralAffine(doc["c0"], doc["C"], doc["A"], doc["b"])
        if kind == "ellipsoid_direct":
            need("c0", "D")
            return EllipsoidDirect(doc["c0"], doc["D"])
        if kind == "ellipsoid_affine":
            need("c0", "C", "D")
            return EllipsoidAffine(
                doc["c0"], doc["C"], doc["D"],
                bool(doc.get("sign_constrained", True)),
            )
    except (ValueError, LengthMismatch) as exc:
        raise SchemaError(f"{kind}: {exc}") from exc
    raise SchemaError(f"unknown uncertainty type {kind!r}")

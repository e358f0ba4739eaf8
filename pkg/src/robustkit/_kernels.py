"""Hot numeric kernels, written in a numba-compatible numpy subset.

Every function here is wrapped by :func:`robustkit._backend.jit_kernel`,
so the same source runs jitted (default) or as plain numpy when
``ROBUSTKIT_BACKEND=numpy``.
"""

import numpy as np

from robustkit._backend import jit_kernel

# simplex_loop return codes
OPTIMAL = 0
UNBOUNDED = 1
MAXITER = 2


def _simplex_loop(A, b, c, lb, ub, basis, vstat, xval, max_iter, pivot_tol, opt_tol):
    """Bounded-variable primal simplex on equality-form data.

    A (m,N), b (m): equality constraints A x = b.
    c (N): objective to minimize.
    lb/ub (N): variable bounds, lb finite, ub may be +inf.
    basis (m): index of the basic variable of each row.
    vstat (N): 0 = nonbasic at lower, 1 = nonbasic at upper, 2 = basic.
    xval (N): current point; mutated in place along with basis/vstat.

    Entering variable follows Bland's rule (smallest eligible index); ratio
    ties break on the smallest leaving-variable index, so the walk is
    deterministic and cannot cycle.  Basic values are recomputed from a
    fresh solve each iteration to keep drift out of long runs.

    Returns (code, iterations) with code OPTIMAL / UNBOUNDED / MAXITER.
    """
    m, n_total = A.shape
    iters = 0
    while iters < max_iter:
        iters += 1

        B = np.empty((m, m))
        for i in range(m):
            for kk in range(m):
                B[i, kk] = A[i, basis[kk]]

        # residual of the nonbasic part, then refresh basic values
        r = b.copy()
        for j in range(n_total):
            if vstat[j] != 2 and xval[j] != 0.0:
                for i in range(m):
                    r[i] -= A[i, j] * xval[j]
        xb = np.linalg.solve(B, r)
        for kk in range(m):
            xval[basis[kk]] = xb[kk]

        BT = np.empty((m, m))
        for i in range(m):
            for kk in range(m):
                BT[kk, i] = B[i, kk]
        cb = np.empty(m)
        for kk in range(m):
            cb[kk] = c[basis[kk]]
        y = np.linalg.solve(BT, cb)

        # Bland: smallest-index eligible entering variable
        enter = -1
        sigma = 1.0
        for j in range(n_total):
            if vstat[j] == 2:
                continue
            dj = c[j]
            for i in range(m):
                dj -= y[i] * A[i, j]
            if vstat[j] == 0 and dj < -opt_tol:
                enter = j
                sigma = 1.0
                break
            if vstat[j] == 1 and dj > opt_tol:
                enter = j
                sigma = -1.0
                break
        if enter < 0:
            return OPTIMAL, iters

        col = np.empty(m)
        for i in range(m):
            col[i] = A[i, enter]
        w = np.linalg.solve(B, col)

        # ratio test; start with the entering variable's own bound flip
        best_t = ub[enter] - lb[enter]
        best_row = -1
        best_var = enter
        best_hit = vstat[enter] ^ 1
        for i in range(m):
            wi = sigma * w[i]
            bi = basis[i]
            if wi > pivot_tol:
                ti = (xval[bi] - lb[bi]) / wi
                hit = 0
            elif wi < -pivot_tol:
                if not np.isfinite(ub[bi]):
                    continue
                ti = (ub[bi] - xval[bi]) / (-wi)
                hit = 1
            else:
                continue
            if ti < 0.0:
                ti = 0.0
            if ti < best_t - 1e-12 or (ti <= best_t + 1e-12 and bi < best_var):
                best_t = ti
                best_row = i
                best_var = bi
                best_hit = hit

        if not np.isfinite(best_t):
            return UNBOUNDED, iters

        t = best_t
        if t < 0.0:
            t = 0.0
        xval[enter] += sigma * t
        for i in range(m):
            xval[basis[i]] -= sigma * t * w[i]

        if best_row < 0:
            # bound flip: entering variable crosses to its other bound
            vstat[enter] = best_hit
            xval[enter] = ub[enter] if best_hit == 1 else lb[enter]
        else:
            leave = basis[best_row]
            vstat[leave] = best_hit
            xval[leave] = ub[leave] if best_hit == 1 else lb[leave]
            basis[best_row] = enter
            vstat[enter] = 2

    return MAXITER, iters


def _greedy_cover(memb, cost):
    """Ratio-greedy set cover.

    memb (m,n) uint8 element-set incidence, cost (n) >= 0.  Repeatedly picks
    the set minimizing cost / newly-covered-count, smallest index on ties.
    Returns the 0/1 selection vector.  Caller guarantees every element is
    coverable.
    """
    m, n = memb.shape
    covered = np.zeros(m, np.uint8)
    chosen = np.zeros(n, np.float64)
    n_covered = 0
    while n_covered < m:
        best = -1
        best_ratio = np.inf
        for j in range(n):
            if chosen[j] == 1.0:
                continue
            new = 0
            for i in range(m):
                if memb[i, j] == 1 and covered[i] == 0:
                    new += 1
            if new == 0:
                continue
            ratio = cost[j] / new
            if ratio < best_ratio:
                best_ratio = ratio
                best = j
        chosen[best] = 1.0
        for i in range(m):
            if memb[i, best] == 1 and covered[i] == 0:
                covered[i] = 1
                n_covered += 1
    return chosen


simplex_loop = jit_kernel(_simplex_loop)
greedy_cover = jit_kernel(_greedy_cover)

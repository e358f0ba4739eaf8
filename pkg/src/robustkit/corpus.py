"""Seeded generators for uncertainty sets, shared by the experiment runner
and the test corpora.  Every generator takes an explicit rng so corpora are
reproducible from a single master seed."""

from __future__ import annotations

import numpy as np

from robustkit.instances import SetCoverInstance, random_instance
from robustkit.uncertainty import (
    EllipsoidAffine,
    EllipsoidDirect,
    PolyhedralAffine,
    PolyhedralDirect,
    budget_set,
)


def random_budget(rng: np.random.Generator, c0, d_range=(0.2, 1.5), k_budget=None):
    n = len(c0)
    d = rng.uniform(d_range[0], d_range[1], n)
    if k_budget is None:
        k_budget = int(rng.integers(1, max(2, n // 2 + 1)))
    return budget_set(c0, d, k_budget)


def random_poly_direct(rng, c0, m_rows=2, a_scale=1.0, d_range=(0.2, 1.5), with_box=True):
    n = len(c0)
    A = rng.uniform(0.0, a_scale, (m_rows, n))
    # keep every column constrained so widths stay finite
    for j in range(n):
        if A[:, j].max() <= 1e-9:
            A[int(rng.integers(m_rows)), j] = rng.uniform(0.5, 1.0) * a_scale
    b = rng.uniform(0.5, 2.0, m_rows)
    d = rng.uniform(d_range[0], d_range[1], n) if with_box else np.full(n, np.inf)
    return PolyhedralDirect(c0, d, A, b)


def random_poly_affine(rng, c0, k=2, m_rows=2, gen_scale=1.0, gen_density=0.7):
    n = len(c0)
    C = rng.uniform(0.1, gen_scale, (n, k)) * (rng.random((n, k)) < gen_density)
    for r in range(k):
        if C[:, r].max() <= 0:
            C[int(rng.integers(n)), r] = rng.uniform(0.5, 1.0) * gen_scale
    A = rng.uniform(0.1, 1.0, (m_rows, k))
    b = rng.uniform(0.5, 2.0, m_rows)
    return PolyhedralAffine(c0, C, A, b)


def _positive_inverse_shape(rng, dim, lam_range=(0.3, 1.5), diagonal=None):
    """Symmetric PD matrix whose inverse is entrywise nonnegative: either a
    positive diagonal or the inverse of a*I + b*ones."""
    if diagonal is None:
        diagonal = bool(rng.random() < 0.5)
    if diagonal:
        return np.diag(rng.uniform(lam_range[0], lam_range[1], dim))
    a = rng.uniform(1.0 / lam_range[1], 1.0 / lam_range[0])
    b = rng.uniform(0.05, 0.5) / dim
    return np.linalg.inv(a * np.eye(dim) + b * np.ones((dim, dim)))


def random_ellipsoid_direct(rng, c0, lam_range=(0.3, 1.5)):
    return EllipsoidDirect(c0, _positive_inverse_shape(rng, len(c0), lam_range))


def random_ellipsoid_affine_free(rng, c0, k=2, lam_range=(0.3, 1.5), gen_scale=1.0):
    """Free-sign affine ellipsoid with D C^T >= 0 by construction: entrywise
    nonnegative PD shape (a*I + b*ones scaled) times nonnegative generators."""
    n = len(c0)
    C = rng.uniform(0.1, gen_scale, (n, k))
    a = rng.uniform(lam_range[0], lam_range[1])
    b = rng.uniform(0.0, 0.3) * a / k
    D = a * np.eye(k) + b * np.ones((k, k))
    return EllipsoidAffine(c0, C, D, sign_constrained=False)


def random_ellipsoid_affine_signed(rng, c0, k=2, lam_range=(0.3, 1.5), gen_scale=1.0):
    """Sign-constrained affine ellipsoid with entrywise-nonnegative inverse
    shape."""
    n = len(c0)
    C = rng.uniform(0.1, gen_scale, (n, k))
    D = _positive_inverse_shape(rng, k, lam_range)
    return EllipsoidAffine(c0, C, D, sign_constrained=True)


UNCERTAINTY_GENERATORS = {
    "budget": random_budget,
    "poly_direct": random_poly_direct,
    "poly_affine": random_poly_affine,
    "ellipsoid_direct": random_ellipsoid_direct,
    "ellipsoid_affine_free": random_ellipsoid_affine_free,
    "ellipsoid_affine_signed": random_ellipsoid_affine_signed,
}


def generate_uncertainty(kind: str, rng: np.random.Generator, c0, **params):
    if kind not in UNCERTAINTY_GENERATORS:
        raise ValueError(f"unknown uncertainty generator {kind!r}")
    return UNCERTAINTY_GENERATORS[kind](rng, np.asarray(c0, dtype=float), **params)


def instance_corpus(master_seed: int, count: int, n_range=(4, 12), m_range=(3, 8),
                    density=(0.3, 0.6), cost_range=(0.5, 2.0)):
    """Deterministic list of random covering instances."""
    rng = np.random.default_rng(master_seed)
    out: list[SetCoverInstance] = []
    for _ in range(count):
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        m = int(rng.integers(m_range[0], m_range[1] + 1))
        dens = float(rng.uniform(density[0], density[1]))
        seed = int(rng.integers(2**31))
        out.append(random_instance(seed, n, m, dens, cost_range))
    return out

"""The nominal covering problem: set-cover instances, feasibility,
LP relaxation, parsing, and seeded random generation.

The reduction and verifier layers only touch instances through
``lp_relaxation`` / ``is_feasible`` / coordinatewise round-up, so any other
covering problem exposing the same three hooks could be swapped in.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from robustkit.errors import (
    LengthMismatch,
    NegativeCost,
    SchemaError,
    UncoverableElement,
)
from robustkit.lp_core import GE, MIN, LpProblem


@dataclass(frozen=True, eq=False)
class SetCoverInstance:
    """Universe of ``universe_size`` elements, ``sets`` as tuples of element
    indices, and a nonnegative nominal cost per set.

    Immutable after construction; the empty selection is never feasible
    because the universe is required to be non-empty.
    """

    universe_size: int
    sets: tuple[tuple[int, ...], ...]
    nominal_cost: np.ndarray

    def __post_init__(self):
        m = self.universe_size
        if m < 1:
            raise SchemaError("universe must be non-empty")
        if len(self.sets) < 1:
            raise SchemaError("at least one set required")
        object.__setattr__(
            self, "sets", tuple(tuple(sorted(set(map(int, s)))) for s in self.sets)
        )
        object.__setattr__(
            self, "nominal_cost", np.asarray(self.nominal_cost, dtype=float)
        )
        if self.nominal_cost.size != len(self.sets):
            raise LengthMismatch("one cost per set required")
        if np.any(self.nominal_cost < 0):
            raise NegativeCost("negative set cost")
        seen = np.zeros(m, dtype=bool)
        for s in self.sets:
            for e in s:
                if not 0 <= e < m:
                    raise SchemaError(f"element {e} outside universe of size {m}")
                seen[e] = True
        if not seen.all():
            missing = int(np.nonzero(~seen)[0][0])
            raise UncoverableElement(f"element {missing} appears in no set")

    @property
    def n_sets(self) -> int:
        return len(self.sets)

    @cached_property
    def membership(self) -> np.ndarray:
        """(m, n) uint8 incidence matrix: memb[e, j] = 1 iff e in sets[j]."""
        memb = np.zeros((self.universe_size, self.n_sets), dtype=np.uint8)
        for j, s in enumerate(self.sets):
            for e in s:
                memb[e, j] = 1
        return memb

    @cached_property
    def cheapest_cover_per_element(self) -> np.ndarray:
        """Index of the cheapest (nominal-cost, then index) set covering each
        element; used by rounding alteration."""
        memb = self.membership
        out = np.empty(self.universe_size, dtype=np.int64)
        for e in range(self.universe_size):
            js = np.nonzero(memb[e])[0]
            out[e] = js[np.argmin(self.nominal_cost[js])]
        return out

    def to_json(self) -> str:
        doc = {
            "m": self.universe_size,
            "sets": [list(s) for s in self.sets],
            "cost": [float(c) for c in self.nominal_cost],
        }
        return json.dumps(doc, sort_keys=False)


def is_feasible(instance: SetCoverInstance, x) -> bool:
    """True iff the 0/1 selection x covers every element.  Monotone: adding
    sets never breaks feasibility."""
    x = np.asarray(x, dtype=float)
    if x.size != instance.n_sets:
        raise LengthMismatch(f"selection length {x.size} != {instance.n_sets}")
    return bool(np.all(instance.membership @ (x > 0.5) >= 1))


def lp_relaxation(instance: SetCoverInstance, cost=None) -> LpProblem:
    """Covering LP: min cost @ x, every element covered by total weight >= 1,
    x in [0,1].  The unit upper bound is valid for any nonnegative covering
    objective and keeps the feasible region bounded."""
    c = instance.nominal_cost if cost is None else np.asarray(cost, dtype=float)
    if c.size != instance.n_sets:
        raise LengthMismatch("cost length mismatch")
    if np.any(c < 0):
        raise NegativeCost("covering relaxation needs nonnegative cost")
    m = instance.universe_size
    return LpProblem(
        MIN,
        c,
        instance.membership.astype(float),
        [GE] * m,
        np.ones(m),
        np.zeros(instance.n_sets),
        np.ones(instance.n_sets),
    )


def parse_instance(document: str | dict) -> SetCoverInstance:
    """Validate the instance JSON {"m": int, "sets": [[int,...],...],
    "cost": [float,...]} and build an instance."""
    if isinstance(document, str):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}") from exc
    else:
        doc = document
    if not isinstance(doc, dict):
        raise SchemaError("instance document must be a JSON object")
    for key in ("m", "sets", "cost"):
        if key not in doc:
            raise SchemaError(f"missing field {key!r}")
    if not isinstance(doc["m"], int):
        raise SchemaError("'m' must be an integer")
    if not isinstance(doc["sets"], list) or not all(
        isinstance(s, list) and all(isinstance(e, int) for e in s) for s in doc["sets"]
    ):
        raise SchemaError("'sets' must be a list of integer lists")
    if not isinstance(doc["cost"], list) or not all(
        isinstance(c, (int, float)) for c in doc["cost"]
    ):
        raise SchemaError("'cost' must be a list of numbers")
    return SetCoverInstance(doc["m"], tuple(tuple(s) for s in doc["sets"]), doc["cost"])


def random_instance(
    seed: int,
    n: int,
    m: int,
    density: float = 0.3,
    cost_range: tuple[float, float] = (0.5, 2.0),
) -> SetCoverInstance:
    """Seeded random instance: each set holds each element independently with
    probability ``density``; every element left uncovered is then assigned to
    one uniformly chosen set; costs are uniform over ``cost_range``."""
    if not 0 < density <= 1:
        raise ValueError("density must lie in (0, 1]")
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 sets and m >= 1 elements")
    rng = np.random.default_rng(seed)
    memb = rng.random((m, n)) < density
    for e in range(m):
        if not memb[e].any():
            memb[e, int(rng.integers(n))] = True
    cost = rng.uniform(cost_range[0], cost_range[1], n)
    sets = tuple(tuple(int(e) for e in np.nonzero(memb[:, j])[0]) for j in range(n))
    return SetCoverInstance(m, sets, cost)

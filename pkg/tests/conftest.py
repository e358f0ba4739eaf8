import numpy as np
import pytest

from robustkit.instances import SetCoverInstance
from robustkit.uncertainty import budget_set, normalize


@pytest.fixture(scope="session")
def tiny1():
    # two elements; singleton sets at cost 1 each and the full set at 1.5
    return SetCoverInstance(2, ((0,), (1,), (0, 1)), [1.0, 1.0, 1.5])


@pytest.fixture(scope="session")
def tiny2():
    # two elements, one singleton set each: the unique cover picks both
    return SetCoverInstance(2, ((0,), (1,)), [1.0, 1.0])


@pytest.fixture(scope="session")
def tiny1_budget():
    U, _ = normalize(budget_set([1.0, 1.0, 1.5], [1.0, 1.0, 1.0], 1))
    return U


@pytest.fixture(scope="session")
def tiny2_budget():
    U, _ = normalize(budget_set([1.0, 1.0], [1.0, 1.0], 1))
    return U


def random_lp(rng, max_vars=6, max_rows=8):
    """Random bounded-below LP with mixed senses and a few finite upper
    bounds; used to cross-check the simplex against vertex enumeration."""
    from robustkit.lp_core import LpProblem

    n = int(rng.integers(1, max_vars + 1))
    m = int(rng.integers(1, max_rows + 1))
    A = np.round(rng.uniform(-2, 3, (m, n)), 3)
    senses = [str(rng.choice(["<=", ">=", "="])) if n > 2 else str(rng.choice(["<=", ">="]))
              for _ in range(m)]
    b = np.round(rng.uniform(-1, 4, m), 3)
    c = np.round(rng.uniform(-2, 3, n), 3)
    ub = np.where(rng.random(n) < 0.5, rng.uniform(0.5, 3, n), np.inf)
    return LpProblem("min", c, A, senses, b, np.zeros(n), ub)

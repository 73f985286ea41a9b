import itertools
import random

import pytest

from submax.core import (CoverageOracle, FacilityLocationOracle, Instance,
                         Item, WeightedCoverageOracle)


def coverage_instance(cover, costs=None, K=2, name="inst"):
    costs = costs or {}
    items = tuple(Item(e, costs.get(e, 1)) for e in cover)
    return Instance(items, K, CoverageOracle(cover), name=name)


@pytest.fixture
def instance_a():
    # Four unit-cost sets over {1..6}; best pair is {a, d} covering all six.
    return coverage_instance(
        {"a": {"1", "2", "3"}, "b": {"3", "4"}, "c": {"5"}, "d": {"4", "5", "6"}},
        K=2, name="A")


@pytest.fixture
def instance_b():
    # Knapsack variant: costs a:2 b:1 c:1 d:2, K=3; optimum is {a, b} worth 5.
    return coverage_instance(
        {"a": {"1", "2", "3"}, "b": {"4", "5"}, "c": {"5"}, "d": {"3", "6"}},
        costs={"a": 2, "b": 1, "c": 1, "d": 2}, K=3, name="B")


def random_coverage_instance(rng, n=None, K=None, universe=None, unit=False,
                             max_cost=None, name=None):
    n = n or rng.randint(4, 12)
    K = K or rng.randint(1, 5 if unit else 10)
    universe = universe or rng.randint(4, 14)
    cover = {}
    costs = {}
    for i in range(n):
        e = f"e{i}"
        size = rng.randint(1, max(1, universe // 2))
        cover[e] = set(str(p) for p in rng.sample(range(universe), size))
        costs[e] = 1 if unit else rng.randint(1, max_cost or max(1, K))
    items = tuple(Item(e, costs[e]) for e in cover)
    return Instance(items, K, CoverageOracle(cover), name=name or f"rand{n}")


def random_facility_instance(rng, n=None, K=None, universe=None, unit=True):
    n = n or rng.randint(3, 8)
    K = K or rng.randint(1, 4)
    universe = universe or rng.randint(3, 8)
    sim = [[round(rng.uniform(0, 5), 3) for _ in range(n)] for _ in range(universe)]
    ids = [f"e{i}" for i in range(n)]
    items = tuple(Item(e, 1 if unit else rng.randint(1, K)) for e in ids)
    return Instance(items, K, FacilityLocationOracle(ids, sim), name="fac")


def brute_force_by_size(instance):
    """Independent optimum for unit-cost instances: enumerate subsets of size <= K."""
    ids = instance.ids
    best_val, best = 0.0, frozenset()
    for r in range(0, min(instance.K, len(ids)) + 1):
        for combo in itertools.combinations(ids, r):
            v = instance.oracle._raw_value(frozenset(combo))
            if v > best_val:
                best_val, best = v, frozenset(combo)
    return best, best_val

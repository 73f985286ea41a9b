"""Ground-set model, submodular value oracles, and the exact desk-scale solver.

Everything downstream works against the ``ValueOracle`` interface: a monotone
submodular set function f with f(empty) = 0, evaluated on sets of item ids and
instrumented with a thread-safe call counter. A ``marginal`` evaluation counts
as a single oracle call, matching how the algorithms' running time is budgeted.
"""

from __future__ import annotations

import itertools
import random
import threading
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

# Acceptance-biased comparison slack for thresholds over float-valued oracles.
FLOAT_TOL = 1e-12

# Hard ceiling for exhaustive search; beyond this the blowup is pointless.
BRUTE_FORCE_MAX_N = 24


class InstanceError(ValueError):
    """Malformed instance data (unknown ids, bad costs, inconsistent oracle)."""


class BruteForceCapacityError(InstanceError):
    """Ground set too large for exhaustive verification."""


@dataclass(frozen=True)
class Item:
    """A ground-set element with a positive integer knapsack size."""

    id: str
    cost: int = 1

    def __post_init__(self):
        if not isinstance(self.cost, int) or self.cost < 1:
            raise InstanceError(f"item {self.id!r}: cost must be an integer >= 1, got {self.cost!r}")


class ValueOracle:
    """Base class for monotone submodular set functions over item ids.

    Subclasses implement ``_raw_value`` (uncounted). Public ``value`` and
    ``marginal`` validate ids and bump the call counter; ``marginal`` costs one
    call, not two. ``integral`` signals that values are exact integers, which
    lets verification code compare without tolerance.
    """

    integral = False

    def __init__(self, ids: Iterable[str]):
        self._ids = frozenset(ids)
        self._calls = 0
        self._lock = threading.Lock()

    @property
    def ids(self) -> frozenset:
        return self._ids

    @property
    def calls(self) -> int:
        return self._calls

    def _count(self, k: int = 1):
        with self._lock:
            self._calls += k

    def _check_ids(self, S: Iterable[str]):
        unknown = [e for e in S if e not in self._ids]
        if unknown:
            raise InstanceError(f"unknown item id(s): {sorted(unknown)!r}")

    def _raw_value(self, S: frozenset) -> float:
        raise NotImplementedError

    def value(self, S: Iterable[str]) -> float:
        """f(S). One oracle call."""
        S = frozenset(S)
        self._check_ids(S)
        self._count()
        return self._raw_value(S)

    def marginal(self, e: str, S: Iterable[str]) -> float:
        """f(e | S) = f(S + e) - f(S). Counted as one oracle call."""
        S = frozenset(S)
        self._check_ids(S)
        self._check_ids([e])
        self._count()
        return self._raw_value(S | {e}) - self._raw_value(S)


class CoverageOracle(ValueOracle):
    """f(S) = number of universe points covered by the union of S's sets.

    Values are exact integers; internally each item is a bitmask so unions are
    single big-int ORs.
    """

    integral = True

    def __init__(self, cover: dict):
        super().__init__(cover.keys())
        points = sorted({p for ps in cover.values() for p in ps})
        self._bit = {p: i for i, p in enumerate(points)}
        self.universe = tuple(points)
        self.cover = {e: frozenset(ps) for e, ps in cover.items()}
        self._mask = {
            e: sum(1 << self._bit[p] for p in ps) for e, ps in self.cover.items()
        }

    def mask_of(self, e: str) -> int:
        return self._mask[e]

    def _raw_value(self, S: frozenset) -> float:
        m = 0
        for e in S:
            m |= self._mask[e]
        return m.bit_count()


class WeightedCoverageOracle(ValueOracle):
    """f(S) = total weight of the universe points covered by S."""

    def __init__(self, cover: dict, weights: dict):
        super().__init__(cover.keys())
        self.cover = {e: frozenset(ps) for e, ps in cover.items()}
        points = sorted({p for ps in self.cover.values() for p in ps})
        self.universe = tuple(points)
        self.weights = {p: weights.get(p, 1) for p in points}
        for p, w in self.weights.items():
            if w < 0:
                raise InstanceError(f"universe point {p!r}: negative weight {w!r}")
        self.integral = all(isinstance(w, int) for w in self.weights.values())
        self._bit = {p: i for i, p in enumerate(points)}
        self._mask = {
            e: sum(1 << self._bit[p] for p in ps) for e, ps in self.cover.items()
        }
        self._wvec = [self.weights[p] for p in points]

    def mask_of(self, e: str) -> int:
        return self._mask[e]

    def _raw_value(self, S: frozenset) -> float:
        m = 0
        for e in S:
            m |= self._mask[e]
        total = 0
        while m:
            low = m & -m
            total += self._wvec[low.bit_length() - 1]
            m ^= low
        return total


class FacilityLocationOracle(ValueOracle):
    """f(S) = sum over universe points u of max_{e in S} sim(u, e).

    ``sim`` is a dense nonnegative matrix, rows = universe points, columns =
    items in the given order. Float-valued; invariant checks use a 1e-9
    tolerance.
    """

    integral = False

    def __init__(self, item_ids: Sequence[str], sim):
        super().__init__(item_ids)
        self.item_ids = tuple(item_ids)
        self.sim = np.asarray(sim, dtype=float)
        if self.sim.ndim != 2 or self.sim.shape[1] != len(self.item_ids):
            raise InstanceError("similarity matrix must be 2-D with one column per item")
        if (self.sim < 0).any():
            raise InstanceError("similarity entries must be nonnegative")
        self._col = {e: i for i, e in enumerate(self.item_ids)}

    def _raw_value(self, S: frozenset) -> float:
        if not S:
            return 0.0
        cols = [self._col[e] for e in S]
        return float(self.sim[:, cols].max(axis=1).sum())


@dataclass
class Instance:
    """A stream of items, a budget K, and the value oracle over the items.

    The item sequence fixes the arrival order for every pass. Individual costs
    must not exceed K (items that cannot ever fit are rejected up front); the
    total cost may.
    """

    items: tuple
    K: int
    oracle: ValueOracle
    name: str = "instance"

    def __post_init__(self):
        self.items = tuple(self.items)
        ids = [it.id for it in self.items]
        if len(set(ids)) != len(ids):
            raise InstanceError("duplicate item ids")
        if self.K < 0:
            raise InstanceError(f"K must be >= 0, got {self.K}")
        if self.K >= 1:
            too_big = [it.id for it in self.items if it.cost > self.K]
            if too_big:
                raise InstanceError(f"item cost exceeds K={self.K}: {too_big!r}")
        missing = set(ids) - set(self.oracle.ids)
        if missing:
            raise InstanceError(f"items missing from oracle: {sorted(missing)!r}")
        self._cost = {it.id: it.cost for it in self.items}

    @property
    def n(self) -> int:
        return len(self.items)

    @property
    def ids(self) -> tuple:
        return tuple(it.id for it in self.items)

    def cost_of(self, e: str) -> int:
        return self._cost[e]

    def cost(self, S: Iterable[str]) -> int:
        return sum(self._cost[e] for e in S)

    def is_unit_cost(self) -> bool:
        return all(it.cost == 1 for it in self.items)


@dataclass
class ResourceReport:
    """Measured resources of one algorithm run."""

    passes: int = 0
    oracle_calls: int = 0
    peak_stored: int = 0
    wall_time_ms: float = 0.0

    def as_record(self) -> dict:
        return {
            "passes": self.passes,
            "oracle_calls": self.oracle_calls,
            "peak_stored": self.peak_stored,
            "wall_time_ms": self.wall_time_ms,
        }


@dataclass
class Solution:
    """A feasible selected set, its recomputed objective value, and resources."""

    chosen: frozenset
    value: float
    report: ResourceReport = field(default_factory=ResourceReport)
    branch: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def sorted_ids(self) -> tuple:
        return tuple(sorted(self.chosen))


def solution_key(value: float, cost: int, ids: frozenset):
    """Candidate ordering: higher f, then smaller c(S), then lexicographic ids."""
    return (-value, cost, tuple(sorted(ids)))


@dataclass
class BruteForceResult:
    chosen: frozenset
    value: float
    costs_desc: tuple  # costs of the optimum's items, nonincreasing

    def __iter__(self):
        # Allows ``ids, value = brute_force_opt(...)``.
        return iter((self.chosen, self.value))


def brute_force_opt(instance: Instance, max_n: int = BRUTE_FORCE_MAX_N) -> BruteForceResult:
    """Exhaustively maximize f over all subsets with c(S) <= K.

    The verification oracle for every approximation test: evaluates the raw
    (uncounted) oracle so measured call counts of the algorithm under test are
    untouched. Ties break toward smaller total cost, then lexicographic ids.
    """
    n = instance.n
    if n > max_n:
        raise BruteForceCapacityError(f"brute force refused for n={n} > {max_n}")
    ids = instance.ids
    costs = [instance.cost_of(e) for e in ids]
    raw = instance.oracle._raw_value

    best_sets = [frozenset()]
    best_val = raw(frozenset())

    mask_oracle = isinstance(instance.oracle, (CoverageOracle, WeightedCoverageOracle))
    if mask_oracle and n <= 20:
        res = _brute_force_masks(instance, ids, costs)
    else:
        res = _brute_force_enumerate(instance, ids, costs, raw)
    cand_val, cand_sets = res
    if cand_val > best_val:
        best_val, best_sets = cand_val, cand_sets
    elif cand_val == best_val:
        best_sets = best_sets + [s for s in cand_sets if s not in best_sets]

    best = min(best_sets, key=lambda s: (instance.cost(s), tuple(sorted(s))))
    costs_desc = tuple(sorted((instance.cost_of(e) for e in best), reverse=True))
    return BruteForceResult(frozenset(best), best_val, costs_desc)


def _brute_force_enumerate(instance, ids, costs, raw):
    best_val, best_sets = 0.0, [frozenset()]
    n = len(ids)
    for r in range(1, n + 1):
        for combo in itertools.combinations(range(n), r):
            if sum(costs[i] for i in combo) > instance.K:
                continue
            S = frozenset(ids[i] for i in combo)
            v = raw(S)
            if v > best_val:
                best_val, best_sets = v, [S]
            elif v == best_val:
                best_sets.append(S)
    return best_val, best_sets


def _brute_force_masks(instance, ids, costs):
    # Subset-OR dynamic program; one big-int OR per subset.
    oracle = instance.oracle
    n = len(ids)
    item_masks = [oracle.mask_of(e) for e in ids]
    weighted = isinstance(oracle, WeightedCoverageOracle)
    if weighted:
        pts = oracle.universe
        wvec = [oracle.weights[p] for p in pts]

        def val_of(m):
            total = 0
            while m:
                low = m & -m
                total += wvec[low.bit_length() - 1]
                m ^= low
            return total
    else:
        def val_of(m):
            return m.bit_count()

    union = [0] * (1 << n)
    cost_sum = [0] * (1 << n)
    best_val, best_sets = 0, [frozenset()]
    for s in range(1, 1 << n):
        low = s & -s
        i = low.bit_length() - 1
        union[s] = union[s ^ low] | item_masks[i]
        cost_sum[s] = cost_sum[s ^ low] + costs[i]
        if cost_sum[s] > instance.K:
            continue
        v = val_of(union[s])
        if v > best_val:
            best_val = v
            best_sets = [frozenset(ids[j] for j in range(n) if s >> j & 1)]
        elif v == best_val:
            best_sets.append(frozenset(ids[j] for j in range(n) if s >> j & 1))
    return best_val, best_sets


@dataclass
class SubmodularityWitness:
    kind: str  # "monotone" or "submodular"
    S: frozenset
    T: frozenset
    e: str
    lhs: float
    rhs: float


@dataclass
class CheckResult:
    ok: bool
    trials: int
    witness: Optional[SubmodularityWitness] = None


def check_submodular(oracle: ValueOracle, ground: Iterable[str], trials: int,
                     seed: int = 0, tol: Optional[float] = None) -> CheckResult:
    """Sample random (S subset of T, e not in T) triples and test the oracle laws.

    Checks f(e|S) >= f(e|T) and f(S) <= f(T), exactly for integral oracles and
    within ``tol`` (default 1e-9) otherwise. Returns the first violation as a
    witness; failure is a result, not an exception.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    ground = sorted(ground)
    if tol is None:
        tol = 0.0 if oracle.integral else 1e-9
    rng = random.Random(seed)
    for t in range(trials):
        if not ground:
            break
        T = frozenset(e for e in ground if rng.random() < 0.5)
        S = frozenset(e for e in T if rng.random() < 0.5)
        outside = [e for e in ground if e not in T]
        vs = oracle._raw_value(S)
        vt = oracle._raw_value(T)
        if vs > vt + tol:
            return CheckResult(False, t + 1, SubmodularityWitness("monotone", S, T, "", vs, vt))
        if not outside:
            continue
        e = rng.choice(outside)
        gain_s = oracle._raw_value(S | {e}) - vs
        gain_t = oracle._raw_value(T | {e}) - vt
        if gain_s < gain_t - tol:
            return CheckResult(False, t + 1, SubmodularityWitness("submodular", S, T, e, gain_s, gain_t))
    return CheckResult(True, trials)

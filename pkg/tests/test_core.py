import random

import pytest

from submax.core import (BruteForceCapacityError, CoverageOracle,
                         FacilityLocationOracle, Instance, InstanceError, Item,
                         ValueOracle, WeightedCoverageOracle, brute_force_opt,
                         check_submodular)

from conftest import (brute_force_by_size, coverage_instance,
                      random_coverage_instance, random_facility_instance)


class TestOracleValue:
    def test_union_size(self, instance_a):
        # |{1,2,3} u {4,5,6}| = 6, counted by hand.
        assert instance_a.oracle.value({"a", "d"}) == 6

    def test_empty_set_normalization(self, instance_a):
        assert instance_a.oracle.value(frozenset()) == 0

    def test_partial_union(self, instance_a):
        # |{3,4} u {5}| = 3.
        assert instance_a.oracle.value({"b", "c"}) == 3

    def test_unknown_id_rejected(self, instance_a):
        with pytest.raises(InstanceError):
            instance_a.oracle.value({"zz"})

    def test_marginal_matches_difference(self, instance_b):
        o = instance_b.oracle
        assert o.marginal("b", {"a"}) == o._raw_value(frozenset("ab")) - o._raw_value(frozenset("a"))
        assert o.marginal("b", {"a"}) == 2

    def test_call_counting(self, instance_a):
        o = instance_a.oracle
        before = o.calls
        o.value({"a"})
        o.marginal("b", {"a"})  # one call, not two
        assert o.calls == before + 2


class TestBruteForce:
    def test_instance_a_unit(self, instance_a):
        res = brute_force_opt(instance_a)
        assert res.chosen == frozenset({"a", "d"})
        assert res.value == 6
        assert res.costs_desc == (1, 1)

    def test_instance_b_knapsack(self, instance_b):
        res = brute_force_opt(instance_b)
        assert res.chosen == frozenset({"a", "b"})
        assert res.value == 5
        assert res.costs_desc == (2, 1)

    def test_k_zero(self):
        inst = coverage_instance({"a": {"1"}}, K=0)
        res = brute_force_opt(inst)
        assert res.chosen == frozenset()
        assert res.value == 0

    def test_unit_cost_matches_size_enumeration(self):
        rng = random.Random(7)
        for _ in range(25):
            inst = random_coverage_instance(rng, unit=True)
            res = brute_force_opt(inst)
            _, val = brute_force_by_size(inst)
            assert res.value == val

    def test_mask_path_matches_generic_path(self):
        # The bitmask DP and plain enumeration must agree on knapsack optima.
        from submax.core import _brute_force_enumerate
        rng = random.Random(11)
        for _ in range(15):
            inst = random_coverage_instance(rng)
            res = brute_force_opt(inst)
            ids = inst.ids
            costs = [inst.cost_of(e) for e in ids]
            val, _ = _brute_force_enumerate(inst, ids, costs, inst.oracle._raw_value)
            assert res.value == val

    def test_too_large_rejected(self):
        cover = {f"e{i}": {str(i)} for i in range(25)}
        inst = Instance(tuple(Item(e, 1) for e in cover), 3, CoverageOracle(cover))
        with pytest.raises(BruteForceCapacityError):
            brute_force_opt(inst)

    def test_counter_untouched(self, instance_b):
        before = instance_b.oracle.calls
        brute_force_opt(instance_b)
        assert instance_b.oracle.calls == before


class _SquareOracle(ValueOracle):
    """f(S) = |S|^2: monotone but supermodular, used as a negative control."""

    integral = True

    def _raw_value(self, S):
        return len(S) ** 2


class TestCheckSubmodular:
    def test_coverage_passes(self, instance_a):
        res = check_submodular(instance_a.oracle, instance_a.ids, 1000, seed=1)
        assert res.ok

    def test_square_fails_with_witness(self):
        o = _SquareOracle([f"e{i}" for i in range(6)])
        res = check_submodular(o, o.ids, 1000, seed=2)
        assert not res.ok
        w = res.witness
        assert w.kind == "submodular"
        # Replay the witness: the gain at the larger set must exceed the
        # gain at the smaller one for |S|^2.
        assert w.lhs < w.rhs

    def test_facility_passes(self):
        rng = random.Random(3)
        inst = random_facility_instance(rng, n=7, universe=6)
        res = check_submodular(inst.oracle, inst.ids, 1000, seed=4)
        assert res.ok

    def test_weighted_coverage_passes(self):
        cover = {"a": {"1", "2"}, "b": {"2", "3"}, "c": {"3"}}
        o = WeightedCoverageOracle(cover, {"1": 2, "2": 5, "3": 1})
        assert o.value({"a", "b"}) == 8
        assert check_submodular(o, o.ids, 1000, seed=5).ok

    def test_trials_validated(self, instance_a):
        with pytest.raises(ValueError):
            check_submodular(instance_a.oracle, instance_a.ids, 0)


class TestInstanceValidation:
    def test_duplicate_ids(self):
        with pytest.raises(InstanceError):
            Instance((Item("a"), Item("a")), 2, CoverageOracle({"a": {"1"}}))

    def test_cost_above_k(self):
        with pytest.raises(InstanceError):
            Instance((Item("a", 5),), 3, CoverageOracle({"a": {"1"}}))

    def test_nonpositive_cost(self):
        with pytest.raises(InstanceError):
            Item("a", 0)
        with pytest.raises(InstanceError):
            Item("a", 2.5)  # costs are integers

    def test_thread_safe_counter(self, instance_a):
        import threading
        o = instance_a.oracle
        before = o.calls

        def hammer():
            for _ in range(500):
                o.value({"a"})

        threads = [threading.Thread(target=hammer) for _ in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert o.calls == before + 2000

"""Streaming submodular maximization under cardinality and knapsack budgets.

Multi-pass, small-space algorithms with first-class accounting of passes,
oracle calls, and peak stored items, plus desk-scale brute-force verification.
"""

from .core import (BruteForceCapacityError, BruteForceResult, CheckResult,
                   CoverageOracle, FacilityLocationOracle, Instance,
                   InstanceError, Item, ResourceReport, Solution, ValueOracle,
                   WeightedCoverageOracle, brute_force_opt, check_submodular)
from .instance_io import (load_instance, parse_instance, read_manifest,
                          save_instance, serialize_instance)
from .stream import NestedPassError, StreamSession
from .cardinality import (cardinality_binary_search, cardinality_parallel_guess,
                          simple_cardinality)
from .knapsack import (EstimateResult, GoodItemSet, SizeWindow, approx_039,
                       approx_046, approx_05, best_singleton, heavy_pair,
                       ignore_large, large_first, large_w, modified_simple,
                       near_full_pair_case, nice_item_guarantee,
                       pick_nice_item, simple_knapsack, single_pass_estimate)

__all__ = [
    "BruteForceCapacityError", "BruteForceResult", "CheckResult",
    "CoverageOracle", "FacilityLocationOracle", "Instance", "InstanceError",
    "Item", "ResourceReport", "Solution", "ValueOracle",
    "WeightedCoverageOracle", "brute_force_opt", "check_submodular",
    "load_instance", "parse_instance", "read_manifest", "save_instance",
    "serialize_instance", "NestedPassError", "StreamSession",
    "cardinality_binary_search", "cardinality_parallel_guess",
    "simple_cardinality", "EstimateResult", "GoodItemSet", "SizeWindow",
    "approx_039", "approx_046", "approx_05", "best_singleton", "heavy_pair",
    "ignore_large", "large_first", "large_w", "modified_simple",
    "near_full_pair_case", "nice_item_guarantee", "pick_nice_item",
    "simple_knapsack", "single_pass_estimate",
]

__version__ = "0.1.0"

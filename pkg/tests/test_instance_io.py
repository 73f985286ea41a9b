import pytest

from submax.core import (CoverageOracle, FacilityLocationOracle, InstanceError,
                         WeightedCoverageOracle)
from submax.instance_io import parse_instance, serialize_instance

COVERAGE_TEXT = """\
# a small coverage instance
K 3
item a 2 cover 1 2 3
item b 1 cover 4 5
item c 1 cover 5
item d 2 cover 3 6
"""

WEIGHTED_TEXT = """\
K 2
item a 1 cover 1 2
item b 1 cover 2
weight 1 4
weight 2 1
"""

FACILITY_TEXT = """\
K 2
item a 1
item b 1
facility 3
sim 0.5 1.0
sim 0.25 0.75
sim 1.5 0.0
"""


def test_parse_coverage():
    inst = parse_instance(COVERAGE_TEXT)
    assert inst.K == 3
    assert inst.ids == ("a", "b", "c", "d")
    assert inst.cost_of("a") == 2
    assert isinstance(inst.oracle, CoverageOracle)
    assert inst.oracle.value({"a", "b"}) == 5


def test_parse_weighted():
    inst = parse_instance(WEIGHTED_TEXT)
    assert isinstance(inst.oracle, WeightedCoverageOracle)
    assert inst.oracle.value({"a"}) == 5
    assert inst.oracle.value({"b"}) == 1


def test_parse_facility():
    inst = parse_instance(FACILITY_TEXT)
    assert isinstance(inst.oracle, FacilityLocationOracle)
    # column maxima: max(.5,1.0)+max(.25,.75)+max(1.5,0) = 1.0+0.75+1.5
    assert inst.oracle.value({"a", "b"}) == pytest.approx(3.25)


@pytest.mark.parametrize("text", [COVERAGE_TEXT, WEIGHTED_TEXT, FACILITY_TEXT])
def test_round_trip_is_identity(text):
    first = parse_instance(text)
    dumped = serialize_instance(first)
    second = parse_instance(dumped)
    assert serialize_instance(second) == dumped  # canonical form is a fixpoint
    assert second.K == first.K
    assert second.ids == first.ids
    for e in first.ids:
        assert second.cost_of(e) == first.cost_of(e)
    probe = frozenset(first.ids[:2])
    assert second.oracle._raw_value(probe) == first.oracle._raw_value(probe)


def test_real_valued_cost_rejected():
    with pytest.raises(InstanceError):
        parse_instance("K 3\nitem a 1.5 cover 1\n")


def test_real_valued_k_rejected():
    with pytest.raises(InstanceError):
        parse_instance("K 2.0\nitem a 1 cover 1\n")


def test_missing_k_rejected():
    with pytest.raises(InstanceError):
        parse_instance("item a 1 cover 1\n")


def test_mixed_cover_and_facility_rejected():
    bad = "K 2\nitem a 1 cover 1\nitem b 1\nfacility 1\nsim 0.5 0.5\n"
    with pytest.raises(InstanceError):
        parse_instance(bad)


def test_short_facility_section_rejected():
    with pytest.raises(InstanceError):
        parse_instance("K 2\nitem a 1\nfacility 2\nsim 0.5\n")


def test_comments_ignored():
    inst = parse_instance("# hello\nK 1\n# mid\nitem a 1 cover 1\n")
    assert inst.K == 1

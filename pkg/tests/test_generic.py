import random

import pytest
from hypothesis import given, settings, strategies as st

from conetree import (
    DecoratedStructure, DescriptorError, InvalidStructure, PartialIsomorphismError, TypeDescriptor,
    back_and_forth, build_generic, check_extension_property, count_1types, descriptor_of,
    enumerate_1types, get_base, realize_type, validate,
)
from conetree.core.diagram import one_point_diagram
from conetree.generic import POINT, GenericBuilder, substructures
from conetree.sampling import random_structure

from helpers import build, sym
from oracles import all_structures, oracle_types

# counts over a one-point A, frozen from the brute-force oracle
SINGLETON_COUNTS = {"equality": 4, "graph": 5, "eq2": 7}


def point(base, name="a"):
    return DecoratedStructure(base.signature, [name], [])


def implementation_types(base, A):
    out = set()
    for d in enumerate_1types(base, A):
        M, x = realize_type(base, A, A, d, name="#x")
        out.add(one_point_diagram(M, sorted(A.elements), x))
    return out


def test_singleton_counts_frozen(base):
    A = point(base)
    assert len(oracle_types(base.signature, base.name, A)) == SINGLETON_COUNTS[base.name]
    assert count_1types(base, A) == SINGLETON_COUNTS[base.name]


def test_equality_singleton_kinds():
    kinds = [d.kind for d in enumerate_1types(get_base("equality"), point(get_base("equality")))]
    assert kinds == ["equal", "above", "below", "branch"]


def test_empty_structure_has_one_type(base):
    A = DecoratedStructure(base.signature, [], [])
    assert enumerate_1types(base, A) == [POINT]


@pytest.mark.parametrize("size", [1, 2, 3])
def test_matches_oracle_exhaustively(base, size):
    for A in all_structures(base.signature, base.name, ["a", "b", "c"][:size]):
        ds = enumerate_1types(base, A)
        mine = implementation_types(base, A)
        assert len(mine) == len(ds), "descriptors realize to duplicate types"
        assert mine == oracle_types(base.signature, base.name, A)


def test_invalid_A_rejected():
    A = build("graph", {"r": None, "a": "r"}, {"r": {"R": {("a", "a")}}})
    with pytest.raises(InvalidStructure):
        enumerate_1types(get_base("graph"), A)


def test_realize_equal_is_identity(base):
    A = point(base)
    d = TypeDescriptor("a")
    M, x = realize_type(base, A, A, d)
    assert M is A and x == "a"


def test_realize_above_equality():
    base = get_base("equality")
    A = point(base)
    d = next(d for d in enumerate_1types(base, A) if d.kind == "above")
    M, x = realize_type(base, A, A, d, name="t")
    assert M.parent["t"] == "a" and not M.children["t"]
    assert descriptor_of(base, M, A.elements, x) == d


def test_dtr_descriptors_round_trip_in_bigger_M():
    base = get_base("graph")
    M = build("graph", {"r": None, "a": "r", "b": "r", "c": "a", "d": "a", "e": "b"},
              {"r": {"R": sym(("a", "b"))}, "a": {"R": sym(("c", "d"))}})
    A = M.induced({"a"})
    ds = enumerate_1types(base, A)
    assert len(ds) == 5
    for d in ds:
        M2, x = realize_type(base, M, A, d)
        assert validate(M2, base).ok
        assert M2.induced(M.elements) == M
        assert descriptor_of(base, M2, A.elements, x) == d


def test_realize_errors(base):
    A = point(base)
    d = TypeDescriptor("zz")
    with pytest.raises(DescriptorError):
        realize_type(base, A, A, d)
    above = next(d for d in enumerate_1types(base, A) if d.kind == "above")
    with pytest.raises(DescriptorError):
        realize_type(base, A, A, above, name="a")
    chain3 = build(base.name, {"r": None, "x": "r", "y": "r"})
    with pytest.raises(DescriptorError):
        realize_type(base, chain3, {"x", "y"}, TypeDescriptor("x"))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["equality", "graph", "eq2"]), st.integers(0, 10**6))
def test_realizations_round_trip(name, seed):
    base = get_base(name)
    rng = random.Random(seed)
    M = random_structure(base, rng.randint(1, 6), rng)
    pts = rng.sample(sorted(M.elements), rng.randint(1, min(3, len(M))))
    A = M.induced(M.elements).induced(set(pts) | {M.meet(a, b) for a in pts for b in pts})
    d = rng.choice(enumerate_1types(base, A))
    M2, x = realize_type(base, M, A, d)
    assert validate(M2, base).ok
    assert M2.induced(M.elements) == M
    assert descriptor_of(base, M2, A.elements, x) == d
    assert len(M2) - len(M) <= d.new_points


def test_fan_counts():
    from conetree.witness import fan_structure
    for m in range(1, 5):
        assert count_1types(get_base("graph"), fan_structure(get_base("graph"), m)) >= 2 ** m


def test_builder_single_point(base):
    M = build_generic(base, 1, 1, rounds=3, seed=0)
    assert len(M) == 1


def test_builder_equality_one_round():
    base = get_base("equality")
    builder = GenericBuilder(base, 10, 1, seed=0)
    M = builder.round()
    assert sorted(M.elements) == ["g0000", "g0001", "g0001~meet1", "g0002"]
    have = {descriptor_of(base, M, {"g0000"}, x) for x in M.elements}
    assert have == set(enumerate_1types(base, M.induced({"g0000"})))
    rep = check_extension_property(base, M, 1, substructures_=[("g0000",)])
    assert rep.fraction == 1.0


def test_builder_is_deterministic():
    base = get_base("graph")
    a = build_generic(base, 60, 2, rounds=2, seed=9)
    b = build_generic(base, 60, 2, rounds=2, seed=9)
    assert a == b
    assert validate(a, base).ok


def test_builder_small_budget_reports_partial(base):
    builder = GenericBuilder(base, 3, 1, seed=0)
    M = builder.build(2)
    assert len(M) <= 3
    rep = check_extension_property(base, M, 1)
    assert 0 < rep.fraction < 1


def test_coverage_single_point():
    base = get_base("equality")
    rep = check_extension_property(base, point(base), 1)
    assert (rep.realized, rep.total) == (1, 4)
    assert len(rep.missing()) == 3


def test_coverage_vacuous(base):
    M = random_structure(base, 5, random.Random(0))
    rep = check_extension_property(base, M, 0)
    assert rep.total == 0 and rep.fraction == 1.0


def test_coverage_monotone_in_M():
    # a fixed family of substructures never loses coverage as M grows
    base = get_base("graph")
    builder = GenericBuilder(base, 80, 1, seed=4)
    builder.round()
    fixed = substructures(builder.M, 1)
    prev = check_extension_property(base, builder.M, 1, substructures_=fixed).realized
    for _ in range(2):
        builder.round()
        cur = check_extension_property(base, builder.M, 1, substructures_=fixed).realized
        assert cur >= prev
        prev = cur


def test_coverage_sampling_is_seeded():
    base = get_base("graph")
    M = build_generic(base, 40, 1, rounds=2, seed=1)
    a = check_extension_property(base, M, 2, sample_limit=5, seed=3)
    b = check_extension_property(base, M, 2, sample_limit=5, seed=3)
    assert a.entries == b.entries and len({e[0] for e in a.entries}) == 5


def test_back_and_forth_identity(base):
    M = build_generic(base, 30, 1, rounds=2, seed=2)
    some = sorted(M.elements)[:2]
    f = {x: x for x in some}
    res = back_and_forth(base, M, M, f, steps=50)
    assert res.ok and res.complete
    assert all(res.mapping[x] == x for x in some)


def test_back_and_forth_two_generics():
    base = get_base("equality")
    M = build_generic(base, 60, 2, rounds=3, seed=1)
    N = build_generic(base, 60, 2, rounds=3, seed=2)
    assert M != N
    res = back_and_forth(base, M, N, {}, steps=10)
    assert res.ok and res.steps == 10


def test_back_and_forth_random_order_defect():
    base = get_base("equality")
    M = build_generic(base, 60, 2, rounds=3, seed=1)
    N = build_generic(base, 60, 2, rounds=3, seed=2)
    res = back_and_forth(base, M, N, {}, steps=20, seed=0, order="random")
    assert not res.ok
    direction, x, d = res.failure
    assert direction in ("forth", "back") and isinstance(d, TypeDescriptor)


def test_order_reversing_map_rejected():
    base = get_base("equality")
    M = build("equality", {"r": None, "a": "r"})
    with pytest.raises(PartialIsomorphismError, match="atom"):
        back_and_forth(base, M, M, {"r": "a", "a": "r"})
    with pytest.raises(PartialIsomorphismError):
        back_and_forth(base, M, M, {"r": "zz"})

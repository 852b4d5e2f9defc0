import random

import pytest
from hypothesis import given, settings, strategies as st

from conetree import (
    BaseStructure, DecoratedStructure, SignatureMismatch, UnknownElement, assemble,
    closure_set, cone_partition, get_base, get_signature, meet_closure, validate,
)
from conetree.core.structure import CONES, TREE_ONLY, UNIVERSAL, Signature
from conetree.sampling import random_structure

from conftest import load

GRAPH = get_signature("graph")
EQ = get_signature("equality")


def chain(names, sig=EQ):
    order = [(a, b) for i, b in enumerate(names) for a in names[: i + 1]]
    return DecoratedStructure(sig, names, order)


def fixpoint_closure(M, pts):
    # the slow way: keep adding pairwise meets until nothing changes
    out = set(pts)
    while True:
        new = {M.meet(a, b) for a in out for b in out} | out
        if new == out:
            return out
        out = new


def test_single_point_valid(base):
    M = DecoratedStructure(base.signature, ["a"], [])
    assert validate(M, base, CONES).ok


def test_incomparable_pair_has_no_meet():
    M = DecoratedStructure(EQ, ["a", "b"], [])
    rep = validate(M, get_base("equality"), TREE_ONLY)
    assert [v.axiom for v in rep.violations] == ["T6"]


def test_antisymmetry_violation():
    M = DecoratedStructure(EQ, ["a", "b"], [("a", "b"), ("b", "a")])
    rep = validate(M, get_base("equality"), TREE_ONLY)
    assert "T2" in {v.axiom for v in rep.violations}


def test_non_chain_below_set():
    # d sits above two incomparable points
    M = DecoratedStructure(EQ, "rabd", [("r", "a"), ("r", "b"), ("r", "d"), ("a", "d"), ("b", "d")])
    rep = validate(M, get_base("equality"), TREE_ONLY)
    assert "T4" in {v.axiom for v in rep.violations}


def test_loop_in_one_cone_flags_irreflexivity():
    M = load("bad_loop.ct")
    rep = validate(M, get_base("graph"), CONES)
    assert ("R1", ("c", "m")) in {(v.axiom, v.witness) for v in rep.violations}
    assert validate(M, get_base("graph"), TREE_ONLY).ok


def test_lone_tuple_reports_wd_and_loop():
    below = {"c": {"c"}, "m": {"c", "m"}, "a": {"c", "m", "a"}, "b": {"c", "m", "b"}}
    order = [(x, y) for y, s in below.items() for x in s]
    M = DecoratedStructure(GRAPH, below, order, {"R": {("c", "a", "b")}})
    axioms = [v.axiom for v in validate(M, get_base("graph"), CONES).violations]
    assert "WD" in axioms and "R1" in axioms
    assert "R1" not in [v.axiom for v in validate(M, get_base("graph"), UNIVERSAL).violations]


def test_open_cone_violation():
    M = DecoratedStructure(GRAPH, "ca", [("c", "a")], {"R": {("a", "c", "a")}})
    assert "OC" in {v.axiom for v in validate(M, get_base("graph"), UNIVERSAL).violations}


def test_signature_mismatch():
    M = DecoratedStructure(EQ, ["a"], [])
    with pytest.raises(SignatureMismatch):
        validate(M, get_base("graph"), CONES)


def test_unknown_element():
    with pytest.raises(UnknownElement):
        DecoratedStructure(EQ, ["a"], [("a", "b")])
    with pytest.raises(UnknownElement):
        meet_closure(chain(["a"]), ["z"])


def test_arity_zero_relation_rejected():
    with pytest.raises(ValueError):
        Signature("bad", (("P", 0),))


def test_chain_is_meet_closed():
    M = chain(["a", "b", "c"])
    assert meet_closure(M, ["a", "b", "c"]).elements == {"a", "b", "c"}


def test_quotient_shapes():
    M = load("dtr_small.ct")
    assert cone_partition(M, "s").base_structure.elements == frozenset()
    q = cone_partition(M, "u")
    assert sorted(q.cones) == ["v", "w"]
    assert q.base_structure.rel("R") == {("v", "w"), ("w", "v")}
    assert q.cone_of("w") == "w"
    with pytest.raises(UnknownElement):
        q.cone_of("s")


def test_assemble_rejects_foreign_labels():
    with pytest.raises(ValueError):
        assemble(GRAPH, {"r": {"r"}, "a": {"r", "a"}}, {"r": BaseStructure(GRAPH, ["zz"])})


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 12), st.integers(1, 6))
def test_closure_bound(seed, size, n):
    rng = random.Random(seed)
    M = random_structure(get_base("equality"), size, rng)
    pts = rng.sample(sorted(M.elements), min(n, size))
    cl = closure_set(M, pts)
    assert cl == fixpoint_closure(M, pts)
    assert len(cl) <= max(1, 2 * len(pts) - 1)
    extra = rng.choice(sorted(M.elements))
    assert len(closure_set(M, cl | {extra})) <= len(cl) + 2


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["equality", "graph", "eq2"]), st.integers(0, 10**6), st.integers(1, 9))
def test_random_structures_valid_and_meets_lawful(name, seed, size):
    base = get_base(name)
    rng = random.Random(seed)
    M = random_structure(base, size, rng)
    assert validate(M, base, CONES).ok
    els = sorted(M.elements)
    a, b, c = (rng.choice(els) for _ in range(3))
    m = M.meet(a, b)
    assert m == M.meet(b, a)
    assert M.leq(m, a) and M.leq(m, b)
    assert M.meet(M.meet(a, b), c) == M.meet(a, M.meet(b, c))
    # a meet of points is always below every point, and everything below both is below it
    assert all(M.leq(z, m) for z in M.below(a) & M.below(b))


def test_induced_substructure_of_valid_is_valid(base):
    rng = random.Random(3)
    for _ in range(30):
        M = random_structure(base, 8, rng)
        pts = rng.sample(sorted(M.elements), 3)
        assert validate(meet_closure(M, pts), base, CONES).ok


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["equality", "graph", "eq2"]), st.integers(0, 10**6))
def test_quotient_lookup_matches_projection(name, seed):
    M = random_structure(get_base(name), 8, random.Random(seed))
    for c in M.elements:
        assert M.quotient_structure(c) == M.quotient_structure(c, project=True)

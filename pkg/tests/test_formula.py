import itertools
import random

import pytest

from conetree import FormulaError, eval_base, eval_qf, get_base, parse_formula, star
from conetree.core.formula import Var
from conetree.sampling import random_base_formula, random_structure

from conftest import load


def test_reflexivity_any_assignment():
    M = load("dtr_small.ct")
    f = parse_formula("x <= x", ["x"])
    assert all(eval_qf(M, f, {"x": e}) for e in M.elements)


def test_eq_star_matches_definition(base):
    rng = random.Random(11)
    M = random_structure(base, 7, rng)
    f = parse_formula("=*(c, y, z) <-> c < y ^ z", ["c", "y", "z"])
    for c, y, z in itertools.product(sorted(M.elements), repeat=3):
        assert eval_qf(M, f, {"c": c, "y": y, "z": z})


def test_parse_and_evaluate_constants():
    M = load("dtr_small.ct")
    assert eval_qf(M, parse_formula("R*(r, s, v ^ w)"))
    assert eval_qf(M, parse_formula("R*(u, v, w) & ~R*(u, v, v)"))
    assert eval_qf(M, parse_formula("v ^ w = u & r < u & s != t"))
    assert not eval_qf(M, parse_formula("R*(r, t, u) | u <= s"))
    assert eval_qf(M, parse_formula("(s <= t) -> R*(r, s, s)"))


@pytest.mark.parametrize("text", ["x <=", "R*(r, s", "x ?? y", "(x <= y"])
def test_syntax_errors(text):
    with pytest.raises(FormulaError):
        parse_formula(text, ["x", "y"])


def test_unassigned_variable():
    M = load("dtr_small.ct")
    with pytest.raises(FormulaError, match="unassigned"):
        eval_qf(M, parse_formula("x <= r", ["x"]), {})


def test_ill_arity_atom():
    M = load("dtr_small.ct")
    with pytest.raises(FormulaError, match="arguments"):
        eval_qf(M, parse_formula("R*(r, s)"))


def test_base_atom_needs_translation():
    M = load("dtr_small.ct")
    with pytest.raises(FormulaError):
        eval_qf(M, star(parse_formula("R*(r, s, t)"), "r"))


def interpretation_case(rng):
    """One random (structure, formula, tuple) check of quotient vs star evaluation."""
    base = get_base(rng.choice(["graph", "eq2", "equality"]))
    M = random_structure(base, rng.randint(2, 9), rng)
    centers = [c for c in sorted(M.elements) if M.children[c]]
    c = rng.choice(centers)
    up = sorted(M.above(c))
    names = ["y0", "y1", "y2"]
    psi = random_base_formula(base.signature, names, 3, rng)
    f = {v: rng.choice(up) for v in names}
    Q = M.quotient_structure(c)
    classes = {v: M.cone_root(c, y) for v, y in f.items()}
    lhs = eval_base(Q, psi, classes)
    rhs = eval_qf(M, star(psi, Var("x")), {**f, "x": c})
    return lhs, rhs


def test_interpretation_soundness_sample():
    rng = random.Random(5)
    for _ in range(200):
        lhs, rhs = interpretation_case(rng)
        assert lhs == rhs

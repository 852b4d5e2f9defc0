"""Seeded random generators: valid structures, amalgamation triples, formulas."""
from __future__ import annotations

import random

from .core.formula import And, Iff, Implies, Not, Or, Rel, Var
from .core.structure import EQ, BaseStructure, assemble, closure_set
from .generic import enumerate_1types, realize_type


def random_quotient(base, labels, rng):
    q = BaseStructure(base.signature, ())
    for lab in labels:
        q = base.realize(q, rng.choice(base.extensions(q)), lab)
    return q


def random_structure(base, size, rng, prefix="x"):
    """A valid structure on ``size`` points: random parent tree, random cone models."""
    names = [f"{prefix}{i}" for i in range(size)]
    below = {}
    children = {n: [] for n in names}
    for i, n in enumerate(names):
        if i == 0:
            below[n] = {n}
            continue
        p = names[rng.randrange(i)]
        below[n] = below[p] | {n}
        children[p].append(n)
    quotients = {c: random_quotient(base, ch, rng) for c, ch in children.items() if ch}
    return assemble(base.signature, below, quotients)


def random_extension(base, A, extra, rng, prefix):
    """Add ``extra`` points to ``A`` by realizing random 1-types over all of it."""
    M = A
    for i in range(extra):
        d = rng.choice(enumerate_1types(base, M, check=False))
        if d.kind == "equal":
            continue
        M, _ = realize_type(base, M, M, d, f"{prefix}{i}", check=False)
    return M


def random_triple(base, rng, max_size=5):
    """``(A, B, C)`` with ``A = B & C`` and all sizes at most ``max_size``."""
    B = random_structure(base, rng.randint(1, max_size), rng, prefix="b")
    k = rng.randint(0, len(B.elements))
    pts = rng.sample(sorted(B.elements), k)
    A_elems = closure_set(B, pts) if pts else frozenset()
    A = B.induced(A_elems)
    C = A
    while True:
        C = random_extension(base, A, rng.randint(0, max_size), rng, "c")
        if len(C.elements) <= max_size:
            break
    return A, B, C


def random_base_formula(signature, variables, depth, rng):
    """Random quantifier-free L-formula (equality atoms included)."""
    if depth <= 0 or rng.random() < 0.3:
        syms = list(signature.symbols) + [EQ]
        sym = rng.choice(syms)
        n = signature.arity(sym)
        return Rel(sym, tuple(Var(rng.choice(variables)) for _ in range(n)))
    op = rng.choice(("not", "and", "or", "implies", "iff"))
    sub = lambda: random_base_formula(signature, variables, depth - 1, rng)
    if op == "not":
        return Not(sub())
    if op == "and":
        return And((sub(), sub()))
    if op == "or":
        return Or((sub(), sub()))
    if op == "implies":
        return Implies(sub(), sub())
    return Iff(sub(), sub())


def make_rng(seed):
    return random.Random(seed)

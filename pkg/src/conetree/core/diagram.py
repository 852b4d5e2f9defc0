"""Atomic diagrams used to compare quantifier-free types across structures."""
from __future__ import annotations

import itertools


def _terms(structure, named):
    labels = []
    value = {}
    for label, x in named:
        if label not in value:
            labels.append(label)
            value[label] = x
    terms = list(labels)
    for g, h in itertools.combinations(labels, 2):
        t = f"({g}^{h})"
        terms.append(t)
        value[t] = structure.meet(value[g], value[h])
    return terms, value


def qf_diagram(structure, named, tree_only=False):
    """True atoms among the terms of depth <= 2 over the named points.

    ``named`` is a sequence of ``(label, element)``.  Because any meet of
    finitely many points of a tree is a meet of two of them, the terms are
    the generators and their pairwise meets; every element of the generated
    substructure is denoted by one of them.
    """
    terms, value = _terms(structure, named)
    out = set()
    for s, t in itertools.permutations(terms, 2):
        vs, vt = value[s], value[t]
        if vs == vt and s < t:
            out.add(("=", s, t))
        if structure.lt(vs, vt):
            out.add(("<", s, t))
    if tree_only:
        return frozenset(out)
    sig = structure.signature
    for sym in sig.symbols:
        n = sig.arity(sym)
        rel = structure.star[sym]
        for c in terms:
            vc = value[c]
            up = [t for t in terms if structure.lt(vc, value[t])]
            for args in itertools.product(up, repeat=n):
                if (vc,) + tuple(value[a] for a in args) in rel:
                    out.add((sym, c) + args)
    return frozenset(out)


def one_point_diagram(structure, over, x, label="*"):
    """Atoms relating a single point ``x`` to the meet-closed set ``over``.

    Covers order, the meet ``x ^ m`` for every ``m`` in ``over`` and every
    lifted atom over ``over``, ``x`` and the meets of ``x`` that mentions a
    point outside ``over``.  A meet value outside ``over`` and ``x`` is
    written ``label + "1"``.
    """
    over = frozenset(over)
    pool = set(over) | {x}
    pool.update(structure.meet(x, m) for m in over)
    name = lambda y: label if y == x else (y if y in over else label + "1")
    out = set()
    for m in over:
        if structure.lt(m, x):
            out.add(("<", m, label))
        if structure.lt(x, m):
            out.add(("<", label, m))
        if m == x:
            out.add(("=", m, label))
        out.add(("meet", m, name(structure.meet(x, m))))
    sig = structure.signature
    for sym in sig.symbols:
        n = sig.arity(sym)
        rel = structure.star[sym]
        for c in sorted(pool):
            up = sorted(y for y in pool if structure.lt(c, y))
            for args in itertools.product(up, repeat=n):
                t = (c,) + args
                if all(y in over for y in t):
                    continue
                if t in rel:
                    out.add((sym,) + tuple(name(y) for y in t))
    return frozenset(out)

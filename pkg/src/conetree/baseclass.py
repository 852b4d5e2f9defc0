"""Pluggable base classes: finite models of a universal theory with strong amalgamation.

Three instances ship: ``equality`` (no relations), ``graph`` (the random
graph's finite models) and ``eq2`` (two independent equivalence relations).
Amalgamation and joint embedding are always the free, relation-minimal
choice.
"""
from __future__ import annotations

import itertools
import random
from abc import ABC, abstractmethod
from dataclasses import dataclass

from .core.structure import NEW, SIGNATURES, BaseStructure, register_signature
from .errors import AmalgamationError, ConeTreeError, SignatureMismatch


@dataclass(frozen=True)
class ExtensionDescriptor:
    """Atomic type of one new point over a labelled base structure.

    ``atoms`` lists every true atom that mentions the new point, written
    ``(sym, args)`` with the new point as ``"*"``.
    """
    atoms: frozenset

    def sort_key(self):
        return (len(self.atoms), tuple(sorted(self.atoms)))

    def rename(self, mapping):
        get = lambda x: x if x == NEW else mapping.get(x, x)
        return ExtensionDescriptor(frozenset((sym, tuple(get(x) for x in args)) for sym, args in self.atoms))

    def related(self, sym):
        """Old points ``a`` with ``sym(*, a)`` true."""
        return frozenset(args[1] for s, args in self.atoms
                         if s == sym and len(args) == 2 and args[0] == NEW and args[1] != NEW)

    def __str__(self):
        if not self.atoms:
            return "{}"
        return "{" + ", ".join(f"{s}({','.join(a)})" for s, a in sorted(self.atoms)) + "}"


def _candidate_atoms(signature, labels):
    pool = sorted(labels) + [NEW]
    out = []
    for sym in signature.symbols:
        for args in itertools.product(pool, repeat=signature.arity(sym)):
            if NEW in args:
                out.append((sym, args))
    return out


class BaseClass(ABC):
    """A finite relational Fraisse class with SAP.

    Subclasses supply :meth:`violations`, :meth:`amalgamate` and
    :meth:`joint_embed`; extension enumeration and one-element models fall
    back to brute force over atom sets, which is fine for tiny signatures.
    """

    name = None
    signature = None

    @abstractmethod
    def violations(self, s):
        """List of ``(axiom, witness)`` pairs; empty iff ``s`` is a model."""

    def check(self, s):
        self._same_signature(s)
        return not self.violations(s)

    @abstractmethod
    def amalgamate(self, A, B, C):
        ...

    @abstractmethod
    def joint_embed(self, A, B):
        ...

    def _same_signature(self, *structures):
        for s in structures:
            if s.signature.symbols != self.signature.symbols:
                raise SignatureMismatch(
                    f"structure over {s.signature.name!r} given to base {self.name!r}")

    def _check_triple(self, A, B, C):
        self._same_signature(A, B, C)
        if B.elements & C.elements != A.elements:
            raise AmalgamationError("A is not the intersection of B and C")
        if B.restrict(A.elements) != A or C.restrict(A.elements) != A:
            raise AmalgamationError("A is not a common substructure of B and C")
        for s in (A, B, C):
            bad = self.violations(s)
            if bad:
                raise AmalgamationError(f"invalid input to amalgamation: {bad[0]}")

    def extensions(self, A):
        out = []
        cands = _candidate_atoms(self.signature, A.elements)
        for r in range(len(cands) + 1):
            for chosen in itertools.combinations(cands, r):
                d = ExtensionDescriptor(frozenset(chosen))
                if self.check(self.realize(A, d, "#new")):
                    out.append(d)
        return sorted(out, key=ExtensionDescriptor.sort_key)

    def one_element_models(self, label=NEW):
        empty = BaseStructure(self.signature, ())
        return [self.realize(empty, d, label) for d in self.extensions(empty)]

    def realize(self, A, d, new):
        if new in A.elements:
            raise ConeTreeError(f"{new!r} already in the structure")
        rels = {sym: set(ts) for sym, ts in A.relations.items()}
        for sym, args in d.atoms:
            if sym not in rels:
                raise SignatureMismatch(f"descriptor mentions unknown relation {sym!r}")
            rels[sym].add(tuple(new if x == NEW else x for x in args))
        return BaseStructure(A.signature, A.elements | {new}, rels)

    def describe(self, S, over, new):
        """Descriptor of ``new`` over the points ``over`` inside ``S``."""
        pool = set(over) | {new}
        atoms = set()
        for sym in self.signature.symbols:
            for t in S.relations[sym]:
                if new in t and all(x in pool for x in t):
                    atoms.add((sym, tuple(NEW if x == new else x for x in t)))
        return ExtensionDescriptor(frozenset(atoms))

    def __repr__(self):
        return f"<base {self.name}>"


def _union(A, B, C):
    rels = {sym: set(B.relations[sym]) | set(C.relations[sym]) for sym in B.relations}
    return BaseStructure(B.signature, B.elements | C.elements, rels)


class EqualityBase(BaseClass):
    name = "equality"
    signature = SIGNATURES["equality"]

    def violations(self, s):
        return []

    def amalgamate(self, A, B, C):
        self._check_triple(A, B, C)
        return BaseStructure(self.signature, B.elements | C.elements)

    def joint_embed(self, A, B):
        if A.elements & B.elements:
            raise AmalgamationError("joint embedding needs disjoint element names")
        return BaseStructure(self.signature, A.elements | B.elements)

    def extensions(self, A):
        return [ExtensionDescriptor(frozenset())]


class GraphBase(BaseClass):
    name = "graph"
    signature = SIGNATURES["graph"]

    def violations(self, s):
        out = []
        R = s.relations["R"]
        for a, b in sorted(R):
            if a == b:
                out.append(("R1", (a,)))
            elif (b, a) not in R:
                out.append(("R2", (a, b)))
        return out

    def amalgamate(self, A, B, C):
        self._check_triple(A, B, C)
        return _union(A, B, C)

    def joint_embed(self, A, B):
        if A.elements & B.elements:
            raise AmalgamationError("joint embedding needs disjoint element names")
        return _union(None, A, B)

    def extensions(self, A):
        labels = sorted(A.elements)
        out = []
        for r in range(len(labels) + 1):
            for nbrs in itertools.combinations(labels, r):
                atoms = set()
                for a in nbrs:
                    atoms.add(("R", (NEW, a)))
                    atoms.add(("R", (a, NEW)))
                out.append(ExtensionDescriptor(frozenset(atoms)))
        return out


def _classes(elements, rel):
    parent = {x: x for x in elements}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in rel:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups = {}
    for x in elements:
        groups.setdefault(find(x), set()).add(x)
    return sorted((frozenset(g) for g in groups.values()), key=min)


class Eq2Base(BaseClass):
    name = "eq2"
    signature = SIGNATURES["eq2"]
    symbols = ("E1", "E2")

    def violations(self, s):
        out = []
        for sym in self.symbols:
            E = s.relations[sym]
            for a in sorted(s.elements):
                if (a, a) not in E:
                    out.append((f"{sym}-refl", (a,)))
            for a, b in sorted(E):
                if (b, a) not in E:
                    out.append((f"{sym}-sym", (a, b)))
            succ = {}
            for a, b in E:
                succ.setdefault(a, set()).add(b)
            for a, b in sorted(E):
                for c in sorted(succ.get(b, ())):
                    if (a, c) not in E:
                        out.append((f"{sym}-trans", (a, b, c)))
        return out

    def _closed(self, elements, rels):
        out = {}
        for sym in self.symbols:
            out[sym] = {(a, b) for g in _classes(elements, rels[sym]) for a in g for b in g}
        return BaseStructure(self.signature, elements, out)

    def amalgamate(self, A, B, C):
        self._check_triple(A, B, C)
        elements = B.elements | C.elements
        rels = {sym: B.relations[sym] | C.relations[sym] for sym in self.symbols}
        return self._closed(elements, rels)

    def joint_embed(self, A, B):
        if A.elements & B.elements:
            raise AmalgamationError("joint embedding needs disjoint element names")
        rels = {sym: A.relations[sym] | B.relations[sym] for sym in self.symbols}
        return BaseStructure(self.signature, A.elements | B.elements, rels)

    def extensions(self, A):
        choices = []
        for sym in self.symbols:
            choices.append(_classes(A.elements, A.relations[sym]) + [frozenset()])
        out = []
        for picks in itertools.product(*choices):
            atoms = set()
            for sym, cls in zip(self.symbols, picks):
                atoms.add((sym, (NEW, NEW)))
                for a in cls:
                    atoms.add((sym, (NEW, a)))
                    atoms.add((sym, (a, NEW)))
            out.append(ExtensionDescriptor(frozenset(atoms)))
        return out


BASES = {}


def _random_model(base, rng, names):
    s = BaseStructure(base.signature, ())
    for name in names:
        s = base.realize(s, rng.choice(base.extensions(s)), name)
    return s


def check_sap(base, trials=30, seed=0):
    """Best-effort strong amalgamation / disjoint JEP check on small random triples."""
    rng = random.Random(seed)
    for _ in range(trials):
        A = _random_model(base, rng, [f"a{i}" for i in range(rng.randint(0, 2))])
        B, C = A, A
        for i in range(rng.randint(0, 2)):
            B = base.realize(B, rng.choice(base.extensions(B)), f"b{i}")
        for i in range(rng.randint(0, 2)):
            C = base.realize(C, rng.choice(base.extensions(C)), f"c{i}")
        D = base.amalgamate(A, B, C)
        if (base.violations(D) or D.elements != B.elements | C.elements
                or D.restrict(B.elements) != B or D.restrict(C.elements) != C):
            raise ConeTreeError(f"base {base.name!r} failed strong amalgamation on {A}, {B}, {C}")
        P = _random_model(base, rng, ["p0", "p1"][: rng.randint(0, 2)])
        Q = _random_model(base, rng, ["q0", "q1"][: rng.randint(0, 2)])
        J = base.joint_embed(P, Q)
        if base.violations(J) or J.restrict(P.elements) != P or J.restrict(Q.elements) != Q:
            raise ConeTreeError(f"base {base.name!r} failed joint embedding on {P}, {Q}")


def register_base(base, verify=True):
    """Register a base class under its name (also registering its signature)."""
    if not base.name:
        raise ValueError("a base class needs a name")
    if base.signature.name != base.name:
        raise ValueError("a base class's signature must carry the base's name")
    if verify:
        check_sap(base)
    register_signature(base.signature)
    BASES[base.name] = base
    return base


for _b in (EqualityBase(), GraphBase(), Eq2Base()):
    register_base(_b, verify=False)


def get_base(name):
    try:
        return BASES[name]
    except KeyError:
        raise SignatureMismatch(f"unknown base {name!r}; known: {sorted(BASES)}") from None


def base_check(base, s):
    return base.check(s)


def base_amalgamate(base, A, B, C):
    return base.amalgamate(A, B, C)


def base_joint_embed(base, A, B):
    return base.joint_embed(A, B)


def base_extensions(base, A):
    return base.extensions(A)

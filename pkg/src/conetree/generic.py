"""Quantifier-free 1-types over finite substructures, their realization, and
finite approximations of the generic (Fraisse limit) structure.

A 1-type of a new point ``b`` over a meet-closed ``A`` is pinned down by

* the point ``b1``, the largest meet of ``b`` with an element of ``A``;
  it is either in ``A`` or sits just below ``anchor``, the least element
  of ``A`` above it;
* whether ``b`` is ``b1`` itself or lies strictly above it;
* for a fresh ``b1``: the one-element model carried by the anchor's cone;
* when ``b`` is above ``b1``: how ``b``'s new cone relates to the other
  cones at ``b1`` (an :class:`ExtensionDescriptor`).
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .amalgam import _amalgamate, _require_valid
from .baseclass import ExtensionDescriptor
from .core.structure import (
    NEW, BaseStructure, DecoratedStructure, assemble, closure_set,
)
from .core.diagram import qf_diagram
from .errors import DescriptorError, PartialIsomorphismError


@dataclass(frozen=True)
class TypeDescriptor:
    anchor: str | None
    b1_fresh: bool = False
    above: bool = False
    b1_relations: ExtensionDescriptor | None = None
    cone_type: ExtensionDescriptor | None = None

    def __post_init__(self):
        if self.anchor is None:
            return
        if (self.cone_type is not None) != self.above:
            raise DescriptorError("cone type present iff the point lies above b1")
        if (self.b1_relations is not None) != self.b1_fresh:
            raise DescriptorError("b1 relations present iff b1 is fresh")

    @property
    def kind(self):
        if self.anchor is None:
            return "point"
        if not self.b1_fresh:
            return "above" if self.above else "equal"
        return "branch" if self.above else "below"

    @property
    def new_points(self):
        """Elements a realization adds to ``A``."""
        if self.anchor is None:
            return 1
        return int(self.above) + int(self.b1_fresh)

    def sort_key(self):
        order = ("point", "equal", "above", "below", "branch")
        ext = lambda d: () if d is None else d.sort_key()
        return (self.anchor or "", order.index(self.kind), ext(self.b1_relations), ext(self.cone_type))

    def rename(self, mapping):
        ren = lambda d: None if d is None else d.rename(mapping)
        anchor = None if self.anchor is None else mapping.get(self.anchor, self.anchor)
        return TypeDescriptor(anchor, self.b1_fresh, self.above, ren(self.b1_relations), ren(self.cone_type))

    def __str__(self):
        if self.anchor is None:
            return "point"
        a = self.anchor
        text = {"equal": f"x = {a}", "above": f"x > {a}, new cone",
                "below": f"x < {a}, just below", "branch": f"x ^ {a} < {a}, new branch"}[self.kind]
        if self.b1_relations is not None:
            text += f"; b1 {self.b1_relations}"
        if self.cone_type is not None:
            text += f"; cone {self.cone_type}"
        return text


POINT = TypeDescriptor(None)


def _as_substructure(M, A):
    if isinstance(A, DecoratedStructure):
        return A
    return M.induced(A)


def _empty(base):
    return BaseStructure(base.signature, ())


def enumerate_1types(base, A, check=True):
    """All quantifier-free 1-types over ``A`` realized somewhere in the class."""
    if check:
        _require_valid(base, A, "A")
    if not A.elements:
        return [POINT]
    out = []
    singles = [d for d in base.extensions(_empty(base))
               if base.check(base.realize(_empty(base), d, NEW))]
    for a in sorted(A.elements):
        out.append(TypeDescriptor(a))
        Q = A.quotient_structure(a)
        for ce in base.extensions(Q):
            if base.check(base.realize(Q, ce, NEW)):
                out.append(TypeDescriptor(a, False, True, None, ce))
        for d1 in singles:
            out.append(TypeDescriptor(a, True, False, d1, None))
            Q1 = base.realize(_empty(base), d1, a)
            for ce in base.extensions(Q1):
                # the two-cone fragment at b1 must itself be a model
                if base.check(base.realize(Q1, ce, NEW)):
                    out.append(TypeDescriptor(a, True, True, d1, ce))
    return sorted(out, key=TypeDescriptor.sort_key)


def count_1types(base, A, check=True):
    return len(enumerate_1types(base, A, check))


def _local(M, c, reps):
    """Base structure at center ``c`` on labels, read through representatives."""
    sig = M.signature
    labels = sorted(reps)
    rels = {}
    for sym in sig.symbols:
        rels[sym] = {lab for lab in itertools.product(labels, repeat=sig.arity(sym))
                     if M.holds(sym, (c,) + tuple(reps[x] for x in lab))}
    return BaseStructure(sig, labels, rels)


def descriptor_of(base, M, A, x):
    """The descriptor of ``x`` over the meet-closed set ``A`` inside ``M``."""
    A = frozenset(A.elements if isinstance(A, DecoratedStructure) else A)
    if not A:
        return POINT
    if x in A:
        return TypeDescriptor(x)
    depth = M.depth
    b1 = max((M.meet(x, a) for a in sorted(A)), key=depth.__getitem__)
    if b1 in A:
        reps = {}
        for a in A:
            if M.lt(b1, a):
                r = M.cone_root(b1, a)
                if r not in reps or depth[a] < depth[reps[r]]:
                    reps[r] = a
        roots = {a: a for a in reps.values()}
        S = _local(M, b1, {**roots, "#x": x})
        cone = base.describe(S, roots, "#x")
        return TypeDescriptor(b1, False, True, None, cone)
    anchor = min((a for a in A if M.lt(b1, a)), key=depth.__getitem__)
    S1 = _local(M, b1, {anchor: anchor})
    d1 = base.describe(S1, (), anchor)
    if x == b1:
        return TypeDescriptor(anchor, True, False, d1, None)
    S2 = _local(M, b1, {anchor: anchor, "#x": x})
    return TypeDescriptor(anchor, True, True, d1, base.describe(S2, (anchor,), "#x"))


def meet_name(b, taken):
    k = 1
    while f"{b}~meet{k}" in taken:
        k += 1
    return f"{b}~meet{k}"


def structure_from_descriptor(base, A, d, name):
    """The structure ``<A b>`` for a descriptor; returns ``(structure, b)``."""
    if d.anchor is None:
        if A.elements:
            raise DescriptorError("the anchor-free type only exists over the empty structure")
        return DecoratedStructure(A.signature, [name], []), name
    a = d.anchor
    if a not in A.elements:
        raise DescriptorError(f"descriptor anchored at {a!r}, which is not in A")
    if d.kind == "equal":
        return A, a
    if name in A.elements:
        raise DescriptorError(f"name {name!r} already used")
    below = {x: set(A.below(x)) for x in A.elements}
    quotients = {c: A.quotient_structure(c) for c in A.elements if A.children[c]}
    if not d.b1_fresh:
        below[name] = below[a] | {name}
        quotients[a] = base.realize(A.quotient_structure(a), d.cone_type, name)
        return assemble(A.signature, below, quotients), name
    b1 = name if not d.above else meet_name(name, A.elements)
    p = A.parent[a]
    below[b1] = (set(A.below(p)) if p is not None else set()) | {b1}
    for y in A.up(a):
        below[y].add(b1)
    if p is not None:
        quotients[p] = quotients[p].rename({a: b1})
    Q1 = base.realize(_empty(base), d.b1_relations, a)
    if d.above:
        below[name] = below[b1] | {name}
        Q1 = base.realize(Q1, d.cone_type, name)
    quotients[b1] = Q1
    return assemble(A.signature, below, quotients), name


def realize_type(base, M, A, d, name=None, check=True):
    """Extend ``M`` so that a point realizes ``d`` over ``A``; returns ``(M', point)``."""
    A = _as_substructure(M, A)
    if check:
        _require_valid(base, M, "M")
        if not M.is_meet_closed(A.elements):
            raise DescriptorError("A is not meet-closed in M")
    if d.kind == "equal":
        if d.anchor not in A.elements:
            raise DescriptorError(f"descriptor anchored at {d.anchor!r}, which is not in A")
        return M, d.anchor
    if name is None:
        k = 0
        while f"x{k}" in M.elements:
            k += 1
        name = f"x{k}"
    if name in M.elements:
        raise DescriptorError(f"name {name!r} already used in M")
    B, b = structure_from_descriptor(base, A, d, name)
    if B.elements & M.elements != A.elements:
        raise DescriptorError("fresh point names collide with M")
    return _amalgamate(base, A, B, M), b


# -- finite approximations of the limit ----------------------------------------

def substructures(M, s):
    """Distinct closures of 1..s points, sorted by their element tuples."""
    seen = set()
    elems = sorted(M.elements)
    for k in range(1, s + 1):
        for pts in itertools.combinations(elems, k):
            seen.add(tuple(sorted(closure_set(M, pts))))
    return sorted(seen)


def realized_types(base, M, S):
    return {descriptor_of(base, M, S, x) for x in M.elements}


@dataclass
class CoverageReport:
    entries: list = field(default_factory=list)  # (substructure, descriptor, realized)

    @property
    def total(self):
        return len(self.entries)

    @property
    def realized(self):
        return sum(1 for e in self.entries if e[2])

    @property
    def fraction(self):
        return 1.0 if not self.entries else self.realized / self.total

    def missing(self):
        return [(S, d) for S, d, ok in self.entries if not ok]


def check_extension_property(base, M, s, sample_limit=None, substructures_=None, seed=0):
    """Check that every 1-type over small substructures of ``M`` is realized in ``M``.

    Substructures are the closures of at most ``s`` points, or the explicit
    list ``substructures_``.  With ``sample_limit`` a seeded sample is used.
    """
    subs = [tuple(sorted(S)) for S in substructures_] if substructures_ is not None else substructures(M, s)
    if sample_limit is not None and len(subs) > sample_limit:
        rng = random.Random(seed)
        subs = sorted(rng.sample(subs, sample_limit))
    report = CoverageReport()
    for S in subs:
        sub = M.induced(S)
        have = realized_types(base, M, S)
        for d in enumerate_1types(base, sub, check=False):
            report.entries.append((S, d, d in have))
    return report


class GenericBuilder:
    """Grows a structure towards the extension property, round by round."""

    def __init__(self, base, max_elements, closure_size=1, seed=0, prefix="g"):
        if max_elements < 1:
            raise ValueError("max_elements must be at least 1")
        self.base = base
        self.max_elements = max_elements
        self.closure_size = closure_size
        self.rng = random.Random(seed)
        self.prefix = prefix
        self.counter = 0
        self.M = DecoratedStructure(base.signature, [self._name()], [])
        self.covered = []
        self.rounds_done = 0

    def _name(self):
        n = f"{self.prefix}{self.counter:04d}"
        self.counter += 1
        return n

    @property
    def capacity(self):
        return self.max_elements - len(self.M.elements)

    def round(self):
        base = self.base
        snapshot = self.M
        subs = substructures(snapshot, self.closure_size)
        if len(subs) * 2 > self.capacity:
            self.rng.shuffle(subs)
        for S in subs:
            if self.capacity <= 0:
                break
            sub = snapshot.induced(S)
            have = realized_types(base, self.M, S)
            missing = [d for d in enumerate_1types(base, sub, check=False) if d not in have]
            if sum(d.new_points for d in missing) > self.capacity:
                continue
            missing.sort(key=lambda d: (-d.new_points, d.sort_key()))
            added = []
            for d in missing:
                if any(descriptor_of(base, self.M, S, x) == d for x in added):
                    continue
                before = self.M.elements
                self.M, x = realize_type(base, self.M, S, d, self._name(), check=False)
                added.extend(sorted(self.M.elements - before))
            self.covered.append(S)
        self.rounds_done += 1
        return self.M

    def build(self, rounds):
        for _ in range(rounds):
            if self.capacity <= 0:
                break
            self.round()
        return self.M


def build_generic(base, max_elements, closure_size=1, rounds=1, seed=0):
    builder = GenericBuilder(base, max_elements, closure_size, seed)
    return builder.build(rounds)


# -- back and forth --------------------------------------------------------------

@dataclass
class BackAndForthResult:
    mapping: dict
    steps: int
    failure: tuple | None = None  # (direction, element, descriptor)
    complete: bool = False

    @property
    def ok(self):
        return self.failure is None


def check_partial_isomorphism(M, N, f):
    dom = sorted(f)
    left = qf_diagram(M, [(x, x) for x in dom])
    right = qf_diagram(N, [(x, f[x]) for x in dom])
    diff = left ^ right
    if diff:
        raise PartialIsomorphismError(f"not a partial isomorphism; first differing atom {min(diff)}")


def _close_map(M, N, f):
    out = dict(f)
    for a, b in itertools.combinations(sorted(f), 2):
        out[M.meet(a, b)] = N.meet(f[a], f[b])
    if len(set(out.values())) != len(out):
        raise PartialIsomorphismError("map is not injective on the meet-closure")
    return out


def _step(base, M, N, f, x):
    """Find ``y`` in N matching ``x`` over ``dom(f)``; returns the extended map or None."""
    dom = frozenset(f)
    d = descriptor_of(base, M, dom, x)
    target = d.rename(f)
    ran = frozenset(f.values())
    for y in sorted(N.elements - ran):
        if descriptor_of(base, N, ran, y) == target:
            g = dict(f)
            g[x] = y
            if d.b1_fresh and d.above:
                g[M.meet(x, d.anchor)] = N.meet(y, f[d.anchor])
            return g, d
    return None, d


def back_and_forth(base, M, N, f=None, steps=10, seed=0, order="sorted"):
    """Alternately extend ``f`` forth (new point of M) and back (new point of N).

    ``order`` picks the next point: ``"sorted"`` takes the least unmapped
    name, which for builder output is build order, so each point is handled
    after the points it was realized over; ``"random"`` draws with ``seed``.
    """
    if order not in ("sorted", "random"):
        raise ValueError(f"unknown order {order!r}")
    f = dict(f or {})
    for x, y in f.items():
        if x not in M.elements or y not in N.elements:
            raise PartialIsomorphismError(f"pair {x}->{y} leaves the structures")
    check_partial_isomorphism(M, N, f)
    f = _close_map(M, N, f)
    rng = random.Random(seed)
    done = 0
    for i in range(steps):
        forth = i % 2 == 0
        src, dst = (M, N) if forth else (N, M)
        g = f if forth else {v: k for k, v in f.items()}
        pending = sorted(src.elements - set(g))
        if not pending:
            if len(f) == len(M.elements) == len(N.elements):
                return BackAndForthResult(f, done, None, True)
            continue
        x = pending[0] if order == "sorted" else rng.choice(pending)
        h, d = _step(base, src, dst, g, x)
        if h is None:
            return BackAndForthResult(f, done, ("forth" if forth else "back", x, d))
        f = h if forth else {v: k for k, v in h.items()}
        done += 1
    complete = len(f) == len(M.elements) == len(N.elements)
    return BackAndForthResult(f, done, None, complete)

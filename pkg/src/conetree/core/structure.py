"""Finite decorated meet-trees.

A decorated structure is a finite meet-tree whose lifted relations ``R*``
carry, at every center ``c``, an L-structure on the open cones above ``c``.
The order is stored as the full reflexive relation; the meet table, parent
map and cone partitions are derived on demand and cached.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

from ..errors import SignatureMismatch, UnknownElement

EQ = "="
NEW = "*"  # label of the new point inside one-point extension atoms

TREE_ONLY = "tree-only"
UNIVERSAL = "universal"
CONES = "cones"
MODES = (TREE_ONLY, UNIVERSAL, CONES)


@dataclass(frozen=True)
class Signature:
    name: str
    relations: tuple = ()

    def __post_init__(self):
        seen = set()
        for sym, arity in self.relations:
            if sym in seen:
                raise ValueError(f"duplicate relation symbol {sym!r}")
            if sym == EQ or not sym or any(ch.isspace() for ch in sym):
                raise ValueError(f"bad relation symbol {sym!r}")
            if arity < 1:
                raise ValueError(f"relation {sym} must have arity >= 1")
            seen.add(sym)

    @property
    def symbols(self):
        return tuple(sym for sym, _ in self.relations)

    def arity(self, sym):
        if sym == EQ:
            return 2
        for s, n in self.relations:
            if s == sym:
                return n
        raise KeyError(sym)

    def star_arity(self, sym):
        return self.arity(sym) + 1


SIGNATURES = {
    "equality": Signature("equality", ()),
    "graph": Signature("graph", (("R", 2),)),
    "eq2": Signature("eq2", (("E1", 2), ("E2", 2))),
}


def register_signature(sig):
    existing = SIGNATURES.get(sig.name)
    if existing is not None and existing != sig:
        raise ValueError(f"signature {sig.name!r} already registered differently")
    SIGNATURES[sig.name] = sig
    return sig


def get_signature(name):
    try:
        return SIGNATURES[name]
    except KeyError:
        raise SignatureMismatch(f"unknown signature {name!r}") from None


def _freeze_relations(relations):
    return {sym: frozenset(tuple(t) for t in tuples) for sym, tuples in relations.items()}


class BaseStructure:
    """A finite L-structure: the kind of thing that lives on a set of cones."""

    __slots__ = ("signature", "elements", "relations", "_key")

    def __init__(self, signature, elements, relations=None):
        self.signature = signature
        self.elements = frozenset(elements)
        rels = {sym: frozenset() for sym in signature.symbols}
        if relations:
            rels.update(_freeze_relations(relations))
        self.relations = rels
        self._key = None

    def rel(self, sym):
        return self.relations.get(sym, frozenset())

    def holds(self, sym, args):
        if sym == EQ:
            return len(set(args)) == 1
        return tuple(args) in self.relations.get(sym, ())

    def restrict(self, subset):
        subset = frozenset(subset)
        rels = {sym: {t for t in ts if all(x in subset for x in t)}
                for sym, ts in self.relations.items()}
        return BaseStructure(self.signature, subset & self.elements, rels)

    def rename(self, mapping):
        get = lambda x: mapping.get(x, x)
        rels = {sym: {tuple(get(x) for x in t) for t in ts}
                for sym, ts in self.relations.items()}
        return BaseStructure(self.signature, (get(x) for x in self.elements), rels)

    def key(self):
        if self._key is None:
            self._key = (self.signature.name, tuple(sorted(self.elements)),
                         tuple((sym, tuple(sorted(self.relations[sym])))
                               for sym in sorted(self.relations)))
        return self._key

    def __eq__(self, other):
        return isinstance(other, BaseStructure) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __len__(self):
        return len(self.elements)

    def __repr__(self):
        rels = ", ".join(f"{sym}={sorted(ts)}" for sym, ts in sorted(self.relations.items()) if ts)
        return f"BaseStructure({sorted(self.elements)}{', ' + rels if rels else ''})"


class DecoratedStructure:
    """A finite structure in the star language: a tree order plus lifted relations.

    ``order`` is the full reflexive order relation as ``(a, b)`` pairs meaning
    ``a <= b``.  ``star`` maps each lifted symbol to a set of tuples
    ``(c, y_0, ..., y_{n-1})``.  Nothing is checked on construction beyond
    dangling references; use :func:`validate` for the axioms.
    """

    def __init__(self, signature, elements, order, star=None):
        self.signature = signature
        self.elements = frozenset(elements)
        self.order = frozenset((a, b) for a, b in order) | {(x, x) for x in self.elements}
        st = {sym: frozenset() for sym in signature.symbols}
        if star:
            st.update(_freeze_relations(star))
        self.star = st
        for a, b in self.order:
            if a not in self.elements or b not in self.elements:
                raise UnknownElement(f"order pair ({a}, {b}) mentions an unknown element")
        for sym, tuples in self.star.items():
            for t in tuples:
                for x in t:
                    if x not in self.elements:
                        raise UnknownElement(f"{sym}* tuple {t} mentions unknown element {x!r}")

    # -- identity -----------------------------------------------------------
    @cached_property
    def _key(self):
        return (self.signature, self.elements, self.order,
                tuple(sorted((sym, ts) for sym, ts in self.star.items() if ts)))

    def __eq__(self, other):
        return isinstance(other, DecoratedStructure) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __len__(self):
        return len(self.elements)

    def __repr__(self):
        return (f"DecoratedStructure({self.signature.name}, {len(self.elements)} elements, "
                f"{sum(len(t) for t in self.star.values())} star tuples)")

    def _require(self, *xs):
        for x in xs:
            if x not in self.elements:
                raise UnknownElement(f"unknown element {x!r}")

    # -- order --------------------------------------------------------------
    @cached_property
    def _below(self):
        below = {x: {x} for x in self.elements}
        for a, b in self.order:
            below[b].add(a)
        return {x: frozenset(s) for x, s in below.items()}

    @cached_property
    def _up(self):
        up = {x: {x} for x in self.elements}
        for a, b in self.order:
            up[a].add(b)
        return {x: frozenset(s) for x, s in up.items()}

    @cached_property
    def depth(self):
        """Number of elements at or below each element."""
        return {x: len(s) for x, s in self._below.items()}

    def below(self, x):
        """Elements ``<= x``."""
        return self._below[x]

    def up(self, x):
        """Elements ``>= x`` (the closed cone of center ``x``)."""
        return self._up[x]

    def above(self, x):
        return self._up[x] - {x}

    def leq(self, a, b):
        return a in self._below[b]

    def lt(self, a, b):
        return a != b and a in self._below[b]

    @cached_property
    def parent(self):
        depth = self.depth
        parent = {}
        for x, s in self._below.items():
            lower = [y for y in s if y != x]
            parent[x] = max(lower, key=depth.__getitem__) if lower else None
        return parent

    @cached_property
    def children(self):
        ch = {x: [] for x in self.elements}
        for x, p in self.parent.items():
            if p is not None:
                ch[p].append(x)
        return {x: tuple(sorted(v)) for x, v in ch.items()}

    @cached_property
    def root(self):
        roots = [x for x, p in self.parent.items() if p is None]
        return roots[0] if len(roots) == 1 else None

    @cached_property
    def _meets(self):
        return {}

    def meet(self, a, b):
        """Greatest lower bound of ``a`` and ``b`` (assumes a valid tree)."""
        if a == b:
            return a
        key = (a, b) if a < b else (b, a)
        cache = self._meets
        m = cache.get(key)
        if m is None:
            below = self._below
            if a in below[b]:
                m = a
            elif b in below[a]:
                m = b
            else:
                common = below[a] & below[b]
                if not common:
                    raise ValueError(f"{a} and {b} have no common lower bound")
                m = max(common, key=self.depth.__getitem__)
            cache[key] = m
        return m

    def meet_all(self, xs):
        it = iter(xs)
        m = next(it)
        for x in it:
            m = self.meet(m, x)
        return m

    # -- cones --------------------------------------------------------------
    @cached_property
    def _cone_roots(self):
        return {}

    def cone_root(self, c, y):
        """Least element of the open cone of center ``c`` containing ``y > c``."""
        cache = self._cone_roots
        r = cache.get((c, y))
        if r is None:
            parent = self.parent
            r = y
            while parent[r] != c:
                r = parent[r]
                if r is None:
                    raise ValueError(f"{y} is not above {c}")
            cache[(c, y)] = r
        return r

    def cones(self, c):
        """Open cones of center ``c`` keyed by their least element."""
        return {r: self._up[r] for r in self.children[c]}

    def same_cone(self, c, a, b):
        return self.lt(c, a) and self.lt(c, b) and self.lt(c, self.meet(a, b))

    # -- relations ----------------------------------------------------------
    def holds(self, sym, args):
        """Truth of ``sym*(args)``; ``=*`` is evaluated through its defining axiom."""
        if sym == EQ:
            c, y, z = args
            return self.lt(c, self.meet(y, z))
        return tuple(args) in self.star[sym]

    def star_tuples(self):
        for sym in sorted(self.star):
            for t in sorted(self.star[sym]):
                yield sym, t

    @cached_property
    def _by_center(self):
        out = {}
        for sym, tuples in self.star.items():
            for t in tuples:
                out.setdefault(t[0], {}).setdefault(sym, []).append(t)
        return out

    def quotient_structure(self, c, project=False):
        """The L-structure on the open cones of ``c``, labelled by cone roots.

        Under (WD) a cone tuple is related iff the tuple of cone roots is, so
        that is all that gets looked up.  With ``project`` a cone tuple is
        related when any lifted tuple at ``c`` lands on it, which is what
        validation wants when (WD) itself may be broken.
        """
        roots = self.children[c]
        rels = {sym: set() for sym in self.signature.symbols}
        if project:
            for sym, tuples in self._by_center.get(c, {}).items():
                for t in tuples:
                    if all(self.lt(c, y) for y in t[1:]):
                        rels[sym].add(tuple(self.cone_root(c, y) for y in t[1:]))
        else:
            for sym in self.signature.symbols:
                rel = self.star[sym]
                for lab in itertools.product(roots, repeat=self.signature.arity(sym)):
                    if (c,) + lab in rel:
                        rels[sym].add(lab)
        return BaseStructure(self.signature, roots, rels)

    # -- substructures ------------------------------------------------------
    def induced(self, subset):
        """The induced structure on ``subset`` (not checked for meet-closure)."""
        subset = frozenset(subset)
        self._require(*subset)
        order = [(a, b) for b in subset for a in self._below[b] if a in subset]
        star = {}
        k = len(subset)
        for sym, tuples in self.star.items():
            width = self.signature.star_arity(sym) if sym != EQ else 3
            if k ** width < len(tuples):
                star[sym] = {t for t in itertools.product(sorted(subset), repeat=width) if t in tuples}
            else:
                star[sym] = {t for t in tuples if all(x in subset for x in t)}
        return DecoratedStructure(self.signature, subset, order, star)

    def rename(self, mapping):
        get = lambda x: mapping.get(x, x)
        return DecoratedStructure(
            self.signature,
            (get(x) for x in self.elements),
            ((get(a), get(b)) for a, b in self.order),
            {sym: {tuple(get(x) for x in t) for t in ts} for sym, ts in self.star.items()},
        )

    def is_meet_closed(self, subset):
        subset = list(subset)
        s = set(subset)
        return all(self.meet(a, b) in s for a, b in itertools.combinations(subset, 2))


# -- construction helpers ---------------------------------------------------

def order_from_below(below: Mapping[str, Iterable[str]]):
    return [(a, b) for b, s in below.items() for a in s]


def expand_center(structure, c, quotient):
    """All star tuples at center ``c`` induced by ``quotient`` on cone roots."""
    out = {}
    up = structure.up
    for sym, labels in quotient.relations.items():
        ts = set()
        for lab in labels:
            for f in itertools.product(*(up(r) for r in lab)):
                ts.add((c,) + f)
        out[sym] = ts
    return out


def assemble(signature, below, quotients):
    """Build a structure from a tree (``below`` sets) and per-center cone structures.

    ``quotients`` maps a center to a :class:`BaseStructure` whose elements
    are the cone roots (children) of that center in the new tree.  Centers
    not mentioned carry no relations.
    """
    tree = DecoratedStructure(signature, below.keys(), order_from_below(below))
    star = {sym: set() for sym in signature.symbols}
    for c, q in quotients.items():
        if q is None:
            continue
        roots = set(tree.children[c])
        if not q.elements <= roots:
            raise ValueError(f"quotient at {c} labels {sorted(q.elements - roots)} are not cone roots")
        for sym, ts in expand_center(tree, c, q).items():
            star[sym].update(ts)
    return DecoratedStructure(signature, tree.elements, tree.order, star)


def fresh_name(prefix, taken, first=None):
    """``prefix`` itself if free (or ``first``), else ``prefix1``, ``prefix2``, ..."""
    if first is not None and first not in taken:
        return first
    if first is None and prefix not in taken:
        return prefix
    k = 1
    while f"{prefix}{k}" in taken:
        k += 1
    return f"{prefix}{k}"


# -- validation -------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    axiom: str
    witness: tuple

    def __str__(self):
        return f"{self.axiom} {' '.join(map(str, self.witness))}".rstrip()


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def add(self, axiom, *witness):
        self.violations.append(Violation(axiom, tuple(witness)))

    def __bool__(self):
        return self.ok


def check_signature(structure, base):
    missing = [s for s in base.signature.symbols if s not in structure.signature.symbols]
    if missing:
        raise SignatureMismatch(
            f"base {base.name!r} needs relations {missing} absent from signature "
            f"{structure.signature.name!r}")
    for sym in base.signature.symbols:
        if base.signature.arity(sym) != structure.signature.arity(sym):
            raise SignatureMismatch(f"arity of {sym} differs between base and structure")


def _tree_violations(s, report):
    elems = sorted(s.elements)
    below = s._below
    for x in elems:
        if (x, x) not in s.order:  # pragma: no cover - order always gets reflexive pairs
            report.add("T1", x)
    for a, b in sorted(s.order):
        if a != b and (b, a) in s.order and a < b:
            report.add("T2", a, b)
    for a, b in sorted(s.order):
        if a == b:
            continue
        for c in sorted(s._up[b]):
            if (a, c) not in s.order:
                report.add("T3", a, b, c)
                break
    for x in elems:
        lower = sorted(below[x])
        for y, z in itertools.combinations(lower, 2):
            if (y, z) not in s.order and (z, y) not in s.order:
                report.add("T4", x, y, z)
    if any(v.axiom in ("T2", "T3") for v in report.violations):
        return
    chains_ok = not any(v.axiom == "T4" for v in report.violations)
    if chains_ok:
        # below-sets are chains, so a pair has a meet iff it shares the least element
        roots = [x for x in elems if len(below[x]) == 1]
        for a, b in itertools.combinations(roots, 2):
            report.add("T6", a, b)
        return
    for a, b in itertools.combinations(elems, 2):
        common = below[a] & below[b]
        if not common:
            report.add("T6", a, b)
            continue
        top = [m for m in common if all((z, m) in s.order for z in common)]
        if not top:
            report.add("T5", a, b)


def _universal_violations(s, report):
    sig = s.signature
    for sym, tuples in sorted(s.star.items()):
        width = 3 if sym == EQ else sig.star_arity(sym)
        groups = {}
        for t in sorted(tuples):
            if len(t) != width:
                report.add("arity", sym, *t)
                continue
            c, ys = t[0], t[1:]
            if not all(s.lt(c, y) for y in ys):
                report.add("OC", sym, *t)
                continue
            key = (c,) + tuple(s.cone_root(c, y) for y in ys)
            groups.setdefault(key, set()).add(t)
        if sym == EQ:
            continue
        for key, present in sorted(groups.items()):
            c, roots = key[0], key[1:]
            expected = 1
            for r in roots:
                expected *= len(s.up(r))
            if len(present) == expected:
                continue
            for f in itertools.product(*(sorted(s.up(r)) for r in roots)):
                if (c,) + f not in present:
                    report.add("WD", sym, *min(present), "missing", *((c,) + f))
                    break
    if EQ in s.star:
        eqs = s.star[EQ]
        for t in sorted(eqs):
            if len(t) == 3 and not s.lt(t[0], s.meet(t[1], t[2])):
                report.add("EQ", *t)
        for c in sorted(s.elements):
            up = sorted(s.above(c))
            for y, z in itertools.product(up, repeat=2):
                if s.lt(c, s.meet(y, z)) and (c, y, z) not in eqs:
                    report.add("EQ", c, y, z)


def _cone_violations(s, base, report):
    for c in sorted(s.elements):
        if not s.children[c]:
            continue
        q = s.quotient_structure(c, project=True)
        for axiom, witness in base.violations(q):
            report.add(axiom, c, *witness)


def validate(structure, base=None, mode=CONES):
    """Check ``structure`` against the tree axioms, the star axioms and, in
    ``cones`` mode, the base theory on every cone quotient."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if base is not None:
        check_signature(structure, base)
    elif mode == CONES:
        raise ValueError("cones mode needs a base class")
    report = ValidationReport()
    _tree_violations(structure, report)
    if not report.ok or mode == TREE_ONLY:
        return report
    _universal_violations(structure, report)
    if mode == UNIVERSAL:
        return report
    # cone quotients only need the tree, so they are checked even when the
    # lifted relations break (WD), (OC) or (EQ)
    _cone_violations(structure, base, report)
    return report


# -- closure and cones ------------------------------------------------------

def closure_set(structure, points):
    """Meet-closure of ``points``: in a tree the pairwise meets already suffice."""
    pts = sorted(set(points))
    structure._require(*pts)
    out = set(pts)
    for a, b in itertools.combinations(pts, 2):
        out.add(structure.meet(a, b))
    return frozenset(out)


def meet_closure(structure, points):
    return structure.induced(closure_set(structure, points))


@dataclass(frozen=True)
class ConeQuotient:
    center: str
    cones: dict
    base_structure: BaseStructure

    def cone_of(self, y):
        for r, members in self.cones.items():
            if y in members:
                return r
        raise UnknownElement(f"{y} is not above {self.center}")


def cone_partition(structure, c):
    structure._require(c)
    return ConeQuotient(c, structure.cones(c), structure.quotient_structure(c))

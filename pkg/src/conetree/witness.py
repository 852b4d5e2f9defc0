"""Explicit finite witnesses with machine-checked certificates."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .baseclass import get_base
from .core.diagram import qf_diagram
from .core.formula import Const, Star, eval_qf
from .core.structure import (
    CONES, NEW, BaseStructure, DecoratedStructure, assemble, closure_set, validate,
)
from .errors import WitnessError
from .generic import count_1types


# -- branch types ----------------------------------------------------------------

@dataclass(frozen=True)
class BranchTypeRecord:
    branch: tuple          # bottom to top
    meets: dict            # m -> (witness b in the branch, value of x ^ m)
    atoms: frozenset       # same shape as one_point_diagram(..., label="*")

    @property
    def top(self):
        return self.branch[-1]


def check_branch(M, branch):
    branch = list(branch)
    if not branch:
        raise WitnessError("empty branch")
    for x in branch:
        if x not in M.elements:
            raise WitnessError(f"unknown element {x!r} in branch")
    for a, b in itertools.combinations(branch, 2):
        if not (M.leq(a, b) or M.leq(b, a)):
            raise WitnessError(f"{a} and {b} are incomparable, not a chain")
    top = max(branch, key=M.depth.__getitem__)
    if set(branch) != M.below(top) or M.children[top]:
        raise WitnessError("chain is not maximal")
    return tuple(sorted(branch, key=M.depth.__getitem__))


def branch_type(base, M, branch, label=NEW):
    """The atomic diagram over ``M`` forced on ``x`` by ``{x > b : b in branch}``.

    Off the branch, ``x ^ m`` equals ``b ^ m`` for the first ``b`` of the
    branch not below ``m``.  A lifted atom at a branch center is decided by
    putting the top of the branch in place of ``x``; at the top itself the
    only cone is the one of ``x``, which carries the one-element model.
    """
    B = check_branch(M, branch)
    top = B[-1]
    models = base.one_element_models(label)
    if len(models) != 1:
        raise WitnessError(f"base {base.name!r} has {len(models)} one-element models; the top cone is not decided")
    (single,) = models
    on_branch = set(B)
    meets = {}
    atoms = set()
    for m in sorted(M.elements):
        if m in on_branch:
            meets[m] = (m, m)
            atoms.add(("<", m, label))
            atoms.add(("meet", m, m))
        else:
            b = next(b for b in B if not M.lt(b, m))
            meets[m] = (b, M.meet(b, m))
            atoms.add(("meet", m, M.meet(b, m)))
    sig = M.signature
    for sym in sig.symbols:
        n = sig.arity(sym)
        rel = M.star[sym]
        for c in B:
            if c == top:
                if single.holds(sym, (label,) * n):
                    atoms.add((sym, c) + (label,) * n)
                continue
            up = sorted(M.above(c)) + [label]
            for args in itertools.product(up, repeat=n):
                if label not in args:
                    continue
                sub = tuple(top if a == label else a for a in args)
                if (c,) + sub in rel:
                    atoms.add((sym, c) + args)
    return BranchTypeRecord(B, meets, frozenset(atoms))


# -- IP and ict witnesses --------------------------------------------------------

def _leaves_over(signature, center, leaves, quotient_rels):
    below = {center: {center}}
    for x in leaves:
        below[x] = {center, x}
    q = BaseStructure(signature, leaves, quotient_rels)
    return assemble(signature, below, {center: q} if leaves else {})


@dataclass
class ShatterWitness:
    structure: DecoratedStructure
    center: str
    pins: tuple
    selectors: dict  # frozenset of pin indices -> element
    certificate: list = field(default_factory=list)  # (subset, i, expected, observed)

    @property
    def ok(self):
        return all(e == o for _, _, e, o in self.certificate)

    @property
    def patterns(self):
        out = set()
        for s, e in self.selectors.items():
            out.add(frozenset(i for i, d in enumerate(self.pins)
                              if eval_qf(self.structure, Star("R", (Const(self.center), Const(e), Const(d))))))
        return out


def shatter_witness(k):
    """Pins ``d_i`` and selectors ``e_s`` in distinct cones above ``c`` with ``R*(c, e_s, d_i)`` iff ``i`` in ``s``."""
    if not 1 <= k <= 5:
        raise WitnessError("k must be between 1 and 5")
    base = get_base("graph")
    pins = tuple(f"d{i}" for i in range(k))
    selectors = {}
    edges = set()
    for bits in itertools.product("01", repeat=k):
        e = "e" + "".join(bits)
        s = frozenset(i for i, bit in enumerate(bits) if bit == "1")
        selectors[s] = e
        for i in s:
            edges.add((e, pins[i]))
            edges.add((pins[i], e))
    M = _leaves_over(base.signature, "c", list(pins) + sorted(selectors.values()), {"R": edges})
    w = ShatterWitness(M, "c", pins, selectors)
    for s, e in sorted(selectors.items(), key=lambda kv: kv[1]):
        for i, d in enumerate(pins):
            seen = eval_qf(M, Star("R", (Const("c"), Const(e), Const(d))))
            w.certificate.append((s, i, i in s, seen))
    return w


@dataclass
class IctWitness:
    structure: DecoratedStructure
    center: str
    rows: dict          # (i, alpha) -> element, alpha in (1, 2)
    realizations: dict  # (eta1, eta2) -> element
    certificate: list = field(default_factory=list)  # (eta, i, alpha, expected, observed)

    @property
    def ok(self):
        return all(e == o for *_, e, o in self.certificate)


def ict_pattern(n):
    """Depth-2 ict-pattern for ``E1*(c,x,y)``, ``E2*(c,x,y)`` of width ``n``."""
    if not 1 <= n <= 4:
        raise WitnessError("n must be between 1 and 4")
    base = get_base("eq2")
    rows = {(i, alpha): f"a{alpha}_{i}" for alpha in (1, 2) for i in range(n)}
    real = {eta: f"b{eta[0]}{eta[1]}" for eta in itertools.product(range(n), repeat=2)}
    classes = {"E1": [], "E2": []}
    for i in range(n):
        classes["E1"].append({rows[i, 1]} | {b for eta, b in real.items() if eta[0] == i})
        classes["E2"].append({rows[i, 2]} | {b for eta, b in real.items() if eta[1] == i})
        classes["E1"].append({rows[i, 2]})
        classes["E2"].append({rows[i, 1]})
    rels = {sym: {(x, y) for cls in cl for x in cls for y in cls} for sym, cl in classes.items()}
    leaves = sorted(rows.values()) + sorted(real.values())
    M = _leaves_over(base.signature, "c", leaves, rels)
    w = IctWitness(M, "c", rows, real)
    for eta, b in sorted(real.items()):
        for alpha in (1, 2):
            for i in range(n):
                seen = eval_qf(M, Star(f"E{alpha}", (Const("c"), Const(b), Const(rows[i, alpha]))))
                w.certificate.append((eta, i, alpha, eta[alpha - 1] == i, seen))
    return w


# -- type growth ----------------------------------------------------------------

def _free_model(base, labels):
    q = BaseStructure(base.signature, ())
    for lab in labels:
        d = min(base.extensions(q), key=lambda e: e.sort_key())
        q = base.realize(q, d, lab)
    return q


def fan_structure(base, m):
    """Root ``r`` with ``m`` leaves in distinct cones, relations as free as possible."""
    leaves = [f"l{i}" for i in range(1, m + 1)]
    below = {"r": {"r"}, **{x: {"r", x} for x in leaves}}
    quotients = {"r": _free_model(base, leaves)} if leaves else {}
    return assemble(base.signature, below, quotients)


def chain_structure(base, m):
    names = [f"r{i}" for i in range(1, m + 1)]
    below = {x: set(names[: i + 1]) for i, x in enumerate(names)}
    quotients = {x: _free_model(base, [names[i + 1]]) for i, x in enumerate(names[:-1])}
    return assemble(base.signature, below, quotients)


FAMILIES = {"fan": fan_structure, "chain": chain_structure}


def type_growth_profile(base, family, m_max):
    try:
        make = FAMILIES[family]
    except KeyError:
        raise WitnessError(f"unknown family {family!r}; choose from {sorted(FAMILIES)}") from None
    rows = []
    for m in range(1, m_max + 1):
        A = make(base, m)
        rows.append((m, len(A.elements), count_1types(base, A, check=False)))
    return rows


def fit_loglog(rows):
    """Slope and RMS residual of ``log count`` against ``log size``."""
    if len(rows) < 2:
        return math.nan, math.nan
    x = np.log([r[1] for r in rows])
    y = np.log([r[2] for r in rows])
    slope, icept = np.polyfit(x, y, 1)
    resid = y - (slope * x + icept)
    return float(slope), float(np.sqrt(np.mean(resid ** 2)))


# -- indiscernibility ------------------------------------------------------------

def check_indiscernible(M, seq, A=(), tuple_len=2, mode="full"):
    """Whether increasing tuples from ``seq`` share their atomic diagram over ``A``.

    Returns ``(True, None)`` or ``(False, (t1, t2))`` for the first pair of
    tuples of equal length whose diagrams differ.
    """
    if mode not in ("full", "tree-only"):
        raise ValueError(f"unknown mode {mode!r}")
    seq = list(seq)
    if len(set(seq)) != len(seq):
        raise WitnessError("sequence elements must be distinct")
    named_A = [(a, a) for a in sorted(A)]
    for k in range(1, min(tuple_len, len(seq)) + 1):
        first = None
        for idx in itertools.combinations(range(len(seq)), k):
            t = tuple(seq[i] for i in idx)
            named = [(f"#{j}", x) for j, x in enumerate(t)] + named_A
            diag = qf_diagram(M, named, tree_only=(mode == "tree-only"))
            if first is None:
                first = (t, diag)
            elif diag != first[1]:
                return False, (first[0], t)
    return True, None


# -- the inp construction --------------------------------------------------------

SKELETONS = {
    "fan": ("below", "root", "side", "branch"),
    "monotone-up": ("below", "above", "branch"),
    "monotone-down": ("below", "above", "branch"),
    "comb": ("below", "branch", "top"),
}


@dataclass(frozen=True)
class Skeleton:
    shape: str
    position: str
    n: int
    b_edge: bool = False  # the shift-invariant relation carried by B = <I>

    def __post_init__(self):
        if self.shape not in SKELETONS:
            raise WitnessError(f"unknown skeleton {self.shape!r}; choose from {sorted(SKELETONS)}")
        if self.position not in SKELETONS[self.shape]:
            raise WitnessError(f"position {self.position!r} not available for {self.shape}")
        if self.n < 1:
            raise WitnessError("n must be at least 1")


def skeleton_tree(sk):
    """Below-sets of the tree ``<I c>`` for a catalogue skeleton."""
    n = sk.n
    a = [f"a{i}" for i in range(n)]
    below = {}

    def put(x, parent):
        below[x] = (below[parent] if parent is not None else set()) | {x}

    def base_point():
        # where the sequence hangs, for the positions shared by every shape
        if sk.position == "below":
            put("c", None)
            return "c"
        if sk.position == "branch":
            put("q", None)
            put("c", "q")
            return "q"
        return None

    if sk.shape == "fan":
        if sk.position == "root":
            put("c", None)
            root = "c"
        else:
            put("r", base_point())
            root = "r"
            if sk.position == "side":
                put("c", root)
        for x in a:
            put(x, root)
    elif sk.shape in ("monotone-up", "monotone-down"):
        prev = base_point()
        for x in (a if sk.shape == "monotone-up" else a[::-1]):
            put(x, prev)
            prev = x
        if sk.position == "above":
            put("c", prev)
    else:  # comb: a_i leaves the spine at m_i
        prev = base_point()
        spine = [f"m{i}" for i in range(n if sk.position == "top" else n - 1)]
        for m in spine:
            put(m, prev)
            prev = m
        for i, x in enumerate(a):
            put(x, spine[min(i, len(spine) - 1)] if spine else prev)
        if sk.position == "top":
            put("c", spine[-1])
    tree = DecoratedStructure(get_base("equality").signature, below.keys(),
                              [(x, y) for y, s in below.items() for x in s])
    keep = closure_set(tree, a + ["c"])
    return {x: below[x] & keep for x in keep}


def _b_structure(base, tree, sk):
    """``B = <I>`` with its shift-invariant relation."""
    seq = [f"a{i}" for i in range(sk.n)]
    elems = closure_set(tree, seq)
    T = tree.induced(elems)
    quotients = {}
    for ctr in sorted(elems):
        roots = T.children[ctr]
        if len(roots) < 2 or not sk.b_edge:
            continue
        # pairs of cones holding a_i < a_j with ctr = a_i ^ a_j
        pairs = set()
        for i, j in itertools.combinations(range(sk.n), 2):
            if T.meet(seq[i], seq[j]) == ctr:
                x, y = T.cone_root(ctr, seq[i]), T.cone_root(ctr, seq[j])
                pairs.update({(x, y), (y, x)})
        quotients[ctr] = BaseStructure(T.signature, roots, {"R": pairs})
    return assemble(T.signature, {x: set(T.below(x)) for x in elems}, quotients)


def _tree_map(M, src, dst):
    """Tree isomorphism ``<src_a c> -> <dst_a c>`` sending src_a to dst_a, c to c."""
    m = {src: dst, "c": "c", M.meet(src, "c"): M.meet(dst, "c")}
    return m


@dataclass
class InpWitnessReport:
    skeleton: Skeleton
    A0: DecoratedStructure
    B: DecoratedStructure
    N: DecoratedStructure
    copies: list              # A_i as structures inside N's names
    checks: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(self.checks.values())


def default_a0(base, sk, edge=False):
    """``<a0 c>`` on the skeleton's tree, with ``R*(a0^c, a0, c)`` when ``edge``."""
    tree = DecoratedStructure(base.signature, skeleton_tree(sk).keys(),
                              [(x, y) for y, s in skeleton_tree(sk).items() for x in s])
    elems = closure_set(tree, ["a0", "c"])
    T = tree.induced(elems)
    quotients = {}
    m = T.meet("a0", "c")
    if m not in ("a0", "c"):
        labels = list(T.children[m])
        rels = {}
        if edge and "R" in base.signature.symbols:
            x, y = T.cone_root(m, "a0"), T.cone_root(m, "c")
            rels = {"R": {(x, y), (y, x)}}
        quotients[m] = BaseStructure(base.signature, labels, rels)
    return assemble(base.signature, {x: set(T.below(x)) for x in elems}, quotients)


def inp_witness(A0, sk, base=None):
    """Build ``N = <I c>`` copying ``<a0 c>`` along the sequence and certify it."""
    base = base or get_base("graph")
    below = skeleton_tree(sk)
    tree = DecoratedStructure(A0.signature, below.keys(), [(x, y) for y, s in below.items() for x in s])
    seq = [f"a{i}" for i in range(sk.n)]

    # A0 must sit on the skeleton's own <a0 c>
    ref = tree.induced(closure_set(tree, ["a0", "c"]))
    if set(A0.elements) != set(ref.elements) or A0.order != ref.order:
        raise WitnessError("A0 does not match the skeleton's tree on <a0 c>")
    rep = validate(A0, base, CONES)
    if not rep.ok:
        raise WitnessError(f"A0 invalid: {rep.violations[0]}")

    # tree-indiscernibility of the pairs a_i c over nothing
    diag0 = qf_diagram(tree, [("a", "a0"), ("c", "c")], tree_only=True)
    copies = []
    for a in seq:
        if qf_diagram(tree, [("a", a), ("c", "c")], tree_only=True) != diag0:
            raise WitnessError(f"skeleton not tree-indiscernible over c: {a} c differs from a0 c")
        sigma = _tree_map(tree, "a0", a)
        copies.append(A0.rename(sigma))

    B = _b_structure(base, tree, sk)

    # S = union of the copies and B; close under (WD) cone by cone
    cone_tuples = {}
    for src in copies + [B]:
        for sym, t in src.star_tuples():
            c = t[0]
            key = tuple(tree.cone_root(c, y) for y in t[1:])
            cone_tuples.setdefault(c, {}).setdefault(sym, set()).add(key)
    quotients = {}
    for c, rels in cone_tuples.items():
        quotients[c] = BaseStructure(A0.signature, tree.children[c], rels)
    N = assemble(A0.signature, below, quotients)

    report = InpWitnessReport(sk, A0, B, N, copies)
    report.checks["valid"] = validate(N, base, CONES).ok
    for i, Ai in enumerate(copies):
        got = N.induced(Ai.elements)
        if got != Ai:
            extra = sorted(set(got.star_tuples()) ^ set(Ai.star_tuples()))
            raise WitnessError(f"copy A{i} conflicts with the sequence data at {extra[0]}")
        report.checks[f"A{i}"] = True
    got = N.induced(B.elements)
    if got != B:
        extra = sorted(set(got.star_tuples()) ^ set(B.star_tuples()))
        raise WitnessError(f"B conflicts with the copied pairs at {extra[0]}")
    report.checks["B"] = True
    diags = {qf_diagram(N, [("a", a), ("c", "c")]) for a in seq}
    report.checks["qf-type"] = len(diags) == 1
    return report


# -- R' --------------------------------------------------------------------------

def r_prime(M, sym="R"):
    """``R'(a, b)`` iff ``a ^ b`` is neither ``a`` nor ``b`` and ``R*(a ^ b, a, b)``."""
    out = set()
    for a, b in itertools.permutations(sorted(M.elements), 2):
        m = M.meet(a, b)
        if m != a and m != b and M.holds(sym, (m, a, b)):
            out.add((a, b))
    return out


def reconstruct(tree, rprime, sym="R"):
    """Rebuild the lifted relation from ``R'`` on the tree of ``tree``."""
    pairs = {}
    for a, b in rprime:
        m = tree.meet(a, b)
        pairs.setdefault(m, set()).add((tree.cone_root(m, a), tree.cone_root(m, b)))
    quotients = {c: BaseStructure(tree.signature, tree.children[c], {sym: ps}) for c, ps in pairs.items()}
    return assemble(tree.signature, {x: set(tree.below(x)) for x in tree.elements}, quotients)


def strip_relations(M):
    return DecoratedStructure(M.signature, M.elements, M.order)

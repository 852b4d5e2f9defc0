"""Joint embedding and amalgamation for finite decorated meet-trees.

Every construction works on a skeleton (the tree as below-sets) plus one
base structure per center living on that center's cone roots; the star
tuples are re-expanded from those quotients at the end, which keeps (WD)
true by construction.
"""
from __future__ import annotations

from .core.structure import (
    CONES, DecoratedStructure, assemble, closure_set, fresh_name, validate,
)
from .errors import AmalgamationError, InvalidStructure, SignatureMismatch

JEP_ROOT = "c~jep"


def _require_valid(base, s, what):
    report = validate(s, base, CONES)
    if not report.ok:
        raise InvalidStructure(report, what)


def _skeleton(s):
    below = {x: set(s.below(x)) for x in s.elements}
    quotients = {c: s.quotient_structure(c) for c in s.elements if s.children[c]}
    return below, quotients


def _one_point_model(base, label):
    models = base.one_element_models(label)
    if not models:
        raise AmalgamationError(f"base {base.name!r} has no one-element model")
    return min(models, key=lambda m: m.key())


# -- JEP ----------------------------------------------------------------------

def _jep(base, A, B, reserved=()):
    taken = set(A.elements) | set(B.elements) | set(reserved)
    c = fresh_name(JEP_ROOT, taken)
    below, quotients = {c: {c}}, {}
    roots = []
    for s in (A, B):
        if not s.elements:
            continue
        b, q = _skeleton(s)
        for x, under in b.items():
            below[x] = under | {c}
        quotients.update(q)
        roots.append(s.root)
    if len(roots) == 2:
        E = base.joint_embed(_one_point_model(base, roots[0]), _one_point_model(base, roots[1]))
    elif roots:
        E = _one_point_model(base, roots[0])
    else:
        E = None
    if E is not None:
        quotients[c] = E
    return assemble(A.signature, below, quotients)


def jep(base, A, B, reserved=()):
    """Put a new root below disjoint ``A`` and ``B``.

    The quotient at the new root is the free joint embedding of two copies
    of the one-element model, so no lifted tuple crosses between A and B
    beyond what that model forces.
    """
    if A.elements & B.elements:
        raise AmalgamationError(f"name clash: {sorted(A.elements & B.elements)}")
    _require_valid(base, A, "A")
    _require_valid(base, B, "B")
    return _jep(base, A, B, reserved)


# -- one-generator amalgamation ---------------------------------------------

def _case_one(base, A, B, C, b):
    """``b`` lies below some element of ``A``."""
    a1 = B.meet_all(sorted(a for a in A.elements if B.lt(b, a)))
    lower = [a for a in A.elements if B.lt(a, b)]
    a0 = max(lower, key=B.depth.__getitem__) if lower else None
    below, quotients = _skeleton(C)
    if a0 is None:
        moved, target = C.elements, C.root
        below[b] = {b}
    else:
        target = C.cone_root(a0, a1)
        moved = C.up(target)
        below[b] = set(C.below(a0)) | {b}
        quotients[a0] = quotients[a0].rename({target: b})
    for x in moved:
        below[x].add(b)
    # in B everything above b sits in a single cone
    (child,) = B.children[b]
    quotients[b] = B.quotient_structure(b).rename({child: target})
    return assemble(C.signature, below, quotients)


def _case_two(base, A, B, C, b, b1):
    """``b`` branches off directly above ``b1``, which is already in ``A``."""
    below, quotients = _skeleton(C)
    below[b] = set(C.below(b1)) | {b}

    def labels(s):
        out = {}
        for ch in s.children[b1]:
            members = s.up(ch) & A.elements
            out[ch] = C.cone_root(b1, min(members)) if members else b
        return out

    A_star = A.quotient_structure(b1).rename(labels(A))
    B_star = B.quotient_structure(b1).rename(labels(B))
    C_star = C.quotient_structure(b1)
    if A_star.elements:
        quotients[b1] = base.amalgamate(A_star, B_star, C_star)
    else:
        quotients[b1] = base.joint_embed(B_star, C_star)
    return assemble(C.signature, below, quotients)


def _generator(B, A):
    new = B.elements - A.elements
    if not new:
        return None
    b = max(sorted(new), key=B.depth.__getitem__)
    if closure_set(B, A.elements | {b}) != B.elements:
        raise AmalgamationError("B is not generated over A by a single element")
    return b


def _one_generator(base, A, B, C, reserved=()):
    b = _generator(B, A)
    if b is None:
        return C
    if C.elements == A.elements:
        return B
    if not A.elements:
        return _jep(base, B, C, reserved)
    if any(B.lt(b, a) for a in A.elements):
        return _case_one(base, A, B, C, b)
    b1 = max((B.meet(b, a) for a in sorted(A.elements)), key=B.depth.__getitem__)
    if b1 not in A.elements:
        A1 = B.induced(A.elements | {b1})
        C = _case_one(base, A, A1, C, b1)
        A = A1
    return _case_two(base, A, B, C, b, b1)


def _check_triple(base, A, B, C):
    for s, what in ((A, "A"), (B, "B"), (C, "C")):
        if s.signature.symbols != base.signature.symbols:
            raise SignatureMismatch(f"{what} is over {s.signature.name!r}, base is {base.name!r}")
        _require_valid(base, s, what)
    if B.elements & C.elements != A.elements:
        raise AmalgamationError("A is not the intersection of B and C")
    for s, what in ((B, "B"), (C, "C")):
        if not s.is_meet_closed(A.elements) or s.induced(A.elements) != A:
            raise AmalgamationError(f"A is not a substructure of {what}")


def amalgamate_one_generator(base, A, B, C):
    """Amalgamate ``B = <A b>`` and ``C`` over ``A``."""
    _check_triple(base, A, B, C)
    return _one_generator(base, A, B, C)


def _chain(B, A):
    """Meet-closed chain from A to B adding one element at a time (by depth)."""
    return sorted(B.elements - A.elements, key=lambda x: (B.depth[x], x))


def _amalgamate(base, A, B, C):
    reserved = B.elements | C.elements
    D = C
    current = set(A.elements)
    prev = A
    for x in _chain(B, A):
        current.add(x)
        nxt = B.induced(current)
        D = _one_generator(base, prev, nxt, D, reserved)
        prev = nxt
    return D


def amalgamate(base, A, B, C):
    """Strong amalgam of ``B`` and ``C`` over their common substructure ``A``.

    B is reached from A one generator at a time; each step is a
    one-generator amalgamation against the previous result.  When A is
    empty the first step is a joint embedding, which adds a new root.
    """
    _check_triple(base, A, B, C)
    return _amalgamate(base, A, B, C)


def empty_structure(signature):
    return DecoratedStructure(signature, (), ())

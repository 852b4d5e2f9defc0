from conetree import BaseStructure, assemble, get_base


def build(base_name, parents, quotients=None):
    """Structure from a parent map and per-center relation dicts on cone roots."""
    base = get_base(base_name)
    below = {}

    def under(x):
        if x not in below:
            p = parents[x]
            below[x] = (under(p) if p is not None else set()) | {x}
        return below[x]

    for x in parents:
        under(x)
    children = {}
    for x, p in parents.items():
        if p is not None:
            children.setdefault(p, []).append(x)
    qs = {}
    for c, ch in children.items():
        rels = (quotients or {}).get(c, {})
        qs[c] = BaseStructure(base.signature, ch, rels)
    if base_name == "eq2":
        # reflexive classes wherever nothing else is given
        for c, q in qs.items():
            if c not in (quotients or {}):
                diag = {(x, x) for x in q.elements}
                qs[c] = BaseStructure(base.signature, q.elements, {"E1": diag, "E2": diag})
    return assemble(base.signature, below, qs)


def sym(*pairs):
    return set(pairs) | {(b, a) for a, b in pairs}


def strong_and_faithful(D, B, C):
    return (B.elements & C.elements <= D.elements
            and D.induced(B.elements) == B and D.induced(C.elements) == C)

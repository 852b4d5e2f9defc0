"""Line-oriented text format for decorated structures.

::

    # comments run to end of line
    signature graph
    element a b c
    leq a b
    leq a c
    rel R a b c

``leq`` pairs must list the full order (reflexive pairs are implied, the
transitive closure is not).  ``rel R c y...`` is one tuple of ``R*``.
"""
from __future__ import annotations

from ..errors import ParseError, SignatureMismatch
from .structure import EQ, DecoratedStructure, get_signature

DEFAULT_SIGNATURE = "equality"


def _check_id(tok, lineno):
    if tok == "*" or tok.startswith("#"):
        raise ParseError(f"reserved element identifier {tok!r}", lineno)


def parse_structure(text):
    sig_name = None
    elements = []
    seen = set()
    order = []
    star_lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *args = line.split()
        if head == "signature":
            if len(args) != 1:
                raise ParseError("signature takes exactly one name", lineno)
            if sig_name is not None:
                raise ParseError("duplicate signature line", lineno)
            sig_name = args[0]
        elif head == "element":
            if not args:
                raise ParseError("element needs at least one identifier", lineno)
            for x in args:
                _check_id(x, lineno)
                if x in seen:
                    raise ParseError(f"duplicate element {x!r}", lineno)
                seen.add(x)
                elements.append(x)
        elif head == "leq":
            if len(args) != 2:
                raise ParseError("leq takes exactly two identifiers", lineno)
            order.append((lineno, args[0], args[1]))
        elif head == "rel":
            if len(args) < 2:
                raise ParseError("rel needs a symbol and a center", lineno)
            star_lines.append((lineno, args[0], tuple(args[1:])))
        else:
            raise ParseError(f"unknown directive {head!r}", lineno)

    try:
        signature = get_signature(sig_name or DEFAULT_SIGNATURE)
    except SignatureMismatch as exc:
        raise ParseError(str(exc)) from None

    def known(x, lineno):
        if x not in seen:
            raise ParseError(f"dangling reference to undeclared element {x!r}", lineno)

    pairs = []
    for lineno, a, b in order:
        known(a, lineno)
        known(b, lineno)
        pairs.append((a, b))
    star = {sym: set() for sym in signature.symbols}
    for lineno, sym, tup in star_lines:
        if sym == EQ:
            width = 3
        else:
            try:
                width = signature.star_arity(sym)
            except KeyError:
                raise ParseError(f"relation {sym!r} not in signature {signature.name!r}", lineno) from None
        if len(tup) != width:
            raise ParseError(f"{sym}* takes {width} arguments, got {len(tup)}", lineno)
        for x in tup:
            known(x, lineno)
        star.setdefault(sym, set()).add(tup)
    return DecoratedStructure(signature, elements, pairs, star)


def serialize_structure(structure):
    """Canonical text: sorted elements, then sorted strict order pairs, then sorted tuples."""
    lines = [f"signature {structure.signature.name}"]
    if structure.elements:
        lines.append("element " + " ".join(sorted(structure.elements)))
    for a, b in sorted(structure.order):
        if a != b:
            lines.append(f"leq {a} {b}")
    for sym, t in structure.star_tuples():
        lines.append(f"rel {sym} " + " ".join(t))
    return "\n".join(lines) + "\n"


def canonical(text):
    return serialize_structure(parse_structure(text))


def read_structure(path):
    with open(path, encoding="utf-8") as fh:
        return parse_structure(fh.read())


def write_structure(structure, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_structure(structure))

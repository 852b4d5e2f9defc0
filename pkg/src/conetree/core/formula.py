"""Quantifier-free formulas over the meet-tree language and its star lift.

Terms are variables, named elements and meets.  Atoms are ``<=``, ``<``,
``=`` between terms, lifted atoms ``R*(t0, ..., tn)`` (``t0`` the center) and
plain base atoms ``R(y...)`` which only make sense inside a cone quotient or
after :func:`star` translation.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import FormulaError
from .structure import EQ


# -- terms ------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Meet:
    left: object
    right: object

    def __str__(self):
        return f"({self.left} ^ {self.right})"


# -- formulas ---------------------------------------------------------------

@dataclass(frozen=True)
class Leq:
    left: object
    right: object

    def __str__(self):
        return f"{self.left} <= {self.right}"


@dataclass(frozen=True)
class Lt:
    left: object
    right: object

    def __str__(self):
        return f"{self.left} < {self.right}"


@dataclass(frozen=True)
class Equal:
    left: object
    right: object

    def __str__(self):
        return f"{self.left} = {self.right}"


@dataclass(frozen=True)
class Star:
    """Lifted atom ``sym*(center, args...)``."""
    sym: str
    args: tuple

    def __str__(self):
        return f"{self.sym}*({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class Rel:
    """Base-language atom ``sym(args...)``; ``sym`` may be ``=``."""
    sym: str
    args: tuple

    def __str__(self):
        if self.sym == EQ:
            return f"{self.args[0]} == {self.args[1]}"
        return f"{self.sym}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class Not:
    body: object

    def __str__(self):
        return f"~{_wrap(self.body)}"


@dataclass(frozen=True)
class And:
    parts: tuple

    def __str__(self):
        return " & ".join(_wrap(p) for p in self.parts) if self.parts else "true"


@dataclass(frozen=True)
class Or:
    parts: tuple

    def __str__(self):
        return " | ".join(_wrap(p) for p in self.parts) if self.parts else "false"


@dataclass(frozen=True)
class Implies:
    left: object
    right: object

    def __str__(self):
        return f"{_wrap(self.left)} -> {_wrap(self.right)}"


@dataclass(frozen=True)
class Iff:
    left: object
    right: object

    def __str__(self):
        return f"{_wrap(self.left)} <-> {_wrap(self.right)}"


TRUE = And(())
FALSE = Or(())

_ATOMS = (Leq, Lt, Equal, Star, Rel)


def _wrap(f):
    if isinstance(f, _ATOMS) or isinstance(f, Not) or (isinstance(f, (And, Or)) and not f.parts):
        return str(f)
    return f"({f})"


# -- evaluation -------------------------------------------------------------

def eval_term(structure, term, assignment):
    if isinstance(term, Var):
        try:
            return assignment[term.name]
        except KeyError:
            raise FormulaError(f"unassigned variable {term.name!r}") from None
    if isinstance(term, Const):
        if term.name not in structure.elements:
            raise FormulaError(f"unknown constant {term.name!r}")
        return term.name
    if isinstance(term, Meet):
        return structure.meet(eval_term(structure, term.left, assignment),
                              eval_term(structure, term.right, assignment))
    raise FormulaError(f"not a term: {term!r}")


def _connective(f, ev):
    if isinstance(f, Not):
        return not ev(f.body)
    if isinstance(f, And):
        return all(ev(p) for p in f.parts)
    if isinstance(f, Or):
        return any(ev(p) for p in f.parts)
    if isinstance(f, Implies):
        return (not ev(f.left)) or ev(f.right)
    if isinstance(f, Iff):
        return ev(f.left) == ev(f.right)
    raise FormulaError(f"not a formula: {f!r}")


def eval_qf(structure, formula, assignment=None):
    """Truth value of a quantifier-free star-language formula in ``structure``."""
    assignment = dict(assignment or {})
    for v, x in assignment.items():
        if x not in structure.elements:
            raise FormulaError(f"variable {v!r} assigned to unknown element {x!r}")

    def term(t):
        return eval_term(structure, t, assignment)

    def ev(f):
        if isinstance(f, Leq):
            return structure.leq(term(f.left), term(f.right))
        if isinstance(f, Lt):
            return structure.lt(term(f.left), term(f.right))
        if isinstance(f, Equal):
            return term(f.left) == term(f.right)
        if isinstance(f, Star):
            try:
                width = 3 if f.sym == EQ else structure.signature.star_arity(f.sym)
            except KeyError:
                raise FormulaError(f"unknown relation symbol {f.sym!r}") from None
            if len(f.args) != width:
                raise FormulaError(f"{f.sym}* takes {width} arguments, got {len(f.args)}")
            return structure.holds(f.sym, tuple(term(t) for t in f.args))
        if isinstance(f, Rel):
            raise FormulaError(f"base atom {f} must be star-translated before evaluation in a tree")
        return _connective(f, ev)

    return ev(formula)


def eval_base(structure, formula, assignment):
    """Truth value of a quantifier-free base-language formula in a :class:`BaseStructure`."""

    def ev(f):
        if isinstance(f, Rel):
            args = []
            for v in f.args:
                if not isinstance(v, Var):
                    raise FormulaError(f"base atoms take variables, got {v!r}")
                try:
                    args.append(assignment[v.name])
                except KeyError:
                    raise FormulaError(f"unassigned variable {v.name!r}") from None
            if f.sym != EQ:
                try:
                    n = structure.signature.arity(f.sym)
                except KeyError:
                    raise FormulaError(f"unknown relation symbol {f.sym!r}") from None
                if n != len(args):
                    raise FormulaError(f"{f.sym} takes {n} arguments, got {len(args)}")
            return structure.holds(f.sym, args)
        if isinstance(f, _ATOMS):
            raise FormulaError(f"{f} is not a base-language atom")
        return _connective(f, ev)

    return ev(formula)


def star(formula, center):
    """Replace each base atom ``R(y)`` by ``R*(center, y)``."""
    if isinstance(center, str):
        center = Var(center)
    if isinstance(formula, Rel):
        return Star(formula.sym, (center,) + tuple(formula.args))
    if isinstance(formula, Not):
        return Not(star(formula.body, center))
    if isinstance(formula, And):
        return And(tuple(star(p, center) for p in formula.parts))
    if isinstance(formula, Or):
        return Or(tuple(star(p, center) for p in formula.parts))
    if isinstance(formula, Implies):
        return Implies(star(formula.left, center), star(formula.right, center))
    if isinstance(formula, Iff):
        return Iff(star(formula.left, center), star(formula.right, center))
    raise FormulaError(f"{formula} is not a base-language formula")


def free_variables(formula):
    out = set()

    def walk(x):
        if isinstance(x, Var):
            out.add(x.name)
        elif isinstance(x, Const):
            pass
        elif isinstance(x, (Meet, Leq, Lt, Equal, Implies, Iff)):
            walk(x.left)
            walk(x.right)
        elif isinstance(x, (Star, Rel)):
            for a in x.args:
                walk(a)
        elif isinstance(x, Not):
            walk(x.body)
        elif isinstance(x, (And, Or)):
            for p in x.parts:
                walk(p)
    walk(formula)
    return out


# -- parsing ----------------------------------------------------------------

_TOKEN = re.compile(r"\s*(<->|->|<=|!=|==|=\*|[A-Za-z_][\w~.]*\*|[()^,~&|<=]|\w[\w~.]*)")


def _tokenize(text):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaError(f"cannot tokenize formula at {text[pos:]!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text, variables):
        self.toks = _tokenize(text)
        self.i = 0
        self.variables = set(variables)

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise FormulaError(f"expected {expected or 'token'}, got {tok!r}")
        self.i += 1
        return tok

    def formula(self):
        left = self.implication()
        while self.peek() == "<->":
            self.take()
            left = Iff(left, self.implication())
        return left

    def implication(self):
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.implication())
        return left

    def disjunction(self):
        parts = [self.conjunction()]
        while self.peek() == "|":
            self.take()
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self):
        parts = [self.unary()]
        while self.peek() == "&":
            self.take()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self):
        tok = self.peek()
        if tok in ("~", "not"):
            self.take()
            return Not(self.unary())
        if tok == "true":
            self.take()
            return TRUE
        if tok == "false":
            self.take()
            return FALSE
        if tok == "(":
            save = self.i
            try:
                self.take("(")
                f = self.formula()
                self.take(")")
                if self.peek() not in ("<=", "<", "=", "!=", "^"):
                    return f
            except FormulaError:
                pass
            self.i = save
        return self.atom()

    def atom(self):
        tok = self.peek()
        if tok is not None and tok.endswith("*") and tok != "*":
            self.take()
            sym = tok[:-1]
            self.take("(")
            args = [self.term()]
            while self.peek() == ",":
                self.take()
                args.append(self.term())
            self.take(")")
            return Star(sym, tuple(args))
        left = self.term()
        op = self.take()
        right = self.term()
        if op == "<=":
            return Leq(left, right)
        if op == "<":
            return Lt(left, right)
        if op in ("=", "=="):
            return Equal(left, right)
        if op == "!=":
            return Not(Equal(left, right))
        raise FormulaError(f"expected a comparison, got {op!r}")

    def term(self):
        left = self.primary()
        while self.peek() == "^":
            self.take()
            left = Meet(left, self.primary())
        return left

    def primary(self):
        tok = self.take()
        if tok == "(":
            t = self.term()
            self.take(")")
            return t
        if not re.fullmatch(r"\w[\w~.]*", tok):
            raise FormulaError(f"expected a name, got {tok!r}")
        return Var(tok) if tok in self.variables else Const(tok)


def parse_formula(text, variables=()):
    """Parse the textual syntax, e.g. ``R*(c, x ^ y, z) & ~(x <= y)``.

    Names listed in ``variables`` become variables; every other name is a
    constant naming an element.
    """
    p = _Parser(text, variables)
    f = p.formula()
    if p.peek() is not None:
        raise FormulaError(f"trailing input at {p.peek()!r}")
    return f

"""``conetree`` command line.

Exit codes: 0 success, 1 a validation failure or library error, 2 a usage
error (bad flags, missing seed, unreadable file).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field

from . import amalgam, generic, witness
from .baseclass import get_base
from .core import (
    CONES, MODES, closure_set, cone_partition, eval_qf, free_variables, parse_formula,
    read_structure, serialize_structure, validate,
)
from .errors import ConeTreeError

SEED_ENV = "CONETREE_SEED"


class UsageError(Exception):
    pass


@dataclass
class CommandResult:
    code: int
    stdout: str = ""
    stderr: str = ""
    records: list = field(default_factory=list)


class Output:
    """Collects report records and renders them in the requested format."""

    def __init__(self, fmt):
        self.fmt = fmt
        self.text = []
        self.records = []

    def line(self, text):
        self.text.append(text)

    def record(self, **rec):
        self.records.append(rec)

    def render(self):
        if self.fmt == "text":
            return "".join(t + "\n" for t in self.text)
        if self.fmt == "jsonl":
            return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records)
        buf = io.StringIO()
        keys = []
        for r in self.records:
            keys.extend(k for k in r if k not in keys)
        w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        if keys:
            w.writeheader()
        for r in self.records:
            w.writerow({k: _cell(v) for k, v in r.items()})
        return buf.getvalue()


def _cell(v):
    if isinstance(v, (list, tuple)):
        return " ".join(map(str, v))
    return v


# -- helpers --------------------------------------------------------------------

def _load(path):
    try:
        return read_structure(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _base_for(args, *structures):
    name = args.base or (structures[0].signature.name if structures else None)
    if name is None:
        raise UsageError("--base is required")
    return get_base(name)


def _seed(args):
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        raise UsageError(f"this command is randomized: pass --seed or set {SEED_ENV}")
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer") from None


def _emit_structure(out, args, structure):
    text = serialize_structure(structure)
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        out.line(f"wrote {args.output} ({len(structure.elements)} elements)")
    else:
        out.text.extend(text.rstrip("\n").split("\n"))


def _split(text):
    return [x for x in (text or "").split(",") if x]


# -- commands -------------------------------------------------------------------

def cmd_validate(args, out):
    s = _load(args.file)
    base = _base_for(args, s) if args.mode == CONES or args.base else None
    rep = validate(s, base, args.mode)
    for v in rep.violations:
        out.line(str(v))
        out.record(axiom=v.axiom, witness=list(v.witness))
    out.line("ok" if rep.ok else f"{len(rep.violations)} violation(s)")
    if rep.ok:
        out.record(axiom="", witness=[], status="ok")
    return 0 if rep.ok else 1


def cmd_amalgamate(args, out):
    A, B, C = (_load(p) for p in (args.A, args.B, args.C))
    base = _base_for(args, A)
    D = amalgam.amalgamate(base, A, B, C)
    out.record(elements=len(D.elements), added=sorted(D.elements - B.elements - C.elements))
    _emit_structure(out, args, D)
    return 0


def cmd_jep(args, out):
    A, B = _load(args.A), _load(args.B)
    base = _base_for(args, A)
    C = amalgam.jep(base, A, B)
    out.record(elements=len(C.elements), root=C.root)
    _emit_structure(out, args, C)
    return 0


def cmd_generate(args, out):
    base = get_base(args.base)
    seed = _seed(args)
    builder = generic.GenericBuilder(base, args.budget, args.closure, seed)
    M = builder.build(args.rounds)
    out.record(elements=len(M.elements), rounds=builder.rounds_done, covered=len(builder.covered), seed=seed)
    _emit_structure(out, args, M)
    return 0


def _over(args, M):
    pts = _split(getattr(args, "over", None))
    if not pts:
        return M
    for p in pts:
        if p not in M.elements:
            raise ConeTreeError(f"unknown element {p!r}")
    return M.induced(closure_set(M, pts))


def cmd_types(args, out):
    A = _load(args.file)
    base = _base_for(args, A)
    sub = _over(args, A)
    types = generic.enumerate_1types(base, sub)
    if args.count:
        out.line(str(len(types)))
        out.record(count=len(types))
        return 0
    for i, d in enumerate(types):
        out.line(f"{i}\t{d}")
        out.record(index=i, kind=d.kind, anchor=d.anchor or "", descriptor=str(d))
    return 0


def cmd_realize(args, out):
    M = _load(args.file)
    base = _base_for(args, M)
    sub = _over(args, M)
    types = generic.enumerate_1types(base, sub)
    if not 0 <= args.type < len(types):
        raise UsageError(f"--type must be in 0..{len(types) - 1}")
    M2, x = generic.realize_type(base, M, sub, types[args.type], args.name)
    out.record(point=x, descriptor=str(types[args.type]), elements=len(M2.elements))
    if args.output:
        out.line(f"realized {types[args.type]} by {x}")
    _emit_structure(out, args, M2)
    return 0


def cmd_check_ep(args, out):
    M = _load(args.file)
    base = _base_for(args, M)
    seed = _seed(args) if args.sample is not None else 0
    rep = generic.check_extension_property(base, M, args.s, args.sample, seed=seed)
    for S, d in rep.missing():
        out.line(f"missing over {{{','.join(S)}}}: {d}")
        out.record(substructure=list(S), descriptor=str(d), realized=False)
    out.line(f"coverage {rep.realized}/{rep.total} = {rep.fraction:.4f}")
    out.record(realized=rep.realized, total=rep.total, fraction=round(rep.fraction, 6))
    return 0 if rep.fraction == 1.0 else 1


def cmd_baf(args, out):
    M, N = _load(args.M), _load(args.N)
    base = _base_for(args, M)
    seed = _seed(args) if args.order == "random" else 0
    f = {}
    for pair in _split(args.map):
        if ":" not in pair:
            raise UsageError(f"bad --map entry {pair!r}; expected a:b")
        a, b = pair.split(":", 1)
        f[a] = b
    res = generic.back_and_forth(base, M, N, f, args.steps, seed, args.order)
    for a in sorted(res.mapping):
        out.line(f"{a} -> {res.mapping[a]}")
        out.record(source=a, target=res.mapping[a])
    if res.failure:
        direction, x, d = res.failure
        out.line(f"defect after {res.steps} step(s): {direction} {x} has no match for {d}")
        out.record(status="defect", steps=res.steps, direction=direction, element=x, descriptor=str(d))
        return 1
    out.line(f"extended {res.steps} step(s){', complete' if res.complete else ''}")
    out.record(status="ok", steps=res.steps, complete=res.complete)
    return 0


def cmd_branch_type(args, out):
    M = _load(args.file)
    base = _base_for(args, M)
    rec = witness.branch_type(base, M, _split(args.branch))
    for m, (b, v) in sorted(rec.meets.items()):
        out.line(f"x ^ {m} = {v}   (via {b})")
        out.record(kind="meet", element=m, via=b, value=v)
    for atom in sorted(a for a in rec.atoms if a[0] not in ("<", "meet")):
        out.line(f"{atom[0]}*({', '.join(atom[1:])})")
        out.record(kind="atom", symbol=atom[0], args=list(atom[1:]))
    return 0


def cmd_witness(args, out):
    if args.kind == "ip":
        w = witness.shatter_witness(args.k)
        for s, i, exp, seen in w.certificate:
            out.record(selector=w.selectors[s], pin=w.pins[i], expected=exp, observed=seen)
        out.line(f"shatter k={args.k}: {len(w.patterns)} patterns, {len(w.certificate)} atoms, "
                 f"{'certified' if w.ok else 'FAILED'}")
        S, ok = w.structure, w.ok
        base = get_base("graph")
    elif args.kind == "ict":
        w = witness.ict_pattern(args.n)
        for eta, i, alpha, exp, seen in w.certificate:
            out.record(realization=w.realizations[eta], row=alpha, index=i, expected=exp, observed=seen)
        out.line(f"ict n={args.n}: {len(w.realizations)} realizations, {len(w.certificate)} atoms, "
                 f"{'certified' if w.ok else 'FAILED'}")
        S, ok = w.structure, w.ok
        base = get_base("eq2")
    else:
        base = get_base("graph")
        sk = witness.Skeleton(args.shape, args.position, args.n, args.b_edge)
        A0 = _load(args.a0_file) if args.a0_file else witness.default_a0(base, sk, args.a0_edge)
        rep = witness.inp_witness(A0, sk, base)
        for name, good in rep.checks.items():
            out.record(check=name, ok=good)
        out.line(f"inp {args.shape}/{args.position} n={args.n}: "
                 + ", ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in rep.checks.items()))
        S, ok = rep.N, rep.ok
    if args.output:
        _emit_structure(out, args, S)
    rep = validate(S, base, CONES)
    return 0 if ok and rep.ok else 1


def cmd_profile(args, out):
    bases = _split(args.base) or ["graph"]
    tables = {}
    for name in bases:
        base = get_base(name)
        rows = witness.type_growth_profile(base, args.family, args.max)
        tables[name] = rows
        slope, resid = witness.fit_loglog(rows)
        for m, size, count in rows:
            out.line(f"{name}\t{args.family}\t{m}\t{size}\t{count}")
            out.record(base=name, family=args.family, m=m, size=size, count=count)
        out.line(f"{name}: log-log slope {slope:.4f}, rms residual {resid:.4f}")
    if args.plot:
        from .plotting import plot_profile
        plot_profile(tables, args.plot, title=f"1-types over {args.family} family")
        out.line(f"wrote {args.plot}")
    return 0


def cmd_cones(args, out):
    M = _load(args.file)
    centers = [args.center] if args.center else sorted(M.elements)
    for c in centers:
        q = cone_partition(M, c)
        for root in sorted(q.cones):
            members = sorted(q.cones[root])
            out.line(f"{c}\t{root}\t{' '.join(members)}")
            out.record(center=c, cone=root, members=members)
        for sym in sorted(q.base_structure.relations):
            for t in sorted(q.base_structure.relations[sym]):
                out.line(f"{c}\t{sym}({', '.join(t)})")
                out.record(center=c, relation=sym, cones=list(t))
    return 0


def cmd_eval(args, out):
    M = _load(args.file)
    assign = {}
    for pair in _split(args.assign):
        if "=" not in pair:
            raise UsageError(f"bad --assign entry {pair!r}; expected x=a")
        v, a = pair.split("=", 1)
        assign[v] = a
    f = parse_formula(args.formula, variables=assign.keys())
    val = eval_qf(M, f, assign)
    out.line("true" if val else "false")
    out.record(formula=str(f), value=val, free=sorted(free_variables(f)))
    return 0


# -- parser ---------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="conetree", description="Decorated meet-trees: validation, "
                                "amalgamation, types, generic approximations and witnesses.")
    p.add_argument("--format", choices=("text", "csv", "jsonl"), default="text")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(fn=fn)
        return sp

    def base_opt(sp, required=False):
        sp.add_argument("--base", required=required, help="equality, graph, eq2 or a registered base")

    sp = add("validate", cmd_validate, "check a structure against the axioms")
    base_opt(sp)
    sp.add_argument("--mode", choices=MODES, default=CONES)
    sp.add_argument("file")

    sp = add("amalgamate", cmd_amalgamate, "amalgamate B and C over A")
    base_opt(sp)
    sp.add_argument("A")
    sp.add_argument("B")
    sp.add_argument("C")
    sp.add_argument("-o", "--output")

    sp = add("jep", cmd_jep, "jointly embed two disjoint structures")
    base_opt(sp)
    sp.add_argument("A")
    sp.add_argument("B")
    sp.add_argument("-o", "--output")

    sp = add("generate", cmd_generate, "build a finite approximation of the generic structure")
    base_opt(sp, required=True)
    sp.add_argument("--budget", type=int, required=True)
    sp.add_argument("--closure", type=int, default=1)
    sp.add_argument("--rounds", type=int, default=1)
    sp.add_argument("--seed", type=int)
    sp.add_argument("-o", "--output")

    sp = add("types", cmd_types, "enumerate quantifier-free 1-types")
    base_opt(sp)
    sp.add_argument("file")
    sp.add_argument("--over", help="comma-separated points; types over their meet-closure")
    sp.add_argument("--count", action="store_true")

    sp = add("realize", cmd_realize, "realize a 1-type in an extension")
    base_opt(sp)
    sp.add_argument("file")
    sp.add_argument("--over")
    sp.add_argument("--type", type=int, required=True, help="index as listed by 'types'")
    sp.add_argument("--name")
    sp.add_argument("-o", "--output")

    sp = add("check-ep", cmd_check_ep, "check the extension property")
    base_opt(sp)
    sp.add_argument("file")
    sp.add_argument("--s", type=int, default=1)
    sp.add_argument("--sample", type=int)
    sp.add_argument("--seed", type=int)

    sp = add("baf", cmd_baf, "back-and-forth between two structures")
    base_opt(sp)
    sp.add_argument("M")
    sp.add_argument("N")
    sp.add_argument("--map", default="")
    sp.add_argument("--steps", type=int, default=10)
    sp.add_argument("--order", choices=("sorted", "random"), default="sorted",
                    help="which unmapped point to take next; random needs a seed")
    sp.add_argument("--seed", type=int)

    sp = add("branch-type", cmd_branch_type, "atomic diagram forced by a branch")
    base_opt(sp)
    sp.add_argument("file")
    sp.add_argument("--branch", required=True)

    sp = add("witness", cmd_witness, "construct and certify witnesses")
    wsub = sp.add_subparsers(dest="kind", required=True)
    w = wsub.add_parser("ip")
    w.add_argument("--k", type=int, default=2)
    w.add_argument("-o", "--output")
    w = wsub.add_parser("ict")
    w.add_argument("--n", type=int, default=2)
    w.add_argument("-o", "--output")
    w = wsub.add_parser("inp")
    w.add_argument("--shape", choices=sorted(witness.SKELETONS), default="fan")
    w.add_argument("--position", default="side")
    w.add_argument("--n", type=int, default=3)
    w.add_argument("--a0-file", help="structure file for <a0 c>; defaults to the skeleton's own")
    w.add_argument("--a0-edge", action="store_true")
    w.add_argument("--b-edge", action="store_true")
    w.add_argument("-o", "--output")

    sp = add("profile", cmd_profile, "count 1-types along a family")
    sp.add_argument("--base", default="graph", help="comma-separated base names")
    sp.add_argument("--family", choices=sorted(witness.FAMILIES), default="fan")
    sp.add_argument("--max", type=int, default=6)
    sp.add_argument("--plot", help="write a log-log PNG figure here")

    sp = add("cones", cmd_cones, "list open cones and their quotient structures")
    sp.add_argument("file")
    sp.add_argument("center", nargs="?")

    sp = add("eval", cmd_eval, "evaluate a quantifier-free formula")
    sp.add_argument("file")
    sp.add_argument("formula")
    sp.add_argument("--assign", default="")
    return p


def run_command(argv):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed usage or help to stderr
        return CommandResult(int(exc.code or 0))
    out = Output(args.format)
    try:
        code = args.fn(args, out)
    except UsageError as exc:
        return CommandResult(2, "", f"conetree: error: {exc}\n")
    except ConeTreeError as exc:
        out.line(f"error: {exc}")
        out.record(status="error", message=str(exc))
        return CommandResult(1, out.render(), f"conetree: {exc}\n", out.records)
    return CommandResult(code, out.render(), "", out.records)


def main(argv=None):
    res = run_command(sys.argv[1:] if argv is None else argv)
    sys.stdout.write(res.stdout)
    sys.stderr.write(res.stderr)
    return res.code


if __name__ == "__main__":
    sys.exit(main())

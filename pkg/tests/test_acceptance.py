"""One test per acceptance criterion, each at its stated size and time limit.

Every test records a PASS/FAIL line; conftest prints them at the end of the run.
"""
import os
import random
import subprocess
import sys
import time
from contextlib import contextmanager

from conetree import (
    DecoratedStructure, amalgamate, closure_set, count_1types, get_base, ict_pattern,
    inp_witness, shatter_witness, type_growth_profile, validate,
)
from conetree.core.diagram import qf_diagram
from conetree.generic import GenericBuilder, check_extension_property
from conetree.sampling import random_structure, random_triple
from conetree.witness import fit_loglog

from conftest import ACCEPTANCE, CORPUS
from oracles import all_structures, oracle_types
from test_formula import interpretation_case
from test_generic import implementation_types
from test_witness import branch_determinacy_case, inp_inputs

BASE_NAMES = ("graph", "eq2", "equality")


@contextmanager
def criterion(num, title, limit):
    """Time the body, then record and assert pass/fail against ``limit`` seconds."""
    state = {"ok": True, "detail": ""}
    t0 = time.perf_counter()
    try:
        yield state
    except AssertionError as exc:
        state["ok"] = False
        state["detail"] = str(exc).splitlines()[0] if str(exc) else "assertion failed"
    elapsed = time.perf_counter() - t0
    in_time = elapsed < limit
    ok = state["ok"] and in_time
    extra = state["detail"] or ("" if in_time else f"over the {limit:g} s limit")
    ACCEPTANCE[num] = (f"{'PASS' if ok else 'FAIL'}  [{num:>2}] {title}  ({elapsed:.1f} s / {limit:g} s)"
                       + (f"  {extra}" if extra else ""))
    print(ACCEPTANCE[num])
    assert ok, ACCEPTANCE[num]


def test_01_closure_bound():
    with criterion(1, "closure bound", 5):
        rng = random.Random(1)
        eq = get_base("equality")
        for _ in range(1000):
            M = random_structure(eq, rng.randint(1, 12), rng)
            els = sorted(M.elements)
            n = rng.randint(1, min(6, len(els)))
            pts = rng.sample(els, n)
            cl = closure_set(M, pts)
            assert len(cl) <= 2 * n, (pts, cl)
            b = rng.choice(els)
            assert len(closure_set(M, cl | {b})) <= len(cl) + 2


def test_02_amalgamation_soundness():
    with criterion(2, "amalgamation soundness (500 triples per base)", 30):
        for name in BASE_NAMES:
            base = get_base(name)
            rng = random.Random(2)
            for _ in range(500):
                A, B, C = random_triple(base, rng, max_size=5)
                D = amalgamate(base, A, B, C)
                assert validate(D, base).ok
                # strong: the images meet exactly in A
                assert B.elements & C.elements == A.elements
                assert (B.elements | C.elements) <= D.elements
                assert D.induced(B.elements) == B and D.induced(C.elements) == C


def test_03_type_oracle():
    with criterion(3, "type oracle equivalence for |A| <= 3", 60):
        for name in BASE_NAMES:
            base = get_base(name)
            sig = base.signature
            cases = [DecoratedStructure(sig, [], [])]
            for k in (1, 2, 3):
                cases.extend(all_structures(sig, name, ["a", "b", "c"][:k]))
            for A in cases:
                assert implementation_types(base, A) == oracle_types(sig, name, A), (name, A)
        expected = {"equality": 4, "graph": 5, "eq2": 7}
        for name, n in expected.items():
            base = get_base(name)
            one = DecoratedStructure(base.signature, ["a"], [])
            assert len(oracle_types(base.signature, name, one)) == n
            assert count_1types(base, one) == n


def test_04_nip_ip_dichotomy():
    with criterion(4, "graph fans grow like 2^m; equality and eq2 fans polynomially", 120):
        for m, _, count in type_growth_profile(get_base("graph"), "fan", 6):
            assert count >= 2 ** m, (m, count)
        for name in ("equality", "eq2"):
            slope, rms = fit_loglog(type_growth_profile(get_base(name), "fan", 8))
            assert slope <= 4 and rms < 0.5, (name, slope, rms)


def test_05_interpretation_soundness():
    with criterion(5, "quotient evaluation equals star evaluation (1000 cases)", 10):
        rng = random.Random(5)
        for _ in range(1000):
            lhs, rhs = interpretation_case(rng)
            assert lhs == rhs


def test_06_generic_approximation():
    with criterion(6, "generic approximation", 60):
        eq = get_base("equality")
        b = GenericBuilder(eq, 10, 1, seed=0)
        M = b.round()
        assert len(M) == 4
        assert check_extension_property(eq, M, 1, substructures_=[("g0000",)]).fraction == 1.0
        graph = get_base("graph")
        b = GenericBuilder(graph, 300, 2, seed=0)
        M = b.build(3)
        assert len(M) <= 300
        rep = check_extension_property(graph, M, 2, substructures_=b.covered)
        assert rep.total > 0 and rep.fraction == 1.0, rep.missing()[:1]


def test_07_witness_certificates():
    with criterion(7, "shatter and ict certificates", 10):
        for k in (1, 2, 3):
            w = shatter_witness(k)
            assert w.ok and len(w.patterns) == 2 ** k
            assert validate(w.structure, get_base("graph")).ok
        for n in (1, 2, 3):
            w = ict_pattern(n)
            assert w.ok and len(w.realizations) == n * n
            assert validate(w.structure, get_base("eq2")).ok


def test_08_inp_construction():
    with criterion(8, "inp construction (100 inputs)", 30):
        rng = random.Random(8)
        graph = get_base("graph")
        for _ in range(100):
            sk, A0 = inp_inputs(rng)
            rep = inp_witness(A0, sk)
            assert validate(rep.N, graph).ok
            for Ai in rep.copies:
                assert rep.N.induced(Ai.elements) == Ai
            assert rep.N.induced(rep.B.elements) == rep.B
            diags = {qf_diagram(rep.N, [("a", f"a{i}"), ("c", "c")]) for i in range(sk.n)}
            assert len(diags) == 1, sk


def test_09_branch_type_determinacy():
    with criterion(9, "branch type determinacy (50 pairs)", 10):
        rng = random.Random(9)
        for _ in range(50):
            rec, diagrams = branch_determinacy_case(rng)
            assert all(d == rec for d in diagrams)


def _cli(argv, cwd):
    env = {**os.environ, "CONETREE_SEED": "11"}
    return subprocess.run([sys.executable, "-m", "conetree.cli", *map(str, argv)],
                          capture_output=True, cwd=cwd, env=env, check=False)


def test_10_cli_determinism(tmp_path):
    dtr, point = CORPUS / "dtr_small.ct", CORPUS / "point.ct"
    amalg = [CORPUS / f"amalg_{x}.ct" for x in "ABC"]
    runs = [
        ["validate", "--base", "graph", dtr],
        ["validate", "--base", "graph", CORPUS / "bad_loop.ct"],
        ["amalgamate", "--base", "graph", *amalg],
        ["jep", "--base", "graph", amalg[0], CORPUS / "eq2_fan.ct"],
        ["--format", "csv", "generate", "--base", "graph", "--budget", "60", "--closure", "2", "--rounds", "2"],
        ["--format", "jsonl", "types", "--base", "graph", dtr, "--over", "s,w"],
        ["realize", "--base", "graph", dtr, "--over", "u", "--type", "3"],
        ["check-ep", "--base", "graph", dtr, "--s", "2", "--sample", "4"],
        ["baf", "--base", "graph", dtr, dtr, "--order", "random", "--steps", "8"],
        ["branch-type", "--base", "graph", dtr, "--branch", "r,u,w"],
        ["witness", "ip", "--k", "3"],
        ["witness", "ict", "--n", "3"],
        ["witness", "inp", "--shape", "comb", "--position", "below", "--n", "4", "--b-edge"],
        ["--format", "jsonl", "profile", "--base", "equality,graph,eq2", "--family", "fan", "--max", "5"],
        ["profile", "--base", "eq2", "--family", "chain", "--max", "4", "--plot", "fig.png"],
        ["cones", dtr],
        ["eval", point, "a <= a"],
    ]
    with criterion(10, "CLI byte-identical across two runs", 120):
        for argv in runs:
            first = _cli(argv, tmp_path)
            fig = (tmp_path / "fig.png").read_bytes() if "--plot" in argv else None
            second = _cli(argv, tmp_path)
            assert first.returncode in (0, 1), (argv, first.stderr)
            assert (first.stdout, first.stderr, first.returncode) == \
                   (second.stdout, second.stderr, second.returncode), argv
            if fig is not None:
                assert (tmp_path / "fig.png").read_bytes() == fig

"""Acceptance criteria, one test each, each printing a PASS/FAIL line with its timing.

Run with ``pytest tests/test_acceptance.py -v -s`` or directly as a script.
"""
from __future__ import annotations

import itertools
import math
import random
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ilwb.corpus import (  # noqa: E402
    complete_graph_interpretation,
    double_cover_interpretation,
    load_theory,
    pair_projection_interpretation,
)
from ilwb.definability import (  # noqa: E402
    descriptor_points,
    formula_points,
    orbit_descriptors,
    synthesize_borel_translate,
    synthesize_invariant_borel,
)
from ilwb.generators import random_coherent_formula, random_descriptor  # noqa: E402
from ilwb.groupoid import (  # noqa: E402
    GroupoidSlice,
    all_morphisms,
    basic_morphism_sets,
    home_fibers,
    morphism_set,
    product_set,
    same_equality_type,
)
from ilwb.interp import (  # noqa: E402
    apply_to_model,
    compose_interpretations,
    functoriality_failures,
    naturality_failures,
)
from ilwb.morley import expand_model, morleyize, reduct_model  # noqa: E402
from ilwb.semantics import enumerate_models, eval_formula, evaluate  # noqa: E402
from ilwb.syntax import coherent_normal_form, disj, fragment_close, is_normal_form, parse_formula  # noqa: E402
from ilwb.verify import RunConfig, suite_pretopos  # noqa: E402
from oracles import (  # noqa: E402
    brute_models,
    naive_eval,
    naive_isomorphisms,
    naive_points,
    naive_satisfies,
    naive_transform,
)

GL, GT = load_theory("graph")
OL, OT = load_theory("linear_order")
DL, DT = load_theory("decidable_graph")


def report(number: int, title: str, limit: float | None, body) -> None:
    """Run ``body`` (returning ``(ok, detail)``), print one line and fail the test if needed."""
    start = time.perf_counter()
    try:
        ok, detail = body()
    except Exception as e:  # a crash is a failure of the criterion, reported like one
        ok, detail = False, f"{type(e).__name__}: {e}"
    elapsed = time.perf_counter() - start
    in_time = limit is None or elapsed < limit
    mark = "PASS" if ok and in_time else "FAIL"
    budget = f" / limit {limit:.0f}s" if limit else ""
    late = "" if in_time else " (over time limit)"
    line = f"{mark} criterion {number}: {title} [{elapsed:.2f}s{budget}]{late} {detail}".rstrip()
    print("\n" + line, flush=True)
    assert ok, line
    assert in_time, line


def formula_corpus(count: int = 500, seed: int = 20240601):
    rng = random.Random(seed)
    return [random_coherent_formula(rng, GL, rng.randint(0, 3), 4) for _ in range(count)]


# 1 -----------------------------------------------------------------------------------

def criterion_evaluation():
    models = brute_models(GL, GT, 3)
    phis = formula_corpus()
    for k, phi in enumerate(phis):
        for M in models:
            if eval_formula(phi, M).tuples != naive_eval(phi, M):
                return False, f"formula {k} differs on {M}"
    return True, f"{len(phis)} formulas x {len(models)} models"


def test_criterion_1_evaluation_matches_naive_evaluator():
    report(1, "evaluator agrees with the reference evaluator", 30, criterion_evaluation)


# 2 -----------------------------------------------------------------------------------

def criterion_normal_form():
    models = brute_models(GL, GT, 3)
    phis = formula_corpus()
    widest = 0
    for k, phi in enumerate(phis):
        nf = coherent_normal_form(phi)
        if not is_normal_form(nf) or nf.n != phi.n:
            return False, f"formula {k}: output is not a disjunction of existential conjunctions of literals"
        widest = max(widest, len(nf.subs))
        for M in models:
            if not np.array_equal(evaluate(nf, M), evaluate(phi, M)):
                return False, f"formula {k} changes meaning on {M}"
            if naive_eval(nf, M) != naive_eval(phi, M):
                return False, f"formula {k} changes meaning on {M} (reference evaluator)"
    return True, f"{len(phis)} formulas, widest normal form has {widest} blocks"


def test_criterion_2_normal_form_preserves_meaning():
    report(2, "normal form keeps meaning and shape", 30, criterion_normal_form)


# 3 -----------------------------------------------------------------------------------

def criterion_morley():
    names = ["x", "y"]
    seed = [parse_formula(s, GL, names) for s in ("E(x,y)", "not E(x,y)", "exists z. E(x,z)")]
    fragment = fragment_close(seed + GT.formulas(), GL)
    result = morleyize(GL, GT, fragment)
    src = brute_models(GL, GT, 3)
    tgt = enumerate_models(result.target_language, result.target_theory, 3)
    if not (len(src) == len(tgt) == 12):
        return False, f"model counts {len(src)} and {len(tgt)}"
    if not all(naive_satisfies(N, result.target_theory) for N in tgt):
        return False, "an enumerated target model violates the target theory"
    expanded = [expand_model(M, result) for M in src]
    if sorted(E.bitmap() for E in expanded) != sorted(N.bitmap() for N in tgt):
        return False, "expansions differ from the target models"
    if any(reduct_model(E, GL) != M for E, M in zip(expanded, src)):
        return False, "reduct of an expansion is not the original model"
    if any(expand_model(reduct_model(N, GL), result) != N for N in tgt):
        return False, "expansion of a reduct is not the original model"
    return True, f"12 = 12 models, fragment of {len(fragment)} formulas"


def test_criterion_3_morleyization_bijection():
    report(3, "Morleyization gives a bijection of models", 10, criterion_morley)


# 4 -----------------------------------------------------------------------------------

def criterion_pretopos():
    res = suite_pretopos(RunConfig(cap=3, seed=4), instances=100)
    bad = [c for c in res.checks if not c.ok]
    if bad:
        return False, "; ".join(f"{c.name}: {c.detail}" for c in bad)
    return True, f"{len(res.checks)} law families on 100 instances"


def test_criterion_4_pretopos_laws():
    report(4, "pretopos laws on random sorts and functions", 120, criterion_pretopos)


# 5 -----------------------------------------------------------------------------------

def criterion_groupoid():
    S = GroupoidSlice(GL, GT, 2)
    brute = brute_models(GL, GT, 2)
    brute_morphisms = sum(len(naive_isomorphisms(M, N)) for M in brute for N in brute)
    if (len(S.models), len(S.morphisms)) != (4, 6) or (len(brute), brute_morphisms) != (4, 6):
        return False, f"{len(S.models)} objects and {len(S.morphisms)} morphisms; reference {len(brute)} and {brute_morphisms}"
    S3 = GroupoidSlice(GL, GT, 3)
    P2 = next(M for M in S3.models if len(M.relation("E")) == 4)
    K2 = next(M for M in S.models if M.size == 2 and M.relation("E"))
    auts = (len(S3.automorphisms(S3.model_index[P2])), len(S.automorphisms(S.model_index[K2])))
    if auts != (2, 2) or (len(naive_isomorphisms(P2, P2)), len(naive_isomorphisms(K2, K2))) != (2, 2):
        return False, f"automorphism counts {auts}"
    O = GroupoidSlice(OL, OT, 3)
    if any(len(O.automorphisms(m)) != 1 for m in range(len(O.models))):
        return False, "a linear order has a non-trivial automorphism"
    top = [orb for orb in O.orbits() if O.models[orb[0]].size == 3]
    if len(top) != 1 or len(top[0]) != 6:
        return False, f"size-3 orbits {top}"
    return True, "4 objects, 6 morphisms, |Aut(P2)| = |Aut(K2)| = 2, 6 rigid size-3 orders in one orbit"


def test_criterion_5_groupoid_counts():
    report(5, "groupoid counts", 10, criterion_groupoid)


# 6 -----------------------------------------------------------------------------------

def criterion_vaught():
    S = GroupoidSlice(GL, GT, 2)
    fs = home_fibers(1, S)
    pts = list(range(len(fs)))
    subsets = [frozenset(c) for r in range(len(pts) + 1) for c in itertools.combinations(pts, r)]
    opens = list(dict.fromkeys(U for _, _, U in basic_morphism_sets(S, 2)))
    every = all_morphisms(S)
    allp = fs.all_points()
    memo = {}

    def T(B, U, kind="exists"):
        key = (B, U, kind)
        if key not in memo:
            memo[key] = frozenset(naive_transform(B, U, kind, fs))
        return memo[key]

    checks = 0
    for B in subsets:
        targets = {fs.model_of(p) for p in B}
        near = frozenset(g for g in every if S.target(g) in targets)
        for U in opens:
            checks += 1
            if allp - T(B, U, "all") != T(allp - B, U):
                return False, f"negation duality fails at B={sorted(B)} U={sorted(U)}"
            for V in opens:
                checks += 3
                if T(B, U | V) != T(B, U) | T(B, V):
                    return False, f"union of morphism sets fails at B={sorted(B)}"
                if T(T(B, U, "all"), V, "all") != T(B, product_set(U, V, S), "all"):
                    return False, f"iterated universal fails at B={sorted(B)} U={sorted(U)} V={sorted(V)}"
                if near & U == near & V and T(B, U) != T(B, V):
                    return False, f"agreement near the targets fails at B={sorted(B)}"
    for B, C in itertools.combinations(subsets, 2):
        for U in opens:
            checks += 1
            if T(B | C, U) != T(B, U) | T(C, U):
                return False, f"union of sets fails at B={sorted(B)} C={sorted(C)}"
    return True, f"{len(subsets)} sets, {len(opens)} basic morphism sets, {checks} equalities"


def test_criterion_6_vaught_identities():
    report(6, "Vaught transform identities, exhaustive at cap 2", 60, criterion_vaught)


# 7 -----------------------------------------------------------------------------------

def criterion_definability():
    S = GroupoidSlice(DL, DT, 3)
    fs = home_fibers(1, S)
    orbits = orbit_descriptors(fs, ["E"])
    formulas = [synthesize_invariant_borel(B, fs, 3, DL) for _, B in orbits]
    for f, (orb, _) in zip(formulas, orbits):
        if naive_points(f, (), fs) != set(orb):
            return False, f"orbit formula misses orbit {orb}"
    k = len(orbits)
    for mask in range(2**k):
        chosen = [i for i in range(k) if mask >> i & 1]
        want = frozenset(p for i in chosen for p in orbits[i][0])
        if formula_points(disj([formulas[i] for i in chosen], 1), (), fs) != want:
            return False, f"invariant set {mask:0{k}b} not defined exactly"
    rng = random.Random(7)
    count = 0
    for n in range(50):
        B = random_descriptor(rng, DL, 3, 1, 2)
        b = tuple(rng.randrange(3) for _ in range(rng.randint(0, 1)))
        phi = synthesize_borel_translate(B, b, 3, DL)
        target = descriptor_points(B, fs)
        for a in itertools.product(range(3), repeat=len(b)):
            if same_equality_type(a, b):
                count += 1
                if naive_points(phi, a, fs) != naive_transform(target, morphism_set(a, b, S), "exists", fs):
                    return False, f"random descriptor {n} differs at parameter {a}"
    return True, f"{k} orbits, {2**k} invariant sets, 50 descriptors ({count} parameter tuples)"


def test_criterion_7_synthesis_exactness():
    report(7, "synthesized formulas define their sets exactly", 120, criterion_definability)


# 8 -----------------------------------------------------------------------------------

def criterion_interpretation():
    F = complete_graph_interpretation()
    orders = enumerate_models(OL, OT, 4)
    for M in orders:
        N = apply_to_model(F, M)
        if not naive_satisfies(N, GT):
            return False, f"transport of {M} is not a graph"
    O4 = GroupoidSlice(OL, OT, 4)
    bad = functoriality_failures(F, O4)
    if bad:
        return False, f"transport not functorial: {bad[0]}"
    O3 = GroupoidSlice(OL, OT, 3)
    components = 0
    for G in (double_cover_interpretation(), pair_projection_interpretation()):
        comp = compose_interpretations(F, G, 3)
        for z in comp.components:
            components += 1
            if z.perm not in naive_isomorphisms(z.source, z.target):
                return False, "a comparison map is not an isomorphism"
        bad = naturality_failures(F, G, comp, O3)
        if bad:
            return False, f"comparison square fails at morphism {bad[0]}"
    return True, (
        f"{len(orders)} orders transported, {len(O4.morphisms)} morphisms functorial, "
        f"{components} comparison maps natural"
    )


def test_criterion_8_interpretation_transport():
    report(8, "interpretation transport, functoriality and natural comparison maps", 60, criterion_interpretation)


# 9 -----------------------------------------------------------------------------------

def criterion_determinism():
    cmd = [sys.executable, "-m", "ilwb.cli", "verify", "--suite", "all", "--cap", "3", "--seed", "7"]
    runs = [subprocess.run(cmd, capture_output=True) for _ in range(2)]
    if any(r.returncode != 0 for r in runs):
        return False, f"exit codes {[r.returncode for r in runs]}"
    if runs[0].stdout != runs[1].stdout:
        return False, "reports differ"
    return True, f"two identical reports of {len(runs[0].stdout)} bytes"


def test_criterion_9_deterministic_reports():
    report(9, "verify reports are byte-identical across runs", None, criterion_determinism)


CRITERIA = [
    test_criterion_1_evaluation_matches_naive_evaluator,
    test_criterion_2_normal_form_preserves_meaning,
    test_criterion_3_morleyization_bijection,
    test_criterion_4_pretopos_laws,
    test_criterion_5_groupoid_counts,
    test_criterion_6_vaught_identities,
    test_criterion_7_synthesis_exactness,
    test_criterion_8_interpretation_transport,
    test_criterion_9_deterministic_reports,
]


if __name__ == "__main__":
    failed = 0
    for test in CRITERIA:
        try:
            test()
        except AssertionError:
            failed += 1
    print(f"\n{len(CRITERIA) - failed} of {len(CRITERIA)} criteria passed")
    sys.exit(1 if failed else 0)

"""Verification suites: each check compares a construction with a brute-force reading.

Reports carry no timings, so identical configurations give identical output.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable

import numpy as np

from .coding import CodedMap, interpret_function_in_model, interpret_sort_in_model, transport_along_iso
from .corpus import complete_graph_interpretation, double_cover_interpretation, load_theory, pair_projection_interpretation
from .definability import (
    abbreviation_formula,
    check_translate,
    formula_points,
    orbit_descriptors,
    synthesize_borel_translate,
    synthesize_invariant_borel,
)
from .generators import SortZoo, characteristic_map, random_descriptor, random_quantifier_free
from .groupoid import (
    FiberedSort,
    GroupoidSlice,
    all_morphisms,
    basic_morphism_sets,
    enumerate_isomorphisms,
    home_fibers,
    product_set,
    vaught_transform,
)
from .interp import (
    compose_interpretations,
    from_hmm_data,
    functoriality_failures,
    hmm_form,
    identity_interpretation,
    naturality_failures,
    apply_to_model,
    search_interpretation,
    sequence_sort_embedding,
    validate_interpretation,
)
from .morley import expand_model, morleyize, reduct_model
from .pretopos import (
    DefinableFunction,
    DefinableRelation,
    ImaginarySort,
    compose_functions,
    equalizer_sort,
    identity_function,
    product_sort,
    sort_from_formula,
    subobject_op,
    validate_function,
    validate_sort,
)
from .semantics import FiniteModel, Isomorphism, enumerate_models, evaluate, satisfies_theory
from .syntax import conj, disj, fragment_close, parse_formula, top

SUITES = ("morley", "pretopos", "groupoid", "vaught", "definability", "interp")


@dataclass(frozen=True)
class RunConfig:
    cap: int = 3
    budget: int = 10**6
    seed: int = 0
    output: str = "json"

    def __post_init__(self):
        if self.cap < 0:
            raise ValueError("cap must be non-negative")
        if self.budget <= 0:
            raise ValueError("budget must be positive")
        if self.output not in ("json", "text"):
            raise ValueError("output must be json or text")


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""


@dataclass
class SuiteResult:
    suite: str
    checks: list[Check] = field(default_factory=list)

    def add(self, name: str, ok: bool, detail: str = "") -> bool:
        self.checks.append(Check(name, bool(ok), detail))
        return bool(ok)

    @property
    def failed(self) -> int:
        return sum(not c.ok for c in self.checks)

    @property
    def passed(self) -> int:
        return sum(c.ok for c in self.checks)

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "failed": self.failed,
            "checks": [asdict(c) for c in self.checks],
        }


# -- helpers shared with the tests ------------------------------------------------------

def class_set(r: DefinableRelation, M: FiniteModel) -> frozenset[int]:
    """Classes of ``r.sort`` in ``M`` having a member in ``r``."""
    I = interpret_sort_in_model(r.sort, M)
    arrays = [np.asarray(evaluate(p, M)) for p in r.pieces]
    return frozenset(c for (i, x), c in zip(I.elements, I.labels) if arrays[i][x])


def product_bijection_ok(A: ImaginarySort, B: ImaginarySort, M: FiniteModel) -> bool:
    P, p1, p2 = product_sort(A, B)
    f1, f2 = interpret_function_in_model(p1, M), interpret_function_in_model(p2, M)
    na, nb = interpret_sort_in_model(A, M).size, interpret_sort_in_model(B, M).size
    pairs = {(f1(c), f2(c)) for c in range(f1.source_size)}
    return f1.source_size == na * nb and len(pairs) == na * nb


def equalizer_ok(f: DefinableFunction, g: DefinableFunction, M: FiniteModel) -> bool:
    e = equalizer_sort(f, g)
    F, G = interpret_function_in_model(f, M), interpret_function_in_model(g, M)
    return class_set(e, M) == frozenset(c for c in range(F.source_size) if F(c) == G(c))


def boolean_laws_failures(r: DefinableRelation, s: DefinableRelation, M: FiniteModel) -> list[str]:
    """Lattice and complement laws for two relations on one sort, read on classes."""
    full = frozenset(range(interpret_sort_in_model(r.sort, M).size))
    R, S = class_set(r, M), class_set(s, M)
    meet = subobject_op("meet", r, s)
    join = subobject_op("join", r, s)
    neg_r = subobject_op("complement", r, boolean=True)
    neg_s = subobject_op("complement", s, boolean=True)
    out = []
    if class_set(meet, M) != R & S:
        out.append("meet")
    if class_set(join, M) != R | S:
        out.append("join")
    if class_set(neg_r, M) != full - R:
        out.append("complement")
    if class_set(subobject_op("complement", meet, boolean=True), M) != class_set(subobject_op("join", neg_r, neg_s), M):
        out.append("de Morgan")
    if class_set(subobject_op("meet", r, subobject_op("join", s, neg_s)), M) != R:
        out.append("distributivity")
    return out


def image_ok(r: DefinableRelation, f: DefinableFunction, M: FiniteModel) -> bool:
    img = subobject_op("exists_image", r, along=f)
    F = interpret_function_in_model(f, M)
    return class_set(img, M) == frozenset(F(c) for c in class_set(r, M))


def pointwise(f: DefinableFunction, models: Iterable[FiniteModel]) -> tuple[CodedMap, ...]:
    return tuple(interpret_function_in_model(f, M) for M in models)


# -- suites ---------------------------------------------------------------------------

def suite_morley(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("morley")
    L, T = load_theory("graph")
    names = ["x", "y"]
    seed = [parse_formula(s, L, names) for s in ("E(x,y)", "not E(x,y)", "exists z. E(x,z)")]
    seed += T.formulas()
    frag = fragment_close(seed, L)
    result = morleyize(L, T, frag)
    src = enumerate_models(L, T, cfg.cap)
    tgt = enumerate_models(result.target_language, result.target_theory, cfg.cap)
    res.add("model counts agree", len(src) == len(tgt), f"source {len(src)}, target {len(tgt)}, fragment {len(frag)}")
    expanded = [expand_model(M, result) for M in src]
    res.add(
        "expansions are exactly the target models",
        sorted(m.bitmap() for m in expanded) == sorted(m.bitmap() for m in tgt),
    )
    res.add("reduct after expansion is the identity", all(reduct_model(E, L) == M for E, M in zip(expanded, src)))
    back = {expand_model(reduct_model(N, L), result).bitmap() for N in tgt}
    res.add("expansion after reduct is the identity", back == {N.bitmap() for N in tgt})
    agree = True
    for E, M in zip(expanded, src):
        for phi, name in result.index:
            if not np.array_equal(np.asarray(evaluate(phi, M)), E.array(name)):
                agree = False
    res.add("new relations interpret their formulas", agree)
    return res


def suite_pretopos(cfg: RunConfig, instances: int = 25) -> SuiteResult:
    res = SuiteResult("pretopos")
    L, T = load_theory("graph")
    models = enumerate_models(L, T, cfg.cap)
    rng = random.Random(cfg.seed)
    zoo = SortZoo(rng, L)
    counts = dict.fromkeys(("valid", "associative", "unital", "product", "equalizer", "boolean", "image"), 0)
    first_bad: dict[str, str] = {}

    def note(key: str, ok: bool, where: str):
        if ok:
            counts[key] += 1
        elif key not in first_bad:
            first_bad[key] = where

    for n in range(instances):
        f, g, h = zoo.chain(3)
        where = f"instance {n}"
        note("valid", all(validate_function(x, models=models).ok for x in (f, g, h)) and validate_sort(f.source, models=models).ok, where)
        left = compose_functions(h, compose_functions(g, f))
        right = compose_functions(compose_functions(h, g), f)
        note("associative", pointwise(left, models) == pointwise(right, models), where)
        unit = pointwise(compose_functions(f, identity_function(f.source)), models) == pointwise(f, models)
        unit &= pointwise(compose_functions(identity_function(f.target), f), models) == pointwise(f, models)
        note("unital", unit, where)
        A, B = zoo.sort(), zoo.sort()
        note("product", all(product_bijection_ok(A, B, M) for M in models), where)
        S = sort_from_formula(random_quantifier_free(rng, L, 1, 2) if rng.random() < 0.5 else top(1))
        phi, psi = (random_quantifier_free(rng, L, 1, 2) for _ in range(2))
        c1, c2 = characteristic_map(S, phi), characteristic_map(S, psi)
        note("equalizer", all(equalizer_ok(c1, c2, M) for M in models), where)
        alpha = S.pieces[0]
        r = DefinableRelation(S, (conj([alpha, phi], 1),))
        s = DefinableRelation(S, (conj([alpha, psi], 1),))
        note("boolean", all(not boolean_laws_failures(r, s, M) for M in models), where)
        note("image", all(image_ok(r, c2, M) for M in models), where)
    for key, c in counts.items():
        res.add(f"{key} on {instances} instances", c == instances, f"{c}/{instances}" + (f", first failure at {first_bad[key]}" if key in first_bad else ""))
    return res


def suite_groupoid(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("groupoid")
    L, T = load_theory("graph")
    S = GroupoidSlice(L, T, cfg.cap, budget=cfg.budget)
    res.add("groupoid axioms", not S.check_axioms())
    expected = sum(math.factorial(M.size) for M in S.models)
    res.add("morphisms out of each model are all permutations", len(S.morphisms) == expected, f"{len(S.models)} objects, {len(S.morphisms)} morphisms")
    brute = sum(1 for M in S.models for N in S.models if M.size == N.size for _ in enumerate_isomorphisms(M, N))
    res.add("morphisms agree with pairwise isomorphism search", brute == len(S.morphisms))
    fs = home_fibers(1, S)
    res.add("home fiber size is the sum of model sizes", len(fs) == sum(M.size for M in S.models), f"{len(fs)} points")
    if cfg.cap >= 2:
        K2 = FiniteModel.make(2, {"E": [(0, 1), (1, 0)]}, L)
        res.add("K2 has two automorphisms", len(enumerate_isomorphisms(K2, K2)) == 2)
    if cfg.cap >= 3:
        P2 = FiniteModel.make(3, {"E": [(0, 1), (1, 0), (1, 2), (2, 1)]}, L)
        res.add("P2 has two automorphisms", len(enumerate_isomorphisms(P2, P2)) == 2)
    phi = parse_formula("exists y. E(x,y)", L, ["x"])
    f = characteristic_map(sort_from_formula(top(1)), phi)
    natural = True
    for g in range(len(S.morphisms)):
        iso = S.isomorphism(g)
        a = transport_along_iso(f.target, iso).compose(interpret_function_in_model(f, iso.source))
        b = interpret_function_in_model(f, iso.target).compose(transport_along_iso(f.source, iso))
        natural &= a == b
    res.add("definable maps are equivariant", natural)
    OL, OT = load_theory("linear_order")
    O = GroupoidSlice(OL, OT, cfg.cap, budget=cfg.budget)
    res.add("linear orders are rigid", all(len(O.automorphisms(m)) == 1 for m in range(len(O.models))))
    top_orbit = [orb for orb in O.orbits() if O.models[orb[0]].size == cfg.cap]
    res.add("top-size orders form one orbit", len(top_orbit) == 1 and len(top_orbit[0]) == math.factorial(cfg.cap))
    return res


def suite_vaught(cfg: RunConfig, samples: int = 32) -> SuiteResult:
    res = SuiteResult("vaught")
    L, T = load_theory("graph")
    S = GroupoidSlice(L, T, cfg.cap, budget=cfg.budget)
    fs = home_fibers(1, S)
    rng = random.Random(cfg.seed)
    pts = list(range(len(fs)))
    if len(pts) <= 10:
        subsets = [frozenset(c) for r in range(len(pts) + 1) for c in itertools.combinations(pts, r)]
        length = 2
    else:
        subsets = [frozenset(p for p in pts if rng.random() < 0.5) for _ in range(samples)]
        length = 1
    opens = [U for _, _, U in basic_morphism_sets(S, length)]
    opens = list(dict.fromkeys(opens))
    out = vaught_identity_failures(fs, subsets, opens)
    for name, bad in out.items():
        res.add(name, not bad, f"{len(subsets)} sets, {len(opens)} morphism sets" + (f"; first failure {bad[0]}" if bad else ""))
    return res


def vaught_identity_failures(fs: FiberedSort, subsets, opens) -> dict[str, list]:
    S = fs.slice
    allp = fs.all_points()
    every = all_morphisms(S)
    fails: dict[str, list] = {k: [] for k in ("negation duality", "unions in the set", "unions in the morphisms", "singleton basis", "iterated universal", "target agreement")}
    tri = {}

    def T(B, U, kind="exists"):
        key = (B, U, kind)
        if key not in tri:
            tri[key] = vaught_transform(B, U, kind, fs)
        return tri[key]

    for B in subsets:
        for U in opens:
            if allp - T(B, U, "all") != T(allp - B, U):
                fails["negation duality"].append((sorted(B), sorted(U)))
            if T(B, U) != frozenset().union(*[T(B, frozenset([g]), "all_nonempty") for g in U]):
                fails["singleton basis"].append((sorted(B), sorted(U)))
            targets = {fs.model_of(p) for p in B}
            near = frozenset(g for g in every if S.target(g) in targets)
            for V in opens:
                if T(B, U | V) != T(B, U) | T(B, V):
                    fails["unions in the morphisms"].append((sorted(B), sorted(U), sorted(V)))
                if T(T(B, U, "all"), V, "all") != T(B, product_set(U, V, S), "all"):
                    fails["iterated universal"].append((sorted(B), sorted(U), sorted(V)))
                if near & U == near & V and T(B, U) != T(B, V):
                    fails["target agreement"].append((sorted(B), sorted(U), sorted(V)))
    for B, C in itertools.islice(itertools.combinations(subsets, 2), 4000):
        for U in opens:
            if T(B | C, U) != T(B, U) | T(C, U):
                fails["unions in the set"].append((sorted(B), sorted(C), sorted(U)))
    return fails


def suite_definability(cfg: RunConfig, random_count: int = 50) -> SuiteResult:
    res = SuiteResult("definability")
    L, T = load_theory("decidable_graph")
    S = GroupoidSlice(L, T, cfg.cap, budget=cfg.budget)
    fs = home_fibers(1, S)
    sizes_ok = True
    for m in range(cfg.cap + 2):
        phi = abbreviation_formula("size_at_least", L, m)
        sizes_ok &= all(bool(evaluate(phi, M)) == (M.size >= m) for M in S.models)
    res.add("size abbreviations", sizes_ok)
    orbits = orbit_descriptors(fs, ["E"])
    formulas = [synthesize_invariant_borel(B, fs, cfg.cap, L) for _, B in orbits]
    exact = all(formula_points(f, (), fs) == frozenset(orb) for f, (orb, _) in zip(formulas, orbits))
    res.add("orbit formulas are exact", exact, f"{len(orbits)} orbits")
    rng = random.Random(cfg.seed)
    k = len(orbits)
    masks = range(2**k) if k <= 12 else [rng.getrandbits(k) for _ in range(512)]
    bad = []
    for mask in masks:
        chosen = [i for i in range(k) if mask >> i & 1]
        target = frozenset(p for i in chosen for p in orbits[i][0])
        phi = disj([formulas[i] for i in chosen], 1)
        if formula_points(phi, (), fs) != target:
            bad.append(mask)
    res.add("every invariant set is defined exactly", not bad, f"{len(masks)} sets" + (f"; first failure mask {bad[0]}" if bad else ""))
    misses = []
    for n in range(random_count):
        B = random_descriptor(rng, L, max(cfg.cap, 1), 1, 2)
        b = tuple(rng.randrange(max(cfg.cap, 1)) for _ in range(rng.randint(0, 1)))
        phi = synthesize_borel_translate(B, b, cfg.cap, L)
        if check_translate(phi, B, b, fs):
            misses.append(n)
    res.add("random descriptor translates are exact", not misses, f"{random_count} descriptors" + (f"; first failure {misses[0]}" if misses else ""))
    return res


def suite_interp(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("interp")
    GL, GT = load_theory("graph")
    OL, OT = load_theory("linear_order")
    F = complete_graph_interpretation()
    res.add("complete-graph interpretation validates", validate_interpretation(F, cfg.cap).ok)
    bad = validate_interpretation(complete_graph_interpretation(strict_order=True), cfg.cap)
    res.add("one-directional edge image is rejected", cfg.cap < 2 or not bad.ok, bad.failures[0] if bad.failures else "")
    orders = enumerate_models(OL, OT, cfg.cap)
    complete = all(
        satisfies_theory(N, GT).ok and len(N.relation("E")) == N.size * (N.size - 1)
        for N in (apply_to_model(F, M) for M in orders)
    )
    res.add("transported orders are complete graphs", complete, f"{len(orders)} orders")
    O = GroupoidSlice(OL, OT, cfg.cap, budget=cfg.budget)
    res.add("transport is strictly functorial", not functoriality_failures(F, O))
    ident = identity_interpretation(GL, GT)
    graphs = enumerate_models(GL, GT, cfg.cap)
    res.add("identity interpretation returns the model", all(apply_to_model(ident, M) == M for M in graphs))
    small = min(cfg.cap, 3)
    O3 = GroupoidSlice(OL, OT, small, budget=cfg.budget)
    for label, G in (("double cover", double_cover_interpretation()), ("pair projection", pair_projection_interpretation())):
        res.add(f"{label} validates", validate_interpretation(G, small).ok)
        comp = compose_interpretations(F, G, small)
        res.add(f"comparison maps for complete graph after {label} are natural", not naturality_failures(F, G, comp, O3), f"{len(comp.components)} components")
    comp = compose_interpretations(identity_interpretation(OL, OT), F, small)
    res.add("comparison maps with an identity are identities", all(z.perm == tuple(range(len(z.perm))) for z in comp.components))
    P = pair_projection_interpretation()
    emb, images = hmm_form(P, small)
    H = from_hmm_data(emb.domain, emb.equivalence, images, (GL, GT), (GL, GT), small)
    iso_ok = True
    for M, b in zip(emb.models, emb.bijections):
        try:
            Isomorphism(apply_to_model(P, M), apply_to_model(H, M), b.values)
        except ValueError:
            iso_ok = False
    res.add("tuple-domain presentation reproduces the interpretation", iso_ok, f"padded arities {list(emb.arities)}")
    D = sequence_sort_embedding(double_cover_interpretation().hom_sort, GL, GT, small)
    res.add("sequence embedding pads arities", D.arities == (1, 2))
    table = [(M, apply_to_model(F, M)) for M in enumerate_models(OL, OT, small)]
    found = search_interpretation((GL, GT), (OL, OT), table, depth=2)
    ok = found.found is not None and all(
        enumerate_isomorphisms(apply_to_model(found.found, M), N) for M, N in table
    )
    res.add("bounded search recovers a tabulated transport", ok, f"{found.candidates_checked} candidates")
    return res


RUNNERS: dict[str, Callable[[RunConfig], SuiteResult]] = {
    "morley": suite_morley,
    "pretopos": suite_pretopos,
    "groupoid": suite_groupoid,
    "vaught": suite_vaught,
    "definability": suite_definability,
    "interp": suite_interp,
}


def run_verify_suite(cfg: RunConfig, suite: str = "all") -> dict:
    """Run one suite or all of them and return a JSON-ready report."""
    names = SUITES if suite == "all" else (suite,)
    if any(n not in RUNNERS for n in names):
        raise ValueError(f"unknown suite {suite!r}")
    results = [RUNNERS[n](cfg) for n in names]
    return {
        "config": {"cap": cfg.cap, "seed": cfg.seed, "budget": cfg.budget},
        "suite": suite,
        "passed": sum(r.passed for r in results),
        "failed": sum(r.failed for r in results),
        "suites": [r.to_json() for r in results],
    }


def render_text(report: dict) -> str:
    lines = []
    for s in report["suites"]:
        for c in s["checks"]:
            mark = "PASS" if c["ok"] else "FAIL"
            detail = f" ({c['detail']})" if c["detail"] else ""
            lines.append(f"{mark} {s['suite']}: {c['name']}{detail}")
    lines.append(f"{report['passed']} passed, {report['failed']} failed")
    return "\n".join(lines) + "\n"

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ilwb.coding import interpret_function_in_model, interpret_sort_in_model, transport_along_iso
from ilwb.corpus import load_theory
from ilwb.generators import SortZoo, characteristic_map, random_quantifier_free
from ilwb.pretopos import (
    DefinableFunction,
    DefinableRelation,
    ImaginarySort,
    NotBoolean,
    compose_functions,
    disjoint_sum,
    empty_sort,
    equalizer_sort,
    full_relation,
    home_power,
    home_sort,
    identity_function,
    power_sort,
    product_sort,
    sort_from_formula,
    subobject_op,
    terminal_sort,
    validate_function,
    validate_relation,
    validate_sort,
)
from ilwb.groupoid import GroupoidSlice
from ilwb.semantics import enumerate_models
from ilwb.syntax import Atom, Eq, Not, parse_formula, top
from ilwb.verify import boolean_laws_failures, class_set, equalizer_ok, image_ok, pointwise, product_bijection_ok
from oracles import naive_eval
from strategies import formulas

GL, GT = load_theory("graph")
MODELS = enumerate_models(GL, GT, 3)
SLICE = GroupoidSlice(GL, GT, 3)
X = home_sort()


def naive_is_equivalence(rel, M):
    pairs = naive_eval(rel, M)
    pts = range(M.size)
    return (
        all((a, a) in pairs for a in pts)
        and all((b, a) in pairs for a, b in pairs)
        and all((a, c) in pairs for a, b in pairs for b2, c in pairs if b == b2)
    )


def naive_is_function(graph, M):
    pairs = naive_eval(graph, M)
    return all(len({b for a2, b in pairs if a2 == a}) == 1 for a in range(M.size))


@settings(max_examples=150, deadline=None)
@given(formulas(GL, 2, 2))
def test_sort_validation_matches_naive_equivalence_check(rel):
    A = ImaginarySort((top(1),), ((rel,),))
    assert validate_sort(A, models=MODELS).ok == all(naive_is_equivalence(rel, M) for M in MODELS)


@settings(max_examples=150, deadline=None)
@given(formulas(GL, 2, 2))
def test_function_validation_matches_naive_graph_check(graph):
    f = DefinableFunction(X, X, ((graph,),))
    assert validate_function(f, models=MODELS).ok == all(naive_is_function(graph, M) for M in MODELS)


def test_violation_names_the_clause():
    A = ImaginarySort((top(1),), ((Atom(2, "E", (0, 1)),),))
    report = validate_sort(A, models=MODELS)
    assert not report.ok and report.first.clause == "reflexivity"
    f = DefinableFunction(X, X, ((Atom(2, "E", (0, 1)),),))
    assert validate_function(f, models=MODELS).first.clause in ("totality", "single-valuedness")


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_random_chains_are_valid_associative_and_unital(seed):
    zoo = SortZoo(random.Random(seed), GL)
    f, g, h = zoo.chain(3)
    for x in (f, g, h):
        assert validate_function(x, models=MODELS).ok
    left = compose_functions(h, compose_functions(g, f))
    right = compose_functions(compose_functions(h, g), f)
    assert pointwise(left, MODELS) == pointwise(right, MODELS)
    assert pointwise(compose_functions(f, identity_function(f.source)), MODELS) == pointwise(f, MODELS)
    assert pointwise(compose_functions(identity_function(f.target), f), MODELS) == pointwise(f, MODELS)


def test_composition_is_composition_of_maps():
    zoo = SortZoo(random.Random(3), GL)
    for _ in range(10):
        f, g = zoo.chain(2)
        gf = compose_functions(g, f)
        for M in MODELS:
            a, b = interpret_function_in_model(f, M), interpret_function_in_model(g, M)
            assert interpret_function_in_model(gf, M) == a.then(b)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_products_are_products(seed):
    zoo = SortZoo(random.Random(seed), GL)
    A, B = zoo.sort(), zoo.sort()
    assert validate_sort(product_sort(A, B)[0], models=MODELS).ok
    assert all(product_bijection_ok(A, B, M) for M in MODELS)


def test_power_sort_sizes():
    A = disjoint_sum([parse_formula("exists y. E(x,y)", GL, ["x"]), top(1)])
    for n in range(3):
        P = power_sort(A, n)
        for M in MODELS:
            assert interpret_sort_in_model(P, M).size == interpret_sort_in_model(A, M).size ** n
    for M in MODELS:
        assert interpret_sort_in_model(home_power(2), M).size == M.size**2
        assert interpret_sort_in_model(terminal_sort(), M).size == 1
        assert interpret_sort_in_model(empty_sort(), M).size == 0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_equalizers_and_boolean_laws(seed):
    rng = random.Random(seed)
    phi, psi = (random_quantifier_free(rng, GL, 1, 2) for _ in range(2))
    c1, c2 = characteristic_map(X, phi), characteristic_map(X, psi)
    r, s = DefinableRelation(X, (phi,)), DefinableRelation(X, (psi,))
    for M in MODELS:
        assert equalizer_ok(c1, c2, M)
        assert class_set(equalizer_sort(c1, c2), M) == {
            v for v in range(M.size) if ((v,) in naive_eval(phi, M)) == ((v,) in naive_eval(psi, M))
        }
        assert not boolean_laws_failures(r, s, M)
        assert image_ok(r, c2, M)


def test_complement_needs_boolean_mode():
    r = DefinableRelation(X, (Atom(1, "E", (0, 0)),))
    with pytest.raises(NotBoolean):
        subobject_op("complement", r)
    assert subobject_op("complement", Eq(1, 0, 0), boolean=True) == Not(1, Eq(1, 0, 0))


def test_relations_validate():
    good = DefinableRelation(X, (parse_formula("exists y. E(x,y)", GL, ["x"]),))
    assert validate_relation(good, models=MODELS).ok
    edge = sort_from_formula(parse_formula("E(x,y)", GL, ["x", "y"]))
    outside = DefinableRelation(edge, (parse_formula("true", GL, ["x", "y"]),))
    assert validate_relation(outside, models=MODELS).first.clause == "containment"


def test_json_round_trip():
    zoo = SortZoo(random.Random(11), GL)
    for _ in range(10):
        (f,) = zoo.chain(1)
        assert DefinableFunction.from_json(f.to_json(), GL) == f
        assert ImaginarySort.from_json(f.source.to_json(), GL) == f.source


def test_subsort_restricts_the_equivalence():
    r = DefinableRelation(X, (parse_formula("exists y. E(x,y)", GL, ["x"]),))
    S = r.subsort()
    assert validate_sort(S, models=MODELS).ok
    for M in MODELS:
        assert interpret_sort_in_model(S, M).size == len(naive_eval(r.pieces[0], M))


def test_product_of_home_sorts_counts_pairs():
    P, p1, p2 = product_sort(X, X)
    for M in MODELS:
        a, b = interpret_function_in_model(p1, M), interpret_function_in_model(p2, M)
        assert sorted(zip(a.values, b.values)) == list(itertools.product(range(M.size), repeat=2))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_product_projections_commute_with_transport(seed):
    zoo = SortZoo(random.Random(seed), GL)
    A, B = zoo.sort(), zoo.sort()
    P, left, right = product_sort(A, B)
    for g in range(len(SLICE.morphisms)):
        iso = SLICE.isomorphism(g)
        M, N = iso.source, iso.target
        moved = transport_along_iso(P, iso)
        for proj, F in ((left, A), (right, B)):
            lhs = moved.then(interpret_function_in_model(proj, N))
            rhs = interpret_function_in_model(proj, M).then(transport_along_iso(F, iso))
            assert lhs == rhs


def piece_sets(r, M):
    return [naive_eval(b, M) for b in r.pieces]


TWO_PIECES = disjoint_sum([top(1), parse_formula("exists y. E(x,y)", GL, ["x"])])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_subobjects_are_distributive_and_complement_is_involutive(seed):
    rng = random.Random(seed)
    r, s, t = (
        DefinableRelation(TWO_PIECES, tuple(random_quantifier_free(rng, GL, 1, 2) for _ in range(2)))
        for _ in range(3)
    )
    for M in MODELS:
        spread = subobject_op("meet", r, subobject_op("join", s, t))
        split = subobject_op("join", subobject_op("meet", r, s), subobject_op("meet", r, t))
        assert piece_sets(spread, M) == piece_sets(split, M)
        twice = subobject_op("complement", subobject_op("complement", r, boolean=True), boolean=True)
        inside = [a & b for a, b in zip(piece_sets(r, M), piece_sets(full_relation(TWO_PIECES), M))]
        assert piece_sets(twice, M) == inside

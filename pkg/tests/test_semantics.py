import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ilwb.corpus import THEORIES, load_theory
from ilwb.semantics import (
    FiniteModel,
    Isomorphism,
    LanguageMismatch,
    NotAModel,
    enumerate_models,
    eval_formula,
    evaluate,
    holds,
    satisfies_theory,
    semantically_equivalent,
)
from ilwb.syntax import Not, parse_formula
from oracles import all_structures, brute_models, naive_eval, naive_isomorphisms, naive_satisfies
from strategies import formulas, graphs

GL, GT = load_theory("graph")


@settings(max_examples=300, deadline=None)
@given(formulas(GL, 2, 3, coherent=False), graphs(GL))
def test_evaluator_matches_naive_reading(phi, M):
    assert eval_formula(phi, M).tuples == naive_eval(phi, M)


@settings(max_examples=100, deadline=None)
@given(formulas(GL, 0, 3, coherent=False), graphs(GL))
def test_sentences_evaluate_to_scalars(phi, M):
    assert evaluate(phi, M).shape == ()
    assert holds(phi, M) == (() in naive_eval(phi, M))


@pytest.mark.parametrize("name", THEORIES)
@pytest.mark.parametrize("cap", [0, 1, 2, 3])
def test_enumeration_matches_brute_force(name, cap):
    L, T = load_theory(name)
    got = enumerate_models(L, T, cap)
    want = brute_models(L, T, cap)
    assert sorted(M.bitmap() for M in got) == sorted(M.bitmap() for M in want)
    assert len({M.bitmap() for M in got}) == len(got)


def test_enumeration_order_is_size_then_bitmap():
    ms = enumerate_models(GL, GT, 3)
    keys = [(M.size, M.bitmap()) for M in ms]
    assert keys == sorted(keys)


def test_known_counts():
    # labelled simple graphs: 1, 1, 2, 8 on 0..3 vertices
    assert [len(enumerate_models(GL, GT, k)) for k in range(4)] == [1, 2, 4, 12]
    OL, OT = load_theory("linear_order")
    assert len(enumerate_models(OL, OT, 3)) == 1 + 1 + 2 + 6


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2), st.data())
def test_satisfaction_matches_naive(size, data):
    L, T = load_theory("linear_order")
    structures = list(all_structures(L, size))
    M = data.draw(st.sampled_from(structures))
    assert satisfies_theory(M, T).ok == naive_satisfies(M, T)


def test_failure_reports_least_counterexample():
    M = FiniteModel.make(2, {"E": [(0, 1)]}, GL)
    report = satisfies_theory(M, GT)
    assert not report.ok
    (bad,) = report.failures()
    assert bad.counterexample == (0, 1)


def test_json_round_trip():
    for M in enumerate_models(GL, GT, 3):
        assert FiniteModel.from_json(M.to_json(), GL) == M


def test_unknown_relation_in_model():
    with pytest.raises(LanguageMismatch):
        FiniteModel.make(1, {"F": [(0,)]}, GL)


def test_out_of_range_tuple():
    with pytest.raises(ValueError):
        FiniteModel.make(1, {"E": [(0, 1)]}, GL)


def test_formula_over_other_language():
    OL, _ = load_theory("linear_order")
    M = FiniteModel.make(2, {}, GL)
    with pytest.raises(LanguageMismatch):
        evaluate(parse_formula("L(x,y)", OL, ["x", "y"]), M)


@settings(max_examples=60, deadline=None)
@given(graphs(GL), st.data())
def test_permutation_isomorphisms(M, data):
    perm = data.draw(st.permutations(list(range(M.size))))
    N = M.permute(perm)
    g = Isomorphism(M, N, perm)
    assert tuple(perm) in naive_isomorphisms(M, N)
    assert g.inverse().compose(g) == Isomorphism.identity(M)


def test_non_isomorphism_rejected(p2):
    with pytest.raises(NotAModel):
        Isomorphism(p2, p2, (1, 0, 2))


def test_semantic_equivalence_is_bounded_evidence():
    a = parse_formula("exists y. and(E(x,y), E(y,x))", GL, ["x"])
    b = parse_formula("exists y. E(x,y)", GL, ["x"])
    assert semantically_equivalent(a, b, GL, GT, 3)
    c = parse_formula("exists y. exists z. and(E(x,y), E(x,z), not y = z)", GL, ["x"])
    assert not semantically_equivalent(b, c, GL, GT, 3)


def test_evaluation_is_a_dense_boolean_array(p2):
    arr = evaluate(parse_formula("E(x,y)", GL, ["x", "y"]), p2)
    assert arr.dtype == np.bool_ and arr.shape == (3, 3)
    assert {t for t in itertools.product(range(3), repeat=2) if arr[t]} == set(p2.relation("E"))


@given(formulas(GL, 2, 2, coherent=False), graphs(GL))
def test_negation_is_complement(phi, M):
    inside = eval_formula(phi, M).sorted()
    outside = eval_formula(Not(2, phi), M).sorted()
    assert sorted(inside + outside) == list(itertools.product(range(M.size), repeat=2))
    assert not set(inside) & set(outside)


@pytest.mark.parametrize("name", THEORIES)
def test_enumeration_is_deterministic_and_sound(name):
    language, theory = load_theory(name)
    first = enumerate_models(language, theory, 3)
    assert first == enumerate_models(language, theory, 3)
    assert len(set(first)) == len(first)
    assert all(satisfies_theory(M, theory).ok for M in first)

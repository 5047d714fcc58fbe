import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ilwb.corpus import load_theory
from ilwb.definability import (
    BasicOpen,
    Complement,
    Leaf,
    NotInvariant,
    Union,
    abbreviation_formula,
    descriptor_points,
    equality_type,
    intersection,
    open_points,
    orbit_contains,
    orbit_descriptors,
    point_descriptor,
    size_at_least,
    synthesize_borel_translate,
    synthesize_invariant_borel,
    synthesize_invariant_open,
    synthesize_open_translate,
)
from ilwb.generators import random_basic_open, random_descriptor
from ilwb.groupoid import GroupoidSlice, home_fibers, morphism_set, same_equality_type, vaught_transform
from ilwb.syntax import MissingWitness, parse_formula
from oracles import naive_eval

DL, DT = load_theory("decidable_graph")
GL, _ = load_theory("graph")
S = GroupoidSlice(DL, DT, 3)
FS = home_fibers(1, S)
S2 = GroupoidSlice(DL, DT, 2)
FS2 = home_fibers(2, S2)


def naive_points(phi, a, fs):
    """Points (M, c) with phi(a, c), computed with the reference evaluator."""
    out = set()
    k = len(a)
    for m, M in enumerate(fs.slice.models):
        if any(x >= M.size for x in a):
            continue
        for t in naive_eval(phi, M):
            if t[:k] == tuple(a):
                out.add(fs.tuple_point(m, t[k:]))
    return out


def test_size_abbreviation():
    for m in range(5):
        phi = size_at_least(m, DL)
        for M in S.models:
            assert (() in naive_eval(phi, M)) == (M.size >= m)


def test_abbreviations_need_decidability():
    with pytest.raises(MissingWitness):
        size_at_least(2, GL)


@given(st.lists(st.integers(0, 2), min_size=1, max_size=3))
def test_equality_type_formula(a):
    phi = equality_type(a, DL)
    M = S.models[-1]
    assert naive_eval(phi, M) == {t for t in itertools.product(range(3), repeat=len(a)) if same_equality_type(t, a)}


@given(st.lists(st.integers(0, 3), min_size=1, max_size=2))
def test_orbit_contains_formula(a):
    phi = orbit_contains(a, DL)
    for M in S.models:
        want = {t for t in itertools.product(range(M.size), repeat=len(a)) if max(a) < M.size and same_equality_type(t, a)}
        assert naive_eval(phi, M) == want
    assert abbreviation_formula("orbit_contains", DL, a) == phi


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.lists(st.integers(0, 2), max_size=1))
def test_open_translates_are_exact(seed, b):
    U = random_basic_open(random.Random(seed), DL, 3)
    phi = synthesize_open_translate(U, b, DL)
    target = open_points(U, FS)
    for a in itertools.product(range(3), repeat=len(b)):
        if same_equality_type(a, b):
            assert naive_points(phi, a, FS) == vaught_transform(target, morphism_set(a, tuple(b), S), "exists", FS)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.lists(st.integers(0, 2), max_size=1))
def test_borel_translates_are_exact(seed, b):
    B = random_descriptor(random.Random(seed), DL, 3, 1, 2)
    phi = synthesize_borel_translate(B, b, 3, DL)
    target = descriptor_points(B, FS)
    for a in itertools.product(range(3), repeat=len(b)):
        if same_equality_type(a, b):
            assert naive_points(phi, a, FS) == vaught_transform(target, morphism_set(a, tuple(b), S), "exists", FS)


def test_invariant_sets_are_defined_on_pairs():
    orbits = orbit_descriptors(FS2, ["E"])
    for orb, B in orbits:
        phi = synthesize_invariant_borel(B, FS2, 2, DL)
        assert naive_points(phi, (), FS2) == set(orb)


def test_non_invariant_set_is_rejected_with_a_witness():
    M = S.models[-1]
    B = point_descriptor(M, (0,))
    with pytest.raises(NotInvariant) as info:
        synthesize_invariant_borel(B, FS, 3, DL)
    g, p = info.value.morphism, info.value.point
    assert p in descriptor_points(B, FS)
    assert FS.act(g, p) not in descriptor_points(B, FS)


def test_invariant_open_union():
    edge = parse_formula("E(x,y)", DL, ["x", "y"])
    with pytest.raises(NotInvariant):
        synthesize_invariant_open([BasicOpen((0,), edge, (0, 1))], FS, DL)
    opens = [BasicOpen((i,), edge, (i, j)) for i in range(3) for j in range(3) if i != j]
    phi = synthesize_invariant_open(opens, FS, DL)
    has_neighbour = {
        FS.tuple_point(m, (v,)) for m, M in enumerate(S.models) for v in range(M.size)
        if any((v, w) in M.relation("E") for w in range(M.size))
    }
    assert naive_points(phi, (), FS) == has_neighbour


def test_point_descriptor_isolates_one_point():
    for m, M in enumerate(S.models):
        for c in range(M.size):
            assert descriptor_points(point_descriptor(M, (c,)), FS) == {FS.tuple_point(m, (c,))}


def test_descriptor_algebra():
    rng = random.Random(5)
    A, B = (random_descriptor(rng, DL, 3) for _ in range(2))
    pa, pb = descriptor_points(A, FS), descriptor_points(B, FS)
    assert descriptor_points(Union((A, B)), FS) == pa | pb
    assert descriptor_points(Complement(A), FS) == FS.all_points() - pa
    assert descriptor_points(intersection([A, B]), FS) == pa & pb


def test_orbits_of_points():
    orbits = orbit_descriptors(FS, ["E"])
    # vertex orbits: size 1 (1), size 2 (2), size 3 (1 + 2 + 2 + 1)
    assert len(orbits) == 9
    assert sorted(p for orb, _ in orbits for p in orb) == list(range(len(FS)))


def test_leaf_translate_equals_leaf_without_parameters():
    U = BasicOpen((0,), parse_formula("D(x,y)", DL, ["x", "y"]), (0, 1))
    assert isinstance(Leaf(U).open, BasicOpen)
    phi = synthesize_borel_translate(Leaf(U), (), 3, DL)
    assert naive_points(phi, (), FS) == vaught_transform(open_points(U, FS), set(range(len(S.morphisms))), "exists", FS)

"""Interpretations of one theory in the imaginary-sort calculus of another.

An interpretation sends the home sort to a sort ``F(X)`` of the target theory
and each ``n``-ary relation symbol to a definable relation on ``F(X)^n``.  It
transports target models to source models (``apply_to_model``) and target
isomorphisms to source isomorphisms (``apply_to_iso``).

Pieces of ``F(X)^n`` are indexed by tuples of piece indices of ``F(X)`` in
lexicographic order, matching ``power_sort``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .coding import CodedMap, interpret_sort_in_model, transport_along_iso
from .groupoid import GroupoidSlice, enumerate_isomorphisms
from .parallel import pmap
from .pretopos import (
    DefinableRelation,
    ImaginarySort,
    NotBoolean,
    SortError,
    Violation,
    _fjson,
    _span,
    disjoint_sum,
    home_sort,
    place,
    power_sort,
    relation_violation,
    sort_violation,
)
from .semantics import FiniteModel, Isomorphism, NotAModel, enumerate_models, evaluate, satisfies_theory
from .syntax import (
    And,
    Atom,
    Eq,
    Exists,
    Forall,
    Formula,
    Language,
    Not,
    Or,
    Theory,
    bot,
    conj,
    disj,
    exists_many,
    is_coherent,
    parse_theory,
    print_theory,
)


class InterpretationError(ValueError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


@lru_cache(maxsize=256)
def _power(A: ImaginarySort, n: int) -> ImaginarySort:
    return power_sort(A, n)


def _rank(idx: Sequence[int], p: int) -> int:
    r = 0
    for i in idx:
        r = r * p + i
    return r


def _blocks(arities: Sequence[int], idx: Sequence[int]) -> list[tuple[int, ...]]:
    out, start = [], 0
    for i in idx:
        out.append(_span(start, arities[i]))
        start += arities[i]
    return out


@dataclass(frozen=True)
class Interpretation:
    source_language: Language
    source_theory: Theory
    target_language: Language
    target_theory: Theory
    hom_sort: ImaginarySort
    relation_images: tuple[tuple[str, DefinableRelation], ...]
    _memo: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        images = self.relation_images
        if isinstance(images, Mapping):
            images = tuple(images.items())
        object.__setattr__(self, "relation_images", tuple(images))
        given = dict(self.relation_images)
        if set(given) != set(self.source_language.names):
            raise InterpretationError(
                f"relation images {sorted(given)} do not match the source language {sorted(self.source_language.names)}"
            )
        for r in self.source_language.relations:
            if given[r.name].sort != _power(self.hom_sort, r.arity):
                raise InterpretationError(f"image of {r.name} must live on the {r.arity}-th power of the home sort image")

    def image(self, name: str) -> DefinableRelation:
        for n, r in self.relation_images:
            if n == name:
                return r
        raise KeyError(name)

    def to_json(self) -> dict:
        return {
            "source": print_theory(self.source_language, self.source_theory),
            "target": print_theory(self.target_language, self.target_theory),
            "homSortImage": self.hom_sort.to_json(),
            "relationImages": {n: [_fjson(b) for b in r.pieces] for n, r in self.relation_images},
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Interpretation":
        sl, st = parse_theory(data["source"])
        tl, tt = parse_theory(data["target"])
        A = ImaginarySort.from_json(data["homSortImage"], tl)
        images = {}
        for r in sl.relations:
            P = _power(A, r.arity)
            raw = data["relationImages"][r.name]
            pieces = DefinableRelation.from_json({"sort": P.to_json(), "pieces": raw}, tl).pieces
            images[r.name] = DefinableRelation(P, pieces)
        return cls(sl, st, tl, tt, A, tuple(images.items()))


def make_interpretation(
    source: tuple[Language, Theory],
    target: tuple[Language, Theory],
    hom_sort: ImaginarySort,
    images: Mapping[str, Sequence[Formula] | DefinableRelation],
) -> Interpretation:
    """Build an interpretation from piece formulas given per relation symbol."""
    sl, st = source
    rels = {}
    for r in sl.relations:
        v = images[r.name]
        P = _power(hom_sort, r.arity)
        rels[r.name] = v if isinstance(v, DefinableRelation) else DefinableRelation(P, tuple(v))
    return Interpretation(sl, st, target[0], target[1], hom_sort, tuple(rels.items()))


def identity_interpretation(language: Language, theory: Theory) -> Interpretation:
    """``F(X) = X`` and ``F(R) = R``."""
    images = {r.name: [Atom(r.arity, r.name, tuple(range(r.arity)))] for r in language.relations}
    return make_interpretation((language, theory), (language, theory), home_sort(), images)


# -- translation of formulas ---------------------------------------------------------

class _Translator:
    def __init__(self, F: Interpretation, boolean: bool):
        self.F = F
        self.A = F.hom_sort
        self.p = len(self.A)
        self.boolean = boolean
        self.memo: dict = {}

    def typing(self, idx: tuple[int, ...]) -> Formula:
        ar = self.A.arities
        ctx = sum(ar[i] for i in idx)
        return conj([place(self.A.pieces[i], b, ctx) for i, b in zip(idx, _blocks(ar, idx))], ctx)

    def __call__(self, phi: Formula, idx: tuple[int, ...]) -> Formula:
        key = (phi, idx)
        hit = self.memo.get(key)
        if hit is None:
            hit = self._tr(phi, idx)
            self.memo[key] = hit
        return hit

    def _tr(self, phi: Formula, idx: tuple[int, ...]) -> Formula:
        ar = self.A.arities
        blocks = _blocks(ar, idx)
        ctx = sum(ar[i] for i in idx)
        typing = self.typing(idx)
        if isinstance(phi, Atom):
            img = self.F.image(phi.rel)
            sub = tuple(idx[a] for a in phi.args)
            positions = tuple(x for a in phi.args for x in blocks[a])
            return conj([typing, place(img.pieces[_rank(sub, self.p)], positions, ctx)], ctx)
        if isinstance(phi, Eq):
            eps = self.A.relations[idx[phi.i]][idx[phi.j]]
            return conj([typing, place(eps, blocks[phi.i] + blocks[phi.j], ctx)], ctx)
        if isinstance(phi, And):
            return conj([typing] + [self(s, idx) for s in phi.subs], ctx)
        if isinstance(phi, Or):
            return disj([self(s, idx) for s in phi.subs], ctx)
        if isinstance(phi, Exists):
            return disj([exists_many(self(phi.body, idx + (k,)), ar[k]) for k in range(self.p)], ctx)
        if not self.boolean:
            raise NotBoolean("negation and universal quantification need boolean=True")
        if isinstance(phi, Not):
            return conj([typing, Not(ctx, self(phi.sub, idx))], ctx)
        if isinstance(phi, Forall):
            alts = []
            for k in range(self.p):
                inner = ctx + ar[k]
                alts.append(exists_many(conj([self.typing(idx + (k,)), Not(inner, self(phi.body, idx + (k,)))], inner), ar[k]))
            return conj([typing, Not(ctx, disj(alts, ctx))], ctx)
        raise TypeError(f"not a formula: {phi!r}")


def translate_formula_along(F: Interpretation, phi: Formula, boolean: bool = False) -> DefinableRelation:
    """``F(phi)`` as a definable relation on ``F(X)^n``."""
    if not boolean and not is_coherent(phi):
        raise NotBoolean("formula is not coherent; pass boolean=True")
    F.source_language.check(phi)
    key = ("translate", phi, boolean)
    hit = F._memo.get(key)
    if hit is not None:
        return hit
    tr = F._memo.setdefault(("translator", boolean), _Translator(F, boolean))
    P = _power(F.hom_sort, phi.n)
    pieces = tuple(tr(phi, idx) for idx in itertools.product(range(len(F.hom_sort)), repeat=phi.n))
    out = DefinableRelation(P, pieces)
    F._memo[key] = out
    return out


# -- validation -----------------------------------------------------------------

@dataclass(frozen=True)
class InterpretationReport:
    failures: tuple[str, ...]
    witnesses: tuple[Violation | None, ...]
    models_checked: int

    @property
    def ok(self) -> bool:
        return not self.failures

    def __bool__(self):
        return self.ok


def _target_models(F: Interpretation, cap: int | None, models) -> list[FiniteModel]:
    if models is not None:
        return list(models)
    if cap is None:
        raise ValueError("pass either cap or models")
    return enumerate_models(F.target_language, F.target_theory, cap)


def _inclusion_violation(lhs: DefinableRelation, rhs: DefinableRelation, M: FiniteModel, label: str) -> Violation | None:
    for t, (a, b) in enumerate(zip(lhs.pieces, rhs.pieces)):
        bad = np.asarray(evaluate(a, M)) & ~np.asarray(evaluate(b, M))
        if bad.any():
            tup = tuple(int(x) for x in np.argwhere(bad)[0]) if bad.ndim else ()
            return Violation(label, (t,), M, tup)
    return None


def validate_interpretation(F: Interpretation, cap: int | None = None, *, models=None) -> InterpretationReport:
    """Check the home sort image, each relation image and each source axiom in every target model."""
    models = _target_models(F, cap, models)
    checks: list[tuple[str, object]] = [("home sort image", lambda M: sort_violation(F.hom_sort, M))]
    for name, r in F.relation_images:
        checks.append((f"image of {name}", lambda M, r=r: relation_violation(r, M)))
    for i, ax in enumerate(F.source_theory.axioms):
        boolean = not ax.coherent
        lhs = translate_formula_along(F, ax.lhs, boolean)
        rhs = translate_formula_along(F, ax.rhs, boolean)
        label = f"axiom {i}"
        checks.append((label, lambda M, lhs=lhs, rhs=rhs, label=label: _inclusion_violation(lhs, rhs, M, label)))
    for i, s in enumerate(F.source_theory.sentences):
        img = translate_formula_along(F, s, not is_coherent(s))
        full = DefinableRelation(img.sort, img.sort.pieces)
        label = f"sentence {i}"
        checks.append((label, lambda M, img=img, full=full, label=label: _inclusion_violation(full, img, M, label)))
    failures, witnesses = [], []
    for label, check in checks:
        for M in models:
            v = check(M)
            if v is not None:
                failures.append(f"{label} fails: {v.describe()}")
                witnesses.append(v)
                break
        if failures and label == "home sort image":
            break
    return InterpretationReport(tuple(failures), tuple(witnesses), len(models))


# -- model and isomorphism transport -------------------------------------------------

def apply_to_model(F: Interpretation, M: FiniteModel, *, check: bool = True) -> FiniteModel:
    """``F*(M)``: carrier is ``F(X)^M`` with classes numbered by least representative."""
    key = ("transport", F, check)
    hit = M._cache.get(key)
    if hit is not None:
        return hit
    if check and not satisfies_theory(M, F.target_theory):
        raise NotAModel("the model does not satisfy the target theory")
    I = interpret_sort_in_model(F.hom_sort, M)
    reps = [I.representative(c) for c in range(I.size)]
    p = len(F.hom_sort)
    tables = {}
    for r in F.source_language.relations:
        img = F.image(r.name)
        arrays: dict[int, np.ndarray] = {}
        rows = []
        for cs in itertools.product(range(I.size), repeat=r.arity):
            idx = tuple(reps[c][0] for c in cs)
            tup = tuple(x for c in cs for x in reps[c][1])
            t = _rank(idx, p)
            if t not in arrays:
                arrays[t] = np.asarray(evaluate(img.pieces[t], M))
            if arrays[t][tup]:
                rows.append(cs)
        tables[r.name] = rows
    out = FiniteModel.make(I.size, tables, F.source_language)
    if check:
        rep = satisfies_theory(out, F.source_theory)
        if not rep:
            raise InterpretationError(f"transported model violates {rep.failures()[0].label}", rep.failures()[0])
    M._cache[key] = out
    return out


def apply_to_iso(F: Interpretation, g: Isomorphism) -> Isomorphism:
    """``F*(g)``: the transport of ``g`` on ``F(X)``, read through the carriers."""
    perm = transport_along_iso(F.hom_sort, g, check_all=True)
    return Isomorphism(apply_to_model(F, g.source), apply_to_model(F, g.target), perm.values)


# -- composition -------------------------------------------------------------------

@dataclass(frozen=True)
class Composite:
    interpretation: Interpretation
    models: tuple[FiniteModel, ...]
    components: tuple[Isomorphism, ...]

    def component(self, M: FiniteModel) -> Isomorphism:
        return self.components[self.models.index(M)]


def _composite_pieces(G: Interpretation, F: Interpretation):
    """Pieces ``(i, js)`` of ``(G∘F)(X)`` with their position in the piece list."""
    q = len(G.hom_sort)
    order = []
    for i, a in enumerate(F.hom_sort.arities):
        for js in itertools.product(range(q), repeat=a):
            order.append((i, js))
    return order, {key: t for t, key in enumerate(order)}


def compose_interpretations(
    G: Interpretation, F: Interpretation, cap: int | None = None, *, models=None
) -> Composite:
    """``G∘F`` together with the comparison isomorphisms ``F*(G*(M)) ≅ (G∘F)*(M)``."""
    if F.target_language != G.source_language or F.target_theory != G.source_theory:
        raise InterpretationError("middle theories do not match")
    A = F.hom_sort
    q = len(G.hom_sort)
    order, where = _composite_pieces(G, F)
    alpha_img = [translate_formula_along(G, a, not is_coherent(a)) for a in A.pieces]
    pieces = [alpha_img[i].pieces[_rank(js, q)] for i, js in order]
    rows = []
    for i, js in order:
        row = []
        for j, ks in order:
            eps = A.relations[i][j]
            img = translate_formula_along(G, eps, not is_coherent(eps))
            row.append(img.pieces[_rank(js + ks, q)])
        rows.append(tuple(row))
    H = ImaginarySort(tuple(pieces), tuple(rows))
    images = {}
    for r in F.source_language.relations:
        FR = F.image(r.name)
        P = _power(H, r.arity)
        out = []
        for combo in itertools.product(order, repeat=r.arity):
            ids = tuple(c[0] for c in combo)
            js = tuple(j for c in combo for j in c[1])
            phi = FR.pieces[_rank(ids, len(A))]
            out.append(translate_formula_along(G, phi, not is_coherent(phi)).pieces[_rank(js, q)])
        images[r.name] = DefinableRelation(P, tuple(out))
    GF = Interpretation(F.source_language, F.source_theory, G.target_language, G.target_theory, H, tuple(images.items()))
    if cap is None and models is None:
        return Composite(GF, (), ())
    ms = tuple(_target_models(G, cap, models))
    comps = tuple(pmap(lambda M: comparison_iso(G, F, GF, M), ms))
    return Composite(GF, ms, comps)


def comparison_iso(G: Interpretation, F: Interpretation, GF: Interpretation, M: FiniteModel) -> Isomorphism:
    """The bijection sending a class of ``F(X)`` over ``G*(M)`` to the concatenated class of ``(G∘F)(X)``."""
    N = apply_to_model(G, M)
    IN = interpret_sort_in_model(G.hom_sort, M)
    IF = interpret_sort_in_model(F.hom_sort, N)
    IH = interpret_sort_in_model(GF.hom_sort, M)
    _, where = _composite_pieces(G, F)
    values: list[int | None] = [None] * IF.size
    for (i, ns), c in zip(IF.elements, IF.labels):
        reps = [IN.representative(n) for n in ns]
        piece = where[(i, tuple(r[0] for r in reps))]
        v = IH.class_of(piece, tuple(x for r in reps for x in r[1]))
        if values[c] is None:
            values[c] = v
        elif values[c] != v:
            raise InterpretationError("comparison map depends on the representative")
    return Isomorphism(apply_to_model(F, N), apply_to_model(GF, M), tuple(values))


def naturality_failures(G: Interpretation, F: Interpretation, composite: Composite, slice_: GroupoidSlice) -> list[int]:
    """Morphisms of the slice whose comparison square does not commute."""
    GF = composite.interpretation
    zeta = {M: z for M, z in zip(composite.models, composite.components)}
    bad = []
    for g in range(len(slice_.morphisms)):
        iso = slice_.isomorphism(g)
        z1 = zeta.get(iso.source) or comparison_iso(G, F, GF, iso.source)
        z2 = zeta.get(iso.target) or comparison_iso(G, F, GF, iso.target)
        left = apply_to_iso(GF, iso).compose(z1)
        right = z2.compose(apply_to_iso(F, apply_to_iso(G, iso)))
        if left.perm != right.perm:
            bad.append(g)
    return bad


def functoriality_failures(F: Interpretation, slice_: GroupoidSlice) -> list[str]:
    """Identities and composable pairs of the slice where transport is not strictly functorial."""
    out = []
    for m in range(len(slice_.models)):
        g = slice_.unit[m]
        if apply_to_iso(F, slice_.isomorphism(g)).perm != tuple(range(apply_to_model(F, slice_.models[m]).size)):
            out.append(f"identity at model {m}")
    for g in range(len(slice_.morphisms)):
        Fg = apply_to_iso(F, slice_.isomorphism(g))
        for h in slice_.out_of(slice_.target(g)):
            Fh = apply_to_iso(F, slice_.isomorphism(h))
            Fhg = apply_to_iso(F, slice_.isomorphism(slice_.compose(h, g)))
            if Fh.compose(Fg).perm != Fhg.perm:
                out.append(f"composite of {h} after {g}")
    return out


# -- sequence sorts and the tuple-domain presentation ------------------------------------

@dataclass(frozen=True)
class SequenceEmbedding:
    arities: tuple[int, ...]
    domain: DefinableRelation
    equivalence: tuple[tuple[Formula, ...], ...]
    models: tuple[FiniteModel, ...]
    bijections: tuple[CodedMap, ...]

    @property
    def sort(self) -> ImaginarySort:
        return ImaginarySort(self.domain.pieces, self.equivalence)


def padded_arities(arities: Sequence[int]) -> tuple[int, ...]:
    out: list[int] = []
    for n in arities:
        out.append(n if not out else max(n, out[-1] + 1))
    return tuple(out)


def _pad(phi: Formula, n: int, target: int) -> Formula:
    if n == target:
        return phi
    if n == 0:
        raise SortError("an arity-0 piece cannot be padded: it has no coordinate to repeat, and in the empty model it would lose its element")
    return conj([place(phi, _span(0, n), target)] + [Eq(target, t, n - 1) for t in range(n, target)], target)


def _pad_tuple(tup: tuple[int, ...], target: int) -> tuple[int, ...]:
    return tup + (tup[-1],) * (target - len(tup)) if tup else tup


def sequence_sort_embedding(A: ImaginarySort, language=None, theory=None, cap=None, *, models=None) -> SequenceEmbedding:
    """Present ``A`` as a quotient of a subsort of a sum of powers with strictly increasing arities."""
    ar = A.arities
    new = padded_arities(ar)
    pieces = [_pad(a, n, m) for a, n, m in zip(A.pieces, ar, new)]
    ambient = disjoint_sum([And(m, ()) for m in new])
    rows = []
    for i in range(len(A)):
        row = []
        for j in range(len(A)):
            ctx = new[i] + new[j]
            row.append(
                conj(
                    [
                        place(pieces[i], _span(0, new[i]), ctx),
                        place(pieces[j], _span(new[i], new[j]), ctx),
                        place(A.relations[i][j], _span(0, ar[i]) + _span(new[i], ar[j]), ctx),
                    ],
                    ctx,
                )
            )
        rows.append(tuple(row))
    domain = DefinableRelation(ambient, tuple(pieces))
    ms: tuple[FiniteModel, ...] = ()
    if models is not None or cap is not None:
        ms = tuple(models) if models is not None else tuple(enumerate_models(language, theory, cap))
    emb = SequenceEmbedding(new, domain, tuple(rows), ms, ())
    D = emb.sort
    maps = []
    for M in ms:
        IA = interpret_sort_in_model(A, M)
        ID = interpret_sort_in_model(D, M)
        vals = tuple(ID.class_of(i, _pad_tuple(x, new[i])) for i, x in (IA.representative(c) for c in range(IA.size)))
        f = CodedMap(IA.size, ID.size, vals)
        if not f.bijective:
            raise SortError(f"padding is not a bijection on {M}")
        maps.append(f)
    return SequenceEmbedding(new, domain, tuple(rows), ms, tuple(maps))


def from_hmm_data(
    domain: DefinableRelation,
    equivalence: Sequence[Sequence[Formula]],
    relation_images: Mapping[str, Sequence[Formula] | DefinableRelation],
    source: tuple[Language, Theory],
    target: tuple[Language, Theory],
    cap: int | None = None,
    *,
    models=None,
) -> Interpretation:
    """Package a domain of tuples, an equivalence on it and invariant relations as an interpretation."""
    ar = domain.sort.arities
    if any(b <= a for a, b in zip(ar, ar[1:])):
        raise InterpretationError("domain pieces must have strictly increasing arities")
    hom = ImaginarySort(domain.pieces, tuple(tuple(r) for r in equivalence))
    F = make_interpretation(source, target, hom, relation_images)
    ms = list(_target_models(F, cap, models))
    for M in ms:
        v = sort_violation(hom, M)
        if v is not None:
            raise InterpretationError(f"equivalence on the domain fails: {v.describe()}", v)
    for name, r in F.relation_images:
        for M in ms:
            v = relation_violation(r, M)
            if v is not None:
                raise InterpretationError(f"image of {name} is not invariant: {v.describe()}", v)
    report = validate_interpretation(F, models=ms)
    if not report:
        raise InterpretationError(report.failures[0], report.witnesses[0])
    return F


def hmm_form(F: Interpretation, cap: int | None = None, *, models=None):
    """Re-present ``F`` through the sequence-sort embedding; returns ``(embedding, images)``."""
    ms = _target_models(F, cap, models)
    emb = sequence_sort_embedding(F.hom_sort, models=ms)
    A, D = F.hom_sort, emb.sort
    old, new, p = A.arities, emb.arities, len(A)
    images = {}
    for r in F.source_language.relations:
        FR = F.image(r.name)
        P = _power(D, r.arity)
        out = []
        for idx in itertools.product(range(p), repeat=r.arity):
            ctx = sum(new[i] for i in idx)
            positions = tuple(x for i, b in zip(idx, _blocks(new, idx)) for x in b[: old[i]])
            typing = conj([place(D.pieces[i], b, ctx) for i, b in zip(idx, _blocks(new, idx))], ctx)
            out.append(conj([typing, place(FR.pieces[_rank(idx, p)], positions, ctx)], ctx))
        images[r.name] = DefinableRelation(P, tuple(out))
    return emb, images


# -- bounded search for an interpretation matching a table ------------------------------

@dataclass(frozen=True)
class SearchResult:
    found: Interpretation | None
    candidates_checked: int
    exhausted: bool


def _atoms(language: Language, n: int) -> list[Formula]:
    out: list[Formula] = [Eq(n, i, j) for i in range(n) for j in range(i + 1, n)]
    for r in language.relations:
        for args in itertools.product(range(n), repeat=r.arity):
            out.append(Atom(n, r.name, args))
    return out


def _candidates(language: Language, n: int, depth: int) -> Iterable[Formula]:
    yield bot(n)
    atoms = _atoms(language, n)
    for k in range(1, depth + 1):
        for combo in itertools.combinations(atoms, k):
            yield disj(combo, n)


def search_interpretation(
    source: tuple[Language, Theory],
    target: tuple[Language, Theory],
    table: Sequence[tuple[FiniteModel, FiniteModel]],
    depth: int = 2,
    limit: int = 100_000,
) -> SearchResult:
    """Look for ``F`` with ``F(X) = X`` and positive disjunctions of at most ``depth`` atoms
    as relation images, such that ``F*(M)`` is isomorphic to the tabulated model for every row.
    """
    sl, st = source
    pools = [list(_candidates(target[0], r.arity, depth)) for r in sl.relations]
    checked = 0
    for choice in itertools.product(*pools):
        if checked >= limit:
            return SearchResult(None, checked, False)
        checked += 1
        images = {r.name: [phi] for r, phi in zip(sl.relations, choice)}
        F = make_interpretation(source, target, home_sort(), images)
        ok = True
        for M, expected in table:
            out = apply_to_model(F, M, check=False)
            if out.size != expected.size or not satisfies_theory(out, st) or not enumerate_isomorphisms(out, expected):
                ok = False
                break
        if ok:
            return SearchResult(F, checked, False)
    return SearchResult(None, checked, True)

"""The groupoid of models up to a size cap and its action on interpreted sorts.

Morphisms are stored as ``(source, target, perm)`` with ``perm`` carrying the
source model onto the target model.  An isomorphism ``g`` acts on points lying
over its source.  Subsets of a fibered sort are frozensets of global point
numbers; morphism sets are frozensets of morphism numbers.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .coding import CodedMap, InterpretedSort, interpret_sort_in_model, transport_along_iso
from .parallel import pmap
from .pretopos import ImaginarySort, home_power
from .semantics import FiniteModel, Isomorphism, enumerate_models
from .syntax import Language, Theory


class BudgetExceeded(RuntimeError):
    pass


class EqualityTypeMismatch(ValueError):
    pass


def enumerate_isomorphisms(M: FiniteModel, N: FiniteModel) -> list[Isomorphism]:
    """Every permutation carrying ``M`` onto ``N``, in lexicographic order."""
    if M.size != N.size or M.names != N.names:
        return []
    return [Isomorphism(M, N, p) for p in itertools.permutations(range(M.size)) if M.permute(p) == N]


def same_equality_type(a: Sequence[int], b: Sequence[int]) -> bool:
    if len(a) != len(b):
        return False
    return all((a[i] == a[j]) == (b[i] == b[j]) for i in range(len(a)) for j in range(len(a)))


@dataclass(frozen=True)
class Morphism:
    source: int
    target: int
    perm: tuple[int, ...]

    def __call__(self, a):
        if isinstance(a, tuple):
            return tuple(self.perm[x] for x in a)
        return self.perm[a]


class GroupoidSlice:
    """All models of a theory of size at most ``cap`` with all isomorphisms between them."""

    def __init__(self, language: Language, theory: Theory, cap: int, *, budget: int = 10**6):
        if budget <= 0:
            raise ValueError("budget must be positive")
        self.language = language
        self.theory = theory
        self.cap = cap
        self.models: tuple[FiniteModel, ...] = tuple(enumerate_models(language, theory, cap))
        total = sum(math.factorial(M.size) for M in self.models)
        if total > budget:
            raise BudgetExceeded(f"cap too large: the slice has {total} morphisms, budget is {budget}")
        self.model_index = {M: i for i, M in enumerate(self.models)}

        def out(i):
            M = self.models[i]
            return [Morphism(i, self.model_index[M.permute(p)], p) for p in itertools.permutations(range(M.size))]

        self.morphisms: tuple[Morphism, ...] = tuple(g for gs in pmap(out, range(len(self.models))) for g in gs)
        self.index = {(g.source, g.perm): n for n, g in enumerate(self.morphisms)}
        self._out: list[list[int]] = [[] for _ in self.models]
        for n, g in enumerate(self.morphisms):
            self._out[g.source].append(n)
        self.unit = tuple(self.index[(i, tuple(range(M.size)))] for i, M in enumerate(self.models))
        inv = []
        for g in self.morphisms:
            p = [0] * len(g.perm)
            for a, b in enumerate(g.perm):
                p[b] = a
            inv.append(self.index[(g.target, tuple(p))])
        self.inverse = tuple(inv)

    def __repr__(self):
        return f"<GroupoidSlice cap={self.cap} objects={len(self.models)} morphisms={len(self.morphisms)}>"

    def source(self, g: int) -> int:
        return self.morphisms[g].source

    def target(self, g: int) -> int:
        return self.morphisms[g].target

    def out_of(self, m: int) -> list[int]:
        return list(self._out[m])

    def compose(self, h: int, g: int) -> int:
        """``h · g``: first ``g`` then ``h``."""
        G, H = self.morphisms[g], self.morphisms[h]
        if G.target != H.source:
            raise ValueError("morphisms are not composable")
        return self.index[(G.source, tuple(H.perm[a] for a in G.perm))]

    def composition_table(self) -> dict[tuple[int, int], int]:
        return {(h, g): self.compose(h, g) for g in range(len(self.morphisms)) for h in self._out[self.target(g)]}

    def isomorphism(self, g: int) -> Isomorphism:
        G = self.morphisms[g]
        return Isomorphism(self.models[G.source], self.models[G.target], G.perm)

    def automorphisms(self, m: int) -> list[int]:
        return [g for g in self._out[m] if self.target(g) == m]

    def check_axioms(self) -> list[str]:
        """Exhaustive check of the groupoid laws; returns descriptions of failures."""
        bad = []
        for g, G in enumerate(self.morphisms):
            if self.models[G.source].permute(G.perm) != self.models[G.target]:
                bad.append(f"morphism {g} does not carry its source to its target")
            if self.compose(g, self.unit[G.source]) != g or self.compose(self.unit[G.target], g) != g:
                bad.append(f"unit law fails at {g}")
            if self.compose(self.inverse[g], g) != self.unit[G.source] or self.compose(g, self.inverse[g]) != self.unit[G.target]:
                bad.append(f"inverse law fails at {g}")
            for h in self._out[G.target]:
                hg = self.compose(h, g)
                if self.source(hg) != G.source or self.target(hg) != self.target(h):
                    bad.append(f"boundary law fails at ({h},{g})")
                for k in self._out[self.target(h)]:
                    if self.compose(k, hg) != self.compose(self.compose(k, h), g):
                        bad.append(f"associativity fails at ({k},{h},{g})")
        return bad

    def orbits(self) -> list[list[int]]:
        """Isomorphism classes of models, each sorted, ordered by least member."""
        seen: dict[int, int] = {}
        out: list[list[int]] = []
        for m in range(len(self.models)):
            if m in seen:
                continue
            cls = sorted({self.target(g) for g in self._out[m]})
            for c in cls:
                seen[c] = len(out)
            out.append(cls)
        return out

    def to_json(self, sorts: Iterable[tuple[str, "FiberedSort"]] = ()) -> dict:
        data = {
            "cap": self.cap,
            "objects": [M.to_json() for M in self.models],
            "morphisms": [[g.source, g.target, list(g.perm)] for g in self.morphisms],
        }
        actions = {}
        for name, fs in sorts:
            actions[name] = {
                "fibers": [I.size for I in fs.fibers],
                "action": [list(fs.action(g).values) for g in range(len(self.morphisms))],
            }
        if actions:
            data["actions"] = actions
        return data


def build_groupoid_slice(language: Language, theory: Theory, cap: int, *, budget: int = 10**6) -> GroupoidSlice:
    return GroupoidSlice(language, theory, cap, budget=budget)


class FiberedSort:
    """``A^M`` for every model ``M`` of a slice, with the transport action."""

    def __init__(self, sort: ImaginarySort, slice_: GroupoidSlice):
        self.sort = sort
        self.slice = slice_
        self.fibers: tuple[InterpretedSort, ...] = tuple(pmap(lambda M: interpret_sort_in_model(sort, M), slice_.models))
        self.offsets = [0]
        for I in self.fibers:
            self.offsets.append(self.offsets[-1] + I.size)
        self.points: tuple[tuple[int, int], ...] = tuple(
            (m, c) for m, I in enumerate(self.fibers) for c in range(I.size)
        )
        self._actions: dict[int, CodedMap] = {}

    def __len__(self):
        return len(self.points)

    def point(self, m: int, c: int) -> int:
        if not 0 <= c < self.fibers[m].size:
            raise IndexError("class out of range for this fiber")
        return self.offsets[m] + c

    def tuple_point(self, m: int, tup: Sequence[int], piece: int = 0) -> int:
        return self.point(m, self.fibers[m].class_of(piece, tup))

    def model_of(self, p: int) -> int:
        return self.points[p][0]

    def fiber(self, m: int) -> range:
        return range(self.offsets[m], self.offsets[m + 1])

    def action(self, g: int) -> CodedMap:
        hit = self._actions.get(g)
        if hit is None:
            hit = transport_along_iso(self.sort, self.slice.isomorphism(g))
            self._actions[g] = hit
        return hit

    def act(self, g: int, p: int) -> int:
        m, c = self.points[p]
        G = self.slice.morphisms[g]
        if G.source != m:
            raise ValueError("morphism does not act on this point")
        return self.offsets[G.target] + self.action(g)(c)

    def all_points(self) -> frozenset[int]:
        return frozenset(range(len(self.points)))

    def over(self, models: Iterable[int]) -> frozenset[int]:
        return frozenset(p for m in models for p in self.fiber(m))

    def orbits(self) -> list[list[int]]:
        seen: set[int] = set()
        out = []
        for p in range(len(self.points)):
            if p in seen:
                continue
            orb = sorted({self.act(g, p) for g in self.slice.out_of(self.model_of(p))})
            seen.update(orb)
            out.append(orb)
        return out

    def to_json(self) -> dict:
        return {
            "fibers": [I.to_json() for I in self.fibers],
            "action": [list(self.action(g).values) for g in range(len(self.slice.morphisms))],
        }


def build_fibered_sort(sort: ImaginarySort, slice_: GroupoidSlice) -> FiberedSort:
    return FiberedSort(sort, slice_)


def home_fibers(n: int, slice_: GroupoidSlice) -> FiberedSort:
    """The fibered set of ``n``-tuples, one fiber ``M^n`` per model."""
    return FiberedSort(home_power(n), slice_)


# -- morphism sets and transforms ------------------------------------------------

def morphism_set(a: Sequence[int], b: Sequence[int], slice_: GroupoidSlice) -> frozenset[int]:
    """Isomorphisms of the slice carrying the tuple ``a`` to ``b``."""
    a, b = tuple(a), tuple(b)
    if not same_equality_type(a, b):
        raise EqualityTypeMismatch(f"{a} and {b} have different equality types")
    out = []
    for n, g in enumerate(slice_.morphisms):
        k = len(g.perm)
        if all(x < k for x in a) and all(y < k for y in b) and g(a) == b:
            out.append(n)
    return frozenset(out)


def all_morphisms(slice_: GroupoidSlice) -> frozenset[int]:
    return frozenset(range(len(slice_.morphisms)))


def product_set(U: Iterable[int], V: Iterable[int], slice_: GroupoidSlice) -> frozenset[int]:
    """``U · V = {g · h : g in U, h in V, source(g) = target(h)}``."""
    by_source: dict[int, list[int]] = {}
    for g in U:
        by_source.setdefault(slice_.source(g), []).append(g)
    return frozenset(slice_.compose(g, h) for h in V for g in by_source.get(slice_.target(h), ()))


def translate_set(U: Iterable[int], W: Iterable[int], fs: FiberedSort) -> frozenset[int]:
    """``W^{-1} · U``: points sent into ``U`` by some morphism of ``W``."""
    U = frozenset(U)
    by_source: dict[int, list[int]] = {}
    for g in W:
        by_source.setdefault(fs.slice.source(g), []).append(g)
    return frozenset(
        p for p in range(len(fs)) if any(fs.act(g, p) in U for g in by_source.get(fs.model_of(p), ()))
    )


VAUGHT_KINDS = ("exists", "all", "all_nonempty")


def vaught_transform(B: Iterable[int], U: Iterable[int], kind: str, fs: FiberedSort) -> frozenset[int]:
    """Quantify the action over the morphisms of ``U`` leaving each point's model.

    ``exists`` and ``all`` are the finite readings of the category quantifiers;
    ``all_nonempty`` additionally asks that some morphism of ``U`` applies.
    """
    if kind not in VAUGHT_KINDS:
        raise ValueError(f"kind must be one of {VAUGHT_KINDS}")
    B = frozenset(B)
    by_source: dict[int, list[int]] = {}
    for g in U:
        by_source.setdefault(fs.slice.source(g), []).append(g)
    out = []
    for p in range(len(fs)):
        gs = by_source.get(fs.model_of(p), ())
        hits = [fs.act(g, p) in B for g in gs]
        if kind == "exists":
            keep = any(hits)
        elif kind == "all":
            keep = all(hits)
        else:
            keep = bool(hits) and all(hits)
        if keep:
            out.append(p)
    return frozenset(out)


def basic_morphism_sets(slice_: GroupoidSlice, max_length: int = 2, bound: int | None = None):
    """All ``(a, b, set)`` with ``a``, ``b`` of equal equality type, entries below ``bound``."""
    bound = slice_.cap if bound is None else bound
    out = []
    for n in range(max_length + 1):
        for a in itertools.product(range(bound), repeat=n):
            for b in itertools.product(range(bound), repeat=n):
                if same_equality_type(a, b):
                    out.append((a, b, morphism_set(a, b, slice_)))
    return out

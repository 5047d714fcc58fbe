"""Synthesis of defining formulas for translates and invariant sets of tuples.

Points live in the fibered set of ``n``-tuples over a groupoid slice.  A basic
open set is given by a tuple ``d`` (the point tuple), a formula ``psi`` with
``l`` variables and a parameter tuple ``f``: it holds the points ``(M, d)``
with ``psi(f)`` true in ``M``.  Borel descriptors combine basic opens with
finite unions and complements.

All synthesized formulas use the decidability witness of the language for
inequalities, so the language must declare one.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .groupoid import FiberedSort, morphism_set, same_equality_type, vaught_transform
from .pretopos import place
from .semantics import FiniteModel, evaluate
from .syntax import Atom, Eq, Formula, Language, Not, conj, disj, exists_many


class NotInvariant(ValueError):
    def __init__(self, message: str, morphism: int, point: int):
        super().__init__(message)
        self.morphism = morphism
        self.point = point


# -- abbreviation formulas ---------------------------------------------------------

def size_at_least(m: int, language: Language, n: int = 0) -> Formula:
    """``exists y_0..y_{m-1}`` pairwise distinct, as a formula in context ``n``."""
    ctx = n + m
    body = conj([language.neq(n + i, n + j, ctx) for i in range(m) for j in range(i + 1, m)], ctx)
    return exists_many(body, m)


def tuple_in_model(a: Sequence[int], language: Language, n: int = 0) -> Formula:
    """True exactly in models containing every entry of ``a``."""
    return size_at_least(max(a) + 1 if a else 0, language, n)


def equality_type(a: Sequence[int], language: Language, n: int | None = None, variables: Sequence[int] | None = None) -> Formula:
    """The variables ``variables`` (default ``0..len(a)-1``) realize the equality type of ``a``."""
    variables = tuple(range(len(a))) if variables is None else tuple(variables)
    n = len(a) if n is None else n
    if len(variables) != len(a):
        raise ValueError("one variable per tuple entry is required")
    parts = []
    for i in range(len(a)):
        for j in range(i + 1, len(a)):
            u, v = variables[i], variables[j]
            parts.append(Eq(n, u, v) if a[i] == a[j] else language.neq(u, v, n))
    return conj(parts, n)


def orbit_contains(a: Sequence[int], language: Language, n: int | None = None, variables: Sequence[int] | None = None) -> Formula:
    """Some permutation of the model carries the variables' values onto ``a``."""
    n = len(a) if n is None else n
    return conj([tuple_in_model(a, language, n), equality_type(a, language, n, variables)], n)


def abbreviation_formula(kind: str, language: Language, arg) -> Formula:
    if kind == "size_at_least":
        return size_at_least(int(arg), language)
    if kind == "tuple_in_model":
        return tuple_in_model(tuple(arg), language)
    if kind == "equality_type":
        return equality_type(tuple(arg), language)
    if kind == "orbit_contains":
        return orbit_contains(tuple(arg), language)
    raise ValueError(f"unknown abbreviation {kind!r}")


# -- basic opens and descriptors ------------------------------------------------------

@dataclass(frozen=True)
class BasicOpen:
    """Points ``(M, d)`` of the ``len(d)``-tuple fibers with ``psi(f)`` true in ``M``."""

    d: tuple[int, ...]
    psi: Formula
    f: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "d", tuple(self.d))
        object.__setattr__(self, "f", tuple(self.f))
        if self.psi.n != len(self.f):
            raise ValueError("parameter tuple length must match the formula's context")

    @property
    def n(self) -> int:
        return len(self.d)

    def contains(self, M: FiniteModel, tup: Sequence[int]) -> bool:
        k = M.size
        if tuple(tup) != self.d or any(x >= k for x in self.d + self.f):
            return False
        return bool(evaluate(self.psi, M)[self.f])


@dataclass(frozen=True)
class Leaf:
    open: BasicOpen


@dataclass(frozen=True)
class Union:
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))


@dataclass(frozen=True)
class Complement:
    sub: object


Descriptor = Leaf | Union | Complement


def intersection(parts: Sequence[Descriptor]) -> Descriptor:
    return Complement(Union(tuple(Complement(p) for p in parts)))


def descriptor_arity(B: Descriptor) -> int | None:
    if isinstance(B, Leaf):
        return B.open.n
    if isinstance(B, Union):
        ns = {descriptor_arity(p) for p in B.parts} - {None}
        if len(ns) > 1:
            raise ValueError("descriptor mixes tuple lengths")
        return ns.pop() if ns else None
    return descriptor_arity(B.sub)


def open_points(U: BasicOpen, fs: FiberedSort) -> frozenset[int]:
    out = []
    for m, M in enumerate(fs.slice.models):
        if U.contains(M, U.d):
            out.append(fs.tuple_point(m, U.d))
    return frozenset(out)


def descriptor_points(B: Descriptor, fs: FiberedSort) -> frozenset[int]:
    """The set of points a descriptor denotes on the slice."""
    if isinstance(B, Leaf):
        return open_points(B.open, fs)
    if isinstance(B, Union):
        out: frozenset[int] = frozenset()
        for p in B.parts:
            out |= descriptor_points(p, fs)
        return out
    if isinstance(B, Complement):
        return fs.all_points() - descriptor_points(B.sub, fs)
    raise TypeError(f"not a descriptor: {B!r}")


def diagram(M: FiniteModel, relations: Sequence[str] | None = None) -> Formula:
    """Formula in ``|M|`` variables saying the values are distinct, exhaust the
    model and satisfy exactly the atoms of ``M`` on the listed relations."""
    k = M.size
    names = M.names if relations is None else tuple(relations)
    parts: list[Formula] = [Not(k, Eq(k, i, j)) for i in range(k) for j in range(i + 1, k)]
    for name in names:
        table = M.relation(name)
        for args in itertools.product(range(k), repeat=M.arity(name)):
            atom = Atom(k, name, args)
            parts.append(atom if args in table else Not(k, atom))
    others = exists_many(conj([Not(k + 1, Eq(k + 1, k, i)) for i in range(k)], k + 1), 1)
    parts.append(Not(k, others))
    return conj(parts, k)


def point_descriptor(M: FiniteModel, tup: Sequence[int], relations: Sequence[str] | None = None) -> Descriptor:
    """A single basic open holding just the point ``(M, tup)`` among models
    that agree with ``M`` off the listed relations (default: all of them)."""
    return Leaf(BasicOpen(tuple(tup), diagram(M, relations), tuple(range(M.size))))


# -- synthesis ------------------------------------------------------------------------

def synthesize_open_translate(U: BasicOpen, b: Sequence[int], language: Language) -> Formula:
    """Formula ``phi(x, y)`` (``k + n`` variables) with ``phi(a, -)`` the translate of ``U``.

    For every ``a`` of the same equality type as ``b`` the points ``(M, c)``
    moved into ``U`` by an isomorphism sending ``a`` to ``b`` are exactly those
    with ``phi(a, c)``.
    """
    b = tuple(b)
    k, n, l = len(b), U.n, len(U.f)
    ctx = k + n + l
    body = conj(
        [
            orbit_contains(b + U.d + U.f, language, ctx, tuple(range(ctx))),
            place(U.psi, tuple(range(k + n, ctx)), ctx),
        ],
        ctx,
    )
    return exists_many(body, l)


@dataclass
class _Synth:
    language: Language
    cap: int
    n: int
    memo: dict = field(default_factory=dict)

    def run(self, B: Descriptor, b: tuple[int, ...]) -> Formula:
        key = (B, b)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        k, n = len(b), self.n
        if isinstance(B, Leaf):
            out = synthesize_open_translate(B.open, b, self.language)
        elif isinstance(B, Union):
            out = disj([self.run(p, b) for p in B.parts], k + n)
        elif isinstance(B, Complement):
            alts = []
            for d in self.extensions(b):
                psi = self.run(B.sub, d)
                e = len(d) - k
                ctx = k + n + e
                xs = tuple(range(k)) + tuple(range(k + n, ctx))
                mapping = xs + tuple(range(k, k + n))
                body = conj(
                    [orbit_contains(d, self.language, ctx, xs), Not(ctx, place(psi, mapping, ctx))],
                    ctx,
                )
                alts.append(exists_many(body, e))
            out = disj(alts, k + n)
        else:
            raise TypeError(f"not a descriptor: {B!r}")
        self.memo[key] = out
        return out

    def extensions(self, b: tuple[int, ...]) -> list[tuple[int, ...]]:
        """``b`` followed by strictly increasing fresh entries below the cap."""
        fresh = [v for v in range(self.cap) if v not in b]
        out = []
        for r in range(len(fresh) + 1):
            for extra in itertools.combinations(fresh, r):
                out.append(b + extra)
        return out


def synthesize_borel_translate(B: Descriptor, b: Sequence[int], cap: int, language: Language, n: int | None = None) -> Formula:
    """Formula ``phi`` with ``phi(a, -)`` equal to the existential transform of ``B``
    along the isomorphisms sending ``a`` to ``b``.

    Extensions of ``b`` in the complement step are truncated to entries below
    ``cap``; the result is exact on slices of models of size at most ``cap``.
    """
    if n is None:
        n = descriptor_arity(B)
        if n is None:
            raise ValueError("cannot infer the tuple length; pass n")
    if language.witness is None:
        language.neq(0, 1, 2)
    return _Synth(language, cap, n).run(B, tuple(b))


def formula_points(phi: Formula, a: Sequence[int], fs: FiberedSort) -> frozenset[int]:
    """Points ``(M, c)`` with ``a`` in ``M`` and ``phi(a, c)`` true."""
    a = tuple(a)
    k = len(a)
    n = phi.n - k
    out = []
    for m, M in enumerate(fs.slice.models):
        if any(x >= M.size for x in a):
            continue
        arr = evaluate(phi, M)
        sub = arr[a] if k else arr
        for c in zip(*np.nonzero(sub)) if n else ([()] if bool(sub) else []):
            out.append(fs.tuple_point(m, tuple(int(v) for v in c)))
    return frozenset(out)


def moving_witness(points: frozenset[int], fs: FiberedSort) -> tuple[int, int] | None:
    """A morphism and a point of ``points`` it moves outside, if any."""
    for p in sorted(points):
        for g in fs.slice.out_of(fs.model_of(p)):
            if fs.act(g, p) not in points:
                return g, p
    return None


def _require_invariant(points: frozenset[int], fs: FiberedSort):
    w = moving_witness(points, fs)
    if w is not None:
        g, p = w
        G = fs.slice.morphisms[g]
        raise NotInvariant(
            f"set is not invariant: morphism {g} (perm {G.perm}, model {G.source} to {G.target}) moves point {p} outside",
            g,
            p,
        )


def synthesize_invariant_open(opens: Sequence[BasicOpen], fs: FiberedSort, language: Language) -> Formula:
    """Coherent formula defining an invariant union of basic opens on the slice."""
    n = fs.sort.arities[0]
    points: frozenset[int] = frozenset()
    for U in opens:
        if U.n != n:
            raise ValueError("basic open over the wrong tuple length")
        points |= open_points(U, fs)
    _require_invariant(points, fs)
    return disj([synthesize_open_translate(U, (), language) for U in opens], n)


def synthesize_invariant_borel(B: Descriptor, fs: FiberedSort, cap: int, language: Language) -> Formula:
    n = fs.sort.arities[0]
    _require_invariant(descriptor_points(B, fs), fs)
    return synthesize_borel_translate(B, (), cap, language, n)


def check_translate(phi: Formula, B: Descriptor, b: Sequence[int], fs: FiberedSort) -> list[tuple[int, ...]]:
    """Tuples ``a`` (same type as ``b``, entries below the cap) where the formula misses the transform."""
    b = tuple(b)
    target = descriptor_points(B, fs)
    bad = []
    for a in itertools.product(range(fs.slice.cap), repeat=len(b)):
        if not same_equality_type(a, b):
            continue
        expect = vaught_transform(target, morphism_set(a, b, fs.slice), "exists", fs)
        if formula_points(phi, a, fs) != expect:
            bad.append(a)
    return bad


def orbit_descriptors(fs: FiberedSort, relations: Sequence[str] | None = None) -> list[tuple[list[int], Descriptor]]:
    """One descriptor per orbit of points: the union of its point descriptors."""
    out = []
    for orb in fs.orbits():
        parts = []
        for p in orb:
            m, c = fs.points[p]
            elem = fs.fibers[m].representative(c)[1]
            parts.append(point_descriptor(fs.slice.models[m], elem, relations))
        out.append((orb, Union(tuple(parts))))
    return out


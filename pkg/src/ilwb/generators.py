"""Seeded random formulas, sorts, functions and descriptors for property checks.

Every generator takes a ``random.Random`` so that runs are reproducible.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .definability import BasicOpen, Complement, Leaf, Union
from .pretopos import (
    DefinableFunction,
    ImaginarySort,
    _span,
    disjoint_sum,
    identity_function,
    place,
    product_sort,
    sort_from_formula,
    terminal_sort,
)
from .syntax import And, Atom, Eq, Exists, Formula, Language, Not, Or, bot, conj, disj, top


def random_atom(rng: random.Random, language: Language, n: int) -> Formula:
    """A relation atom or an equality in context ``n`` (``n >= 1``)."""
    rels = [r for r in language.relations if r.arity == 0 or n > 0]
    if n > 0 and (not rels or rng.random() < 0.25):
        return Eq(n, rng.randrange(n), rng.randrange(n))
    if not rels:
        return top(n) if rng.random() < 0.5 else bot(n)
    r = rng.choice(rels)
    return Atom(n, r.name, tuple(rng.randrange(n) for _ in range(r.arity)))


def random_coherent_formula(rng: random.Random, language: Language, n: int, depth: int = 4) -> Formula:
    """Atoms, finite conjunctions and disjunctions and existentials, nested at most ``depth`` deep."""
    if depth <= 0 or (n > 0 and rng.random() < 0.2):
        return _leaf(rng, language, n)
    kind = rng.choice(("and", "or", "exists", "exists"))
    if kind == "exists":
        return Exists(n, random_coherent_formula(rng, language, n + 1, depth - 1))
    width = rng.randint(0, 3)
    subs = tuple(random_coherent_formula(rng, language, n, depth - 1) for _ in range(width))
    return And(n, subs) if kind == "and" else Or(n, subs)


def _leaf(rng: random.Random, language: Language, n: int) -> Formula:
    if n == 0:
        return top(0) if rng.random() < 0.5 else bot(0)
    return random_atom(rng, language, n)


def random_quantifier_free(rng: random.Random, language: Language, n: int, depth: int = 2) -> Formula:
    """Boolean combination of atoms, used for basic open sets."""
    if depth <= 0 or rng.random() < 0.3:
        a = _leaf(rng, language, n)
        return Not(n, a) if rng.random() < 0.3 else a
    kind = rng.choice(("and", "or", "not"))
    if kind == "not":
        return Not(n, random_quantifier_free(rng, language, n, depth - 1))
    subs = [random_quantifier_free(rng, language, n, depth - 1) for _ in range(rng.randint(1, 3))]
    return conj(subs, n) if kind == "and" else disj(subs, n)


# -- sorts and functions ------------------------------------------------------------

TWO = disjoint_sum([top(0), top(0)])


@dataclass
class SortZoo:
    """Random sorts with the functions known to leave them; projections are recorded."""

    rng: random.Random
    language: Language
    projections: dict = field(default_factory=dict)
    plain: dict = field(default_factory=dict)

    def base_sort(self, wide: bool = True) -> ImaginarySort:
        choice = self.rng.choice((0, 1, 2, 3) if wide else (0, 1, 3))
        if choice == 0:
            return sort_from_formula(top(1))
        if choice == 1:
            A = sort_from_formula(random_coherent_formula(self.rng, self.language, 1, 2))
        elif choice == 2:
            A = sort_from_formula(random_coherent_formula(self.rng, self.language, 2, 2))
        else:
            return disjoint_sum([random_coherent_formula(self.rng, self.language, 1, 1), top(1)])
        return A

    def sort(self) -> ImaginarySort:
        if self.rng.random() < 0.3:
            A, B = self.base_sort(False), self.base_sort(False)
            P, p1, p2 = product_sort(A, B)
            self.projections[P] = (p1, p2)
            return P
        A = self.base_sort()
        if len(A) == 1:
            self.plain[A] = True
        return A

    def function_from(self, A: ImaginarySort) -> DefinableFunction:
        """A random definable function with source ``A``."""
        options = ["identity", "terminal"]
        if sum(A.arities) <= 2:
            options.append("diagonal")
        if A in self.projections:
            options += ["first", "second"]
        if A in self.plain:
            options += ["characteristic", "characteristic"]
            if A.arities[0] == 2:
                options.append("quotient")
        kind = self.rng.choice(options)
        if kind == "identity":
            return identity_function(A)
        if kind == "terminal":
            return to_terminal(A)
        if kind == "diagonal":
            f = identity_function(A)
            P, p1, p2 = product_sort(A, A)
            self.projections[P] = (p1, p2)
            return pair_functions(f, f, P)
        if kind == "first":
            return self.projections[A][0]
        if kind == "second":
            return self.projections[A][1]
        if kind == "characteristic":
            phi = random_quantifier_free(self.rng, self.language, A.arities[0], 2)
            return characteristic_map(A, phi)
        return first_coordinate_quotient(A)

    def chain(self, length: int = 3) -> list[DefinableFunction]:
        A = self.sort()
        out = []
        for _ in range(length):
            f = self.function_from(A)
            out.append(f)
            A = f.target
        return out


def to_terminal(A: ImaginarySort) -> DefinableFunction:
    return DefinableFunction(A, terminal_sort(), tuple((a,) for a in A.pieces))


def pair_functions(f: DefinableFunction, g: DefinableFunction, P: ImaginarySort) -> DefinableFunction:
    """``<f, g> : A -> B x C`` into the product ``P`` built by ``product_sort(B, C)``."""
    A, B, C = f.source, f.target, g.target
    rows = []
    for i, ni in enumerate(A.arities):
        row = []
        for k, mk in enumerate(B.arities):
            for l, ml in enumerate(C.arities):
                ctx = ni + mk + ml
                row.append(
                    conj(
                        [
                            place(f.graph[i][k], _span(0, ni) + _span(ni, mk), ctx),
                            place(g.graph[i][l], _span(0, ni) + _span(ni + mk, ml), ctx),
                        ],
                        ctx,
                    )
                )
        rows.append(tuple(row))
    return DefinableFunction(A, P, tuple(rows))


def characteristic_map(A: ImaginarySort, phi: Formula) -> DefinableFunction:
    """``A -> 1 + 1`` sending the elements satisfying ``phi`` to the first summand.

    ``A`` must be a single formula quotiented by equality of tuples.
    """
    (alpha,) = A.pieces
    n = alpha.n
    return DefinableFunction(A, TWO, ((conj([alpha, phi], n), conj([alpha, Not(n, phi)], n)),))


def first_coordinate_quotient(A: ImaginarySort) -> DefinableFunction:
    """From a two-variable formula to its pairs identified by first coordinate."""
    (alpha,) = A.pieces
    eps = conj([place(alpha, (0, 1), 4), place(alpha, (2, 3), 4), Eq(4, 0, 2)], 4)
    Q = ImaginarySort((alpha,), ((eps,),))
    return DefinableFunction(A, Q, ((eps,),))


# -- descriptors -------------------------------------------------------------------

def random_basic_open(rng: random.Random, language: Language, cap: int, n: int = 1) -> BasicOpen:
    d = tuple(rng.randrange(max(cap, 1)) for _ in range(n))
    width = rng.randint(1, 2)
    f = tuple(rng.randrange(max(cap, 1)) for _ in range(width))
    return BasicOpen(d, random_quantifier_free(rng, language, width, 1), f)


def random_descriptor(rng: random.Random, language: Language, cap: int, n: int = 1, depth: int = 2):
    if depth <= 0 or rng.random() < 0.35:
        return Leaf(random_basic_open(rng, language, cap, n))
    if rng.random() < 0.5:
        return Complement(random_descriptor(rng, language, cap, n, depth - 1))
    return Union(tuple(random_descriptor(rng, language, cap, n, depth - 1) for _ in range(rng.randint(1, 2))))

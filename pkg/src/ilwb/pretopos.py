"""Imaginary sorts, definable relations and functions, and their categorical structure.

A sort is a family of piece formulas ``alpha_i`` (context ``n_i``) with a matrix
of formulas ``eps_ij`` (context ``n_i + n_j``) that should cut out an equivalence
relation on the disjoint union of the pieces.  Validation is semantic: every
clause is checked in every model of the theory up to a size cap.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .semantics import FiniteModel, enumerate_models, evaluate
from .syntax import (
    Eq,
    Formula,
    Language,
    Not,
    Theory,
    bot,
    conj,
    default_names,
    disj,
    exists_many,
    is_coherent,
    parse_formula,
    print_formula,
    substitute,
    top,
)


class SortError(ValueError):
    pass


class NotBoolean(SortError):
    pass


def place(phi: Formula, positions: Sequence[int], n: int) -> Formula:
    """Reindex ``phi`` so its free variable ``t`` becomes ``positions[t]`` in context ``n``."""
    return substitute(phi, tuple(positions), n)


def _span(start: int, length: int) -> tuple[int, ...]:
    return tuple(range(start, start + length))


def tuple_equal(n: int, a: int, b: int, ctx: int) -> Formula:
    """``x_{a..a+n} = x_{b..b+n}`` coordinatewise, in context ``ctx``."""
    return conj([Eq(ctx, a + t, b + t) for t in range(n)], ctx)


@dataclass(frozen=True)
class ImaginarySort:
    pieces: tuple[Formula, ...]
    relations: tuple[tuple[Formula, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        object.__setattr__(self, "relations", tuple(tuple(r) for r in self.relations))
        p = len(self.pieces)
        if len(self.relations) != p or any(len(r) != p for r in self.relations):
            raise SortError("relation matrix must be square with one row per piece")
        for i, a in enumerate(self.pieces):
            for j, b in enumerate(self.pieces):
                if self.relations[i][j].n != a.n + b.n:
                    raise SortError(f"relation ({i},{j}) must have context {a.n + b.n}")

    @property
    def arities(self) -> tuple[int, ...]:
        return tuple(a.n for a in self.pieces)

    def __len__(self):
        return len(self.pieces)

    @property
    def coherent(self) -> bool:
        return all(is_coherent(a) for a in self.pieces) and all(is_coherent(e) for r in self.relations for e in r)

    def to_json(self) -> dict:
        return {
            "pieces": [_fjson(a) for a in self.pieces],
            "relations": [[_fjson(e) for e in row] for row in self.relations],
        }

    @classmethod
    def from_json(cls, data, language: Language | None = None) -> "ImaginarySort":
        return cls(
            tuple(_fparse(d, language) for d in data["pieces"]),
            tuple(tuple(_fparse(d, language) for d in row) for row in data["relations"]),
        )


@dataclass(frozen=True)
class DefinableRelation:
    sort: ImaginarySort
    pieces: tuple[Formula, ...]

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        if len(self.pieces) != len(self.sort.pieces):
            raise SortError("one formula per piece of the sort is required")
        for b, a in zip(self.pieces, self.sort.pieces):
            if b.n != a.n:
                raise SortError("relation piece context differs from the sort piece")

    def subsort(self) -> ImaginarySort:
        """The relation as a sort in its own right, with the restricted equivalence."""
        A = self.sort
        rows = []
        for i, bi in enumerate(self.pieces):
            row = []
            for j, bj in enumerate(self.pieces):
                ni, nj = A.arities[i], A.arities[j]
                ctx = ni + nj
                row.append(conj([place(bi, _span(0, ni), ctx), place(bj, _span(ni, nj), ctx), A.relations[i][j]], ctx))
            rows.append(tuple(row))
        return ImaginarySort(self.pieces, tuple(rows))

    def to_json(self) -> dict:
        return {"sort": self.sort.to_json(), "pieces": [_fjson(b) for b in self.pieces]}

    @classmethod
    def from_json(cls, data, language: Language | None = None) -> "DefinableRelation":
        return cls(ImaginarySort.from_json(data["sort"], language), tuple(_fparse(d, language) for d in data["pieces"]))


@dataclass(frozen=True)
class DefinableFunction:
    source: ImaginarySort
    target: ImaginarySort
    graph: tuple[tuple[Formula, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "graph", tuple(tuple(r) for r in self.graph))
        if len(self.graph) != len(self.source) or any(len(r) != len(self.target) for r in self.graph):
            raise SortError("graph matrix must be (source pieces) x (target pieces)")
        for i, ni in enumerate(self.source.arities):
            for k, mk in enumerate(self.target.arities):
                if self.graph[i][k].n != ni + mk:
                    raise SortError(f"graph entry ({i},{k}) must have context {ni + mk}")

    def to_json(self) -> dict:
        return {
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "graph": [[_fjson(e) for e in row] for row in self.graph],
        }

    @classmethod
    def from_json(cls, data, language: Language | None = None) -> "DefinableFunction":
        return cls(
            ImaginarySort.from_json(data["source"], language),
            ImaginarySort.from_json(data["target"], language),
            tuple(tuple(_fparse(d, language) for d in row) for row in data["graph"]),
        )


def _fjson(phi: Formula) -> dict:
    return {"context": phi.n, "formula": print_formula(phi)}


def _fparse(d, language) -> Formula:
    return parse_formula(d["formula"], language, default_names(int(d["context"])))


# -- constructions -------------------------------------------------------------

def sort_from_formula(alpha: Formula) -> ImaginarySort:
    """A single formula viewed as a sort, quotiented by equality of tuples."""
    n = alpha.n
    eps = conj([place(alpha, _span(0, n), 2 * n), tuple_equal(n, 0, n, 2 * n)], 2 * n)
    return ImaginarySort((alpha,), ((eps,),))


def home_sort() -> ImaginarySort:
    return sort_from_formula(top(1))


def disjoint_sum(formulas: Sequence[Formula]) -> ImaginarySort:
    """Disjoint union of formulas, quotiented by equality inside each piece."""
    rows = []
    for i, a in enumerate(formulas):
        row = []
        for j, b in enumerate(formulas):
            ctx = a.n + b.n
            if i == j:
                row.append(conj([place(a, _span(0, a.n), ctx), tuple_equal(a.n, 0, a.n, ctx)], ctx))
            else:
                row.append(bot(ctx))
        rows.append(tuple(row))
    return ImaginarySort(tuple(formulas), tuple(rows))


def empty_sort() -> ImaginarySort:
    return sort_from_formula(bot(1))


def identity_function(A: ImaginarySort) -> DefinableFunction:
    return DefinableFunction(A, A, A.relations)


def compose_functions(g: DefinableFunction, f: DefinableFunction) -> DefinableFunction:
    """``g ∘ f``; entry ``(i, m)`` is ``or_k exists y. f_ik(x, y) and g_km(y, z)``."""
    if f.target != g.source:
        raise SortError("cannot compose: target of the first map is not the source of the second")
    A, B, C = f.source, f.target, g.target
    rows = []
    for i, ni in enumerate(A.arities):
        row = []
        for m, pm in enumerate(C.arities):
            ctx = ni + pm
            alts = []
            for k, mk in enumerate(B.arities):
                inner = ctx + mk
                ys = _span(ctx, mk)
                body = conj(
                    [place(f.graph[i][k], _span(0, ni) + ys, inner), place(g.graph[k][m], ys + _span(ni, pm), inner)],
                    inner,
                )
                alts.append(exists_many(body, mk))
            row.append(disj(alts, ctx))
        rows.append(tuple(row))
    return DefinableFunction(A, C, tuple(rows))


def product_sort(A: ImaginarySort, B: ImaginarySort) -> tuple[ImaginarySort, DefinableFunction, DefinableFunction]:
    """``A × B`` with its two projections; pieces are indexed ``(i, k)`` in lexicographic order."""
    idx = [(i, k) for i in range(len(A)) for k in range(len(B))]
    pieces = []
    for i, k in idx:
        ni, mk = A.arities[i], B.arities[k]
        ctx = ni + mk
        pieces.append(conj([place(A.pieces[i], _span(0, ni), ctx), place(B.pieces[k], _span(ni, mk), ctx)], ctx))
    rows = []
    for i, k in idx:
        ni, mk = A.arities[i], B.arities[k]
        row = []
        for j, l in idx:
            nj, ml = A.arities[j], B.arities[l]
            ctx = ni + mk + nj + ml
            row.append(
                conj(
                    [
                        place(A.relations[i][j], _span(0, ni) + _span(ni + mk, nj), ctx),
                        place(B.relations[k][l], _span(ni, mk) + _span(ni + mk + nj, ml), ctx),
                    ],
                    ctx,
                )
            )
        rows.append(tuple(row))
    P = ImaginarySort(tuple(pieces), tuple(rows))
    p1, p2 = [], []
    for (i, k), gamma in zip(idx, pieces):
        ni, mk = A.arities[i], B.arities[k]
        r1 = []
        for j, nj in enumerate(A.arities):
            ctx = ni + mk + nj
            r1.append(conj([place(gamma, _span(0, ni + mk), ctx), place(A.relations[i][j], _span(0, ni) + _span(ni + mk, nj), ctx)], ctx))
        r2 = []
        for l, ml in enumerate(B.arities):
            ctx = ni + mk + ml
            r2.append(conj([place(gamma, _span(0, ni + mk), ctx), place(B.relations[k][l], _span(ni, mk) + _span(ni + mk, ml), ctx)], ctx))
        p1.append(tuple(r1))
        p2.append(tuple(r2))
    return P, DefinableFunction(P, A, tuple(p1)), DefinableFunction(P, B, tuple(p2))


def terminal_sort() -> ImaginarySort:
    return ImaginarySort((top(0),), ((top(0),),))


def power_sort(A: ImaginarySort, n: int) -> ImaginarySort:
    """``A^n``; ``A^1`` is ``A`` itself and ``A^0`` the one-point sort."""
    if n < 0:
        raise ValueError("power must be non-negative")
    if n == 0:
        return terminal_sort()
    P = A
    for _ in range(n - 1):
        P = product_sort(P, A)[0]
    return P


def home_power(n: int) -> ImaginarySort:
    """``X^n`` presented as the single formula true in ``n`` variables."""
    return sort_from_formula(top(n))


def equalizer_sort(f: DefinableFunction, g: DefinableFunction) -> DefinableRelation:
    """The subsort of the common source on which ``f`` and ``g`` agree."""
    if f.source != g.source or f.target != g.target:
        raise SortError("equalizer needs parallel functions")
    A, B = f.source, f.target
    pieces = []
    for i, ni in enumerate(A.arities):
        alts = []
        for k, mk in enumerate(B.arities):
            ctx = ni + mk
            alts.append(exists_many(conj([f.graph[i][k], g.graph[i][k]], ctx), mk))
        pieces.append(disj(alts, ni))
    return DefinableRelation(A, tuple(pieces))


def full_relation(A: ImaginarySort) -> DefinableRelation:
    return DefinableRelation(A, A.pieces)


def empty_relation(A: ImaginarySort) -> DefinableRelation:
    return DefinableRelation(A, tuple(bot(n) for n in A.arities))


def subobject_op(kind: str, *operands, boolean: bool = False, along: DefinableFunction | None = None, count: int = 1):
    """Lattice operations on formulas (same context) or on definable relations of one sort.

    ``kind`` is ``meet``, ``join``, ``complement`` or ``exists_image``.  For
    formulas, ``exists_image`` quantifies away the last ``count`` variables;
    for relations it takes the image along the function ``along``.
    Complement is only available with ``boolean=True``.
    """
    if not operands:
        raise ValueError("no operands")
    if kind == "complement" and not boolean:
        raise NotBoolean("complement needs the Boolean calculus (boolean=True)")
    if all(isinstance(o, Formula) for o in operands):
        n = operands[0].n
        if any(o.n != n for o in operands):
            raise SortError("operands have different contexts")
        if kind == "meet":
            return conj(operands, n)
        if kind == "join":
            return disj(operands, n)
        if kind == "complement":
            (phi,) = operands
            return Not(n, phi)
        if kind == "exists_image":
            (phi,) = operands
            if count > n:
                raise SortError("cannot quantify more variables than the context has")
            return exists_many(phi, count) if count else phi
        raise ValueError(f"unknown subobject operation {kind!r}")
    if not all(isinstance(o, DefinableRelation) for o in operands):
        raise TypeError("operands must all be formulas or all be definable relations")
    A = operands[0].sort
    if any(o.sort != A for o in operands):
        raise SortError("relations live on different sorts")
    if kind == "meet":
        return DefinableRelation(A, tuple(conj(ps, n) for n, ps in zip(A.arities, zip(*(o.pieces for o in operands)))))
    if kind == "join":
        return DefinableRelation(A, tuple(disj(ps, n) for n, ps in zip(A.arities, zip(*(o.pieces for o in operands)))))
    if kind == "complement":
        (r,) = operands
        return DefinableRelation(A, tuple(conj([a, Not(a.n, b)], a.n) for a, b in zip(A.pieces, r.pieces)))
    if kind == "exists_image":
        (r,) = operands
        if along is None or along.source != A:
            raise SortError("image needs a function out of the relation's sort")
        B = along.target
        pieces = []
        for k, mk in enumerate(B.arities):
            alts = []
            for i, ni in enumerate(A.arities):
                ctx = mk + ni
                body = conj([place(r.pieces[i], _span(mk, ni), ctx), place(along.graph[i][k], _span(mk, ni) + _span(0, mk), ctx)], ctx)
                alts.append(exists_many(body, ni))
            pieces.append(disj(alts, mk))
        return DefinableRelation(B, tuple(pieces))
    raise ValueError(f"unknown subobject operation {kind!r}")


def relation_as_formula(r: DefinableRelation) -> Formula:
    """For a single-piece sort, the relation's formula."""
    if len(r.pieces) != 1:
        raise SortError("only single-piece relations are plain formulas")
    return r.pieces[0]


# -- semantic validation ----------------------------------------------------------

def vector(phi: Formula, M: FiniteModel) -> np.ndarray:
    return np.asarray(evaluate(phi, M)).reshape(M.size**phi.n)


def matrix(phi: Formula, M: FiniteModel, rows: int) -> np.ndarray:
    return np.asarray(evaluate(phi, M)).reshape(M.size**rows, M.size ** (phi.n - rows))


def _bool_mm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (a.astype(np.int64) @ b.astype(np.int64)) > 0


def unflatten(idx: int, n: int, k: int) -> tuple[int, ...]:
    if n == 0:
        return ()
    return tuple(int(v) for v in np.unravel_index(idx, (k,) * n))


@dataclass(frozen=True)
class Violation:
    clause: str
    indices: tuple[int, ...]
    model: FiniteModel
    tuple: tuple[int, ...]

    def describe(self) -> str:
        return f"{self.clause} at pieces {self.indices} in {self.model} on {self.tuple}"


@dataclass(frozen=True)
class Report:
    violations: tuple[Violation, ...]
    models_checked: int

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def first(self) -> Violation | None:
        return self.violations[0] if self.violations else None

    def __bool__(self):
        return self.ok


def _first(bad: np.ndarray, clause: str, indices, M: FiniteModel, split: Sequence[int]) -> Violation | None:
    if not bad.any():
        return None
    flat = np.argwhere(bad)[0]
    coords: list[int] = []
    for pos, n in zip(flat, split):
        coords.extend(unflatten(int(pos), n, M.size))
    return Violation(clause, tuple(indices), M, tuple(coords))


def sort_violation(A: ImaginarySort, M: FiniteModel) -> Violation | None:
    """First violated equivalence-relation clause of ``A`` in ``M``, if any."""
    ar = A.arities
    alpha = [vector(a, M) for a in A.pieces]
    E = [[matrix(A.relations[i][j], M, ar[i]) for j in range(len(A))] for i in range(len(A))]
    for i in range(len(A)):
        for j in range(len(A)):
            v = _first(E[i][j] & ~(alpha[i][:, None] & alpha[j][None, :]), "typing", (i, j), M, (ar[i], ar[j]))
            if v:
                return v
    for i in range(len(A)):
        v = _first(alpha[i] & ~np.diagonal(E[i][i]), "reflexivity", (i,), M, (ar[i],))
        if v:
            return v
    for i in range(len(A)):
        for j in range(len(A)):
            v = _first(E[i][j] & ~E[j][i].T, "symmetry", (i, j), M, (ar[i], ar[j]))
            if v:
                return v
    for i in range(len(A)):
        for j in range(len(A)):
            for k in range(len(A)):
                comp = _bool_mm(E[i][j], E[j][k])
                bad = comp & ~E[i][k]
                if bad.any():
                    x, z = np.argwhere(bad)[0]
                    y = int(np.argwhere(E[i][j][x] & E[j][k][:, z])[0][0])
                    coords = unflatten(int(x), ar[i], M.size) + unflatten(y, ar[j], M.size) + unflatten(int(z), ar[k], M.size)
                    return Violation("transitivity", (i, j, k), M, coords)
    return None


def function_violation(f: DefinableFunction, M: FiniteModel) -> Violation | None:
    """First violated function clause of ``f`` in ``M``, if any."""
    A, B = f.source, f.target
    na, nb = A.arities, B.arities
    alpha = [vector(a, M) for a in A.pieces]
    beta = [vector(b, M) for b in B.pieces]
    E = [[matrix(A.relations[i][j], M, na[i]) for j in range(len(A))] for i in range(len(A))]
    H = [[matrix(B.relations[k][l], M, nb[k]) for l in range(len(B))] for k in range(len(B))]
    G = [[matrix(f.graph[i][k], M, na[i]) for k in range(len(B))] for i in range(len(A))]
    for i in range(len(A)):
        for k in range(len(B)):
            v = _first(G[i][k] & ~(alpha[i][:, None] & beta[k][None, :]), "typing", (i, k), M, (na[i], nb[k]))
            if v:
                return v
    for i in range(len(A)):
        for j in range(len(A)):
            for k in range(len(B)):
                v = _first(_bool_mm(E[i][j].T, G[i][k]) & ~G[j][k], "source invariance", (i, j, k), M, (na[j], nb[k]))
                if v:
                    return v
    for i in range(len(A)):
        for k in range(len(B)):
            for l in range(len(B)):
                v = _first(_bool_mm(G[i][k], H[k][l]) & ~G[i][l], "target invariance", (i, k, l), M, (na[i], nb[l]))
                if v:
                    return v
    for i in range(len(A)):
        for k in range(len(B)):
            for l in range(len(B)):
                v = _first(_bool_mm(G[i][k].T, G[i][l]) & ~H[k][l], "single-valuedness", (i, k, l), M, (nb[k], nb[l]))
                if v:
                    return v
    for i in range(len(A)):
        hit = np.zeros_like(alpha[i])
        for k in range(len(B)):
            hit |= G[i][k].any(axis=1)
        v = _first(alpha[i] & ~hit, "totality", (i,), M, (na[i],))
        if v:
            return v
    return None


def relation_violation(r: DefinableRelation, M: FiniteModel) -> Violation | None:
    A = r.sort
    ar = A.arities
    for i in range(len(A)):
        v = _first(vector(r.pieces[i], M) & ~vector(A.pieces[i], M), "containment", (i,), M, (ar[i],))
        if v:
            return v
    for i in range(len(A)):
        b = vector(r.pieces[i], M)
        for j in range(len(A)):
            moved = _bool_mm(b[None, :], matrix(A.relations[i][j], M, ar[i]))[0]
            v = _first(moved & ~vector(r.pieces[j], M), "invariance", (i, j), M, (ar[j],))
            if v:
                return v
    return None


def _run(check, obj, language: Language | None, theory: Theory | None, cap: int | None, models: Iterable[FiniteModel] | None):
    if models is None:
        if language is None or theory is None or cap is None:
            raise ValueError("pass either models or (language, theory, cap)")
        models = enumerate_models(language, theory, cap)
    found = []
    count = 0
    for M in models:
        count += 1
        v = check(obj, M)
        if v is not None:
            found.append(v)
            break
    return Report(tuple(found), count)


def validate_sort(A: ImaginarySort, language=None, theory=None, cap=None, *, models=None) -> Report:
    return _run(sort_violation, A, language, theory, cap, models)


def validate_function(f: DefinableFunction, language=None, theory=None, cap=None, *, models=None) -> Report:
    return _run(function_violation, f, language, theory, cap, models)


def validate_relation(r: DefinableRelation, language=None, theory=None, cap=None, *, models=None) -> Report:
    return _run(relation_violation, r, language, theory, cap, models)

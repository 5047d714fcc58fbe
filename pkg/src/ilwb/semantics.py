"""Finite models, formula evaluation, satisfaction and model enumeration.

Models live on an initial segment ``{0, ..., k-1}`` of the naturals.  A
formula in context ``n`` evaluates to a subset of ``M^n``, returned either as a
dense boolean array of shape ``(k,)*n`` or as a :class:`TupleSet`.

Internally a subformula is evaluated only over the variables it actually
mentions (its *support*) and blocks ``exists ys. and(...)`` are contracted with
``numpy.einsum``, so formulas with many quantified variables stay cheap as long
as each literal is small.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .syntax import (
    And,
    Atom,
    CoherentAxiom,
    Eq,
    Exists,
    Forall,
    Formula,
    Language,
    Not,
    Or,
    Theory,
    relations_used,
)


class LanguageMismatch(ValueError):
    pass


class NotAModel(ValueError):
    pass


@dataclass(frozen=True)
class FiniteModel:
    size: int
    tables: tuple[tuple[str, int, frozenset], ...]
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        for name, ar, tuples in self.tables:
            for t in tuples:
                if len(t) != ar or any(not 0 <= a < self.size for a in t):
                    raise ValueError(f"bad tuple {t} for {name}/{ar} in model of size {self.size}")

    @classmethod
    def make(cls, size: int, relations: Mapping[str, Iterable[Sequence[int]]], language: Language | None = None):
        """Build a model; ``language`` fixes relation order and fills in empty tables."""
        rel = {k: frozenset(tuple(t) for t in v) for k, v in relations.items()}
        if language is None:
            tables = []
            for name, tuples in rel.items():
                ar = len(next(iter(tuples))) if tuples else None
                if ar is None:
                    raise ValueError(f"cannot infer arity of empty relation {name}; pass a language")
                tables.append((name, ar, tuples))
            return cls(size, tuple(tables))
        unknown = set(rel) - set(language.names)
        if unknown:
            raise LanguageMismatch(f"relations not in language: {sorted(unknown)}")
        return cls(size, tuple((r.name, r.arity, rel.get(r.name, frozenset())) for r in language.relations))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(t[0] for t in self.tables)

    def relation(self, name: str) -> frozenset:
        for n, _, tuples in self.tables:
            if n == name:
                return tuples
        raise LanguageMismatch(f"model has no relation {name}")

    def arity(self, name: str) -> int:
        for n, ar, _ in self.tables:
            if n == name:
                return ar
        raise LanguageMismatch(f"model has no relation {name}")

    def relations(self) -> dict[str, frozenset]:
        return {n: t for n, _, t in self.tables}

    def array(self, name: str) -> np.ndarray:
        key = ("table", name)
        arr = self._cache.get(key)
        if arr is None:
            ar = self.arity(name)
            arr = np.zeros((self.size,) * ar, dtype=bool)
            for t in self.relation(name):
                arr[t] = True
            arr.flags.writeable = False
            self._cache[key] = arr
        return arr

    def fits(self, language: Language) -> bool:
        return self.names == language.names and all(
            self.arity(r.name) == r.arity for r in language.relations
        )

    def restrict(self, names: Sequence[str]) -> "FiniteModel":
        return FiniteModel(self.size, tuple(t for t in self.tables if t[0] in set(names)))

    def bitmap(self) -> tuple[int, ...]:
        """Concatenated relation bitmaps, tuples in lexicographic order."""
        bits = []
        for name, ar, tuples in self.tables:
            bits.extend(int(t in tuples) for t in itertools.product(range(self.size), repeat=ar))
        return tuple(bits)

    def permute(self, perm: Sequence[int]) -> "FiniteModel":
        """The model ``g.M`` whose relations are the images under ``perm``."""
        perm = tuple(perm)
        return FiniteModel(
            self.size,
            tuple((n, ar, frozenset(tuple(perm[a] for a in t) for t in ts)) for n, ar, ts in self.tables),
        )

    def to_json(self) -> dict:
        return {
            "size": self.size,
            "relations": {n: [list(t) for t in sorted(ts)] for n, _, ts in self.tables},
        }

    @classmethod
    def from_json(cls, data: Mapping, language: Language) -> "FiniteModel":
        return cls.make(int(data["size"]), {k: [tuple(t) for t in v] for k, v in data["relations"].items()}, language)

    def __str__(self):
        rels = ", ".join(f"{n}={sorted(ts)}" for n, _, ts in self.tables)
        return f"<model size={self.size} {rels}>"


@dataclass(frozen=True)
class TupleSet:
    arity: int
    tuples: frozenset

    def __contains__(self, t) -> bool:
        return tuple(t) in self.tuples

    def __len__(self):
        return len(self.tuples)

    def __iter__(self):
        return iter(sorted(self.tuples))

    def sorted(self) -> list[tuple[int, ...]]:
        return sorted(self.tuples)


# -- evaluation -------------------------------------------------------------

_CACHE_LIMIT = 200_000


def _expand(arr: np.ndarray, support: tuple[int, ...], target: tuple[int, ...]) -> np.ndarray:
    """Reshape ``arr`` (axes = ``support``) so it broadcasts against ``target``."""
    if support == target:
        return arr
    shape = [1] * len(target)
    pos = {v: i for i, v in enumerate(target)}
    for v, s in zip(support, arr.shape):
        shape[pos[v]] = s
    return arr.reshape(shape)


def _ev(phi: Formula, M: FiniteModel, memo: dict):
    hit = memo.get(phi)
    if hit is not None:
        return hit
    k = M.size
    if isinstance(phi, Atom):
        table = M.array(phi.rel)
        support = tuple(sorted(set(phi.args)))
        if not phi.args:
            arr = table
        else:
            d = len(support)
            grid = {
                v: np.arange(k).reshape([k if q == p else 1 for q in range(d)]) for p, v in enumerate(support)
            }
            arr = np.broadcast_to(table[tuple(grid[a] for a in phi.args)], (k,) * d)
        out = (support, arr)
    elif isinstance(phi, Eq):
        if phi.i == phi.j:
            out = ((phi.i,), np.ones(k, dtype=bool))
        else:
            out = (tuple(sorted((phi.i, phi.j))), np.eye(k, dtype=bool))
    elif isinstance(phi, (And, Or)):
        parts = [_ev(s, M, memo) for s in phi.subs]
        support = tuple(sorted(set().union(*(p[0] for p in parts))))
        if isinstance(phi, And):
            arr = np.ones((k,) * len(support), dtype=bool)
            for s, a in parts:
                arr = arr & _expand(a, s, support)
        else:
            arr = np.zeros((k,) * len(support), dtype=bool)
            for s, a in parts:
                arr = arr | _expand(a, s, support)
        out = (support, arr)
    elif isinstance(phi, Not):
        s, a = _ev(phi.sub, M, memo)
        out = (s, ~a)
    elif isinstance(phi, Exists):
        depth, body = 0, phi
        while isinstance(body, Exists):
            body, depth = body.body, depth + 1
        conjuncts = body.subs if isinstance(body, And) else (body,)
        parts = [_ev(c, M, memo) for c in conjuncts]
        out = _project(parts, range(phi.n, phi.n + depth), k)
    elif isinstance(phi, Forall):
        s, a = _ev(phi.body, M, memo)
        y = phi.n
        if y in s:
            out = (tuple(v for v in s if v != y), a.all(axis=s.index(y)))
        elif k == 0:
            out = (s, np.ones_like(a))
        else:
            out = (s, a)
    else:
        raise TypeError(f"not a formula: {phi!r}")
    if len(memo) > _CACHE_LIMIT:
        memo.clear()
    memo[phi] = out
    return out


def _project(parts, bound, k):
    """Evaluate ``exists bound. and(parts)``."""
    bound = set(bound)
    union = tuple(sorted(set().union(*(p[0] for p in parts))))
    free = tuple(v for v in union if v not in bound)
    idle = any(b not in union for b in bound)
    if idle and k == 0:
        return free, np.zeros((0,) * len(free), dtype=bool)
    arrays = []
    for s, a in parts:
        if not s:
            if not bool(a):
                return free, np.zeros((k,) * len(free), dtype=bool)
            continue
        arrays.append((s, a))
    if not arrays:
        return free, np.ones((k,) * len(free), dtype=bool)
    if len(arrays) == 1:
        s, a = arrays[0]
        axes = tuple(i for i, v in enumerate(s) if v in bound)
        return free, (a.any(axis=axes) if axes else a)
    if len(union) > 52:
        arr = np.ones((k,) * len(union), dtype=bool)
        for s, a in arrays:
            arr = arr & _expand(a, s, union)
        axes = tuple(i for i, v in enumerate(union) if v in bound)
        return free, arr.any(axis=axes)
    local = {v: i for i, v in enumerate(union)}
    ops = []
    for s, a in arrays:
        ops += [a.astype(np.float64), [local[v] for v in s]]
    res = np.einsum(*ops, [local[v] for v in free], optimize="greedy")
    return free, np.asarray(res > 0)


def _check_language(phi: Formula, M: FiniteModel):
    for name, ar in relations_used(phi).items():
        try:
            if M.arity(name) != ar:
                raise LanguageMismatch(f"arity mismatch for {name}")
        except LanguageMismatch:
            raise LanguageMismatch(f"formula uses {name}/{ar} which the model does not interpret") from None


def evaluate(phi: Formula, M: FiniteModel, *, check: bool = True) -> np.ndarray:
    """Dense boolean array of shape ``(|M|,)*n`` for ``phi`` in context ``n``."""
    if check:
        _check_language(phi, M)
    memo = M._cache.setdefault("eval", {})
    support, arr = _ev(phi, M, memo)
    full = tuple(range(phi.n))
    return np.broadcast_to(_expand(arr, support, full), (M.size,) * phi.n)


def eval_formula(phi: Formula, M: FiniteModel) -> TupleSet:
    arr = evaluate(phi, M)
    return TupleSet(phi.n, frozenset(tuple(int(x) for x in t) for t in np.argwhere(arr)))


def holds(phi: Formula, M: FiniteModel, tup: Sequence[int] = ()) -> bool:
    tup = tuple(tup)
    if len(tup) != phi.n:
        raise ValueError(f"expected a {phi.n}-tuple")
    return bool(evaluate(phi, M)[tup])


# -- satisfaction -----------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    ok: bool
    counterexample: tuple[int, ...] | None = None
    label: str = ""

    def __bool__(self):
        return self.ok


def satisfies_axiom(M: FiniteModel, axiom: CoherentAxiom | Formula, label: str = "") -> Verdict:
    """Check ``lhs ⊆ rhs`` (or a closed sentence); report the least violating tuple."""
    if isinstance(axiom, CoherentAxiom):
        bad = evaluate(axiom.lhs, M) & ~evaluate(axiom.rhs, M)
        if not bad.any():
            return Verdict(True, None, label)
        first = np.argwhere(bad)[0] if bad.ndim else ()
        return Verdict(False, tuple(int(x) for x in first), label)
    if axiom.n != 0:
        raise ValueError("only closed formulas can be checked as sentences")
    ok = bool(evaluate(axiom, M))
    return Verdict(ok, None if ok else (), label)


@dataclass(frozen=True)
class TheoryReport:
    verdicts: tuple[Verdict, ...]

    @property
    def ok(self) -> bool:
        return all(v.ok for v in self.verdicts)

    def failures(self) -> list[Verdict]:
        return [v for v in self.verdicts if not v.ok]

    def __bool__(self):
        return self.ok


def satisfies_theory(M: FiniteModel, theory: Theory) -> TheoryReport:
    out = []
    for i, ax in enumerate(theory.axioms):
        out.append(satisfies_axiom(M, ax, f"axiom {i}"))
    for i, s in enumerate(theory.sentences):
        out.append(satisfies_axiom(M, s, f"sentence {i}"))
    return TheoryReport(tuple(out))


# -- enumeration ------------------------------------------------------------

def _literals_conj(phi: Formula):
    """Return the literal list of a conjunction of atoms/equalities, else None."""
    items = phi.subs if isinstance(phi, And) else (phi,)
    if all(isinstance(x, (Atom, Eq)) for x in items):
        return list(items)
    return None


def _dnf_of_literals(phi: Formula):
    items = phi.subs if isinstance(phi, Or) else (phi,)
    out = []
    for it in items:
        lits = _literals_conj(it)
        if lits is None:
            return None
        out.append(lits)
    return out


def _cnf_of_literals(phi: Formula):
    items = phi.subs if isinstance(phi, And) else (phi,)
    out = []
    for it in items:
        sub = it.subs if isinstance(it, Or) else (it,)
        if not all(isinstance(x, (Atom, Eq)) for x in sub):
            return None
        out.append(list(sub))
    return out


def _identity_atom(phi: Formula, rel: str) -> bool:
    return isinstance(phi, Atom) and phi.rel == rel and phi.args == tuple(range(phi.n))


class _Search:
    """Enumerate all models of a theory on ``{0..k-1}`` by clause propagation."""

    def __init__(self, k: int, language: Language, theory: Theory):
        self.k = k
        self.language = language
        self.rels = language.relations
        self.pos = {r.name: i for i, r in enumerate(self.rels)}
        self.tuples = [list(itertools.product(range(k), repeat=r.arity)) for r in self.rels]
        self.offsets = [0]
        for ts in self.tuples:
            self.offsets.append(self.offsets[-1] + len(ts))
        self.nbits = self.offsets[-1]
        self.index = [{t: self.offsets[i] + j for j, t in enumerate(ts)} for i, ts in enumerate(self.tuples)]
        self.clauses: list[tuple[tuple[int, bool], ...]] = []
        self.unsat = False
        self.ready: list[list] = [[] for _ in range(len(self.rels) + 1)]
        self.bounds: list[list] = [[] for _ in range(len(self.rels))]
        for ax in theory.axioms:
            if not self._ground(ax):
                self._schedule(ax)
        for s in theory.sentences:
            self._schedule(s)
        self.occurs: list[list[int]] = [[] for _ in range(self.nbits)]
        for ci, cl in enumerate(self.clauses):
            for b, _ in cl:
                self.occurs[b].append(ci)

    # clause grounding for quantifier-free axioms
    def _ground(self, ax: CoherentAxiom) -> bool:
        dnf = _dnf_of_literals(ax.lhs)
        cnf = _cnf_of_literals(ax.rhs)
        if dnf is None or cnf is None:
            return False
        for xs in itertools.product(range(self.k), repeat=ax.n):
            for conj_ in dnf:
                for disj_ in cnf:
                    cl = self._clause(conj_, disj_, xs)
                    if cl is None:
                        continue
                    if not cl:
                        self.unsat = True
                    self.clauses.append(cl)
        return True

    def _clause(self, neg, pos, xs):
        lits: dict[int, bool] = {}
        for lit, sign in [(x, False) for x in neg] + [(x, True) for x in pos]:
            if isinstance(lit, Eq):
                val = xs[lit.i] == xs[lit.j]
                if val == sign:
                    return None
                continue
            b = self.index[self.pos[lit.rel]][tuple(xs[a] for a in lit.args)]
            if lits.get(b, sign) != sign:
                return None
            lits[b] = sign
        return tuple(lits.items())

    def _schedule(self, ax):
        if isinstance(ax, CoherentAxiom):
            used = set(relations_used(ax.lhs)) | set(relations_used(ax.rhs))
        else:
            used = set(relations_used(ax))
        last = max((self.pos[u] for u in used), default=-1)
        self.ready[last + 1].append(ax)
        if isinstance(ax, CoherentAxiom):
            self._bound_rule(ax, used)

    def _bound_rule(self, ax: CoherentAxiom, used: set[str]):
        for name in used:
            r = self.pos[name]
            if any(self.pos[u] > r for u in used):
                continue
            lhs_items = ax.lhs.subs if isinstance(ax.lhs, And) else (ax.lhs,)
            rhs_items = ax.rhs.subs if isinstance(ax.rhs, Or) else (ax.rhs,)
            hits = [x for x in lhs_items if _identity_atom(x, name)]
            others = [x for x in lhs_items if not _identity_atom(x, name)]
            if len(hits) == 1 and name not in _used_in(others + [ax.rhs]):
                self.bounds[r].append(("upper", And(ax.n, tuple(others)), ax.rhs))
                continue
            hits = [x for x in rhs_items if _identity_atom(x, name)]
            others = [x for x in rhs_items if not _identity_atom(x, name)]
            if len(hits) == 1 and name not in _used_in(others + [ax.lhs]):
                self.bounds[r].append(("lower", ax.lhs, Or(ax.n, tuple(others))))

    def _partial_model(self, upto: int) -> FiniteModel:
        tables = []
        for i, r in enumerate(self.rels):
            if i < upto:
                ts = frozenset(t for t in self.tuples[i] if self.assign[self.index[i][t]])
            else:
                ts = frozenset()
            tables.append((r.name, r.arity, ts))
        return FiniteModel(self.k, tuple(tables))

    def _set(self, bit: int, val: bool) -> bool:
        queue = [(bit, val)]
        while queue:
            b, v = queue.pop()
            cur = self.assign[b]
            if cur is not None:
                if cur != v:
                    return False
                continue
            self.assign[b] = v
            self.trail.append(b)
            for ci in self.occurs[b]:
                free = None
                nfree = 0
                sat = False
                for lb, ls in self.clauses[ci]:
                    a = self.assign[lb]
                    if a is None:
                        nfree += 1
                        free = (lb, ls)
                    elif a == ls:
                        sat = True
                        break
                if sat:
                    continue
                if nfree == 0:
                    return False
                if nfree == 1:
                    queue.append(free)
        return True

    def _undo(self, mark: int):
        while len(self.trail) > mark:
            self.assign[self.trail.pop()] = None

    def run(self) -> Iterator[FiniteModel]:
        if self.unsat:
            return
        self.assign: list[bool | None] = [None] * self.nbits
        self.trail: list[int] = []
        for cl in self.clauses:
            if len(cl) == 1:
                if not self._set(cl[0][0], cl[0][1]):
                    return
        if not all(satisfies_axiom(self._partial_model(0), ax) for ax in self.ready[0]):
            return
        yield from self._relation(0)

    def _relation(self, r: int):
        if r == len(self.rels):
            yield self._partial_model(r)
            return
        mark = len(self.trail)
        if self._apply_bounds(r):
            yield from self._bits(r, self.offsets[r])
        self._undo(mark)

    def _apply_bounds(self, r: int) -> bool:
        if not self.bounds[r]:
            return True
        M = self._partial_model(r)
        ar = self.rels[r].arity
        for kind, a, b in self.bounds[r]:
            A = evaluate(a, M, check=False)
            B = evaluate(b, M, check=False)
            if kind == "upper":
                forced = A & ~B
                value = False
            else:
                forced = A & ~B
                value = True
            for t in np.argwhere(forced) if ar else ([()] if bool(forced) else []):
                if not self._set(self.index[r][tuple(int(x) for x in t)], value):
                    return False
        return True

    def _bits(self, r: int, pos: int):
        end = self.offsets[r + 1]
        while pos < end and self.assign[pos] is not None:
            pos += 1
        if pos == end:
            if self.ready[r + 1]:
                M = self._partial_model(r + 1)
                if not all(satisfies_axiom(M, ax) for ax in self.ready[r + 1]):
                    return
            yield from self._relation(r + 1)
            return
        for val in (False, True):
            mark = len(self.trail)
            if self._set(pos, val):
                yield from self._bits(r, pos + 1)
            self._undo(mark)


def _used_in(formulas) -> set[str]:
    out: set[str] = set()
    for f in formulas:
        out |= set(relations_used(f))
    return out


@lru_cache(maxsize=128)
def _models_of_size(language: Language, theory: Theory, k: int) -> tuple[FiniteModel, ...]:
    found = list(_Search(k, language, theory).run())
    found.sort(key=FiniteModel.bitmap)
    return tuple(found)


def enumerate_models(language: Language, theory: Theory, cap: int) -> list[FiniteModel]:
    """All models of ``theory`` of size at most ``cap``.

    Ordered by size, then lexicographically by concatenated relation bitmaps.
    """
    if cap < 0:
        raise ValueError("cap must be non-negative")
    if theory.language.names != language.names:
        raise LanguageMismatch("theory is over a different language")
    out: list[FiniteModel] = []
    for k in range(cap + 1):
        out.extend(_models_of_size(language, theory, k))
    return out


def brute_force_models(language: Language, theory: Theory, cap: int) -> list[FiniteModel]:
    """Reference enumeration over every relation table; exponential, tests only."""
    out = []
    for k in range(cap + 1):
        spaces = [list(itertools.product(range(k), repeat=r.arity)) for r in language.relations]
        total = sum(len(s) for s in spaces)
        for bits in itertools.product((0, 1), repeat=total):
            tables, p = [], 0
            for r, sp in zip(language.relations, spaces):
                chunk = bits[p : p + len(sp)]
                p += len(sp)
                tables.append((r.name, r.arity, frozenset(t for t, b in zip(sp, chunk) if b)))
            M = FiniteModel(k, tuple(tables))
            if satisfies_theory(M, theory):
                out.append(M)
    return out


def semantically_equivalent(phi: Formula, psi: Formula, language: Language, theory: Theory, cap: int) -> bool:
    """Agreement on every model of ``theory`` of size at most ``cap``.

    This is only evidence of equivalence: it says nothing about larger models.
    """
    if phi.n != psi.n:
        raise ValueError("formulas have different contexts")
    return all(
        np.array_equal(evaluate(phi, M), evaluate(psi, M)) for M in enumerate_models(language, theory, cap)
    )


# -- isomorphisms -------------------------------------------------------------

@dataclass(frozen=True)
class Isomorphism:
    source: FiniteModel
    target: FiniteModel
    perm: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "perm", tuple(self.perm))
        if self.source.size != self.target.size or sorted(self.perm) != list(range(self.source.size)):
            raise NotAModel("isomorphism must be a permutation of the common universe")
        if self.source.permute(self.perm) != self.target:
            raise NotAModel("permutation does not carry the source tables onto the target tables")

    def __call__(self, a):
        if isinstance(a, tuple):
            return tuple(self.perm[x] for x in a)
        return self.perm[a]

    def compose(self, other: "Isomorphism") -> "Isomorphism":
        """``self ∘ other``: first ``other``, then ``self``."""
        if other.target != self.source:
            raise NotAModel("isomorphisms are not composable")
        return Isomorphism(other.source, self.target, tuple(self.perm[i] for i in other.perm))

    def inverse(self) -> "Isomorphism":
        inv = [0] * len(self.perm)
        for i, p in enumerate(self.perm):
            inv[p] = i
        return Isomorphism(self.target, self.source, tuple(inv))

    @classmethod
    def identity(cls, M: FiniteModel) -> "Isomorphism":
        return cls(M, M, tuple(range(M.size)))

"""Formulas-in-context with positional variables.

A formula carries its context size ``n``; free variables are the indices
``0..n-1``.  Binders (``Exists``/``Forall``) extend the context by one, the
bound variable being index ``n``.  Two formulas that differ only by a renaming
of variables are therefore represented by equal objects.

``true`` and ``false`` are the empty conjunction and the empty disjunction.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence


class FormulaError(ValueError):
    pass


class Formula:
    """Base class; concrete nodes are frozen dataclasses below."""

    n: int

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other) or self._hash != other._hash:
            return False
        return self._key() == other._key()

    def __hash__(self):
        return self._hash

    def _key(self) -> tuple:
        raise NotImplementedError

    def _init_hash(self):
        object.__setattr__(self, "_hash", hash((type(self).__name__,) + self._key()))

    def children(self) -> tuple["Formula", ...]:
        return ()

    # Convenience combinators; all keep the context size.
    def __and__(self, other: "Formula") -> "Formula":
        return conj([self, other])

    def __or__(self, other: "Formula") -> "Formula":
        return disj([self, other])

    def __invert__(self) -> "Formula":
        return Not(self.n, self)


@dataclass(frozen=True, eq=False)
class Atom(Formula):
    n: int
    rel: str
    args: tuple[int, ...]
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        for a in self.args:
            if not 0 <= a < self.n:
                raise FormulaError(f"variable index {a} out of range for context {self.n}")
        self._init_hash()

    def _key(self):
        return (self.n, self.rel, self.args)


@dataclass(frozen=True, eq=False)
class Eq(Formula):
    n: int
    i: int
    j: int
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (0 <= self.i < self.n and 0 <= self.j < self.n):
            raise FormulaError(f"equality x{self.i}=x{self.j} out of range for context {self.n}")
        self._init_hash()

    def _key(self):
        return (self.n, self.i, self.j)


@dataclass(frozen=True, eq=False)
class And(Formula):
    n: int
    subs: tuple[Formula, ...] = ()
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "subs", tuple(self.subs))
        for s in self.subs:
            if s.n != self.n:
                raise FormulaError(f"conjunct has context {s.n}, expected {self.n}")
        self._init_hash()

    def _key(self):
        return (self.n, self.subs)

    def children(self):
        return self.subs


@dataclass(frozen=True, eq=False)
class Or(Formula):
    n: int
    subs: tuple[Formula, ...] = ()
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "subs", tuple(self.subs))
        for s in self.subs:
            if s.n != self.n:
                raise FormulaError(f"disjunct has context {s.n}, expected {self.n}")
        self._init_hash()

    def _key(self):
        return (self.n, self.subs)

    def children(self):
        return self.subs


@dataclass(frozen=True, eq=False)
class Not(Formula):
    n: int
    sub: Formula
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.sub.n != self.n:
            raise FormulaError(f"negated formula has context {self.sub.n}, expected {self.n}")
        self._init_hash()

    def _key(self):
        return (self.n, self.sub)

    def children(self):
        return (self.sub,)


@dataclass(frozen=True, eq=False)
class Exists(Formula):
    n: int
    body: Formula
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.body.n != self.n + 1:
            raise FormulaError(f"quantifier body has context {self.body.n}, expected {self.n + 1}")
        self._init_hash()

    def _key(self):
        return (self.n, self.body)

    def children(self):
        return (self.body,)


@dataclass(frozen=True, eq=False)
class Forall(Formula):
    n: int
    body: Formula
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.body.n != self.n + 1:
            raise FormulaError(f"quantifier body has context {self.body.n}, expected {self.n + 1}")
        self._init_hash()

    def _key(self):
        return (self.n, self.body)

    def children(self):
        return (self.body,)


def top(n: int) -> And:
    return And(n, ())


def bot(n: int) -> Or:
    return Or(n, ())


def is_top(phi: Formula) -> bool:
    return isinstance(phi, And) and not phi.subs


def is_bot(phi: Formula) -> bool:
    return isinstance(phi, Or) and not phi.subs


def conj(parts: Iterable[Formula], n: int | None = None) -> Formula:
    """Conjunction that flattens nested ``And`` and drops ``true``."""
    out: list[Formula] = []
    for p in parts:
        if n is None:
            n = p.n
        if isinstance(p, And):
            out.extend(p.subs)
        else:
            out.append(p)
    if n is None:
        raise FormulaError("empty conjunction needs an explicit context size")
    if len(out) == 1:
        return out[0]
    return And(n, tuple(out))


def disj(parts: Iterable[Formula], n: int | None = None) -> Formula:
    """Disjunction that flattens nested ``Or`` and drops ``false``."""
    out: list[Formula] = []
    for p in parts:
        if n is None:
            n = p.n
        if isinstance(p, Or):
            out.extend(p.subs)
        else:
            out.append(p)
    if n is None:
        raise FormulaError("empty disjunction needs an explicit context size")
    if len(out) == 1:
        return out[0]
    return Or(n, tuple(out))


def exists_many(body: Formula, k: int) -> Formula:
    """Bind the top ``k`` variables of ``body`` existentially."""
    for _ in range(k):
        body = Exists(body.n - 1, body)
    return body


def forall_many(body: Formula, k: int) -> Formula:
    for _ in range(k):
        body = Forall(body.n - 1, body)
    return body


def substitute(phi: Formula, mapping: Sequence[int], n: int) -> Formula:
    """Reindex free variables: variable ``i`` of ``phi`` becomes ``mapping[i]``.

    The result lives in context ``n``.  Bound variables are carried along at
    the top of the new context.
    """
    mapping = tuple(mapping)
    if len(mapping) != phi.n:
        raise FormulaError(f"substitution map has length {len(mapping)}, context is {phi.n}")
    for m in mapping:
        if not 0 <= m < n:
            raise FormulaError(f"substitution image {m} out of range for context {n}")
    if mapping == tuple(range(n)) and phi.n == n:
        return phi
    return _subst(phi, mapping, n, {})


def _subst(phi, mapping, n, memo):
    key = (id(phi), mapping, n)
    hit = memo.get(key)
    if hit is not None:
        return hit[1]
    if isinstance(phi, Atom):
        out = Atom(n, phi.rel, tuple(mapping[a] for a in phi.args))
    elif isinstance(phi, Eq):
        out = Eq(n, mapping[phi.i], mapping[phi.j])
    elif isinstance(phi, And):
        out = And(n, tuple(_subst(s, mapping, n, memo) for s in phi.subs))
    elif isinstance(phi, Or):
        out = Or(n, tuple(_subst(s, mapping, n, memo) for s in phi.subs))
    elif isinstance(phi, Not):
        out = Not(n, _subst(phi.sub, mapping, n, memo))
    elif isinstance(phi, (Exists, Forall)):
        inner = _subst(phi.body, mapping + (n,), n + 1, memo)
        out = type(phi)(n, inner)
    else:
        raise TypeError(f"not a formula: {phi!r}")
    memo[key] = (phi, out)
    return out


def weaken(phi: Formula, n: int, offset: int = 0) -> Formula:
    """Place ``phi`` into a context of size ``n`` starting at ``offset``."""
    return substitute(phi, range(offset, offset + phi.n), n)


def is_coherent(phi: Formula) -> bool:
    """Only atoms, equalities, finite conjunction, disjunction and existentials."""
    stack = [phi]
    seen = set()
    while stack:
        f = stack.pop()
        if id(f) in seen:
            continue
        seen.add(id(f))
        if isinstance(f, (Not, Forall)):
            return False
        stack.extend(f.children())
    return True


def subformulas(phi: Formula) -> Iterator[Formula]:
    """All subformulas (including ``phi``) in pre-order, without repeats."""
    seen: set[Formula] = set()
    stack = [phi]
    while stack:
        f = stack.pop()
        if f in seen:
            continue
        seen.add(f)
        yield f
        stack.extend(reversed(f.children()))


def relations_used(phi: Formula) -> dict[str, int]:
    out: dict[str, int] = {}
    for f in subformulas(phi):
        if isinstance(f, Atom):
            out.setdefault(f.rel, len(f.args))
    return out


def max_context(phi: Formula) -> int:
    return max(f.n for f in subformulas(phi))


def size(phi: Formula) -> int:
    """Tree size (shared subterms counted once per occurrence)."""
    return 1 + sum(size(c) for c in phi.children())

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable

from .formula import And, Atom, Eq, Exists, Forall, Formula, Not, max_context, top
from .theory import Language


class FragmentError(ValueError):
    pass


@dataclass(frozen=True)
class Fragment:
    formulas: tuple[Formula, ...]

    def __post_init__(self):
        object.__setattr__(self, "formulas", tuple(dict.fromkeys(self.formulas)))
        object.__setattr__(self, "_members", frozenset(self.formulas))

    def __contains__(self, phi: Formula) -> bool:
        return phi in self._members

    def __iter__(self):
        return iter(self.formulas)

    def __len__(self):
        return len(self.formulas)

    def missing(self) -> list[Formula]:
        """Formulas the closure conditions demand but that are absent."""
        return [d for phi in self.formulas for d in demands(phi) if d not in self]


def demands(phi: Formula) -> list[Formula]:
    """Immediate subformulas plus the on-demand companions Morleyization needs.

    A conjunction needs the negations of its conjuncts and a universal
    ``forall y. f`` needs ``not exists y. not f``.
    """
    out = list(phi.children())
    if isinstance(phi, And):
        out += [Not(s.n, s) for s in phi.subs]
    elif isinstance(phi, Forall):
        out.append(Not(phi.n, Exists(phi.n, Not(phi.n + 1, phi.body))))
    return out


def atomics(language: Language, n: int) -> list[Formula]:
    """All atomic formulas in context ``n``, with ``true`` first."""
    out: list[Formula] = [top(n)]
    for r in language.relations:
        for args in itertools.product(range(n), repeat=r.arity):
            out.append(Atom(n, r.name, args))
    for i, j in itertools.product(range(n), repeat=2):
        out.append(Eq(n, i, j))
    return out


def fragment_close(
    seed: Iterable[Formula],
    language: Language,
    *,
    max_context_size: int | None = None,
    include_atomics: bool = True,
) -> Fragment:
    """Smallest set containing ``seed``, the atomics and ``x != y``, closed under ``demands``.

    Atomics are added for every context size up to the largest one met in the
    seed (or ``max_context_size`` when given).
    """
    seed = list(seed)
    for phi in seed:
        language.check(phi)
    order: list[Formula] = []
    seen: set[Formula] = set()
    todo = list(seed)
    if include_atomics:
        m = max((max_context(p) for p in seed), default=0)
        if max_context_size is not None:
            m = max(m, max_context_size)
        for n in range(m + 1):
            todo.extend(atomics(language, n))
        # inequality, so the Morleyized theory is decidable
        todo.append(Not(2, Eq(2, 0, 1)))
    while todo:
        phi = todo.pop(0)
        if phi in seen:
            continue
        seen.add(phi)
        order.append(phi)
        todo.extend(demands(phi))
    return Fragment(tuple(order))

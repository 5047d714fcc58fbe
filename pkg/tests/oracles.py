"""Brute-force reference implementations, written without the library's evaluator.

Everything here works tuple by tuple with plain Python sets so that it shares
no code path with the numpy evaluator or the model search.
"""
from __future__ import annotations

import itertools

from ilwb.semantics import FiniteModel
from ilwb.syntax import And, Atom, Eq, Exists, Forall, Not, Or


def naive_holds(phi, M: FiniteModel, env: tuple[int, ...]) -> bool:
    if isinstance(phi, Atom):
        return tuple(env[a] for a in phi.args) in M.relation(phi.rel)
    if isinstance(phi, Eq):
        return env[phi.i] == env[phi.j]
    if isinstance(phi, And):
        return all(naive_holds(s, M, env) for s in phi.subs)
    if isinstance(phi, Or):
        return any(naive_holds(s, M, env) for s in phi.subs)
    if isinstance(phi, Not):
        return not naive_holds(phi.sub, M, env)
    if isinstance(phi, Exists):
        return any(naive_holds(phi.body, M, env + (v,)) for v in range(M.size))
    if isinstance(phi, Forall):
        return all(naive_holds(phi.body, M, env + (v,)) for v in range(M.size))
    raise TypeError(phi)


def naive_eval(phi, M: FiniteModel) -> set[tuple[int, ...]]:
    return {t for t in itertools.product(range(M.size), repeat=phi.n) if naive_holds(phi, M, t)}


def naive_satisfies(M: FiniteModel, theory) -> bool:
    for ax in theory.axioms:
        for t in itertools.product(range(M.size), repeat=ax.n):
            if naive_holds(ax.lhs, M, t) and not naive_holds(ax.rhs, M, t):
                return False
    return all(naive_holds(s, M, ()) for s in theory.sentences)


def all_structures(language, size: int):
    """Every structure of the language on ``{0..size-1}``."""
    slots = [(r, list(itertools.product(range(size), repeat=r.arity))) for r in language.relations]
    choices = [list(itertools.product((False, True), repeat=len(ts))) for _, ts in slots]
    for pick in itertools.product(*choices):
        rels = {r.name: [t for t, keep in zip(ts, bits) if keep] for (r, ts), bits in zip(slots, pick)}
        yield FiniteModel.make(size, rels, language)


def brute_models(language, theory, cap: int) -> list[FiniteModel]:
    return [M for k in range(cap + 1) for M in all_structures(language, k) if naive_satisfies(M, theory)]


def naive_isomorphisms(M: FiniteModel, N: FiniteModel) -> list[tuple[int, ...]]:
    if M.size != N.size:
        return []
    out = []
    for p in itertools.permutations(range(M.size)):
        if all({tuple(p[a] for a in t) for t in M.relation(n)} == set(N.relation(n)) for n in M.names):
            out.append(p)
    return out


def naive_quotient(elements, related) -> list[set]:
    """Classes of the equivalence closure of ``related`` on ``elements``."""
    classes: list[set] = []
    for e in elements:
        hit = [c for c in classes if any(related(e, x) or related(x, e) for x in c)]
        merged = {e}.union(*hit) if hit else {e}
        classes = [c for c in classes if c not in hit] + [merged]
    return classes


def naive_sort_classes(A, M: FiniteModel) -> list[list]:
    """Classes of the sort in ``M`` as sorted lists of ``(piece, tuple)``, ordered by least member."""
    elements = sorted((i, t) for i, a in enumerate(A.pieces) for t in naive_eval(a, M))
    rel = {(i, j): naive_eval(A.relations[i][j], M) for i in range(len(A)) for j in range(len(A))}
    classes = naive_quotient(elements, lambda a, b: a[1] + b[1] in rel[a[0], b[0]])
    return sorted((sorted(c) for c in classes), key=lambda c: c[0])


def naive_transport(F, M: FiniteModel) -> FiniteModel:
    """The transported model, read directly off the formulas with the reference evaluator."""
    classes = naive_sort_classes(F.hom_sort, M)
    p = len(F.hom_sort)
    tables = {}
    for r in F.source_language.relations:
        img = F.image(r.name)
        rows = []
        for cs in itertools.product(range(len(classes)), repeat=r.arity):
            reps = [classes[c][0] for c in cs]
            piece = 0
            for i, _ in reps:
                piece = piece * p + i
            tup = tuple(x for _, t in reps for x in t)
            if tup in naive_eval(img.pieces[piece], M):
                rows.append(cs)
        tables[r.name] = rows
    return FiniteModel.make(len(classes), tables, F.source_language)


def naive_transform(B, U, kind: str, fs) -> set[int]:
    """Points whose images under the morphisms of ``U`` leaving their model land in ``B``."""
    S = fs.slice
    out = set()
    for p, (m, c) in enumerate(fs.points):
        moved = []
        for g in U:
            G = S.morphisms[g]
            if G.source == m:
                elem = fs.fibers[m].representative(c)[1]
                moved.append(fs.tuple_point(G.target, tuple(G.perm[x] for x in elem)) in B)
        if kind == "exists" and any(moved):
            out.add(p)
        elif kind == "all" and all(moved):
            out.add(p)
        elif kind == "all_nonempty" and moved and all(moved):
            out.add(p)
    return out


def naive_points(phi, a, fs) -> set[int]:
    """Points ``(M, c)`` of a tuple fibration with ``phi(a, c)``, by the reference evaluator."""
    out = set()
    k = len(a)
    for m, M in enumerate(fs.slice.models):
        if any(x >= M.size for x in a):
            continue
        for t in naive_eval(phi, M):
            if t[:k] == tuple(a):
                out.add(fs.tuple_point(m, t[k:]))
    return out

"""Morleyization: one fresh relation per fragment formula, tied by coherent axioms."""
from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass
from typing import Sequence

from .semantics import FiniteModel, NotAModel, evaluate, satisfies_theory
from .syntax import (
    And,
    Atom,
    CoherentAxiom,
    Eq,
    Exists,
    Forall,
    Formula,
    Fragment,
    FragmentError,
    Language,
    Not,
    Or,
    RelationSymbol,
    Theory,
    bot,
    print_formula,
    top,
)


def relation_name(phi: Formula) -> str:
    digest = hashlib.sha256(f"{phi.n}|{print_formula(phi)}".encode()).hexdigest()
    return "R_" + digest[:8]


@dataclass(frozen=True)
class MorleyResult:
    source_language: Language
    source_theory: Theory
    fragment: Fragment
    target_language: Language
    target_theory: Theory
    index: tuple[tuple[Formula, str], ...]

    @property
    def formula_index(self) -> dict[Formula, str]:
        return dict(self.index)

    def name(self, phi: Formula) -> str:
        for f, nm in self.index:
            if f == phi:
                return nm
        raise FragmentError(f"formula not in fragment: {print_formula(phi)}")

    def atom(self, phi: Formula) -> Atom:
        """``R_phi`` applied to the identity variable tuple."""
        return Atom(phi.n, self.name(phi), tuple(range(phi.n)))

    def sidecar(self) -> dict:
        return {nm: {"context": f.n, "formula": print_formula(f)} for f, nm in self.index}


def _postorder(fragment: Fragment) -> list[Formula]:
    out: list[Formula] = []
    seen: set[Formula] = set()

    def visit(phi):
        if phi in seen:
            return
        seen.add(phi)
        for c in phi.children():
            if c in fragment:
                visit(c)
        out.append(phi)

    for phi in fragment:
        visit(phi)
    return out


def morleyize(language: Language, theory: Theory, fragment: Fragment, *, strict: bool = True) -> MorleyResult:
    """Build the Morleyized language and theory for ``theory`` over ``fragment``.

    Axioms are emitted only for connectives whose companion formulas lie in the
    fragment.  A fragment missing a demanded companion raises in strict mode and
    warns otherwise, since the resulting theory can then have too many models.
    """
    for phi in fragment:
        language.check(phi)
    missing = fragment.missing()
    if missing:
        msg = f"fragment is not closed: missing {print_formula(missing[0])} (and {len(missing) - 1} more)"
        if strict:
            raise FragmentError(msg)
        warnings.warn(msg, stacklevel=2)

    order = _postorder(fragment)
    index: dict[Formula, str] = {}
    used = set(language.names)
    for phi in order:
        nm = relation_name(phi)
        if nm in used:
            raise FragmentError(f"generated name clash for {nm}")
        used.add(nm)
        index[phi] = nm
    rels = language.relations + tuple(RelationSymbol(index[phi], phi.n) for phi in order)

    def R(phi: Formula) -> Atom:
        return Atom(phi.n, index[phi], tuple(range(phi.n)))

    axioms: list[CoherentAxiom] = []

    def iff(a, b):
        axioms.append(CoherentAxiom(a, b))
        axioms.append(CoherentAxiom(b, a))

    for phi in order:
        n = phi.n
        if isinstance(phi, (Atom, Eq)):
            iff(R(phi), phi)
        elif isinstance(phi, Or):
            if all(s in index for s in phi.subs):
                iff(R(phi), Or(n, tuple(R(s) for s in phi.subs)))
        elif isinstance(phi, Exists):
            if phi.body in index:
                iff(R(phi), Exists(n, R(phi.body)))
        elif isinstance(phi, Not):
            if phi.sub in index:
                axioms.append(CoherentAxiom(And(n, (R(phi.sub), R(phi))), bot(n)))
                axioms.append(CoherentAxiom(top(n), Or(n, (R(phi.sub), R(phi)))))
        elif isinstance(phi, And):
            for s in phi.subs:
                if s in index:
                    axioms.append(CoherentAxiom(R(phi), R(s)))
            negs = [Not(n, s) for s in phi.subs]
            if all(x in index for x in negs):
                axioms.append(CoherentAxiom(top(n), Or(n, (R(phi),) + tuple(R(x) for x in negs))))
        elif isinstance(phi, Forall):
            dual = Not(n, Exists(n, Not(n + 1, phi.body)))
            if dual in index:
                iff(R(phi), R(dual))

    for ax in theory.axioms:
        for side in (ax.lhs, ax.rhs):
            if side not in index:
                raise FragmentError(f"axiom formula not in fragment: {print_formula(side)}")
        axioms.append(CoherentAxiom(R(ax.lhs), R(ax.rhs)))
    for s in theory.sentences:
        if s not in index:
            raise FragmentError(f"sentence not in fragment: {print_formula(s)}")
        axioms.append(CoherentAxiom(top(0), R(s)))

    neq = Not(2, Eq(2, 0, 1))
    witness = R(neq) if neq in index else None
    target = Language(rels, witness)
    return MorleyResult(
        language, theory, fragment, target, Theory(target, tuple(axioms), ()), tuple(index.items())
    )


def expand_model(M: FiniteModel, result: MorleyResult) -> FiniteModel:
    """The unique expansion of a model of the source theory to the target language."""
    if not M.fits(result.source_language):
        raise NotAModel("model is not over the source language")
    report = satisfies_theory(M, result.source_theory)
    if not report.ok:
        raise NotAModel(f"model violates {report.failures()[0].label}")
    tables = list(M.tables)
    for phi, nm in result.index:
        arr = evaluate(phi, M)
        tuples = frozenset(tuple(int(a) for a in t) for t in zip(*arr.nonzero())) if phi.n else (
            frozenset({()}) if bool(arr) else frozenset()
        )
        tables.append((nm, phi.n, tuples))
    return FiniteModel(M.size, tuple(tables))


def reduct_model(M: FiniteModel, language: Language) -> FiniteModel:
    """Forget every relation outside ``language``."""
    return FiniteModel(M.size, tuple((r.name, r.arity, M.relation(r.name)) for r in language.relations))


def translate_fragment_disjunction(phis: Sequence[Formula], result: MorleyResult, n: int | None = None) -> Formula:
    """``or`` of the fresh relations standing for each fragment formula."""
    phis = list(phis)
    if not phis:
        if n is None:
            raise ValueError("context size needed for an empty disjunction")
        return bot(n)
    if len({p.n for p in phis}) != 1:
        raise ValueError("formulas must share a context")
    if len(phis) == 1:
        return result.atom(phis[0])
    return Or(phis[0].n, tuple(result.atom(p) for p in phis))

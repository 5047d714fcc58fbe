from __future__ import annotations

from dataclasses import dataclass, field, replace

from .formula import Formula, FormulaError, is_coherent, relations_used, substitute


@dataclass(frozen=True)
class RelationSymbol:
    name: str
    arity: int

    def __post_init__(self):
        if self.arity < 0:
            raise FormulaError(f"negative arity for {self.name}")


@dataclass(frozen=True)
class Language:
    relations: tuple[RelationSymbol, ...] = ()
    witness: Formula | None = None

    def __post_init__(self):
        object.__setattr__(self, "relations", tuple(self.relations))
        names = [r.name for r in self.relations]
        if len(set(names)) != len(names):
            raise FormulaError("duplicate relation names in language")
        if self.witness is not None:
            if self.witness.n != 2:
                raise FormulaError("decidability witness must have exactly 2 variables")
            if not is_coherent(self.witness):
                raise FormulaError("decidability witness must be coherent")
            self.check(self.witness)

    @classmethod
    def of(cls, witness: Formula | None = None, **arities: int) -> "Language":
        return cls(tuple(RelationSymbol(k, v) for k, v in arities.items()), witness)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.relations)

    def arity(self, name: str) -> int:
        for r in self.relations:
            if r.name == name:
                return r.arity
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(r.name == name for r in self.relations)

    def check(self, phi: Formula) -> None:
        """Raise if ``phi`` mentions an unknown relation or misuses an arity."""
        for name, ar in relations_used(phi).items():
            if name not in self:
                raise FormulaError(f"unknown relation {name}")
            if self.arity(name) != ar:
                raise FormulaError(f"arity mismatch for {name}: expected {self.arity(name)}, got {ar}")

    def extend(self, extra: tuple[RelationSymbol, ...], witness: Formula | None = None) -> "Language":
        return Language(self.relations + tuple(extra), witness)

    def with_witness(self, witness: Formula | None) -> "Language":
        return replace(self, witness=witness)

    def neq(self, i: int, j: int, n: int) -> Formula:
        """The coherent stand-in for ``x_i != x_j`` in context ``n``."""
        if self.witness is None:
            raise MissingWitness("theory has no decidability witness for !=")
        return substitute(self.witness, (i, j), n)


class MissingWitness(FormulaError):
    pass


@dataclass(frozen=True)
class CoherentAxiom:
    """``forall x0..x(n-1) (lhs => rhs)`` with coherent sides."""

    lhs: Formula
    rhs: Formula

    def __post_init__(self):
        if self.lhs.n != self.rhs.n:
            raise FormulaError("axiom sides have different contexts")

    @property
    def n(self) -> int:
        return self.lhs.n

    @property
    def coherent(self) -> bool:
        return is_coherent(self.lhs) and is_coherent(self.rhs)


@dataclass(frozen=True)
class Theory:
    language: Language
    axioms: tuple[CoherentAxiom, ...] = ()
    sentences: tuple[Formula, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "axioms", tuple(self.axioms))
        object.__setattr__(self, "sentences", tuple(self.sentences))
        for ax in self.axioms:
            self.language.check(ax.lhs)
            self.language.check(ax.rhs)
        for s in self.sentences:
            if s.n != 0:
                raise FormulaError("theory sentences must be closed")
            self.language.check(s)

    @property
    def coherent(self) -> bool:
        return not self.sentences and all(ax.coherent for ax in self.axioms)

    def formulas(self) -> list[Formula]:
        out: list[Formula] = []
        for ax in self.axioms:
            out += [ax.lhs, ax.rhs]
        out += list(self.sentences)
        return out

    def with_language(self, language: Language) -> "Theory":
        return Theory(language, self.axioms, self.sentences)


def empty_theory(language: Language) -> Theory:
    return Theory(language)

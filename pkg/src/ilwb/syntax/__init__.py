"""Languages, formulas-in-context, theories and their textual form."""
from .formula import (
    And,
    Atom,
    Eq,
    Exists,
    Forall,
    Formula,
    FormulaError,
    Not,
    Or,
    bot,
    conj,
    disj,
    exists_many,
    forall_many,
    is_bot,
    is_coherent,
    is_top,
    max_context,
    relations_used,
    substitute,
    subformulas,
    top,
    weaken,
)
from .fragment import Fragment, FragmentError, atomics, demands, fragment_close
from .normal import coherent_normal_form, is_normal_form
from .text import ParseError, default_names, parse_formula, parse_theory, print_formula, print_theory
from .theory import CoherentAxiom, Language, MissingWitness, RelationSymbol, Theory, empty_theory

__all__ = [name for name in dir() if not name.startswith("_")]

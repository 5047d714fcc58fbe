"""Theory files: tokenizer, recursive-descent parser and printer.

Grammar (whitespace-insensitive, ``#`` starts a comment)::

    file     := 'language' '{' (NAME '/' INT ';')* '}'
                ['decidable' 'via' formula ';']
                ['theory' '{' item* '}']
    item     := 'axiom' ['forall' NAME* '.'] formula '=>' formula ';'
              | 'sentence' formula ';'
    formula  := 'true' | 'false' | NAME '(' [NAME (',' NAME)*] ')'
              | NAME '=' NAME | NAME '!=' NAME
              | 'and' '(' [formula (',' formula)*] ')'
              | 'or' '(' [formula (',' formula)*] ')'
              | 'bigor' '[' [formula (';' formula)*] ']'
              | 'not' formula | 'exists' NAME+ '.' formula
              | 'forall' NAME+ '.' formula | '(' formula ')'

The decidability witness is written with free variables ``x`` and ``y``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from .formula import And, Atom, Eq, Exists, Forall, Formula, FormulaError, Not, Or, substitute
from .theory import CoherentAxiom, Language, RelationSymbol, Theory

KEYWORDS = {
    "true", "false", "and", "or", "bigor", "not", "exists", "forall",
    "language", "theory", "axiom", "sentence", "decidable", "via",
}

NAME_POOL = ("x", "y", "z", "w", "u", "v")

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<int>\d+)
  | (?P<op>=>|!=|[=(){}\[\],;./])
    """,
    re.VERBOSE,
)


class ParseError(FormulaError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            tokens.append(Token(kind, chunk, line, pos - line_start + 1))
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, language: Language | None = None):
        self.toks = tokenize(text)
        self.i = 0
        self.language = language

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        raise ParseError(message, tok.line, tok.col)

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind != "eof"

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.next()

    def name(self) -> Token:
        t = self.tok
        if t.kind != "name" or t.text in KEYWORDS:
            self.error(f"expected a name, found {t.text or 'end of input'!r}")
        return self.next()

    # -- formulas ---------------------------------------------------------
    def var(self, scope: list[str]) -> int:
        t = self.name()
        for idx in range(len(scope) - 1, -1, -1):
            if scope[idx] == t.text:
                return idx
        self.error(f"unbound variable {t.text}", t)

    def formula(self, scope: list[str]) -> Formula:
        n = len(scope)
        t = self.tok
        if t.kind == "name" and t.text in KEYWORDS:
            kw = self.next().text
            if kw == "true":
                return And(n, ())
            if kw == "false":
                return Or(n, ())
            if kw in ("and", "or"):
                self.expect("(")
                subs = self.sequence(scope, ",", ")")
                return (And if kw == "and" else Or)(n, subs)
            if kw == "bigor":
                self.expect("[")
                return Or(n, self.sequence(scope, ";", "]"))
            if kw == "not":
                return Not(n, self.formula(scope))
            if kw in ("exists", "forall"):
                names = [self.name().text]
                while not self.at("."):
                    names.append(self.name().text)
                self.expect(".")
                body = self.formula(scope + names)
                for _ in names:
                    body = (Exists if kw == "exists" else Forall)(body.n - 1, body)
                return body
            self.error(f"unexpected keyword {kw!r}", t)
        if self.at("("):
            self.next()
            f = self.formula(scope)
            self.expect(")")
            return f
        if t.kind != "name":
            self.error(f"expected a formula, found {t.text or 'end of input'!r}")
        nxt = self.toks[self.i + 1]
        if nxt.text == "(":
            return self.atom(scope)
        if nxt.text in ("=", "!="):
            a = self.var(scope)
            op = self.next()
            b = self.var(scope)
            if op.text == "=":
                return Eq(n, a, b)
            if self.language is None or self.language.witness is None:
                self.error("'!=' used but the theory declares no decidability witness", op)
            return substitute(self.language.witness, (a, b), n)
        self.error(f"expected '(' or '=' after {t.text!r}", nxt)

    def atom(self, scope: list[str]) -> Formula:
        t = self.name()
        self.expect("(")
        args = []
        if not self.at(")"):
            args.append(self.var(scope))
            while self.at(","):
                self.next()
                args.append(self.var(scope))
        self.expect(")")
        if self.language is not None:
            if t.text not in self.language:
                self.error(f"unknown relation {t.text}", t)
            ar = self.language.arity(t.text)
            if ar != len(args):
                self.error(f"arity mismatch for {t.text}: expected {ar}, got {len(args)}", t)
        return Atom(len(scope), t.text, tuple(args))

    def sequence(self, scope, sep, close) -> tuple[Formula, ...]:
        out = []
        if self.at(close):
            self.next()
            return ()
        out.append(self.formula(scope))
        while self.at(sep):
            self.next()
            out.append(self.formula(scope))
        self.expect(close)
        return tuple(out)

    # -- files --------------------------------------------------------------
    def theory_file(self) -> tuple[Language, Theory]:
        self.expect("language")
        self.expect("{")
        rels = []
        while not self.at("}"):
            nt = self.name()
            self.expect("/")
            if self.tok.kind != "int":
                self.error("expected an arity")
            ar = int(self.next().text)
            self.expect(";")
            if any(r.name == nt.text for r in rels):
                self.error(f"duplicate relation {nt.text}", nt)
            rels.append(RelationSymbol(nt.text, ar))
        self.expect("}")
        self.language = Language(tuple(rels))
        if self.at("decidable"):
            self.next()
            self.expect("via")
            w = self.formula(["x", "y"])
            self.expect(";")
            try:
                self.language = self.language.with_witness(w)
            except FormulaError as e:
                self.error(str(e))
        axioms, sentences = [], []
        if self.at("theory"):
            self.next()
            self.expect("{")
            while not self.at("}"):
                if self.at("axiom"):
                    self.next()
                    names: list[str] = []
                    if self.at("forall"):
                        self.next()
                        while not self.at("."):
                            names.append(self.name().text)
                        self.expect(".")
                    lhs = self.formula(names)
                    self.expect("=>")
                    rhs = self.formula(names)
                    self.expect(";")
                    axioms.append(CoherentAxiom(lhs, rhs))
                elif self.at("sentence"):
                    self.next()
                    sentences.append(self.formula([]))
                    self.expect(";")
                else:
                    self.error(f"expected 'axiom' or 'sentence', found {self.tok.text!r}")
            self.expect("}")
        if self.tok.kind != "eof":
            self.error(f"trailing input {self.tok.text!r}")
        return self.language, Theory(self.language, tuple(axioms), tuple(sentences))


def parse_theory(text: str) -> tuple[Language, Theory]:
    return _Parser(text).theory_file()


def parse_formula(text: str, language: Language | None = None, names: Sequence[str] = ()) -> Formula:
    p = _Parser(text, language)
    f = p.formula(list(names))
    if p.tok.kind != "eof":
        p.error(f"trailing input {p.tok.text!r}")
    return f


def fresh_name(used: Sequence[str]) -> str:
    used = set(used)
    for c in NAME_POOL:
        if c not in used:
            return c
    i = len(NAME_POOL)
    while f"x{i}" in used:
        i += 1
    return f"x{i}"


def default_names(n: int) -> tuple[str, ...]:
    names: list[str] = []
    for _ in range(n):
        names.append(fresh_name(names))
    return tuple(names)


def print_formula(phi: Formula, names: Sequence[str] | None = None) -> str:
    if names is None:
        names = default_names(phi.n)
    names = list(names)
    if len(names) != phi.n:
        raise FormulaError(f"need {phi.n} variable names, got {len(names)}")
    if len(set(names)) != len(names):
        raise FormulaError("variable names must be distinct")
    return _show(phi, names)


def _show(phi: Formula, names: list[str]) -> str:
    if isinstance(phi, Atom):
        return f"{phi.rel}({','.join(names[a] for a in phi.args)})"
    if isinstance(phi, Eq):
        return f"{names[phi.i]} = {names[phi.j]}"
    if isinstance(phi, And):
        if not phi.subs:
            return "true"
        return "and(" + ", ".join(_show(s, names) for s in phi.subs) + ")"
    if isinstance(phi, Or):
        if not phi.subs:
            return "false"
        return "or(" + ", ".join(_show(s, names) for s in phi.subs) + ")"
    if isinstance(phi, Not):
        return "not " + _show(phi.sub, names)
    if isinstance(phi, (Exists, Forall)):
        v = fresh_name(names)
        kw = "exists" if isinstance(phi, Exists) else "forall"
        return f"{kw} {v}. {_show(phi.body, names + [v])}"
    raise TypeError(f"not a formula: {phi!r}")


def print_theory(language: Language, theory: Theory) -> str:
    lines = ["language {"]
    lines += [f"  {r.name}/{r.arity};" for r in language.relations]
    lines.append("}")
    if language.witness is not None:
        lines.append(f"decidable via {print_formula(language.witness, ['x', 'y'])};")
    lines.append("theory {")
    for ax in theory.axioms:
        names = default_names(ax.n)
        head = f"forall {' '.join(names)} . " if names else ""
        lines.append(f"  axiom {head}{print_formula(ax.lhs, names)} => {print_formula(ax.rhs, names)};")
    for s in theory.sentences:
        lines.append(f"  sentence {print_formula(s, [])};")
    lines.append("}")
    return "\n".join(lines) + "\n"

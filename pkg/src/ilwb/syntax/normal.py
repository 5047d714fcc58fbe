from __future__ import annotations

from .formula import And, Atom, Eq, Exists, Formula, FormulaError, Or, exists_many, is_coherent, substitute

# A block is (k, literals): exists k fresh variables (indices n..n+k-1) such
# that every literal (an atom or equality in context n+k) holds.
Block = tuple[int, tuple[Formula, ...]]


def _blocks(phi: Formula) -> list[Block]:
    n = phi.n
    if isinstance(phi, (Atom, Eq)):
        return [(0, (phi,))]
    if isinstance(phi, Or):
        out: list[Block] = []
        for s in phi.subs:
            out.extend(_blocks(s))
        return out
    if isinstance(phi, Exists):
        return [(k + 1, lits) for k, lits in _blocks(phi.body)]
    if isinstance(phi, And):
        acc: list[Block] = [(0, ())]
        for s in phi.subs:
            acc = [_join(n, a, b) for a in acc for b in _blocks(s)]
        return acc
    raise FormulaError(f"not a coherent formula: {type(phi).__name__}")


def _join(n: int, a: Block, b: Block) -> Block:
    ka, la = a
    kb, lb = b
    total = n + ka + kb
    left = tuple(substitute(f, range(n + ka), total) for f in la)
    shift = tuple(range(n)) + tuple(n + ka + t for t in range(kb))
    right = tuple(substitute(f, shift, total) for f in lb)
    return ka + kb, left + right


def coherent_normal_form(phi: Formula) -> Formula:
    """Rewrite a coherent formula as ``or`` of ``exists* and(literals)`` blocks."""
    if not is_coherent(phi):
        raise FormulaError("normal form is only defined for coherent formulas")
    return Or(phi.n, tuple(exists_many(And(phi.n + k, lits), k) for k, lits in _blocks(phi)))


def is_normal_form(phi: Formula) -> bool:
    if not isinstance(phi, Or):
        return False
    for block in phi.subs:
        while isinstance(block, Exists):
            block = block.body
        if not isinstance(block, And):
            return False
        if not all(isinstance(lit, (Atom, Eq)) for lit in block.subs):
            return False
    return True

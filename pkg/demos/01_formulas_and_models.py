"""Formulas, finite models and evaluation."""
# %%
from ilwb.corpus import load_theory
from ilwb.semantics import FiniteModel, enumerate_models, evaluate, satisfies_theory
from ilwb.syntax import coherent_normal_form, parse_formula, print_formula

language, theory = load_theory("graph")
print(len(theory.axioms), "axioms, coherent:", theory.coherent)

# %% a path on three vertices
path = FiniteModel.make(3, {"E": [(0, 1), (1, 0), (1, 2), (2, 1)]}, language)
print(satisfies_theory(path, theory).ok)

# %% evaluation returns a boolean array indexed by the free variables
has_neighbour = parse_formula("exists y. E(x, y)", language, ["x"])
print(evaluate(has_neighbour, path))
middle = parse_formula("exists y z. and(E(x, y), E(x, z), not y = z)", language, ["x"])
print(evaluate(middle, path).nonzero()[0])

# %% every model with at most three vertices, by size then bitmap
models = enumerate_models(language, theory, 3)
print([M.size for M in models])
print([int(evaluate(has_neighbour, M).sum()) for M in models])

# %% normal forms push disjunctions out of quantifiers
phi = parse_formula("exists y. and(E(x, y), or(E(y, x), y = x))", language, ["x"])
print(print_formula(coherent_normal_form(phi), ["x"]))

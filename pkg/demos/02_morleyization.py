"""Replacing a fragment of formulas by fresh relation symbols."""
# %%
from ilwb.corpus import load_theory
from ilwb.morley import expand_model, morleyize, reduct_model
from ilwb.semantics import enumerate_models
from ilwb.syntax import fragment_close, parse_formula, print_theory

language, theory = load_theory("graph")
seed = [parse_formula("exists y. E(x, y)", language, ["x"])] + theory.formulas()
fragment = fragment_close(seed, language)
result = morleyize(language, theory, fragment)
print(len(fragment), "formulas,", len(result.target_theory.axioms), "axioms")

# %% the fresh relation standing for "has a neighbour"
name = result.name(seed[0])
print(name, result.sidecar()[name])
print(print_theory(result.target_language, result.target_theory).splitlines()[0])

# %% models correspond one to one
small = enumerate_models(language, theory, 3)
big = enumerate_models(result.target_language, result.target_theory, 3)
print(len(small), len(big))
print(all(reduct_model(expand_model(M, result), language) == M for M in small))

# %% the inequality relation now has a coherent definition
print(result.target_language.witness)

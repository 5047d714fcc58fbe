"""Invariant sets of points are defined by formulas."""
# %%
from ilwb.corpus import load_theory
from ilwb.definability import (
    BasicOpen,
    Complement,
    Leaf,
    Union,
    formula_points,
    orbit_descriptors,
    synthesize_invariant_borel,
    synthesize_invariant_open,
)
from ilwb.groupoid import GroupoidSlice, home_fibers
from ilwb.syntax import Atom, print_formula

# the graph theory with a relation for inequality, so x != y is coherent
language, theory = load_theory("decidable_graph")
S = GroupoidSlice(language, theory, 3)
fs = home_fibers(1, S)
print(len(fs), "points,", len(fs.orbits()), "orbits")

# %% "c is adjacent to d" for labelled c, d, then the union over all labels
edge = Atom(2, "E", (0, 1))
opens = [BasicOpen((c,), edge, (c, d)) for c in range(3) for d in range(3) if c != d]
phi = synthesize_invariant_open(opens, fs, language)
print(len(formula_points(phi, (), fs)), "points have a neighbour")

# %% complements need the Borel construction
isolated = synthesize_invariant_borel(Complement(Union(tuple(Leaf(U) for U in opens))), fs, 3, language)
print(len(formula_points(isolated, (), fs)), "points are isolated")

# %% one formula per orbit
for orbit, B in orbit_descriptors(fs, ["E"])[:3]:
    psi = synthesize_invariant_borel(B, fs, 3, language)
    print(len(orbit), len(print_formula(psi)))

"""Definable quotients, their fibers, and the groupoid of small models."""
# %%
from ilwb.coding import interpret_sort_in_model, transport_along_iso
from ilwb.corpus import load_theory
from ilwb.groupoid import GroupoidSlice, all_morphisms, build_fibered_sort, home_fibers, vaught_transform
from ilwb.pretopos import ImaginarySort, product_sort, home_sort, validate_sort
from ilwb.semantics import FiniteModel, Isomorphism
from ilwb.syntax import parse_formula

language, theory = load_theory("graph")
edge = parse_formula("E(x, y)", language, ["x", "y"])
same_edge = parse_formula("and(E(x, y), or(and(x = u, y = v), and(x = v, y = u)))", language, ["x", "y", "u", "v"])
edges = ImaginarySort((edge,), ((same_edge,),))
print(validate_sort(edges, language, theory, 3).ok)

# %% unordered edges of the path
path = FiniteModel.make(3, {"E": [(0, 1), (1, 0), (1, 2), (2, 1)]}, language)
fiber = interpret_sort_in_model(edges, path)
print(fiber.size, [fiber.members(c) for c in range(fiber.size)])
print(transport_along_iso(edges, Isomorphism(path, path, (2, 1, 0))).values)

# %% products multiply fiber sizes
P, _, _ = product_sort(edges, home_sort())
print(interpret_sort_in_model(P, path).size)

# %% the groupoid of graphs on at most three vertices
S = GroupoidSlice(language, theory, 3)
print(len(S.models), "models,", len(S.morphisms), "isomorphisms,", len(S.orbits()), "isomorphism classes")
print(len(build_fibered_sort(edges, S)), "edge points in all")

# %% quantifying over the action: some move lands in B, every move does
fs = home_fibers(1, S)
B = set(range(0, len(fs), 2))
U = all_morphisms(S)
print(len(B), len(vaught_transform(B, U, "exists", fs)), len(vaught_transform(B, U, "all", fs)))

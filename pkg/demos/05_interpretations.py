"""Interpreting graphs in linear orders and in other graphs."""
# %%
from ilwb.corpus import complete_graph_interpretation, double_cover_interpretation, load_theory
from ilwb.groupoid import GroupoidSlice
from ilwb.interp import (
    apply_to_model,
    compose_interpretations,
    functoriality_failures,
    naturality_failures,
    validate_interpretation,
)
from ilwb.semantics import enumerate_models

complete = complete_graph_interpretation()
print(validate_interpretation(complete, 4).ok)
print(validate_interpretation(complete_graph_interpretation(strict_order=True), 3).failures[0])

# %% every order becomes a complete graph
orders = enumerate_models(*load_theory("linear_order"), 4)
print([len(apply_to_model(complete, M).relation("E")) for M in orders])

# %% two copies of the vertices with edges across
cover = double_cover_interpretation()
graphs = enumerate_models(*load_theory("graph"), 3)
print([(M.size, apply_to_model(cover, M).size) for M in graphs[:5]])

# %% composites come with comparison isomorphisms that commute with the action
both = compose_interpretations(complete, cover, models=orders)
slice_ = GroupoidSlice(*load_theory("linear_order"), 4)
print(naturality_failures(complete, cover, both, slice_), functoriality_failures(complete, slice_))

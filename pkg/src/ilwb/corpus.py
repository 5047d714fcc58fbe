"""Bundled theories and interpretations used by the tests, demos and the CLI."""
from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

from .syntax import Language, Theory, parse_theory

THEORIES = ("graph", "linear_order", "decidable_graph")


def data_text(name: str) -> str:
    return resources.files("ilwb").joinpath("data", name).read_text()


@lru_cache(maxsize=None)
def load_theory(name: str) -> tuple[Language, Theory]:
    """A bundled theory by short name, e.g. ``graph``."""
    if name not in THEORIES:
        raise KeyError(f"unknown bundled theory {name!r}; choose from {', '.join(THEORIES)}")
    return parse_theory(data_text(f"{name}.thy"))


def load_json(name: str) -> dict:
    return json.loads(data_text(name))


def complete_graph_interpretation(strict_order: bool = False):
    """Graphs in linear orders: ``F(X) = X`` and ``F(E) = L(x,y) or L(y,x)``.

    With ``strict_order`` the edge image is ``L(x,y)`` alone, which is not symmetric.
    """
    from .interp import make_interpretation
    from .pretopos import home_sort
    from .syntax import parse_formula

    graph, order = load_theory("graph"), load_theory("linear_order")
    text = "L(x, y)" if strict_order else "or(L(x, y), L(y, x))"
    edge = parse_formula(text, order[0], ["x", "y"])
    return make_interpretation(graph, order, home_sort(), {"E": [edge]})


def double_cover_interpretation():
    """Graphs in graphs: two copies of the vertex set, edges only across copies."""
    from .interp import make_interpretation
    from .pretopos import disjoint_sum
    from .syntax import Atom, bot, top

    graph = load_theory("graph")
    edge = Atom(2, "E", (0, 1))
    return make_interpretation(graph, graph, disjoint_sum([top(1), top(1)]), {"E": [bot(2), edge, edge, bot(2)]})


def pair_projection_interpretation():
    """Graphs in graphs: pairs ``(x, y)`` identified when their first entries agree."""
    from .interp import make_interpretation
    from .pretopos import ImaginarySort
    from .syntax import parse_formula

    graph = load_theory("graph")
    same_first = parse_formula("x = u", graph[0], ["x", "y", "u", "v"])
    hom = ImaginarySort((parse_formula("true", graph[0], ["x", "y"]),), ((same_first,),))
    edge = parse_formula("E(x, u)", graph[0], ["x", "y", "u", "v"])
    return make_interpretation(graph, graph, hom, {"E": [edge]})


def load_schema(name: str) -> dict:
    """A published JSON schema, e.g. ``models`` or ``verify``."""
    return json.loads(resources.files("ilwb").joinpath("schemas", f"{name}.json").read_text())

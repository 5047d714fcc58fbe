import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ilwb.corpus import load_theory  # noqa: E402
from ilwb.semantics import FiniteModel  # noqa: E402


@pytest.fixture(scope="session")
def graph():
    return load_theory("graph")


@pytest.fixture(scope="session")
def order():
    return load_theory("linear_order")


@pytest.fixture(scope="session")
def dgraph():
    return load_theory("decidable_graph")


@pytest.fixture(scope="session")
def p2(graph):
    return FiniteModel.make(3, {"E": [(0, 1), (1, 0), (1, 2), (2, 1)]}, graph[0])


@pytest.fixture(scope="session")
def k2(graph):
    return FiniteModel.make(2, {"E": [(0, 1), (1, 0)]}, graph[0])

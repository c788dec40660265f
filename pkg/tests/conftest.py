import numpy as np
import pytest

from src.core.polytopes import BoxPolytope, CardinalityPolytope, PartitionMatroidPolytope
from src.core.setfn import Coverage, ExplicitTable, GraphCut
from src.services.instance_service import build_problem, generate_instance


@pytest.fixture
def single_edge_cut():
    return GraphCut(2, [(0, 1, 1.0)])


@pytest.fixture
def triangle_cut():
    return GraphCut(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])


@pytest.fixture
def two_item_coverage():
    # element 0 covers both items, element 1 covers item 0
    return Coverage(2, [[0, 1], [0]], [2.0, 3.0])


@pytest.fixture
def modular():
    """f(S) = sum of per-element weights."""
    weights = [1.0, 2.5, 0.5, 4.0]
    return Coverage(4, [[0], [1], [2], [3]], weights)


@pytest.fixture
def coverage6():
    covers = [[0, 1], [1, 2, 3], [3, 4], [0, 5], [2, 5, 6], [6, 7]]
    return Coverage(6, covers, [1.0, 0.7, 1.3, 0.4, 2.1, 0.9, 1.6, 0.5])


@pytest.fixture
def not_submodular():
    return ExplicitTable(2, [0.0, 0.0, 0.0, 1.0])


@pytest.fixture
def box2():
    return BoxPolytope(2)


@pytest.fixture
def partition3():
    return PartitionMatroidPolytope(3, [[0, 1], [2]], [1, 1])


@pytest.fixture
def cardinality_k1():
    return CardinalityPolytope(3, 1)


@pytest.fixture
def small_problem():
    spec = generate_instance("cut", 6, {"p": 0.6}, seed=11, constraint="cardinality", constraint_params={"k": 2})
    return build_problem(spec)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)

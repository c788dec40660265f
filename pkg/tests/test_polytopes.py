import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.core.errors import InfeasibleProblemError, InstanceSizeError, InvalidPointError
from src.core.polytopes import (
    BoxPolytope,
    CardinalityPolytope,
    KnapsackPolytope,
    MatroidPolytope,
    PartitionMatroidPolytope,
    build_polytope,
    graphic_independence,
    normalize_ground_set,
)
from src.core.setfn import GraphCut
from src.schemas.instance import KnapsackSpec, MatroidSpec

TRIANGLE_EDGES = [(0, 1), (1, 2), (0, 2)]


def graphic_triangle():
    return MatroidPolytope(3, graphic_independence(TRIANGLE_EDGES), name="graphic")


def all_polytopes():
    return [
        BoxPolytope(4),
        CardinalityPolytope(4, 2),
        PartitionMatroidPolytope(4, [[0, 2], [1, 3]], [1, 1]),
        KnapsackPolytope(4, [2.0, 3.0, 1.0, 4.0], 5.0),
        MatroidPolytope(4, graphic_independence([(0, 1), (1, 2), (0, 2), (2, 3)]), name="graphic"),
    ]


weights4 = st.lists(st.floats(min_value=-5.0, max_value=5.0), min_size=4, max_size=4).map(np.array)


class TestMaximizeLinear:
    def test_box_takes_positive_weights(self, box2):
        assert box2.maximize_linear([0.5, -1.0]).tolist() == [1.0, 0.0]

    def test_cardinality_ties_go_to_lower_id(self):
        polytope = CardinalityPolytope(4, 2)
        assert polytope.maximize_linear([1.0, 1.0, 1.0, 0.5]).tolist() == [1.0, 1.0, 0.0, 0.0]

    def test_cardinality_skips_non_positive(self, cardinality_k1):
        assert cardinality_k1.maximize_linear([0.0, -1.0, 0.0]).tolist() == [0.0, 0.0, 0.0]

    def test_partition_one_per_block(self, partition3):
        assert partition3.maximize_linear([1.0, 2.0, 0.5]).tolist() == [0.0, 1.0, 1.0]

    def test_knapsack_fractional_greedy(self):
        polytope = KnapsackPolytope(2, [2.0, 3.0], 4.0)
        assert polytope.maximize_linear([1.0, 3.0]).tolist() == pytest.approx([0.5, 1.0])

    def test_knapsack_free_items_first(self):
        polytope = KnapsackPolytope(3, [0.0, 2.0, 2.0], 1.0)
        assert polytope.maximize_linear([0.1, 5.0, 1.0]).tolist() == pytest.approx([1.0, 0.5, 0.0])

    def test_graphic_greedy(self):
        assert graphic_triangle().maximize_linear([3.0, 2.0, 1.0]).tolist() == [1.0, 1.0, 0.0]

    def test_rejects_wrong_shape(self, box2):
        with pytest.raises(InvalidPointError):
            box2.maximize_linear([1.0, 2.0, 3.0])

    @settings(max_examples=40, deadline=None)
    @given(weights4)
    def test_result_is_feasible_and_beats_every_vertex(self, w):
        for polytope in all_polytopes():
            vertex = polytope.maximize_linear(w)
            assert polytope.contains(vertex)
            assert np.all(vertex[w <= 0] == 0.0)
            best = float((polytope.enumerate_vertices() @ w).max())
            assert float(vertex @ w) >= best - 1e-9


class TestContains:
    def test_box(self, box2):
        assert box2.contains([1.0, 0.0])
        assert not box2.contains([1.2, 0.0])

    def test_cardinality(self, cardinality_k1):
        assert cardinality_k1.contains([0.5, 0.5, 0.0])
        assert not cardinality_k1.contains([0.6, 0.5, 0.0])

    def test_graphic_fractional_point(self):
        polytope = graphic_triangle()
        assert polytope.contains([2 / 3, 2 / 3, 2 / 3])
        assert not polytope.contains([1.0, 1.0, 1.0])

    def test_knapsack(self):
        polytope = KnapsackPolytope(2, [2.0, 3.0], 4.0)
        assert polytope.contains([1.0, 2 / 3])
        assert not polytope.contains([1.0, 1.0])

    def test_rank_table_of_triangle(self):
        ranks = graphic_triangle().rank_table()
        assert ranks[0b111] == 2
        assert ranks[0b011] == 2
        assert ranks[0b001] == 1
        assert ranks[0] == 0

    def test_rank_table_has_a_limit(self):
        polytope = MatroidPolytope(21, lambda mask: True)
        with pytest.raises(InstanceSizeError):
            polytope.rank_table()


class TestVertices:
    def test_knapsack_vertices(self):
        vertices = KnapsackPolytope(2, [2.0, 3.0], 4.0).enumerate_vertices()
        found = sorted(tuple(round(v, 9) for v in row) for row in vertices)
        assert found == sorted([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, round(2 / 3, 9)), (0.5, 1.0)])

    def test_partition_vertices(self, partition3):
        assert partition3.enumerate_vertices().shape == (6, 3)

    def test_every_vertex_is_inside(self):
        for polytope in all_polytopes():
            assert all(polytope.contains(row) for row in polytope.enumerate_vertices())

    def test_enumeration_limit(self):
        with pytest.raises(InstanceSizeError):
            BoxPolytope(17).enumerate_vertices()


class TestBuild:
    def test_uniform_matroid_is_cardinality(self):
        polytope = build_polytope(MatroidSpec(builtin="uniform", k=2), 5)
        assert isinstance(polytope, CardinalityPolytope)
        assert polytope.k == 2

    def test_graphic(self):
        polytope = build_polytope(MatroidSpec(builtin="graphic", edges=TRIANGLE_EDGES), 3)
        assert isinstance(polytope, MatroidPolytope)

    def test_knapsack(self):
        polytope = build_polytope(KnapsackSpec(weights=[1.0, 2.0], budget=1.5), 2)
        assert polytope.contains([1.0, 0.25])


class TestNormalize:
    def test_nothing_removed_keeps_objects(self, box2, single_edge_cut):
        problem = normalize_ground_set(single_edge_cut, box2)
        assert problem.instance is single_edge_cut
        assert problem.polytope is box2
        assert problem.removed == []

    def test_drops_oversized_items(self):
        instance = GraphCut(3, [(0, 1, 1.0), (1, 2, 1.0)])
        polytope = KnapsackPolytope(3, [1.0, 5.0, 1.0], 2.0)
        problem = normalize_ground_set(instance, polytope)
        assert problem.kept == [0, 2]
        assert problem.removed == [1]
        assert problem.instance.n == 2
        assert problem.polytope.n == 2
        assert problem.lift(np.array([0.5, 1.0])).tolist() == [0.5, 0.0, 1.0]

    def test_restricted_function_sees_original_ids(self):
        instance = GraphCut(3, [(0, 1, 1.0), (1, 2, 1.0)])
        problem = normalize_ground_set(instance, KnapsackPolytope(3, [1.0, 5.0, 1.0], 2.0))
        # {0} in the reduced problem is {0} in the original: cut weight 1
        assert problem.instance.evaluate([True, False]) == 1.0

    def test_nothing_fits(self):
        with pytest.raises(InfeasibleProblemError):
            normalize_ground_set(GraphCut(2, [(0, 1, 1.0)]), KnapsackPolytope(2, [3.0, 3.0], 1.0))


class TestGroundSetProperties:
    def test_cardinality_vertices(self):
        found = sorted(map(tuple, CardinalityPolytope(2, 1).enumerate_vertices().tolist()))
        assert found == [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0)]

    def test_box_vertices(self, box2):
        assert box2.enumerate_vertices().shape == (4, 2)

    def test_loop_is_removed(self):
        instance = GraphCut(3, [(0, 1, 1.0), (1, 2, 1.0)])
        polytope = MatroidPolytope(3, lambda mask: not mask[1], name="with-loop")
        problem = normalize_ground_set(instance, polytope)
        assert problem.removed == [1]
        assert problem.polytope.contains([1.0, 1.0])

    def test_normalization_is_idempotent(self):
        instance = GraphCut(3, [(0, 1, 1.0), (1, 2, 1.0)])
        once = normalize_ground_set(instance, KnapsackPolytope(3, [1.0, 5.0, 1.0], 2.0))
        twice = normalize_ground_set(once.instance, once.polytope)
        assert twice.removed == []
        assert twice.instance is once.instance

    def test_down_closed(self, rng):
        for polytope in all_polytopes():
            vertices = polytope.enumerate_vertices()
            for _ in range(200):
                weights = rng.dirichlet(np.ones(vertices.shape[0]))
                x = weights @ vertices
                assert polytope.contains(rng.random(4) * x)

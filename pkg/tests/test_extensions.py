import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.core.errors import InvalidPointError
from src.core.extensions import (
    MultilinearOracle,
    estimate_gradient,
    estimate_multilinear,
    estimate_weight,
    exact_multilinear,
    gradient_exact,
    lovasz_value,
    partial_derivative_exact,
    sample_random_subset,
)
from src.core.setfn import Coverage, GraphCut
from src.services.instance_service import build_problem, generate_instance

COVERAGE = Coverage(
    6,
    [[0, 1], [1, 2, 3], [3, 4], [0, 5], [2, 5, 6], [6, 7]],
    [1.0, 0.7, 1.3, 0.4, 2.1, 0.9, 1.6, 0.5],
)
CUT = GraphCut(5, [(0, 1, 1.0), (1, 2, 0.5), (2, 3, 2.0), (3, 4, 1.5), (0, 4, 0.25), (1, 3, 1.0)])

points6 = st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=6, max_size=6).map(np.array)
points5 = st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=5, max_size=5).map(np.array)


class TestRandomSubset:
    def test_indicator_returns_the_set(self, rng):
        x = np.array([1.0, 0.0, 1.0, 0.0])
        for _ in range(50):
            assert sample_random_subset(x, rng).tolist() == [True, False, True, False]

    def test_zero_point_is_empty(self, rng):
        assert not sample_random_subset(np.zeros(5), rng).any()

    def test_inclusion_frequency(self):
        gen = np.random.default_rng(7)
        draws = np.array([sample_random_subset(np.full(4, 0.3), gen) for _ in range(100_000)])
        assert np.all(np.abs(draws.mean(axis=0) - 0.3) <= 0.015)


class TestExactMultilinear:
    def test_indicator_gives_set_value(self, triangle_cut):
        assert exact_multilinear(triangle_cut, [1.0, 0.0, 0.0]) == pytest.approx(2.0, abs=1e-9)

    def test_single_edge_at_half(self, single_edge_cut):
        assert exact_multilinear(single_edge_cut, [0.5, 0.5]) == pytest.approx(0.5, abs=1e-9)

    def test_zero_point_gives_empty_set_value(self, coverage6):
        assert exact_multilinear(coverage6, np.zeros(6)) == pytest.approx(0.0, abs=1e-9)

    def test_rejects_points_outside_the_cube(self, single_edge_cut):
        with pytest.raises(InvalidPointError):
            exact_multilinear(single_edge_cut, [1.5, 0.0])
        with pytest.raises(InvalidPointError):
            exact_multilinear(single_edge_cut, [0.5])


class TestEstimateMultilinear:
    def test_indicator_has_zero_error(self, triangle_cut):
        estimate = estimate_multilinear(triangle_cut, [0.0, 1.0, 0.0], 50, seed=1)
        assert estimate.mean == 2.0
        assert estimate.std_error == 0.0
        assert estimate.sample_count == 50

    def test_two_samples_at_interior_point_have_spread(self):
        errors = [estimate_multilinear(COVERAGE, np.full(6, 0.5), 2, seed=s).std_error for s in range(20)]
        assert any(error > 0.0 for error in errors)

    def test_needs_two_samples(self, single_edge_cut):
        with pytest.raises(ValueError):
            estimate_multilinear(single_edge_cut, [0.5, 0.5], 1, seed=0)

    def test_reproducible(self):
        first = estimate_multilinear(CUT, np.full(5, 0.4), 5000, seed=9)
        second = estimate_multilinear(CUT, np.full(5, 0.4), 5000, seed=9)
        assert first == second

    def test_within_four_standard_errors(self):
        problem = build_problem(generate_instance("cut", 10, {"p": 0.5}, seed=5))
        x = np.linspace(0.1, 0.9, 10)
        exact = exact_multilinear(problem.instance, x)
        hits = 0
        for seed in range(20):
            estimate = estimate_multilinear(problem.instance, x, 10_000, seed=seed)
            hits += abs(estimate.mean - exact) <= 4 * estimate.std_error
        assert hits >= 19


class TestLovasz:
    def test_indicator(self, triangle_cut):
        assert lovasz_value(triangle_cut, [1.0, 1.0, 0.0]) == pytest.approx(2.0, abs=1e-9)

    def test_single_edge_at_half_is_zero(self, single_edge_cut):
        assert lovasz_value(single_edge_cut, [0.5, 0.5]) == pytest.approx(0.0, abs=1e-9)

    def test_zero_point(self, coverage6):
        assert lovasz_value(coverage6, np.zeros(6)) == pytest.approx(0.0, abs=1e-9)

    def test_integrates_threshold_sets(self, single_edge_cut):
        # T = {0, 1} for lam <= 0.25, {0} up to 0.75, empty above
        assert lovasz_value(single_edge_cut, [0.75, 0.25]) == pytest.approx(0.5, abs=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(points6)
    def test_multilinear_dominates_lovasz(self, x):
        assert exact_multilinear(COVERAGE, x) >= lovasz_value(COVERAGE, x) - 1e-9

    @settings(max_examples=60, deadline=None)
    @given(points5)
    def test_dominance_on_cut(self, x):
        assert exact_multilinear(CUT, x) >= lovasz_value(CUT, x) - 1e-9


class TestDerivatives:
    def test_cut_partial_vanishes_at_half(self, single_edge_cut):
        assert partial_derivative_exact(single_edge_cut, [0.3, 0.5], 0) == pytest.approx(0.0, abs=1e-9)

    def test_monotone_coverage_has_non_negative_gradient(self, rng):
        for _ in range(20):
            assert np.all(gradient_exact(COVERAGE, rng.random(6)) >= -1e-12)

    def test_batched_gradient_matches_partials(self, rng):
        x = rng.random(5)
        grad = gradient_exact(CUT, x)
        for u in range(5):
            assert grad[u] == pytest.approx(partial_derivative_exact(CUT, x, u), abs=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(points6)
    def test_gradient_sweep_matches_partials_on_every_axis(self, x):
        oracle = MultilinearOracle(COVERAGE)
        value, grad = oracle.value_and_gradient(x)
        assert value == pytest.approx(oracle.values(x[None, :])[0], abs=1e-9)
        for u in range(6):
            assert grad[u] == pytest.approx(partial_derivative_exact(COVERAGE, x, u), abs=1e-9)

    def test_gradient_at_the_origin_is_singleton_values(self):
        grad = gradient_exact(COVERAGE, np.zeros(6))
        singles = [COVERAGE.evaluate(np.eye(6, dtype=bool)[u]) for u in range(6)]
        assert grad.tolist() == pytest.approx(singles, abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(points5, st.integers(min_value=0, max_value=4))
    def test_observation_identity(self, x, u):
        raised = x.copy()
        raised[u] = 1.0
        lhs = (1.0 - x[u]) * partial_derivative_exact(CUT, x, u)
        assert lhs == pytest.approx(exact_multilinear(CUT, raised) - exact_multilinear(CUT, x), abs=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(points6, st.integers(min_value=0, max_value=5), st.floats(min_value=0.0, max_value=1.0))
    def test_affine_in_each_coordinate(self, x, u, t):
        low, high, mid = x.copy(), x.copy(), x.copy()
        low[u], high[u], mid[u] = 0.0, 1.0, t
        expected = (1.0 - t) * exact_multilinear(COVERAGE, low) + t * exact_multilinear(COVERAGE, high)
        assert exact_multilinear(COVERAGE, mid) == pytest.approx(expected, abs=1e-9)


class TestSampledWeights:
    def test_zero_point_gives_singleton_marginal(self, coverage6, rng):
        expected = coverage6.evaluate([False, True, False, False, False, False])
        assert estimate_weight(coverage6, np.zeros(6), 1, 7, rng) == expected

    def test_deterministic_complement(self, single_edge_cut, rng):
        assert estimate_weight(single_edge_cut, [0.0, 1.0], 0, 25, rng) == -1.0

    def test_close_to_enumeration(self):
        problem = build_problem(generate_instance("coverage", 8, seed=4))
        f = problem.instance
        x = np.linspace(0.2, 0.7, 8)
        u = 3
        exact = (1.0 - x[u]) * partial_derivative_exact(f, x, u)
        estimate = estimate_weight(f, x, u, 10_000, np.random.default_rng(3))
        bound = float(np.abs(f.value_table()).max())
        assert abs(estimate - exact) <= 4 * bound / np.sqrt(10_000)

    def test_gradient_estimate(self):
        x = np.array([0.3, 0.6, 0.5, 0.2, 0.8])
        means, errors = estimate_gradient(CUT, x, 4000, np.random.default_rng(11))
        exact = gradient_exact(CUT, x)
        assert np.all(np.abs(means - exact) <= 4 * errors + 1e-9)

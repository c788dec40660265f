"""
Fractional local search over a down-closed polytope.

Frank-Wolfe ascent on the multilinear extension with Armijo backtracking,
stopped once the stationarity gap max_{y in P} (y - x) . grad F(x) falls
below epsilon * scale. A small gap gives the exchange inequality
2 F(x) >= F(x & y) + F(x | y) - 2 epsilon scale for every y in P, because
F is concave along directions of constant sign.
"""

import logging
from typing import Optional, Tuple

import numpy as np

from src.core.errors import InstanceSizeError
from src.core.extensions import MultilinearOracle, as_point, estimate_gradient
from src.core.polytopes import VERTEX_ENUMERATION_MAX_N, Polytope
from src.core.rng import KeyedStreams
from src.core.setfn import SetFunctionInstance
from src.schemas.algorithm import LocalSearchConfig
from src.schemas.results import ExchangeVerdict, LocalSearchResult

logger = logging.getLogger(__name__)

VERDICT_TOLERANCE = 1e-9
# sampled mode widens the stopping target by this many standard errors
CONFIDENCE_Z = 4.0


def surrogate_scale(instance: SetFunctionInstance) -> float:
    """n * max_u f({u}), an upper bound on f(OPT) - f(empty) for submodular f."""
    return float(instance.n * instance.singleton_values().max())


def stationarity_gap(instance: SetFunctionInstance, polytope: Polytope, x) -> float:
    point = as_point(x, instance.n)
    grad = MultilinearOracle(instance).gradient(point)
    vertex = polytope.maximize_linear(grad)
    return float((vertex - point) @ grad)


class _ExactModel:
    def __init__(self, instance: SetFunctionInstance):
        self.oracle = MultilinearOracle(instance)

    def state(self, x: np.ndarray, iteration: int) -> Tuple[float, np.ndarray, float]:
        value, grad = self.oracle.value_and_gradient(x)
        return value, grad, 0.0

    def compare(self, x: np.ndarray, candidate: np.ndarray, iteration: int) -> Tuple[float, float]:
        return self.oracle.value(x), self.oracle.value(candidate)


class _SampledModel:
    """Gradient and value estimates on keyed streams; comparisons share their draws."""

    def __init__(self, instance: SetFunctionInstance, samples: int, streams: KeyedStreams):
        self.instance = instance
        self.samples = max(2, samples)
        self.streams = streams
        self._trial = 0

    def state(self, x, iteration):
        gen = self.streams.generator("local-search-gradient", iteration)
        grad, errors = estimate_gradient(self.instance, x, self.samples, gen)
        value = self._mean(x, self.streams.generator("local-search-value", iteration))
        return value, grad, errors

    def _mean(self, x, gen) -> float:
        draws = gen.random((self.samples, self.instance.n)) < x
        return float(self.instance.evaluate_many(draws).mean())

    def compare(self, x, candidate, iteration):
        self._trial += 1
        uniforms = self.streams.generator("local-search-compare", iteration, self._trial).random(
            (self.samples, self.instance.n)
        )
        values = self.instance.evaluate_many(np.concatenate([uniforms < x, uniforms < candidate]))
        return float(values[: self.samples].mean()), float(values[self.samples:].mean())


def fractional_local_search(
    instance: SetFunctionInstance,
    polytope: Polytope,
    config: LocalSearchConfig = LocalSearchConfig(),
    seed: int = 0,
    start: Optional[np.ndarray] = None,
) -> LocalSearchResult:
    n = instance.n
    scale = config.scale if config.scale is not None else surrogate_scale(instance)
    target = config.epsilon * scale
    if config.mode.is_exact:
        model = _ExactModel(instance)
    else:
        model = _SampledModel(instance, config.mode.samples, KeyedStreams(seed))

    x = np.zeros(n) if start is None else as_point(start, n)
    step = config.step
    best = None
    trace = []
    iteration = 0
    converged = False

    while True:
        value, grad, errors = model.state(x, iteration)
        vertex = polytope.maximize_linear(grad)
        direction = vertex - x
        gap = float(direction @ grad)
        radius = CONFIDENCE_Z * float(np.sqrt(np.sum(direction ** 2 * errors ** 2)))
        trace.append(value)
        if best is None or gap < best[0]:
            best = (gap, x.copy(), value)
        logger.debug("local search iteration %d: value %.6g gap %.3g step %.3g", iteration, value, gap, step)
        if gap <= target + radius:
            converged = True
            best = (gap, x.copy(), value)
            break
        if iteration >= config.max_iterations:
            break

        moved = False
        while step >= config.min_step:
            candidate = np.clip(x + step * direction, 0.0, 1.0)
            current, proposed = model.compare(x, candidate, iteration)
            if proposed >= current + config.armijo * step * gap:
                moved = True
                break
            step /= 2.0
        if not moved:
            logger.info("Local search stalled at iteration %d with gap %.3g", iteration, gap)
            break
        x = candidate
        step = min(1.0, 2.0 * step)
        iteration += 1

    gap, x_best, value = best
    if not converged:
        logger.warning(
            "Local search stopped without reaching the target: gap %.3g > %.3g after %d iterations",
            gap, target, iteration,
        )
    return LocalSearchResult(
        x=x_best, gap=gap, iterations=iteration, value=value, converged=converged,
        epsilon=config.epsilon, scale=scale, target=target, value_trace=trace,
    )


def check_exchange_inequality(
    instance: SetFunctionInstance,
    polytope: Polytope,
    x,
    epsilon: float,
    scale: Optional[float] = None,
) -> ExchangeVerdict:
    """2F(x) - F(x & y) - F(x | y) + 2 epsilon scale >= 0 for every vertex y."""
    if instance.n > VERTEX_ENUMERATION_MAX_N:
        raise InstanceSizeError("exchange inequality check", instance.n, VERTEX_ENUMERATION_MAX_N)
    point = as_point(x, instance.n)
    scale = surrogate_scale(instance) if scale is None else float(scale)
    vertices = polytope.enumerate_vertices()
    oracle = MultilinearOracle(instance)
    value = oracle.value(point)
    meets = oracle.values(np.minimum(vertices, point))
    joins = oracle.values(np.maximum(vertices, point))
    slacks = 2.0 * value - meets - joins + 2.0 * epsilon * scale
    worst = int(np.argmin(slacks))
    passed = bool(slacks[worst] >= -VERDICT_TOLERANCE * max(1.0, scale))
    return ExchangeVerdict(
        passed=passed,
        worst_slack=float(slacks[worst]),
        witness=[float(v) for v in vertices[worst]],
        epsilon=epsilon,
        scale=scale,
        vertices_checked=int(vertices.shape[0]),
    )

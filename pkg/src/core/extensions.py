"""
Continuous extensions of a set function.

The multilinear extension F(x) = E[f(R(x))], where R(x) contains each
element u independently with probability x_u, is evaluated exactly from the
2^n value table or estimated by sampling. The Lovasz extension integrates f
over the threshold sets {u : x_u >= lam}.
"""

import logging
from typing import Tuple

import numpy as np

from src.core.errors import InvalidPointError
from src.core.rng import KeyedStreams
from src.core.setfn import SetFunctionInstance
from src.schemas.results import SampleEstimate

logger = logging.getLogger(__name__)

SAMPLE_BLOCK = 4096
POINT_TOLERANCE = 1e-12


def as_point(x, n: int) -> np.ndarray:
    """Validate a point of [0,1]^n and return a float copy."""
    point = np.array(x, dtype=np.float64, copy=True)
    if point.shape != (n,):
        raise InvalidPointError(f"point must have shape ({n},), got {point.shape}")
    if not np.all(np.isfinite(point)):
        raise InvalidPointError("point has non-finite coordinates")
    if np.any(point < -POINT_TOLERANCE) or np.any(point > 1.0 + POINT_TOLERANCE):
        raise InvalidPointError(f"point leaves [0,1]: min {point.min()}, max {point.max()}")
    return np.clip(point, 0.0, 1.0)


def sample_random_subset(x: np.ndarray, gen: np.random.Generator) -> np.ndarray:
    """R(x): element u is included with probability x[u]."""
    return gen.random(x.shape[0]) < x


# === Exact evaluation ===
class MultilinearOracle:
    """
    Exact F and its gradient from the value table.

    The table is viewed as a tensor with one axis of length 2 per element,
    the last axis holding element 0. Contracting an axis with (1 - x_u, x_u)
    averages over element u; contracting it with (-1, 1) differentiates.
    """

    def __init__(self, instance: SetFunctionInstance):
        self.n = instance.n
        self.tensor = instance.value_table().reshape((2,) * self.n)

    def _prefixes(self, x: np.ndarray):
        # prefixes[k]: elements 0..k-1 averaged out, element k on the last axis
        x = np.asarray(x, dtype=np.float64)
        pairs = np.stack((1.0 - x, x), axis=1)
        prefixes = [self.tensor]
        for u in range(self.n):
            prefixes.append(prefixes[-1] @ pairs[u])
        return prefixes, pairs

    def value(self, x: np.ndarray) -> float:
        return float(self._prefixes(x)[0][-1])

    def value_and_gradient(self, x: np.ndarray) -> Tuple[float, np.ndarray]:
        prefixes, pairs = self._prefixes(x)
        grad = np.empty(self.n, dtype=np.float64)
        # product distribution of elements n-1..u+1, element u+1 varying fastest
        weights = np.ones(1)
        for u in range(self.n - 1, -1, -1):
            slope = prefixes[u][..., 1] - prefixes[u][..., 0]
            grad[u] = np.ravel(slope) @ weights
            weights = np.outer(weights, pairs[u]).ravel()
        return float(prefixes[-1]), grad

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self.value_and_gradient(x)[1]

    def values(self, points: np.ndarray, chunk: int = 256) -> np.ndarray:
        """F at every row of an (m, n) array."""
        table = self.tensor.reshape(-1)
        out = np.empty(points.shape[0], dtype=np.float64)
        for start in range(0, points.shape[0], chunk):
            block = points[start:start + chunk]
            # probabilities of every subset, code order (bit u is element u)
            probs = np.ones((block.shape[0], 1))
            for u in range(self.n):
                column = block[:, u:u + 1]
                probs = np.concatenate([probs * (1.0 - column), probs * column], axis=1)
            out[start:start + block.shape[0]] = probs @ table
        return out


def exact_multilinear(instance: SetFunctionInstance, x) -> float:
    return MultilinearOracle(instance).value(as_point(x, instance.n))


def gradient_exact(instance: SetFunctionInstance, x) -> np.ndarray:
    """All n partial derivatives of F in one sweep over the value table."""
    return MultilinearOracle(instance).gradient(as_point(x, instance.n))


def partial_derivative_exact(instance: SetFunctionInstance, x, u: int) -> float:
    point = as_point(x, instance.n)
    oracle = MultilinearOracle(instance)
    high, low = point.copy(), point.copy()
    high[u], low[u] = 1.0, 0.0
    return oracle.value(high) - oracle.value(low)


def lovasz_value(instance: SetFunctionInstance, x) -> float:
    point = as_point(x, instance.n)
    levels = np.unique(point[point > 0.0])
    masks = [point >= level for level in levels]
    masks.append(np.zeros(instance.n, dtype=bool))
    values = instance.evaluate_many(np.array(masks))
    widths = np.diff(np.concatenate(([0.0], levels)))
    top = levels[-1] if levels.size else 0.0
    return float(widths @ values[:-1] + (1.0 - top) * values[-1])


# === Sampled evaluation ===
def _mean_and_error(values: np.ndarray) -> Tuple[float, float]:
    if np.all(values == values[0]):
        return float(values[0]), 0.0
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(values.shape[0]))


def estimate_multilinear(instance: SetFunctionInstance, x, sample_count: int, seed: int) -> SampleEstimate:
    """Average of f over sample_count independent draws of R(x)."""
    if sample_count < 2:
        raise ValueError(f"sample_count must be at least 2, got {sample_count}")
    point = as_point(x, instance.n)
    streams = KeyedStreams(seed)
    values = np.empty(sample_count, dtype=np.float64)
    for block, start in enumerate(range(0, sample_count, SAMPLE_BLOCK)):
        size = min(SAMPLE_BLOCK, sample_count - start)
        draws = streams.generator("multilinear", block).random((size, instance.n)) < point
        values[start:start + size] = instance.evaluate_many(draws)
    mean, error = _mean_and_error(values)
    return SampleEstimate(mean=mean, std_error=error, sample_count=sample_count, seed=seed)


def estimate_weight(instance: SetFunctionInstance, x, u: int, r: int, gen: np.random.Generator) -> float:
    """Average of the marginal f(u | R(x)) over r draws; draws containing u contribute 0."""
    if r < 1:
        raise ValueError(f"r must be at least 1, got {r}")
    point = as_point(x, instance.n)
    draws = gen.random((r, instance.n)) < point
    marginals = np.zeros(r, dtype=np.float64)
    outside = ~draws[:, u]
    if outside.any():
        base = draws[outside]
        plus = base.copy()
        plus[:, u] = True
        marginals[outside] = instance.evaluate_many(plus) - instance.evaluate_many(base)
    return _mean_and_error(marginals)[0]


def estimate_gradient(
    instance: SetFunctionInstance, x, r: int, gen: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Unbiased gradient estimate E[f(R + u) - f(R - u)] with per-coordinate
    standard errors, all coordinates sharing the same r draws.
    """
    if r < 2:
        raise ValueError(f"r must be at least 2, got {r}")
    point = as_point(x, instance.n)
    draws = gen.random((r, instance.n)) < point
    means = np.empty(instance.n, dtype=np.float64)
    errors = np.empty(instance.n, dtype=np.float64)
    for u in range(instance.n):
        plus, minus = draws.copy(), draws.copy()
        plus[:, u], minus[:, u] = True, False
        diffs = instance.evaluate_many(plus) - instance.evaluate_many(minus)
        means[u], errors[u] = _mean_and_error(diffs)
    return means, errors

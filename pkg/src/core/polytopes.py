"""
Down-closed constraint polytopes with exact linear maximization.

Every kind answers two questions: is a point inside, and which vertex
maximizes a linear objective. Coordinates with non-positive weight are
always 0 in the returned vertex and ties go to the lowest element id.
"""

import logging
from abc import ABC, abstractmethod
from typing import Callable, List, NamedTuple, Sequence

import networkx as nx
import numpy as np

from src.core.errors import InfeasibleProblemError, InstanceSizeError, InvalidPointError, UnknownKindError
from src.core.setfn import Restricted, SetFunctionInstance, all_masks
from src.schemas.instance import (
    BoxSpec,
    CardinalitySpec,
    KnapsackSpec,
    MatroidSpec,
    PartitionMatroidSpec,
)

logger = logging.getLogger(__name__)

MEMBERSHIP_TOLERANCE = 1e-9
VERTEX_ENUMERATION_MAX_N = 16
RANK_TABLE_MAX_N = 20


def _descending(w: np.ndarray, ids: np.ndarray) -> np.ndarray:
    """ids ordered by decreasing weight, lower id first among equals."""
    ids = np.sort(ids)
    return ids[np.argsort(-w[ids], kind="stable")]


class Polytope(ABC):
    kind = "polytope"

    def __init__(self, n: int):
        self.n = int(n)

    def _check_vector(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.n,):
            raise InvalidPointError(f"vector must have shape ({self.n},), got {v.shape}")
        return v

    def _in_box(self, x: np.ndarray, tol: float) -> bool:
        return bool(np.all(x >= -tol) and np.all(x <= 1.0 + tol))

    @abstractmethod
    def contains(self, x, tol: float = MEMBERSHIP_TOLERANCE) -> bool:
        ...

    @abstractmethod
    def maximize_linear(self, w) -> np.ndarray:
        ...

    @abstractmethod
    def restrict(self, keep: Sequence[int]) -> "Polytope":
        """The face of the polytope on the coordinates in keep."""

    def feasible_sets(self, masks: np.ndarray) -> np.ndarray:
        """Which rows of a boolean (m, n) array are sets S with 1_S in P."""
        return np.array([self.contains(row.astype(np.float64)) for row in masks], dtype=bool)

    def enumerate_vertices(self) -> np.ndarray:
        """All vertices as rows of an (m, n) array; 0/1 points for matroid kinds."""
        if self.n > VERTEX_ENUMERATION_MAX_N:
            raise InstanceSizeError("vertex enumeration", self.n, VERTEX_ENUMERATION_MAX_N)
        masks = all_masks(self.n)
        return masks[self.feasible_sets(masks)].astype(np.float64)


class BoxPolytope(Polytope):
    kind = "box"

    def contains(self, x, tol=MEMBERSHIP_TOLERANCE):
        return self._in_box(self._check_vector(x), tol)

    def maximize_linear(self, w):
        return (self._check_vector(w) > 0).astype(np.float64)

    def feasible_sets(self, masks):
        return np.ones(masks.shape[0], dtype=bool)

    def restrict(self, keep):
        return BoxPolytope(len(keep))


class CardinalityPolytope(Polytope):
    kind = "cardinality"

    def __init__(self, n: int, k: int):
        super().__init__(n)
        self.k = int(k)

    def contains(self, x, tol=MEMBERSHIP_TOLERANCE):
        x = self._check_vector(x)
        return self._in_box(x, tol) and float(x.sum()) <= self.k + tol

    def maximize_linear(self, w):
        w = self._check_vector(w)
        vertex = np.zeros(self.n)
        order = _descending(w, np.arange(self.n))
        chosen = [u for u in order if w[u] > 0][: self.k]
        vertex[chosen] = 1.0
        return vertex

    def feasible_sets(self, masks):
        return masks.sum(axis=1) <= self.k

    def restrict(self, keep):
        return CardinalityPolytope(len(keep), self.k)


class PartitionMatroidPolytope(Polytope):
    kind = "partition-matroid"

    def __init__(self, n: int, blocks: Sequence[Sequence[int]], capacities: Sequence[int]):
        super().__init__(n)
        self.blocks = [np.array(sorted(block), dtype=np.int64) for block in blocks]
        self.capacities = [int(c) for c in capacities]

    def contains(self, x, tol=MEMBERSHIP_TOLERANCE):
        x = self._check_vector(x)
        if not self._in_box(x, tol):
            return False
        return all(float(x[block].sum()) <= cap + tol for block, cap in zip(self.blocks, self.capacities))

    def maximize_linear(self, w):
        w = self._check_vector(w)
        vertex = np.zeros(self.n)
        for block, cap in zip(self.blocks, self.capacities):
            chosen = [u for u in _descending(w, block) if w[u] > 0][:cap]
            vertex[chosen] = 1.0
        return vertex

    def feasible_sets(self, masks):
        ok = np.ones(masks.shape[0], dtype=bool)
        for block, cap in zip(self.blocks, self.capacities):
            ok &= masks[:, block].sum(axis=1) <= cap
        return ok

    def restrict(self, keep):
        position = {int(u): i for i, u in enumerate(keep)}
        blocks = [[position[int(u)] for u in block if int(u) in position] for block in self.blocks]
        return PartitionMatroidPolytope(len(keep), blocks, self.capacities)


class MatroidPolytope(Polytope):
    """
    Matroid polytope given by an independence oracle over boolean masks.

    Linear maximization is the greedy algorithm over positive weights.
    Membership compares x(S) with rank(S) for every S, so it needs n <= 20.
    """

    kind = "matroid"

    def __init__(self, n: int, independent: Callable[[np.ndarray], bool], name: str = "matroid"):
        super().__init__(n)
        self.independent = independent
        self.name = name
        self._ranks = None

    def maximize_linear(self, w):
        w = self._check_vector(w)
        chosen = np.zeros(self.n, dtype=bool)
        for u in _descending(w, np.arange(self.n)):
            if w[u] <= 0:
                break
            chosen[u] = True
            if not self.independent(chosen.copy()):
                chosen[u] = False
        return chosen.astype(np.float64)

    def rank_table(self) -> np.ndarray:
        """rank(S) for every S, indexed by subset code."""
        if self._ranks is None:
            if self.n > RANK_TABLE_MAX_N:
                raise InstanceSizeError("matroid rank table", self.n, RANK_TABLE_MAX_N)
            masks = all_masks(self.n)
            sizes = masks.sum(axis=1)
            independent = self.feasible_sets(masks)
            codes = np.arange(1 << self.n, dtype=np.int64)
            ranks = np.zeros(1 << self.n, dtype=np.int64)
            for size in range(1, self.n + 1):
                layer = codes[sizes == size]
                best = np.zeros(layer.shape[0], dtype=np.int64)
                for u in range(self.n):
                    has_u = ((layer >> u) & 1) == 1
                    best = np.where(has_u, np.maximum(best, ranks[layer ^ (1 << u)]), best)
                ranks[layer] = np.where(independent[layer], size, best)
            self._ranks = ranks
        return self._ranks

    def contains(self, x, tol=MEMBERSHIP_TOLERANCE):
        x = self._check_vector(x)
        if not self._in_box(x, tol):
            return False
        loads = all_masks(self.n).astype(np.float64) @ x
        return bool(np.all(loads <= self.rank_table() + tol))

    def feasible_sets(self, masks):
        return np.array([bool(self.independent(row.copy())) for row in masks], dtype=bool)

    def restrict(self, keep):
        keep = np.asarray(keep, dtype=np.int64)
        parent_n = self.n

        def lifted(mask: np.ndarray) -> bool:
            full = np.zeros(parent_n, dtype=bool)
            full[keep] = mask
            return self.independent(full)

        return MatroidPolytope(len(keep), lifted, self.name)


def graphic_independence(edges: Sequence) -> Callable[[np.ndarray], bool]:
    """Edge sets that form a forest; element u is edges[u]."""
    edges = [(int(a), int(b)) for a, b in edges]
    nodes = sorted({v for edge in edges for v in edge})

    def independent(mask: np.ndarray) -> bool:
        graph = nx.MultiGraph()
        graph.add_nodes_from(nodes)
        graph.add_edges_from(edges[u] for u in np.flatnonzero(mask))
        return nx.is_forest(graph)

    return independent


class KnapsackPolytope(Polytope):
    kind = "knapsack"

    def __init__(self, n: int, weights: Sequence[float], budget: float):
        super().__init__(n)
        self.weights = np.asarray(weights, dtype=np.float64)
        self.budget = float(budget)

    def _slack(self) -> float:
        return MEMBERSHIP_TOLERANCE * max(1.0, self.budget)

    def contains(self, x, tol=MEMBERSHIP_TOLERANCE):
        x = self._check_vector(x)
        return self._in_box(x, tol) and float(self.weights @ x) <= self.budget + tol * max(1.0, self.budget)

    def maximize_linear(self, w):
        """Fractional greedy by value density; free items first."""
        w = self._check_vector(w)
        vertex = np.zeros(self.n)
        positive = np.flatnonzero(w > 0)
        free = positive[self.weights[positive] == 0]
        vertex[free] = 1.0
        paid = positive[self.weights[positive] > 0]
        density = np.zeros(self.n)
        density[paid] = w[paid] / self.weights[paid]
        remaining = self.budget
        for u in _descending(density, paid):
            if remaining <= 0:
                break
            take = min(1.0, remaining / self.weights[u])
            vertex[u] = take
            remaining -= take * self.weights[u]
        return vertex

    def feasible_sets(self, masks):
        return masks.astype(np.float64) @ self.weights <= self.budget + self._slack()

    def enumerate_vertices(self):
        """Feasible 0/1 points plus points with one fractional coordinate on the budget."""
        if self.n > VERTEX_ENUMERATION_MAX_N:
            raise InstanceSizeError("vertex enumeration", self.n, VERTEX_ENUMERATION_MAX_N)
        masks = all_masks(self.n)
        feasible = masks[self.feasible_sets(masks)]
        vertices: List[np.ndarray] = [feasible.astype(np.float64)]
        loads = feasible.astype(np.float64) @ self.weights
        for j in np.flatnonzero(self.weights > 0):
            fraction = (self.budget - loads) / self.weights[j]
            rows = ~feasible[:, j] & (fraction > MEMBERSHIP_TOLERANCE) & (fraction < 1.0 - MEMBERSHIP_TOLERANCE)
            if rows.any():
                extra = feasible[rows].astype(np.float64)
                extra[:, j] = fraction[rows]
                vertices.append(extra)
        return np.concatenate(vertices, axis=0)

    def restrict(self, keep):
        return KnapsackPolytope(len(keep), self.weights[np.asarray(keep, dtype=np.int64)], self.budget)


def build_polytope(spec, n: int) -> Polytope:
    if isinstance(spec, BoxSpec):
        return BoxPolytope(n)
    if isinstance(spec, CardinalitySpec):
        return CardinalityPolytope(n, spec.k)
    if isinstance(spec, PartitionMatroidSpec):
        return PartitionMatroidPolytope(n, spec.blocks, spec.capacities)
    if isinstance(spec, KnapsackSpec):
        return KnapsackPolytope(n, spec.weights, spec.budget)
    if isinstance(spec, MatroidSpec):
        if spec.builtin == "uniform":
            return CardinalityPolytope(n, spec.k)
        if spec.builtin == "partition":
            return PartitionMatroidPolytope(n, spec.blocks, spec.capacities)
        return MatroidPolytope(n, graphic_independence(spec.edges), name="graphic")
    raise UnknownKindError(f"unsupported constraint spec: {type(spec).__name__}")


# === Ground-set normalization ===
class NormalizedProblem(NamedTuple):
    instance: SetFunctionInstance
    polytope: Polytope
    kept: List[int]
    removed: List[int]
    original_n: int

    def lift(self, x: np.ndarray) -> np.ndarray:
        """Map a point of the reduced problem back to original element ids."""
        full = np.zeros(self.original_n)
        full[self.kept] = x
        return full


def normalize_ground_set(instance: SetFunctionInstance, polytope: Polytope) -> NormalizedProblem:
    """Drop every element u with 1_u outside the polytope."""
    singletons = np.eye(instance.n, dtype=bool)
    usable = polytope.feasible_sets(singletons)
    kept = [int(u) for u in np.flatnonzero(usable)]
    removed = [int(u) for u in np.flatnonzero(~usable)]
    if not removed:
        return NormalizedProblem(instance, polytope, kept, removed, instance.n)
    if not kept:
        raise InfeasibleProblemError("no element fits the constraint on its own")
    logger.info("Removed %d element(s) that cannot be selected alone: %s", len(removed), removed)
    return NormalizedProblem(Restricted(instance, kept), polytope.restrict(kept), kept, removed, instance.n)

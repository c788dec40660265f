"""
Set-function value oracles.

Every function maps a subset of the ground set {0, ..., n-1} to a
non-negative real. Subsets are boolean masks of length n; batches of
subsets are 2-D boolean arrays with one row per subset. A subset's integer
code is sum(2**u for u in S), so code order is the order used for value
tables and for tie-breaking.
"""

import logging
import threading
from abc import ABC, abstractmethod
from typing import Callable, Iterable, List, Sequence

import numpy as np

from src.core.errors import InstanceSizeError, InvalidPointError, UnknownKindError
from src.schemas.instance import (
    CoverageSpec,
    DirectedCutSpec,
    ExplicitTableSpec,
    FacilityLocationSpec,
    GraphCutSpec,
)
from src.schemas.results import SubmodularityVerdict

logger = logging.getLogger(__name__)

VALUE_TABLE_MAX_N = 25
SUBMODULARITY_CHECK_MAX_N = 16
TABLE_CHUNK = 1 << 14
# facility location materializes rows x clients x facilities
FACILITY_CHUNK_ENTRIES = 1 << 22


# === Subset helpers ===
def row_sums(terms: np.ndarray) -> np.ndarray:
    """Left-to-right sum of each row; a row's total does not depend on the batch it is in."""
    if terms.shape[1] == 0:
        return np.zeros(terms.shape[0], dtype=np.float64)
    return np.cumsum(terms, axis=1)[:, -1]


def masks_from_codes(codes: np.ndarray, n: int) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    return ((codes[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(bool)


def all_masks(n: int) -> np.ndarray:
    """Every subset of an n-element ground set, row i having code i."""
    return masks_from_codes(np.arange(1 << n, dtype=np.int64), n)


def code_of(mask: np.ndarray) -> int:
    return int(np.dot(np.asarray(mask, dtype=np.int64), 1 << np.arange(len(mask), dtype=np.int64)))


def mask_from_ids(ids: Iterable[int], n: int) -> np.ndarray:
    mask = np.zeros(n, dtype=bool)
    mask[list(ids)] = True
    return mask


def ids_of(mask: np.ndarray) -> List[int]:
    return [int(u) for u in np.flatnonzero(mask)]


# === Value oracle ===
class SetFunctionInstance(ABC):
    """A value oracle with per-instance call accounting."""

    kind = "oracle"

    def __init__(self, n: int):
        if n < 1:
            raise ValueError(f"ground set must be non-empty, got n = {n}")
        self.n = int(n)
        self._eval_count = 0
        self._count_lock = threading.Lock()
        self._table = None

    @abstractmethod
    def _values(self, masks: np.ndarray) -> np.ndarray:
        """f on each row of a (m, n) boolean array. Does not count calls."""

    @property
    def eval_count(self) -> int:
        return self._eval_count

    def reset_count(self) -> None:
        with self._count_lock:
            self._eval_count = 0

    def _count(self, calls: int) -> None:
        with self._count_lock:
            self._eval_count += calls

    def _as_mask(self, S) -> np.ndarray:
        mask = np.asarray(S, dtype=bool)
        if mask.shape != (self.n,):
            raise InvalidPointError(f"subset mask must have shape ({self.n},), got {mask.shape}")
        return mask

    def evaluate(self, S) -> float:
        mask = self._as_mask(S)
        self._count(1)
        return float(self._values(mask[None, :])[0])

    def evaluate_many(self, masks) -> np.ndarray:
        masks = np.asarray(masks, dtype=bool)
        if masks.ndim != 2 or masks.shape[1] != self.n:
            raise InvalidPointError(f"subset batch must have shape (m, {self.n}), got {masks.shape}")
        self._count(masks.shape[0])
        if masks.shape[0] == 0:
            return np.zeros(0)
        return np.asarray(self._values(masks), dtype=np.float64)

    def marginal(self, u: int, S) -> float:
        mask = self._as_mask(S)
        if not 0 <= u < self.n:
            raise InvalidPointError(f"element {u} is outside 0..{self.n - 1}")
        if mask[u]:
            return 0.0
        plus = mask.copy()
        plus[u] = True
        return self.evaluate(plus) - self.evaluate(mask)

    def value_table(self) -> np.ndarray:
        """f on all 2^n subsets indexed by code; built once and counted once."""
        if self._table is None:
            if self.n > VALUE_TABLE_MAX_N:
                raise InstanceSizeError("value table", self.n, VALUE_TABLE_MAX_N)
            size = 1 << self.n
            table = np.empty(size, dtype=np.float64)
            for start in range(0, size, TABLE_CHUNK):
                codes = np.arange(start, min(start + TABLE_CHUNK, size), dtype=np.int64)
                table[start:start + codes.shape[0]] = self._values(masks_from_codes(codes, self.n))
            self._count(size)
            table.setflags(write=False)
            self._table = table
            logger.debug("Built value table for %s with n = %d", self.kind, self.n)
        return self._table

    def singleton_values(self) -> np.ndarray:
        return self.evaluate_many(np.eye(self.n, dtype=bool))


# === Function zoo ===
class GraphCut(SetFunctionInstance):
    """Weight of the edges with exactly one endpoint in S."""

    kind = "graph-cut"

    def __init__(self, n: int, edges: Sequence):
        super().__init__(n)
        edges = list(edges)
        self.heads = np.array([int(i) for i, _, _ in edges], dtype=np.int64)
        self.tails = np.array([int(j) for _, j, _ in edges], dtype=np.int64)
        self.weights = np.array([float(w) for _, _, w in edges], dtype=np.float64)

    def _values(self, masks):
        crossing = masks[:, self.heads] != masks[:, self.tails]
        return row_sums(np.where(crossing, self.weights, 0.0))


class DirectedCut(GraphCut):
    """Weight of the arcs leaving S."""

    kind = "directed-cut"

    def _values(self, masks):
        leaving = masks[:, self.heads] & ~masks[:, self.tails]
        return row_sums(np.where(leaving, self.weights, 0.0))


class Coverage(SetFunctionInstance):
    kind = "coverage"

    def __init__(self, n: int, covers: Sequence[Sequence[int]], universe_weights: Sequence[float]):
        super().__init__(n)
        self.universe_weights = np.asarray(universe_weights, dtype=np.float64)
        self.incidence = np.zeros((n, self.universe_weights.shape[0]), dtype=np.int32)
        for u, items in enumerate(covers):
            self.incidence[u, list(items)] = 1

    def _values(self, masks):
        covered = (masks.astype(np.int32) @ self.incidence) > 0
        return row_sums(np.where(covered, self.universe_weights, 0.0))


class FacilityLocation(SetFunctionInstance):
    """Sum over clients of the best utility among the open facilities in S."""

    kind = "facility-location"

    def __init__(self, n: int, utilities: Sequence[Sequence[float]]):
        super().__init__(n)
        self.utilities = np.asarray(utilities, dtype=np.float64).reshape(-1, n)

    def _values(self, masks):
        clients = self.utilities.shape[0]
        out = np.zeros(masks.shape[0], dtype=np.float64)
        if clients == 0:
            return out
        rows = max(1, FACILITY_CHUNK_ENTRIES // (clients * self.n))
        for start in range(0, masks.shape[0], rows):
            block = masks[start:start + rows]
            best = np.where(block[:, None, :], self.utilities[None, :, :], 0.0).max(axis=2)
            out[start:start + block.shape[0]] = row_sums(best)
        return out


class ExplicitTable(SetFunctionInstance):
    kind = "explicit-table"

    def __init__(self, n: int, values: Sequence[float]):
        super().__init__(n)
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (1 << n,):
            raise ValueError(f"explicit table needs exactly 2^{n} values, got {values.shape[0]}")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("explicit table values must be finite and non-negative")
        self.values = values
        self._weights = 1 << np.arange(n, dtype=np.int64)

    def _values(self, masks):
        return self.values[masks.astype(np.int64) @ self._weights]


class OracleFunction(SetFunctionInstance):
    """Wraps a Python callable taking a boolean mask."""

    def __init__(self, n: int, fn: Callable[[np.ndarray], float], kind: str = "oracle"):
        super().__init__(n)
        self.fn = fn
        self.kind = kind

    def _values(self, masks):
        return np.array([float(self.fn(row.copy())) for row in masks], dtype=np.float64)


class Restricted(SetFunctionInstance):
    """f restricted to the elements listed in keep, renumbered 0..len(keep)-1."""

    def __init__(self, parent: SetFunctionInstance, keep: Sequence[int]):
        super().__init__(len(keep))
        self.parent = parent
        self.keep = np.asarray(keep, dtype=np.int64)
        self.kind = parent.kind

    def _values(self, masks):
        full = np.zeros((masks.shape[0], self.parent.n), dtype=bool)
        full[:, self.keep] = masks
        return self.parent._values(full)


def build_function(spec, n: int) -> SetFunctionInstance:
    if isinstance(spec, DirectedCutSpec):
        return DirectedCut(n, spec.arcs)
    if isinstance(spec, GraphCutSpec):
        return GraphCut(n, spec.edges)
    if isinstance(spec, CoverageSpec):
        return Coverage(n, spec.covers, spec.universe_weights)
    if isinstance(spec, FacilityLocationSpec):
        return FacilityLocation(n, spec.utilities)
    if isinstance(spec, ExplicitTableSpec):
        return ExplicitTable(n, spec.values)
    raise UnknownKindError(f"unsupported function spec: {type(spec).__name__}")


# === Exhaustive checks ===
def check_submodular_nonneg(instance: SetFunctionInstance) -> SubmodularityVerdict:
    """
    Exhaustively check f >= 0 and f(A) + f(B) >= f(A | B) + f(A & B).

    Uses the equivalent local form f(S+u) + f(S+v) >= f(S+u+v) + f(S) over all
    S and pairs u < v outside S; a failing local triple is itself a violating
    pair A = S+u, B = S+v.
    """
    n = instance.n
    if n > SUBMODULARITY_CHECK_MAX_N:
        raise InstanceSizeError("submodularity check", n, SUBMODULARITY_CHECK_MAX_N)
    table = instance.value_table()
    tol = 1e-9 * max(1.0, float(np.max(np.abs(table))))

    negative = np.flatnonzero(table < -tol)
    if negative.size:
        return SubmodularityVerdict(
            ok=False, reason="negative", witness_a=ids_of(masks_from_codes(negative[:1], n)[0])
        )

    codes = np.arange(1 << n, dtype=np.int64)
    for u in range(n):
        for v in range(u + 1, n):
            bit_u, bit_v = 1 << u, 1 << v
            base = codes[(codes & (bit_u | bit_v)) == 0]
            lhs = table[base | bit_u] + table[base | bit_v]
            rhs = table[base | bit_u | bit_v] + table[base]
            bad = np.flatnonzero(lhs < rhs - tol)
            if bad.size:
                S = int(base[bad[0]])
                pair = masks_from_codes(np.array([S | bit_u, S | bit_v]), n)
                return SubmodularityVerdict(
                    ok=False, reason="submodularity", witness_a=ids_of(pair[0]), witness_b=ids_of(pair[1])
                )
    return SubmodularityVerdict(ok=True)

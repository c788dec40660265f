import math
from typing import Annotated, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, Field, field_validator, model_validator

INSTANCE_FORMAT_VERSION = 1
EXPLICIT_TABLE_MAX_N = 20

# === Set function specs ===
class GraphCutSpec(BaseModel):
    kind: Literal["graph-cut"] = "graph-cut"
    edges: List[Tuple[int, int, float]] = []

    @field_validator("edges")
    @classmethod
    def _non_negative(cls, edges):
        for i, j, weight in edges:
            if weight < 0:
                raise ValueError(f"edge ({i}, {j}) has negative weight {weight}")
        return edges


class DirectedCutSpec(BaseModel):
    kind: Literal["directed-cut"] = "directed-cut"
    arcs: List[Tuple[int, int, float]] = []

    @field_validator("arcs")
    @classmethod
    def _non_negative(cls, arcs):
        for i, j, weight in arcs:
            if weight < 0:
                raise ValueError(f"arc ({i}, {j}) has negative weight {weight}")
        return arcs


class CoverageSpec(BaseModel):
    kind: Literal["coverage"] = "coverage"
    # covers[u] lists the universe items covered by element u
    covers: List[List[int]]
    universe_weights: List[float]

    @model_validator(mode="after")
    def _check_universe(self):
        size = len(self.universe_weights)
        if any(weight < 0 for weight in self.universe_weights):
            raise ValueError("universe weights must be non-negative")
        for u, items in enumerate(self.covers):
            for item in items:
                if not 0 <= item < size:
                    raise ValueError(f"element {u} covers unknown universe item {item}")
        return self


class FacilityLocationSpec(BaseModel):
    kind: Literal["facility-location"] = "facility-location"
    # utilities[c][u]: value of facility u to client c
    utilities: List[List[float]]

    @field_validator("utilities")
    @classmethod
    def _non_negative(cls, rows):
        if any(value < 0 for row in rows for value in row):
            raise ValueError("facility utilities must be non-negative")
        return rows


class ExplicitTableSpec(BaseModel):
    kind: Literal["explicit-table"] = "explicit-table"
    # values[code] = f(S) where bit u of code marks element u
    values: List[float]

    @field_validator("values")
    @classmethod
    def _finite_non_negative(cls, values):
        for code, value in enumerate(values):
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"table entry {code} must be finite and non-negative, got {value}")
        return values


FunctionSpec = Annotated[
    Union[GraphCutSpec, DirectedCutSpec, CoverageSpec, FacilityLocationSpec, ExplicitTableSpec],
    Field(discriminator="kind"),
]

# === Constraint specs ===
class BoxSpec(BaseModel):
    kind: Literal["box"] = "box"


class CardinalitySpec(BaseModel):
    kind: Literal["cardinality"] = "cardinality"
    k: int = Field(ge=0)


class PartitionMatroidSpec(BaseModel):
    kind: Literal["partition-matroid"] = "partition-matroid"
    blocks: List[List[int]]
    capacities: List[int]

    @model_validator(mode="after")
    def _check_blocks(self):
        if len(self.blocks) != len(self.capacities):
            raise ValueError("blocks and capacities must have the same length")
        if any(capacity < 0 for capacity in self.capacities):
            raise ValueError("capacities must be non-negative")
        return self


class MatroidSpec(BaseModel):
    kind: Literal["matroid"] = "matroid"
    builtin: Literal["uniform", "partition", "graphic"]
    k: Optional[int] = None
    blocks: Optional[List[List[int]]] = None
    capacities: Optional[List[int]] = None
    # graphic matroid: one ground element per edge
    edges: Optional[List[Tuple[int, int]]] = None

    @model_validator(mode="after")
    def _check_builtin(self):
        if self.builtin == "uniform" and self.k is None:
            raise ValueError("uniform matroid needs k")
        if self.builtin == "partition" and (self.blocks is None or self.capacities is None):
            raise ValueError("partition matroid needs blocks and capacities")
        if self.builtin == "graphic" and self.edges is None:
            raise ValueError("graphic matroid needs edges")
        return self


class KnapsackSpec(BaseModel):
    kind: Literal["knapsack"] = "knapsack"
    weights: List[float]
    budget: float = Field(ge=0)

    @field_validator("weights")
    @classmethod
    def _non_negative(cls, weights):
        if any(weight < 0 for weight in weights):
            raise ValueError("knapsack weights must be non-negative")
        return weights


ConstraintSpec = Annotated[
    Union[BoxSpec, CardinalitySpec, PartitionMatroidSpec, MatroidSpec, KnapsackSpec],
    Field(discriminator="kind"),
]

# === Instance file model ===
class InstanceSpec(BaseModel):
    version: int = INSTANCE_FORMAT_VERSION
    name: Optional[str] = None
    n: int = Field(ge=1)
    function: FunctionSpec
    constraint: ConstraintSpec = BoxSpec()
    seed: Optional[int] = None
    generator: Optional[str] = None

    @model_validator(mode="after")
    def _check_dimensions(self):
        n = self.n
        function = self.function
        if isinstance(function, (GraphCutSpec, DirectedCutSpec)):
            pairs = function.edges if isinstance(function, GraphCutSpec) else function.arcs
            for i, j, _ in pairs:
                if not (0 <= i < n and 0 <= j < n):
                    raise ValueError(f"edge ({i}, {j}) references an element outside 0..{n - 1}")
        elif isinstance(function, CoverageSpec):
            if len(function.covers) != n:
                raise ValueError(f"coverage lists {len(function.covers)} elements, expected {n}")
        elif isinstance(function, FacilityLocationSpec):
            if any(len(row) != n for row in function.utilities):
                raise ValueError(f"every utility row must have {n} facilities")
        elif isinstance(function, ExplicitTableSpec):
            if n > EXPLICIT_TABLE_MAX_N:
                raise ValueError(f"explicit tables are limited to n <= {EXPLICIT_TABLE_MAX_N}")
            if len(function.values) != 2 ** n:
                raise ValueError(f"explicit table needs exactly 2^{n} values, got {len(function.values)}")

        constraint = self.constraint
        if isinstance(constraint, KnapsackSpec) and len(constraint.weights) != n:
            raise ValueError(f"knapsack needs {n} weights, got {len(constraint.weights)}")
        if isinstance(constraint, PartitionMatroidSpec):
            _check_partition(constraint.blocks, n)
        if isinstance(constraint, MatroidSpec):
            if constraint.builtin == "graphic" and len(constraint.edges) != n:
                raise ValueError(f"graphic matroid needs {n} edges, got {len(constraint.edges)}")
            if constraint.builtin == "partition":
                _check_partition(constraint.blocks, n)
        return self


def _check_partition(blocks: List[List[int]], n: int) -> None:
    seen = sorted(u for block in blocks for u in block)
    if seen != list(range(n)):
        raise ValueError(f"partition blocks must cover elements 0..{n - 1} exactly once")

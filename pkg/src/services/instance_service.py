import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Union

import networkx as nx
import numpy as np
from pydantic import ValidationError

from src.core.errors import ConfigError, UnknownKindError
from src.core.polytopes import NormalizedProblem, build_polytope, normalize_ground_set
from src.core.rng import KeyedStreams
from src.core.setfn import build_function
from src.schemas.instance import (
    INSTANCE_FORMAT_VERSION,
    BoxSpec,
    CardinalitySpec,
    CoverageSpec,
    DirectedCutSpec,
    FacilityLocationSpec,
    GraphCutSpec,
    InstanceSpec,
    KnapsackSpec,
    MatroidSpec,
    PartitionMatroidSpec,
)

logger = logging.getLogger(__name__)

FUNCTION_KINDS = {
    "cut": "graph-cut",
    "graph-cut": "graph-cut",
    "dicut": "directed-cut",
    "directed-cut": "directed-cut",
    "coverage": "coverage",
    "facility": "facility-location",
    "facility-location": "facility-location",
}
CONSTRAINT_KINDS = ("box", "cardinality", "partition", "knapsack", "uniform", "graphic")


# === Building ===
def build_problem(spec: InstanceSpec, normalize: bool = True) -> NormalizedProblem:
    """Instantiate the oracle and polytope of a spec, dropping unusable elements."""
    instance = build_function(spec.function, spec.n)
    polytope = build_polytope(spec.constraint, spec.n)
    if not normalize:
        return NormalizedProblem(instance, polytope, list(range(spec.n)), [], spec.n)
    return normalize_ground_set(instance, polytope)


# === Files ===
def describe_validation_error(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"])
        parts.append(f"{location}: {item['msg']}" if location else item["msg"])
    return "; ".join(parts)


def parse_json(text: str, path: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(e.msg, path, e.lineno, e.colno)


def read_instance(path: Union[str, Path]) -> InstanceSpec:
    path = str(path)
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read instance file: {e.strerror}", path)
    data = parse_json(text, path)
    version = data.get("version") if isinstance(data, dict) else None
    if isinstance(version, int) and version > INSTANCE_FORMAT_VERSION:
        raise ConfigError(
            f"instance format version {data['version']} is newer than supported version {INSTANCE_FORMAT_VERSION}",
            path,
        )
    try:
        return InstanceSpec.model_validate(data)
    except ValidationError as e:
        raise ConfigError(describe_validation_error(e), path)


def write_instance(spec: InstanceSpec, path: Union[str, Path]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(spec.model_dump_json(indent=2) + "\n")
    logger.debug("Wrote instance %s to %s", spec.name, path)


# === Generation ===
def _weights(gen: np.random.Generator, size) -> np.ndarray:
    """Uniform on (0, 1]."""
    return 1.0 - gen.random(size)


def generate_instance(
    kind: str,
    n: int,
    params: Optional[Dict[str, float]] = None,
    seed: int = 0,
    constraint: Optional[str] = None,
    constraint_params: Optional[Dict[str, float]] = None,
) -> InstanceSpec:
    """
    Draw a reproducible instance of the given kind.

    params by kind: cut/dicut take edge probability p (default 0.5),
    coverage takes universe (default 2n) and density (default 0.3),
    facility takes clients (default n).
    """
    if kind not in FUNCTION_KINDS:
        raise UnknownKindError(f"unknown instance kind '{kind}'; expected one of {sorted(FUNCTION_KINDS)}")
    params = params or {}
    gen = KeyedStreams(seed).generator("generate-instance")
    canonical = FUNCTION_KINDS[kind]

    if canonical in ("graph-cut", "directed-cut"):
        directed = canonical == "directed-cut"
        graph = nx.gnp_random_graph(
            n, float(params.get("p", 0.5)), seed=int(gen.integers(2 ** 31)), directed=directed
        )
        pairs = sorted(graph.edges())
        triples = [(int(i), int(j), float(w)) for (i, j), w in zip(pairs, _weights(gen, len(pairs)))]
        function = DirectedCutSpec(arcs=triples) if directed else GraphCutSpec(edges=triples)
    elif canonical == "coverage":
        universe = int(params.get("universe", 2 * n))
        density = float(params.get("density", 0.3))
        incidence = gen.random((n, universe)) < density
        for u in range(n):
            if not incidence[u].any():
                incidence[u, int(gen.integers(universe))] = True
        function = CoverageSpec(
            covers=[[int(i) for i in np.flatnonzero(row)] for row in incidence],
            universe_weights=[float(w) for w in _weights(gen, universe)],
        )
    else:
        clients = int(params.get("clients", n))
        function = FacilityLocationSpec(utilities=_weights(gen, (clients, n)).tolist())

    constraint_spec = generate_constraint(constraint, n, constraint_params, seed) if constraint else BoxSpec()
    return InstanceSpec(
        name=f"{kind}-n{n}-s{seed}" + (f"-{constraint}" if constraint else ""),
        n=n,
        function=function,
        constraint=constraint_spec,
        seed=seed,
        generator=kind,
    )


def generate_constraint(kind: str, n: int, params: Optional[Dict[str, float]] = None, seed: int = 0):
    """
    Draw a constraint over n elements.

    cardinality/uniform take k (default max(1, n // 3)); partition takes blocks
    (default max(1, n // 3)) and capacity (default 1); knapsack takes
    budget_fraction of the total weight (default 0.35); graphic takes
    vertices (default n // 2 + 1).
    """
    params = params or {}
    gen = KeyedStreams(seed).generator("generate-constraint")
    if kind == "box":
        return BoxSpec()
    if kind in ("cardinality", "uniform"):
        k = int(params.get("k", max(1, n // 3)))
        return CardinalitySpec(k=k) if kind == "cardinality" else MatroidSpec(builtin="uniform", k=k)
    if kind == "partition":
        count = max(1, min(n, int(params.get("blocks", max(1, n // 3)))))
        order = gen.permutation(n)
        blocks = [sorted(int(u) for u in order[b::count]) for b in range(count)]
        return PartitionMatroidSpec(blocks=blocks, capacities=[int(params.get("capacity", 1))] * count)
    if kind == "knapsack":
        weights = _weights(gen, n)
        budget = float(params.get("budget_fraction", 0.35)) * float(weights.sum())
        return KnapsackSpec(weights=[float(w) for w in weights], budget=budget)
    if kind == "graphic":
        vertices = max(2, int(params.get("vertices", n // 2 + 1)))
        edges = []
        for _ in range(n):
            a, b = gen.choice(vertices, size=2, replace=False)
            edges.append((int(a), int(b)))
        return MatroidSpec(builtin="graphic", edges=edges)
    raise UnknownKindError(f"unknown constraint kind '{kind}'; expected one of {list(CONSTRAINT_KINDS)}")


def corpus_specs(per_cell: int = 9, min_n: int = 6, max_n: int = 10, seed: int = 0) -> List[InstanceSpec]:
    """Cut and coverage instances under cardinality, partition and knapsack constraints."""
    specs = []
    sizes = list(range(min(min_n, max_n), max_n + 1))
    for kind in ("cut", "coverage"):
        for constraint in ("cardinality", "partition", "knapsack"):
            for index in range(per_cell):
                n = sizes[index % len(sizes)]
                instance_seed = seed * 1000 + len(specs)
                specs.append(generate_instance(kind, n, {}, instance_seed, constraint, {}))
    return specs

import csv
import json
import logging
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, TextIO, Tuple, Union

import numpy as np
from pydantic import BaseModel, ValidationError

from src.core.aided_mcg import aided_mcg, measured_continuous_greedy
from src.core.errors import ConfigError, SubmodError
from src.core.extensions import MultilinearOracle, estimate_multilinear, sample_random_subset
from src.core.local_search import fractional_local_search
from src.core.pipeline import main_algorithm
from src.core.rng import KeyedStreams
from src.schemas.algorithm import EvaluationMode, LocalSearchConfig, MainParams, Schedule
from src.schemas.bench import BenchmarkConfig, InstanceEntry
from src.schemas.instance import InstanceSpec
from src.schemas.results import BenchmarkRow
from src.services.instance_service import (
    build_problem,
    describe_validation_error,
    generate_instance,
    parse_json,
    read_instance,
)
from src.services.verification_service import brute_force_opt, ratio_to_opt

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["instance", "algorithm", "seed", "n", "mode", "value", "opt", "ratio", "oracle_calls", "status", "error"]


# === Config loading ===
def _line_of(text: str, loc) -> Optional[int]:
    """Best-effort line of the last named key in a validation error location."""
    keys = [part for part in loc if isinstance(part, str)]
    if not keys:
        return None
    needle = f'"{keys[-1]}"'
    for number, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return number
    return None


def load_benchmark_config(path: Union[str, Path]) -> BenchmarkConfig:
    path = str(path)
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read benchmark config: {e.strerror}", path)
    data = parse_json(text, path)
    try:
        return BenchmarkConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise ConfigError(describe_validation_error(e), path, _line_of(text, first["loc"]))


# === Row execution ===
class RowTask(BaseModel):
    instance: str
    spec_json: str
    algorithm: str
    seed: int
    mode: EvaluationMode
    delta: float
    t_s: float
    p: float
    selection: str
    epsilon: float
    opt: Optional[float] = None


def _value(instance, x: np.ndarray, mode: EvaluationMode, seed: int) -> float:
    if mode.is_exact:
        return MultilinearOracle(instance).value(x)
    return estimate_multilinear(instance, x, max(2, mode.samples), KeyedStreams(seed).child_seed("bench-value")).mean


def run_row(task: RowTask) -> BenchmarkRow:
    """One (instance, algorithm, seed) cell; failures become error rows."""
    spec = InstanceSpec.model_validate_json(task.spec_json)
    row = BenchmarkRow(
        instance=task.instance, algorithm=task.algorithm, seed=task.seed, n=spec.n, mode=task.mode.kind, opt=task.opt
    )
    start = time.perf_counter()
    try:
        problem = build_problem(spec)
        instance, polytope = problem.instance, problem.polytope
        config = LocalSearchConfig(epsilon=task.epsilon, mode=task.mode)
        if task.algorithm == "mcg":
            run = measured_continuous_greedy(instance, polytope, task.delta, task.mode, task.seed)
            value = _value(instance, run.y1, task.mode, task.seed)
        elif task.algorithm == "local-search":
            searched = fractional_local_search(instance, polytope, config, seed=task.seed)
            value = _value(instance, searched.x, task.mode, task.seed)
        elif task.algorithm == "aided-mcg":
            streams = KeyedStreams(task.seed)
            searched = fractional_local_search(instance, polytope, config, seed=streams.child_seed("local-search"))
            z = sample_random_subset(searched.x, streams.generator("z-draw", 0))
            run = aided_mcg(
                instance, polytope, z, Schedule.uniform(task.t_s, task.delta), task.mode,
                seed=streams.child_seed("aided-mcg", 0), record_every=None,
            )
            value = _value(instance, run.y1, task.mode, task.seed)
        else:
            result = main_algorithm(
                instance, polytope, MainParams.from_probability(task.t_s, task.p), task.mode, task.seed,
                delta=task.delta, local_search=config, selection=task.selection, record_every=None,
            )
            value = result.combined
        row.value = value
        row.ratio = ratio_to_opt(value, task.opt) if task.opt is not None else None
        row.oracle_calls = instance.eval_count
    except Exception as e:
        logger.error("Row %s/%s/%d failed: %s", task.instance, task.algorithm, task.seed, e)
        logger.debug(traceback.format_exc())
        row.status = "error"
        row.error = f"{type(e).__name__}: {e}"
    row.wall_time = time.perf_counter() - start
    return row


# === Sweep ===
class BenchmarkService:
    def __init__(self, config: BenchmarkConfig, base_dir: Union[str, Path] = ".", workers: Optional[int] = None):
        self.config = config
        self.base_dir = Path(base_dir)
        self.workers = workers or config.workers

    def resolve_instance(self, entry: InstanceEntry) -> InstanceSpec:
        if entry.path is not None:
            path = Path(entry.path)
            return read_instance(path if path.is_absolute() else self.base_dir / path)
        generated = entry.generate
        spec = generate_instance(
            generated.kind, generated.n, generated.params, generated.seed,
            generated.constraint_kind, generated.constraint_params,
        )
        if generated.constraint is not None:
            spec = InstanceSpec.model_validate({**spec.model_dump(), "constraint": generated.constraint.model_dump()})
        return spec

    def _opt(self, spec: InstanceSpec) -> Optional[float]:
        if spec.n > self.config.opt_limit:
            return None
        problem = build_problem(spec)
        return brute_force_opt(problem.instance, problem.polytope)[1]

    def tasks(self) -> Tuple[List[RowTask], List[BenchmarkRow]]:
        tasks, failed = [], []
        for index, entry in enumerate(self.config.instances):
            name = entry.name or f"instance-{index}"
            try:
                spec = self.resolve_instance(entry)
                name = entry.name or spec.name or name
                opt = self._opt(spec)
            except (SubmodError, ValueError) as e:
                logger.error("Instance %s could not be prepared: %s", name, e)
                for algorithm in self.config.algorithms:
                    for seed in self.config.seeds:
                        failed.append(BenchmarkRow(
                            instance=name, algorithm=algorithm, seed=seed, n=0, mode=self.config.mode.kind,
                            status="error", error=f"{type(e).__name__}: {e}",
                        ))
                continue
            for algorithm in self.config.algorithms:
                for seed in self.config.seeds:
                    tasks.append(RowTask(
                        instance=name, spec_json=spec.model_dump_json(), algorithm=algorithm, seed=seed,
                        mode=self.config.mode, delta=self.config.delta, t_s=self.config.t_s, p=self.config.p,
                        selection=self.config.selection, epsilon=self.config.epsilon, opt=opt,
                    ))
        return tasks, failed

    def run(self) -> List[BenchmarkRow]:
        tasks, rows = self.tasks()
        logger.info("Running %d benchmark rows on %d worker(s)", len(tasks), self.workers)
        if self.workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                rows.extend(pool.map(run_row, tasks))
        else:
            rows.extend(run_row(task) for task in tasks)
        return sorted(rows, key=BenchmarkRow.sort_key)


def run_benchmark(
    config: BenchmarkConfig, base_dir: Union[str, Path] = ".", workers: Optional[int] = None
) -> List[BenchmarkRow]:
    return BenchmarkService(config, base_dir, workers).run()


# === Output ===
def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv_rows(rows: List[BenchmarkRow], handle: TextIO) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        data = row.model_dump()
        writer.writerow([_cell(data[column]) for column in CSV_COLUMNS])


def write_csv(rows: List[BenchmarkRow], path: Union[str, Path]) -> None:
    """Deterministic columns only, so equal runs give byte-identical files."""
    with open(path, "w", newline="") as handle:
        write_csv_rows(rows, handle)


def write_json(rows: List[BenchmarkRow], path: Union[str, Path]) -> None:
    with open(path, "w") as handle:
        json.dump([row.model_dump() for row in rows], handle, indent=2)


def summarize(rows: List[BenchmarkRow]) -> Dict[str, Dict[str, float]]:
    """Minimum and mean ratio per algorithm over the rows that have one."""
    summary = {}
    for algorithm in sorted({row.algorithm for row in rows}):
        ratios = [row.ratio for row in rows if row.algorithm == algorithm and row.ratio is not None]
        if ratios:
            summary[algorithm] = {"min_ratio": min(ratios), "mean_ratio": float(np.mean(ratios)), "rows": len(ratios)}
    return summary

"""
The combined algorithm: fractional local search followed by Aided MCG
guided by a random set drawn from the local-search point, returning one of
the two points at random. Also solves the small program that picks the
switch time and the selection probability.
"""

import logging
import math
from typing import Literal, Optional

import numpy as np

from src.core.aided_mcg import aided_mcg, opt_reference
from src.core.extensions import MultilinearOracle, estimate_multilinear, sample_random_subset
from src.core.local_search import fractional_local_search
from src.core.polytopes import Polytope
from src.core.rng import KeyedStreams
from src.core.setfn import SetFunctionInstance
from src.schemas.algorithm import EvaluationMode, LocalSearchConfig, MainParams, Schedule
from src.schemas.results import MainResult, ParameterSolution

logger = logging.getLogger(__name__)

GUARANTEE_RATIO = 0.385
MAX_GRID_RESOLUTION = 1e-3


def combined_guarantee() -> float:
    return GUARANTEE_RATIO


# === Parameter program ===
def _program_at(t_s: float):
    """(p1, p2, p3, objective) with both constraints tight; p2 clamped at 0."""
    scale = math.exp(t_s - 1.0)
    decay = math.exp(-t_s)
    gain = scale * (2.0 - t_s - decay)
    b1 = scale * (2.0 - t_s - 2.0 * decay)
    b2 = scale * (1.0 - decay)
    if b2 >= b1:
        p3 = 1.0 / (1.0 + b1 + b2)
        p2 = p3 * (b2 - b1)
    else:
        p3 = 1.0 / (1.0 + 2.0 * b1)
        p2 = 0.0
    return 2.0 * p3 * b1, p2, p3, p3 * gain, b1, b2


def _solve_at(t_s: float) -> ParameterSolution:
    p1, p2, p3, objective, b1, b2 = _program_at(t_s)
    slacks = (p1 / 2.0 + p2 - p3 * b2, p1 / 2.0 - p3 * b1)
    return ParameterSolution(t_s=t_s, p1=p1, p2=p2, p3=p3, objective=objective, constraint_slacks=slacks)


def grid_intervals(ts_grid_resolution: float) -> int:
    """
    Number of intervals of the t_s grid.

    The 1e-3 lattice is split by a power of two until the spacing is at most
    the requested resolution, so every finer grid contains every coarser one.
    """
    refinement = 1
    while MAX_GRID_RESOLUTION / refinement > ts_grid_resolution * (1.0 + 1e-9):
        refinement *= 2
    return round(1.0 / MAX_GRID_RESOLUTION) * refinement


def optimize_parameters(ts_grid_resolution: float = 1e-3, t_s: Optional[float] = None) -> ParameterSolution:
    """Grid search over t_s in [0, 1]; t_s pins the switch time instead."""
    if t_s is not None:
        return _solve_at(t_s)
    if not 0.0 < ts_grid_resolution <= MAX_GRID_RESOLUTION:
        raise ValueError(f"grid resolution must be in (0, {MAX_GRID_RESOLUTION}], got {ts_grid_resolution}")
    intervals = grid_intervals(ts_grid_resolution)
    best_t, best_objective = 0.0, -math.inf
    for k in range(intervals + 1):
        t = k / intervals
        objective = _program_at(t)[3]
        if objective > best_objective:
            best_t, best_objective = t, objective
    best = _solve_at(best_t)
    logger.info("Parameter program: t_s=%.4f objective=%.5f over %d intervals", best.t_s, best.objective, intervals)
    return best


# === Combined algorithm ===
def coin_selects_x1(p: float, seed: int) -> bool:
    return bool(KeyedStreams(seed).generator("coin").random() < p)


def main_algorithm(
    instance: SetFunctionInstance,
    polytope: Polytope,
    params: MainParams = MainParams(),
    mode: EvaluationMode = EvaluationMode(),
    seed: int = 0,
    schedule: Optional[Schedule] = None,
    delta: float = 1e-3,
    local_search: Optional[LocalSearchConfig] = None,
    selection: Literal["randomized", "best"] = "randomized",
    z_rounds: int = 1,
    opt: Optional[np.ndarray] = None,
    record_every: Optional[int] = 1,
) -> MainResult:
    """
    Run the combined algorithm. Each component draws from its own keyed
    stream of seed, so the local search, the Z draw, the Aided MCG run and
    the coin are independent of one another and of evaluation order.

    opt, when given, is a known optimal set; the Aided MCG tracker then
    carries the bound functions for the drawn Z.
    """
    if z_rounds < 1:
        raise ValueError(f"z_rounds must be at least 1, got {z_rounds}")
    schedule = schedule or Schedule.uniform(params.t_s, delta)
    if abs(schedule.t_s - params.t_s) > 1e-12:
        raise ValueError(f"schedule switches at {schedule.t_s}, parameters at {params.t_s}")
    streams = KeyedStreams(seed)

    config = local_search or LocalSearchConfig(mode=mode)
    searched = fractional_local_search(instance, polytope, config, seed=streams.child_seed("local-search"))
    x1 = searched.x

    def evaluate(x: np.ndarray, key: int) -> float:
        if mode.is_exact:
            return MultilinearOracle(instance).value(x)
        return estimate_multilinear(instance, x, max(2, mode.samples), streams.child_seed("value", key)).mean

    round_values = []
    first = None
    for round_index in range(z_rounds):
        z = sample_random_subset(x1, streams.generator("z-draw", round_index))
        reference = opt_reference(instance, opt, z) if opt is not None else None
        run = aided_mcg(
            instance, polytope, z, schedule, mode,
            seed=streams.child_seed("aided-mcg", round_index),
            record_every=record_every if round_index == 0 else None,
            reference=reference,
        )
        round_values.append(evaluate(run.y1, round_index + 1))
        if first is None:
            first = (z, run)
    z, run = first

    value_x1 = evaluate(x1, 0)
    value_x2 = round_values[0]
    if selection == "best":
        chosen = "x1" if value_x1 >= value_x2 else "x2"
    else:
        chosen = "x1" if coin_selects_x1(params.p, seed) else "x2"
    combined = params.p * value_x1 + (1.0 - params.p) * value_x2
    logger.info(
        "Main algorithm: F(x1)=%.6g F(x2)=%.6g combined=%.6g chosen=%s", value_x1, value_x2, combined, chosen
    )
    return MainResult(
        params=params, mode=mode, selection=selection,
        x1=x1, x2=run.y1, z=z, chosen=chosen,
        value_x1=value_x1, value_x2=value_x2, combined=combined,
        local_search=searched, trajectory=run.trajectory, tracker=run.tracker,
        z_round_values=round_values if z_rounds > 1 else [],
    )

"""
Aided Measured Continuous Greedy on a discrete two-phase time grid.

Until the switch time t_s every element of the guide set Z gets weight -1
in the linear objective, so the oracle never selects it and y stays 0 on
Z. After t_s the run is plain measured continuous greedy. The bound
functions g (discrete recursion), h1 and h2 (closed forms) and the final
guarantee are evaluated alongside for verification.
"""

import logging
import math
from typing import Optional

import numpy as np

from src.core.extensions import MultilinearOracle, estimate_weight
from src.core.local_search import surrogate_scale
from src.core.polytopes import Polytope
from src.core.rng import KeyedStreams
from src.core.setfn import SetFunctionInstance
from src.schemas.algorithm import EvaluationMode, Schedule
from src.schemas.results import (
    AidedMCGResult,
    BoundTracker,
    OptReference,
    Trajectory,
    TrajectoryStep,
)

logger = logging.getLogger(__name__)

DEFAULT_SLACK_CONSTANT = 3.0
EXACT_MAX_VALUE_N = 20


def measured_update(y: np.ndarray, x: np.ndarray, delta: float) -> np.ndarray:
    """y + delta (1 - y) o x; verification replays trajectories through this."""
    return y + delta * ((1.0 - y) * x)


# === Bound functions ===
def aided_bound(t_s: float, f_opt: float, f_z_cap_opt: float, f_z_cup_opt: float) -> float:
    scale = math.exp(t_s - 1.0)
    decay = math.exp(-t_s)
    return scale * (
        (2.0 - t_s - decay) * f_opt
        - (1.0 - decay) * f_z_cap_opt
        - (2.0 - t_s - 2.0 * decay) * f_z_cup_opt
    )


def h1(t: float, f_opt_minus_z: float, f_z_cup_opt: float) -> float:
    decay = math.exp(-t)
    return (1.0 - decay) * f_opt_minus_z - (1.0 - decay - t * decay) * f_z_cup_opt


def h2(t: float, t_s: float, f_opt: float, f_opt_cup_z: float, h1_at_ts: float) -> float:
    drive = f_opt + (math.exp(t_s) - 1.0) * max(f_opt - f_opt_cup_z, 0.0)
    return math.exp(-t) * ((t - t_s) * drive + math.exp(t_s) * h1_at_ts)


def bound_h(t: float, t_s: float, f_opt: float, f_opt_minus_z: float, f_z_cup_opt: float) -> float:
    """h1 on [0, t_s], h2 on [t_s, 1]."""
    if t <= t_s:
        return h1(t, f_opt_minus_z, f_z_cup_opt)
    return h2(t, t_s, f_opt, f_z_cup_opt, h1(t_s, f_opt_minus_z, f_z_cup_opt))


def g_recursion(
    schedule: Schedule,
    f_opt_minus_z: float,
    f_opt: float,
    f_z_cup_opt: float,
    max_term: Optional[float] = None,
) -> np.ndarray:
    """g at every grid point 0..total_steps, starting from g(0) = 0."""
    if max_term is None:
        max_term = max(f_opt - f_z_cup_opt, 0.0)
    total = schedule.total_steps
    g = np.zeros(total + 1)
    for k in range(total):
        t = schedule.time(k)
        delta = schedule.step_size(k)
        if k < schedule.phase1_steps:
            drive = f_opt_minus_z - (1.0 - math.exp(-t)) * f_z_cup_opt
        else:
            drive = math.exp(-t) * f_opt + (math.exp(schedule.t_s - t) - math.exp(-t)) * max_term
        g[k + 1] = g[k] + delta * (drive - g[k])
    return g


def coordinate_caps(schedule: Schedule, z: np.ndarray) -> np.ndarray:
    """Largest y_u(1) the update can reach: 1 - prod(1 - delta) over the steps u may move in."""
    phase1 = (1.0 - schedule.step_size(0)) ** schedule.phase1_steps if schedule.phase1_steps else 1.0
    phase2 = (
        (1.0 - schedule.step_size(schedule.phase1_steps)) ** schedule.phase2_steps
        if schedule.phase2_steps else 1.0
    )
    return np.where(np.asarray(z, dtype=bool), 1.0 - phase2, 1.0 - phase1 * phase2)


def max_value(instance: SetFunctionInstance, exact: bool = True) -> float:
    """max_S f(S), or the bound f(empty) + n * max_u f({u}) when not exact or n is large."""
    if exact and instance.n <= EXACT_MAX_VALUE_N:
        return float(instance.value_table().max())
    return surrogate_scale(instance) + instance.evaluate(np.zeros(instance.n, dtype=bool))


def build_tracker(
    schedule: Schedule,
    n: int,
    f_max: float,
    slack_constant: float,
    recorded,
    values,
    final_value: Optional[float],
    reference: Optional[OptReference],
) -> BoundTracker:
    tracker = BoundTracker(
        step_indices=[index for index, _ in recorded],
        times=[t for _, t in recorded],
        values=values,
        final_value=final_value,
        slack_constant=slack_constant,
        slack_model=slack_constant * n ** 2 * schedule.max_delta * f_max,
        reference=reference,
    )
    if reference is not None:
        g = g_recursion(schedule, reference.f_opt_minus_z, reference.f_opt, reference.f_z_cup_opt)
        tracker.g_values = [float(g[index]) for index in tracker.step_indices]
        tracker.h_values = [
            bound_h(t, schedule.t_s, reference.f_opt, reference.f_opt_minus_z, reference.f_z_cup_opt)
            for t in tracker.times
        ]
        tracker.g_final = float(g[-1])
        tracker.h_final = bound_h(1.0, schedule.t_s, reference.f_opt, reference.f_opt_minus_z, reference.f_z_cup_opt)
        tracker.aided_bound = aided_bound(schedule.t_s, reference.f_opt, reference.f_z_cap_opt, reference.f_z_cup_opt)
    return tracker


# === Algorithm ===
def aided_mcg(
    instance: SetFunctionInstance,
    polytope: Polytope,
    z,
    schedule: Schedule,
    mode: EvaluationMode = EvaluationMode(),
    seed: int = 0,
    record_every: Optional[int] = 1,
    reference: Optional[OptReference] = None,
    slack_constant: float = DEFAULT_SLACK_CONSTANT,
) -> AidedMCGResult:
    """
    Run the discrete Aided MCG from y = 0 to t = 1.

    Weights are w_u = E[f(u | R(y))]: exact as (1 - y_u) dF/dy_u from the value
    table, or the average of mode.samples marginals on the keyed stream
    (step, u). record_every=None keeps only the first and last steps.
    """
    n = instance.n
    z = np.asarray(z, dtype=bool)
    total = schedule.total_steps
    streams = KeyedStreams(seed)
    oracle = MultilinearOracle(instance) if mode.is_exact else None

    logger.info(
        "Aided MCG: n=%d |Z|=%d t_s=%.4g steps=%d mode=%s", n, int(z.sum()), schedule.t_s, total, mode.kind
    )

    y = np.zeros(n)
    steps = []
    switch = schedule.phase1_steps
    values = []
    for k in range(total):
        t = schedule.time(k)
        delta = schedule.step_size(k)
        phase = 1 if k < switch else 2
        if oracle is not None:
            value, grad = oracle.value_and_gradient(y)
            w = (1.0 - y) * grad
        else:
            value = None
            w = np.array([
                estimate_weight(instance, y, u, mode.samples, streams.generator("aided-mcg-weight", k, u))
                for u in range(n)
            ])
        objective = np.where(z, -1.0, w) if phase == 1 else w
        x = polytope.maximize_linear(objective)

        if record_every is None:
            keep = k == 0 or k == total - 1
        else:
            keep = k % record_every == 0 or k == total - 1
        if keep:
            steps.append(TrajectoryStep(index=k, t=t, delta=delta, phase=phase, y=y.copy(), x=x, w=w))
            if value is not None:
                values.append(value)
        y = measured_update(y, x, delta)

    final_value = oracle.value(y) if oracle is not None else None
    trajectory = Trajectory(schedule=schedule, z=z.copy(), steps=steps, final=y)
    tracker = build_tracker(
        schedule, n, max_value(instance, exact=oracle is not None), slack_constant,
        [(step.index, step.t) for step in steps], values, final_value, reference,
    )
    if final_value is not None:
        logger.info("Aided MCG finished: F(y(1)) = %.6g", final_value)
    return AidedMCGResult(y1=y, trajectory=trajectory, tracker=tracker)


def measured_continuous_greedy(
    instance: SetFunctionInstance,
    polytope: Polytope,
    delta: float = 1e-3,
    mode: EvaluationMode = EvaluationMode(),
    seed: int = 0,
    schedule: Optional[Schedule] = None,
    record_every: Optional[int] = None,
) -> AidedMCGResult:
    """Plain measured continuous greedy: the t_s = 0 case, where Z is never consulted."""
    schedule = schedule or Schedule.uniform(0.0, delta)
    if schedule.t_s != 0.0:
        raise ValueError("measured continuous greedy needs a schedule with t_s = 0")
    return aided_mcg(
        instance, polytope, np.zeros(instance.n, dtype=bool), schedule, mode, seed, record_every=record_every
    )


def opt_reference(instance: SetFunctionInstance, opt: np.ndarray, z: np.ndarray) -> OptReference:
    """f(OPT), f(OPT - Z), f(Z & OPT) and f(Z | OPT) for a fixed optimum and guide set."""
    opt = np.asarray(opt, dtype=bool)
    z = np.asarray(z, dtype=bool)
    values = instance.evaluate_many(np.array([opt, opt & ~z, opt & z, opt | z]))
    return OptReference(
        f_opt=float(values[0]),
        f_opt_minus_z=float(values[1]),
        f_z_cap_opt=float(values[2]),
        f_z_cup_opt=float(values[3]),
    )

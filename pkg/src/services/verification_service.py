"""
Ground-truth checks for small instances.

verify_run trusts nothing a run cached: it re-derives f(OPT) by brute
force, re-evaluates F at every point it is handed and replays the
trajectory through the update rule.
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np

from src.core.aided_mcg import bound_h, coordinate_caps, g_recursion, measured_update, opt_reference, aided_bound
from src.core.errors import InstanceSizeError, VerificationError
from src.core.extensions import MultilinearOracle
from src.core.local_search import check_exchange_inequality
from src.core.pipeline import combined_guarantee
from src.core.polytopes import VERTEX_ENUMERATION_MAX_N, Polytope
from src.core.setfn import SetFunctionInstance, all_masks, ids_of
from src.schemas.results import GuaranteeReport, MainResult

logger = logging.getLogger(__name__)

BRUTE_FORCE_MAX_N = 20
VALUE_TOLERANCE = 1e-9
CAP_TOLERANCE = 1e-12


def brute_force_opt(instance: SetFunctionInstance, polytope: Polytope) -> Tuple[np.ndarray, float]:
    """Best feasible set; among equal values the one with the smallest code."""
    if instance.n > BRUTE_FORCE_MAX_N:
        raise InstanceSizeError("brute-force optimum", instance.n, BRUTE_FORCE_MAX_N)
    table = instance.value_table()
    masks = all_masks(instance.n)
    feasible = polytope.feasible_sets(masks)
    code = int(np.argmax(np.where(feasible, table, -np.inf)))
    return masks[code].copy(), float(table[code])


def verify_run(
    instance: SetFunctionInstance,
    polytope: Polytope,
    result: MainResult,
    slack_constant: Optional[float] = None,
    aided_tolerance: float = 0.02,
    combined_tolerance: float = 0.005,
    strict: bool = False,
) -> GuaranteeReport:
    """
    Check an exact-mode run of the combined algorithm.

    Verdicts: feasibility, exchange_inequality, update_identity, z_freeze,
    coordinate_caps, bound_chain, g_dominates_h, aided_bound and, at the
    analyzed parameters, combined_guarantee. Tolerances are fractions of f(OPT).
    With strict=True a failed verdict raises VerificationError instead.
    """
    n = instance.n
    if n > VERTEX_ENUMERATION_MAX_N:
        raise InstanceSizeError("run verification", n, VERTEX_ENUMERATION_MAX_N)
    trajectory = result.trajectory
    schedule = trajectory.schedule
    slack_constant = result.tracker.slack_constant if slack_constant is None else slack_constant

    opt, f_opt = brute_force_opt(instance, polytope)
    reference = opt_reference(instance, opt, result.z)
    oracle = MultilinearOracle(instance)
    value_x1 = oracle.value(result.x1)
    value_x2 = oracle.value(result.x2)
    combined = result.params.p * value_x1 + (1.0 - result.params.p) * value_x2
    unit = max(f_opt, VALUE_TOLERANCE)
    verdicts = {}
    margins = {}

    # feasibility of both outputs and of every recorded point
    points = [result.x1, result.x2, trajectory.final]
    for step in trajectory.steps:
        points.extend([step.y, step.x])
    verdicts["feasibility"] = all(polytope.contains(point) for point in points)

    exchange = check_exchange_inequality(
        instance, polytope, result.x1, result.local_search.epsilon, scale=result.local_search.scale
    )
    verdicts["exchange_inequality"] = exchange.passed
    margins["exchange_inequality"] = exchange.worst_slack

    # replay the update between consecutive records, and into y(1)
    replay_ok = True
    if trajectory.steps and (trajectory.steps[0].index != 0 or np.any(trajectory.steps[0].y != 0.0)):
        replay_ok = False
    for current, following in zip(trajectory.steps, trajectory.steps[1:]):
        if following.index == current.index + 1:
            replay_ok &= bool(np.array_equal(measured_update(current.y, current.x, current.delta), following.y))
        replay_ok &= bool(np.all(following.y >= current.y))
    if trajectory.steps and trajectory.steps[-1].index == schedule.total_steps - 1:
        last = trajectory.steps[-1]
        replay_ok &= bool(np.array_equal(measured_update(last.y, last.x, last.delta), trajectory.final))
    replay_ok &= bool(np.array_equal(result.x2, trajectory.final))
    verdicts["update_identity"] = replay_ok

    z = np.asarray(result.z, dtype=bool)
    frozen = [step.y[z] for step in trajectory.steps if step.t <= schedule.t_s]
    verdicts["z_freeze"] = all(np.all(values == 0.0) for values in frozen)

    caps = coordinate_caps(schedule, z)
    margins["coordinate_caps"] = float(np.min(caps - trajectory.final))
    verdicts["coordinate_caps"] = margins["coordinate_caps"] >= -CAP_TOLERANCE

    g = g_recursion(schedule, reference.f_opt_minus_z, reference.f_opt, reference.f_z_cup_opt)
    slack = slack_constant * n ** 2 * schedule.max_delta * float(instance.value_table().max())
    recorded = np.array([step.y for step in trajectory.steps]).reshape(-1, n)
    values = np.append(oracle.values(recorded), oracle.value(trajectory.final))
    bounds = np.append(g[[step.index for step in trajectory.steps]], g[-1])
    chain = values - (bounds - slack)
    margins["bound_chain"] = float(chain.min())
    verdicts["bound_chain"] = margins["bound_chain"] >= -VALUE_TOLERANCE * unit

    h = np.array([
        bound_h(schedule.time(k), schedule.t_s, reference.f_opt, reference.f_opt_minus_z, reference.f_z_cup_opt)
        for k in range(schedule.total_steps + 1)
    ])
    margins["g_dominates_h"] = float(np.min(g - h))
    verdicts["g_dominates_h"] = margins["g_dominates_h"] >= -VALUE_TOLERANCE * max(1.0, f_opt)

    rhs = aided_bound(schedule.t_s, reference.f_opt, reference.f_z_cap_opt, reference.f_z_cup_opt)
    margins["aided_bound"] = value_x2 - (rhs - aided_tolerance * f_opt)
    verdicts["aided_bound"] = margins["aided_bound"] >= -VALUE_TOLERANCE * unit

    if result.params.is_analyzed_setting:
        margins["combined_guarantee"] = combined - (combined_guarantee() - combined_tolerance) * f_opt
        verdicts["combined_guarantee"] = margins["combined_guarantee"] >= -VALUE_TOLERANCE * unit

    report = GuaranteeReport(
        opt_set=ids_of(opt),
        f_opt=f_opt,
        f_opt_minus_z=reference.f_opt_minus_z,
        f_z_cap_opt=reference.f_z_cap_opt,
        f_z_cup_opt=reference.f_z_cup_opt,
        aided_bound=rhs,
        combined_guarantee=combined_guarantee(),
        value_x1=value_x1,
        value_x2=value_x2,
        combined=combined,
        exchange_check=exchange,
        bound_chain=[float(v) for v in chain],
        verdicts=verdicts,
        margins=margins,
    )
    if not report.passed:
        logger.warning("Verification failed: %s", ", ".join(report.failed_checks))
        if strict:
            raise VerificationError(f"failed checks: {', '.join(report.failed_checks)}")
    else:
        logger.info("All %d verdicts passed (f(OPT) = %.6g)", len(verdicts), f_opt)
    return report


def ratio_to_opt(value: float, f_opt: float) -> Optional[float]:
    if f_opt <= 0.0 or math.isnan(value):
        return None
    return value / f_opt

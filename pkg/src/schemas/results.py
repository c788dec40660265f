import csv
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.schemas.algorithm import EvaluationMode, MainParams, Schedule

# === Estimates and verdicts ===
class SampleEstimate(BaseModel):
    mean: float
    std_error: float = Field(ge=0.0)
    sample_count: int = Field(ge=1)
    seed: int


class SubmodularityVerdict(BaseModel):
    ok: bool
    # "negative" (witness_a has f < 0) or "submodularity" (pair violates the inequality)
    reason: Optional[Literal["negative", "submodularity"]] = None
    witness_a: Optional[List[int]] = None
    witness_b: Optional[List[int]] = None


class ExchangeVerdict(BaseModel):
    passed: bool
    worst_slack: float
    witness: Optional[List[float]] = None
    epsilon: float
    scale: float
    vertices_checked: int


# === Local search ===
class LocalSearchResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    x: np.ndarray
    gap: float
    iterations: int
    value: float
    converged: bool
    epsilon: float
    scale: float
    target: float
    value_trace: List[float] = []


# === Aided MCG ===
class TrajectoryStep(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    index: int
    t: float
    delta: float
    phase: Literal[1, 2]
    y: np.ndarray
    x: np.ndarray
    w: np.ndarray


class Trajectory(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    schedule: Schedule
    z: np.ndarray
    steps: List[TrajectoryStep] = []
    final: np.ndarray

    def write_csv(self, path: str) -> None:
        """One row per (recorded step, element): t, u, y_u, x_u, w_u."""
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["t", "u", "y_u", "x_u", "w_u"])
            for step in self.steps:
                for u in range(step.y.shape[0]):
                    writer.writerow([repr(step.t), u, repr(float(step.y[u])),
                                     repr(float(step.x[u])), repr(float(step.w[u]))])
            for u in range(self.final.shape[0]):
                writer.writerow([repr(1.0), u, repr(float(self.final[u])), "", ""])


class OptReference(BaseModel):
    """Brute-force quantities the analysis refers to."""
    f_opt: float
    f_opt_minus_z: float
    f_z_cap_opt: float
    f_z_cup_opt: float


class BoundTracker(BaseModel):
    step_indices: List[int] = []
    times: List[float] = []
    # F(y(t)) at the recorded steps (exact mode only) and F(y(1))
    values: List[float] = []
    final_value: Optional[float] = None
    g_values: List[float] = []
    h_values: List[float] = []
    g_final: Optional[float] = None
    h_final: Optional[float] = None
    aided_bound: Optional[float] = None
    slack_constant: float
    slack_model: float
    reference: Optional[OptReference] = None


class AidedMCGResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    y1: np.ndarray
    trajectory: Trajectory
    tracker: BoundTracker


# === Main algorithm ===
class MainResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    params: MainParams
    mode: EvaluationMode
    selection: Literal["randomized", "best"]
    x1: np.ndarray
    x2: np.ndarray
    z: np.ndarray
    chosen: Literal["x1", "x2"]
    value_x1: float
    value_x2: float
    combined: float
    local_search: LocalSearchResult
    trajectory: Trajectory
    tracker: BoundTracker
    z_round_values: List[float] = []

    @property
    def output(self) -> np.ndarray:
        return self.x1 if self.chosen == "x1" else self.x2

    def summary(self) -> Dict:
        return {
            "chosen": self.chosen,
            "selection": self.selection,
            "mode": self.mode.kind,
            "t_s": self.params.t_s,
            "p": self.params.p,
            "value_x1": self.value_x1,
            "value_x2": self.value_x2,
            "combined": self.combined,
            "z": [int(u) for u in np.flatnonzero(self.z)],
            "local_search_gap": self.local_search.gap,
            "local_search_converged": self.local_search.converged,
            "x1": [float(v) for v in self.x1],
            "x2": [float(v) for v in self.x2],
            "z_round_values": self.z_round_values,
        }


class ParameterSolution(BaseModel):
    t_s: float
    p1: float
    p2: float
    p3: float
    objective: float
    # (p1/2 + p2 - p3 e^{t_s-1}(1-e^{-t_s}), p1/2 - p3 e^{t_s-1}(2-t_s-2e^{-t_s}))
    constraint_slacks: Tuple[float, float]

    @property
    def p(self) -> float:
        return self.p1 + self.p2


# === Verification ===
class GuaranteeReport(BaseModel):
    opt_set: List[int]
    f_opt: float
    f_opt_minus_z: float
    f_z_cap_opt: float
    f_z_cup_opt: float
    aided_bound: float
    combined_guarantee: float
    value_x1: float
    value_x2: float
    combined: float
    exchange_check: Optional[ExchangeVerdict] = None
    # F(y(t)) - (g(t) - slack) at every recorded step
    bound_chain: List[float] = []
    verdicts: Dict[str, bool] = {}
    margins: Dict[str, float] = {}

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    @property
    def failed_checks(self) -> List[str]:
        return [name for name, ok in self.verdicts.items() if not ok]


# === Benchmark ===
class BenchmarkRow(BaseModel):
    instance: str
    algorithm: str
    seed: int
    n: int
    mode: str
    value: Optional[float] = None
    opt: Optional[float] = None
    ratio: Optional[float] = None
    oracle_calls: int = 0
    wall_time: float = 0.0
    status: Literal["ok", "error"] = "ok"
    error: str = ""

    def sort_key(self):
        return (self.instance, self.algorithm, self.seed)

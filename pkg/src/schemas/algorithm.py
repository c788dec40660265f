import math
from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator

# === Evaluation mode ===
class EvaluationMode(BaseModel):
    """Exact (2^n enumeration) or sampled (r random sets per estimate)."""
    kind: Literal["exact", "sampled"] = "exact"
    samples: int = Field(1000, ge=1)

    @classmethod
    def exact(cls) -> "EvaluationMode":
        return cls(kind="exact")

    @classmethod
    def sampled(cls, samples: int) -> "EvaluationMode":
        return cls(kind="sampled", samples=samples)

    @property
    def is_exact(self) -> bool:
        return self.kind == "exact"


# === Local search ===
class LocalSearchConfig(BaseModel):
    epsilon: float = Field(1e-3, gt=0.0)
    step: float = Field(0.05, gt=0.0, le=1.0)
    max_iterations: int = Field(10_000, ge=1)
    mode: EvaluationMode = EvaluationMode()
    # value scale for the stopping rule; None means n * max_u f({u})
    scale: Optional[float] = Field(None, ge=0.0)
    armijo: float = Field(1e-4, ge=0.0, lt=1.0)
    min_step: float = Field(1e-12, gt=0.0)


# === Aided MCG schedule ===
class Schedule(BaseModel):
    t_s: float = Field(ge=0.0, le=1.0)
    delta1: float = Field(gt=0.0, le=1.0)
    delta2: float = Field(gt=0.0, le=1.0)

    @model_validator(mode="after")
    def _integral_phases(self):
        for length, delta, name in ((self.t_s, self.delta1, "delta1"), (1.0 - self.t_s, self.delta2, "delta2")):
            if length <= 0.0:
                continue
            steps = round(length / delta)
            if steps < 1 or abs(steps * delta - length) > 1e-9:
                raise ValueError(f"{name} = {delta} does not divide the phase length {length}")
        return self

    @classmethod
    def uniform(cls, t_s: float, delta: float) -> "Schedule":
        """Largest steps not exceeding delta that split both phases evenly."""
        def _step(length: float) -> float:
            if length <= 0.0:
                return delta
            return length / max(1, math.ceil(length / delta - 1e-9))
        return cls(t_s=t_s, delta1=_step(t_s), delta2=_step(1.0 - t_s))

    @classmethod
    def fine(cls, n: int, t_s: float) -> "Schedule":
        scale = float(n) ** -4
        return cls(t_s=t_s, delta1=t_s * scale if t_s > 0 else scale,
                   delta2=(1.0 - t_s) * scale if t_s < 1 else scale)

    @property
    def phase1_steps(self) -> int:
        return round(self.t_s / self.delta1) if self.t_s > 0 else 0

    @property
    def phase2_steps(self) -> int:
        return round((1.0 - self.t_s) / self.delta2) if self.t_s < 1 else 0

    @property
    def total_steps(self) -> int:
        return self.phase1_steps + self.phase2_steps

    @property
    def max_delta(self) -> float:
        deltas = []
        if self.phase1_steps:
            deltas.append(self.step_size(0))
        if self.phase2_steps:
            deltas.append(self.step_size(self.phase1_steps))
        return max(deltas)

    def step_size(self, k: int) -> float:
        """Step taken from grid point k; constant within each phase."""
        if k < self.phase1_steps:
            return self.t_s / self.phase1_steps
        return (1.0 - self.t_s) / self.phase2_steps

    def time(self, k: int) -> float:
        k1 = self.phase1_steps
        if k == self.total_steps:
            return 1.0
        if k <= k1:
            return self.t_s * k / k1 if k1 else 0.0
        return self.t_s + (1.0 - self.t_s) * (k - k1) / self.phase2_steps


def fine_sample_count(n: int) -> int:
    """r = ceil(48 n^6 ln(2n)) samples per weight estimate."""
    return math.ceil(48 * n ** 6 * math.log(2 * n))


# === Main algorithm parameters ===
class MainParams(BaseModel):
    t_s: float = Field(0.372, ge=0.0, le=1.0)
    p: float = Field(0.23, ge=0.0, le=1.0)
    p1: float = Field(0.205, ge=0.0)
    p2: float = Field(0.025, ge=0.0)
    p3: float = Field(0.770, ge=0.0)

    @model_validator(mode="after")
    def _simplex(self):
        if abs(self.p1 + self.p2 - self.p) > 1e-9:
            raise ValueError("p1 + p2 must equal p")
        if abs(self.p1 + self.p2 + self.p3 - 1.0) > 1e-9:
            raise ValueError("p1 + p2 + p3 must equal 1")
        return self

    @classmethod
    def from_probability(cls, t_s: float, p: float) -> "MainParams":
        """Split p into analysis weights in the proportion of the optimized solution."""
        p1 = p * 0.205 / 0.23
        return cls(t_s=t_s, p=p, p1=p1, p2=p - p1, p3=1.0 - p)

    @property
    def is_analyzed_setting(self) -> bool:
        return abs(self.t_s - 0.372) < 1e-9 and abs(self.p - 0.23) < 1e-9

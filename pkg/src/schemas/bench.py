from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, model_validator

from src.schemas.algorithm import EvaluationMode
from src.schemas.instance import ConstraintSpec

Algorithm = Literal["mcg", "aided-mcg", "local-search", "main"]


class GeneratedInstance(BaseModel):
    kind: str
    n: int = Field(ge=1)
    params: Dict[str, float] = {}
    seed: int = 0
    constraint: Optional[ConstraintSpec] = None
    constraint_kind: Optional[str] = None
    constraint_params: Dict[str, float] = {}


class InstanceEntry(BaseModel):
    name: Optional[str] = None
    path: Optional[str] = None
    generate: Optional[GeneratedInstance] = None

    @model_validator(mode="after")
    def _one_source(self):
        if (self.path is None) == (self.generate is None):
            raise ValueError("an instance entry needs exactly one of 'path' or 'generate'")
        return self


class BenchmarkConfig(BaseModel):
    instances: List[InstanceEntry]
    algorithms: List[Algorithm] = ["mcg", "aided-mcg", "local-search", "main"]
    seeds: List[int] = [0]
    mode: EvaluationMode = EvaluationMode()
    delta: float = Field(1e-3, gt=0.0, le=1.0)
    t_s: float = Field(0.372, ge=0.0, le=1.0)
    p: float = Field(0.23, ge=0.0, le=1.0)
    selection: Literal["randomized", "best"] = "randomized"
    epsilon: float = Field(1e-3, gt=0.0)
    workers: int = Field(1, ge=1)
    # brute-force OPT is computed for instances up to this size
    opt_limit: int = Field(20, ge=0, le=20)

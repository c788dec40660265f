import os
import logging
from typing import Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field

# Load environment variables (like SUBMOD_SEED)
load_dotenv()


class Settings(BaseModel):
    seed: int = 0
    mode: Literal["exact", "sampled"] = "exact"
    samples: int = Field(1000, ge=1)
    delta: float = Field(1e-3, gt=0.0, le=1.0)
    # overrides the benchmark config when set
    workers: Optional[int] = Field(None, ge=1)
    log_level: str = "INFO"
    data_dir: str = "data"

    @classmethod
    def from_env(cls) -> "Settings":
        """Read settings from the environment, falling back to defaults."""
        values = {
            "seed": os.getenv("SUBMOD_SEED"),
            "mode": os.getenv("SUBMOD_MODE"),
            "samples": os.getenv("SUBMOD_SAMPLES"),
            "delta": os.getenv("SUBMOD_DELTA"),
            "workers": os.getenv("SUBMOD_WORKERS"),
            "log_level": os.getenv("SUBMOD_LOG_LEVEL"),
            "data_dir": os.getenv("SUBMOD_DATA_DIR"),
        }
        return cls(**{key: value for key, value in values.items() if value is not None})


def configure_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

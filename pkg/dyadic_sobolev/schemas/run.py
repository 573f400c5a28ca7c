from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator

from dyadic_sobolev.schemas.embedding import CoefficientDistribution, EnsembleSpec, Inequality
from dyadic_sobolev.schemas.experiment import Family


class Command(str, Enum):
    NORMS = "norms"
    VERIFY = "verify"
    EMBEDDING_SCAN = "embedding-scan"
    COUNTEREXAMPLE = "counterexample"
    CALIBRATE = "calibrate"


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"


class RunConfig(BaseModel):
    """Everything one CLI invocation needs, validated before any work starts."""

    command: Command
    s_values: List[float] = Field(default_factory=list)
    alpha: Optional[float] = None
    n_list: List[int] = Field(default_factory=list)
    depth: Optional[int] = Field(None, ge=0)
    seed: int = 1
    count: int = Field(100, ge=0)
    input: Optional[Path] = None
    output: Optional[Path] = None
    format: OutputFormat = OutputFormat.JSON
    suites: List[str] = Field(default_factory=list)
    checks: List[Inequality] = Field(default_factory=list)
    family: Optional[Family] = None
    distribution: CoefficientDistribution = CoefficientDistribution.UNIFORM
    sparsity: int = Field(8, ge=1)
    scale_range: Tuple[int, int] = (-6, 2)
    index_range: Tuple[int, int] = (-4, 4)
    workers: int = Field(1, ge=1)
    square: bool = False  # norms of f^2 instead of f

    @field_validator("n_list")
    @classmethod
    def validate_n_list(cls, v: List[int]) -> List[int]:
        if any(n < 0 for n in v):
            raise ValueError("N values must be non-negative")
        return v

    def ensemble(self) -> EnsembleSpec:
        return EnsembleSpec(
            seed=self.seed,
            count=self.count,
            scale_range=self.scale_range,
            index_range=self.index_range,
            distribution=self.distribution,
            sparsity=self.sparsity,
        )

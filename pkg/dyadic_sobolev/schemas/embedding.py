from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator


class CoefficientDistribution(str, Enum):
    UNIFORM = "uniform"  # uniform[-1, 1] on random intervals
    LACUNARY = "lacunary"  # random tower of nested right children
    SINGLE = "single"  # one random interval, coefficient 1


class Inequality(str, Enum):
    MORREY = "morrey"
    BMO = "bmo"
    GNS = "gns"
    ALGEBRA = "algebra"
    LOCAL = "local"


class ConstantSource(str, Enum):
    EXPLICIT = "explicit"
    CALIBRATED = "calibrated"
    UNCALIBRATED = "uncalibrated"


class EnsembleSpec(BaseModel):
    seed: int = 1
    count: int = Field(100, ge=0)
    scale_range: Tuple[int, int] = (-6, 2)
    index_range: Tuple[int, int] = (-4, 4)
    distribution: CoefficientDistribution = CoefficientDistribution.UNIFORM
    sparsity: int = Field(8, ge=1)

    @model_validator(mode="after")
    def validate_ranges(self) -> "EnsembleSpec":
        if self.scale_range[0] > self.scale_range[1]:
            raise ValueError("scale_range must be ordered (k_lo, k_hi)")
        if self.index_range[0] > self.index_range[1]:
            raise ValueError("index_range must be ordered (n_lo, n_hi)")
        return self


class CheckSpec(BaseModel):
    """One inequality to evaluate on every ensemble member."""

    inequality: Inequality
    s: Optional[float] = None

    def label(self) -> str:
        return self.inequality.value if self.s is None else f"{self.inequality.value}@s={self.s}"


class SampleFailure(BaseModel):
    sample: int
    ratio: float
    series: Dict[str, Any]


class EmbeddingVerdict(BaseModel):
    inequality: Inequality
    s: Optional[float] = None
    ratios: List[float] = Field(default_factory=list)
    sup_ratio: float = 0.0
    constant: Optional[float] = None
    constant_source: ConstantSource = ConstantSource.EXPLICIT
    passed: bool = True
    failures: List[SampleFailure] = Field(default_factory=list)

    @property
    def samples(self) -> int:
        return len(self.ratios)

    def to_row(self) -> dict:
        return {
            "inequality": self.inequality.value,
            "s": self.s,
            "samples": self.samples,
            "sup_ratio": self.sup_ratio,
            "constant": self.constant,
            "constant_source": self.constant_source.value,
            "passed": self.passed,
            "failures": len(self.failures),
        }

    class Config:
        from_attributes = True

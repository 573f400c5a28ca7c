from enum import Enum
from typing import Any, ClassVar, Dict, List, Optional

from pydantic import BaseModel, Field

from dyadic_sobolev.schemas.embedding import EmbeddingVerdict


class Family(str, Enum):
    LOWREG = "lowreg"
    CRITICAL = "critical"


class Verdict(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    DIVERGES = "DIVERGES"
    BOUNDED = "BOUNDED"
    ANOMALOUS = "ANOMALOUS"


class CounterexampleSpec(BaseModel):
    family: Family
    s: float
    alpha: float
    N: int = Field(1, ge=1)


class GrowthFit(BaseModel):
    model: str  # exponential | power
    exponent: float
    predicted: float
    relative_error: float
    tolerance: float
    correction_exponent: float
    naive_exponent: float
    band_low: float
    band_high: float
    residual: float
    terms: int


class CounterexampleRow(BaseModel):
    N: int
    route: str
    hs_norm_f: float
    hs_norm_sq_f: float
    norm_increment: float
    increment_expected: float
    increment_ratio: Optional[float] = None
    hs_seminorm_sq_f2: float
    log2_hs_seminorm_sq_f2: float
    l2_sq_f2: float
    lower_bound: float
    tail_bound: Optional[float] = None
    tail_observed: Optional[float] = None

    CSV_COLUMNS: ClassVar[List[str]] = [
        "N",
        "route",
        "hs_norm_f",
        "hs_norm_sq_f",
        "norm_increment",
        "increment_expected",
        "increment_ratio",
        "hs_seminorm_sq_f2",
        "log2_hs_seminorm_sq_f2",
        "l2_sq_f2",
        "lower_bound",
        "tail_bound",
        "tail_observed",
    ]


class ExperimentReport(BaseModel):
    kind: str  # counterexample | embedding
    parameters: Dict[str, Any] = Field(default_factory=dict)
    rows: List[CounterexampleRow] = Field(default_factory=list)
    fit: Optional[GrowthFit] = None
    verdicts: List[EmbeddingVerdict] = Field(default_factory=list)
    checks: Dict[str, bool] = Field(default_factory=dict)
    verdict: Verdict = Verdict.PASS

    @property
    def passed(self) -> bool:
        if self.kind == "counterexample":
            return self.verdict == Verdict.DIVERGES and all(self.checks.values())
        return self.verdict == Verdict.PASS

    class Config:
        from_attributes = True

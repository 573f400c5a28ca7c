import math
from typing import ClassVar, List, Optional

from pydantic import BaseModel, Field, model_validator


class TruncationInfo(BaseModel):
    route: str = "haar"  # haar | step | square
    depth: Optional[int] = None
    finite_part: float = 0.0
    tail_closed_form: float = 0.0
    hulls: List[str] = Field(default_factory=list)


class NormReport(BaseModel):
    s: float
    l2: float
    hs_seminorm: float
    hs_norm: float
    linf: float
    lq: Optional[float] = None
    q: Optional[float] = None
    bmo: float
    truncation: TruncationInfo = Field(default_factory=TruncationInfo)

    CSV_COLUMNS: ClassVar[List[str]] = [
        "s",
        "l2",
        "hs_seminorm",
        "hs_norm",
        "linf",
        "q",
        "lq",
        "bmo",
        "route",
        "finite_part",
        "tail_closed_form",
    ]

    @model_validator(mode="after")
    def validate_norm_identity(self) -> "NormReport":
        expected = self.hs_seminorm**2 + self.l2**2
        if not math.isclose(self.hs_norm**2, expected, rel_tol=1e-12, abs_tol=1e-300):
            raise ValueError("hs_norm^2 must equal hs_seminorm^2 + l2^2")
        return self

    def to_row(self) -> dict:
        return {
            "s": self.s,
            "l2": self.l2,
            "hs_seminorm": self.hs_seminorm,
            "hs_norm": self.hs_norm,
            "linf": self.linf,
            "q": self.q,
            "lq": self.lq,
            "bmo": self.bmo,
            "route": self.truncation.route,
            "finite_part": self.truncation.finite_part,
            "tail_closed_form": self.truncation.tail_closed_form,
        }

    class Config:
        from_attributes = True

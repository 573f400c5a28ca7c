import json
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, Field

from dyadic_sobolev.schemas.embedding import Inequality


class CalibrationEntry(BaseModel):
    inequality: Inequality
    s: float
    sup_ratio: float = Field(..., ge=0.0)
    samples: int = Field(..., ge=0)


class CalibrationFixture(BaseModel):
    """Empirical sup ratios standing in for constants the theory leaves implicit."""

    seed: int
    count: int
    margin: float = Field(1.5, gt=1.0)
    entries: List[CalibrationEntry] = Field(default_factory=list)

    def entry_for(self, inequality: Inequality, s: float) -> Optional[CalibrationEntry]:
        for entry in self.entries:
            if entry.inequality == inequality and abs(entry.s - s) <= 1e-12:
                return entry
        return None

    def bound_for(self, inequality: Inequality, s: float) -> Optional[float]:
        entry = self.entry_for(inequality, s)
        return entry.sup_ratio * self.margin if entry is not None else None

    @classmethod
    def load(cls, path: Path) -> Optional["CalibrationFixture"]:
        if not path.exists():
            return None
        return cls.model_validate(json.loads(path.read_text(encoding="utf-8")))

    def save(self, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.model_dump_json(indent=2) + "\n", encoding="utf-8")

    class Config:
        from_attributes = True

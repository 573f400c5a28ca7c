from typing import Dict, List

from pydantic import BaseModel, Field


class SuiteResult(BaseModel):
    name: str
    samples: int = 0
    max_residuals: Dict[str, float] = Field(default_factory=dict)
    tolerances: Dict[str, float] = Field(default_factory=dict)
    failures: List[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def record(self, check: str, residual: float, tolerance: float) -> None:
        """Keep the worst residual per check; a residual past its tolerance is a failure."""
        worst = max(self.max_residuals.get(check, 0.0), residual)
        self.max_residuals[check] = worst
        self.tolerances[check] = tolerance
        if residual > tolerance and check not in self.failures:
            self.failures.append(check)

    def to_rows(self) -> List[dict]:
        return [
            {
                "suite": self.name,
                "check": check,
                "max_residual": residual,
                "tolerance": self.tolerances.get(check),
                "passed": check not in self.failures,
            }
            for check, residual in sorted(self.max_residuals.items())
        ]


class VerificationReport(BaseModel):
    seed: int
    count: int
    suites: List[SuiteResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(suite.passed for suite in self.suites)

    class Config:
        from_attributes = True

import logging
from typing import List, Optional, Sequence

from dyadic_sobolev.config import Settings
from dyadic_sobolev.core.embeddings import run_ensemble, validate_check
from dyadic_sobolev.schemas.calibration import CalibrationFixture
from dyadic_sobolev.schemas.embedding import CheckSpec, EnsembleSpec, Inequality
from dyadic_sobolev.schemas.experiment import ExperimentReport
from dyadic_sobolev.services.calibration_service import CALIBRATION_GRID, CalibrationService

logger = logging.getLogger(__name__)


class EmbeddingService:
    """One ensemble report per s, with calibrated constants from the fixture file."""

    def __init__(self, settings: Settings, calibration_service: Optional[CalibrationService] = None):
        self.settings = settings
        self.calibration_service = calibration_service or CalibrationService(settings)
        self._calibration: Optional[CalibrationFixture] = None

    @property
    def calibration(self) -> Optional[CalibrationFixture]:
        if self._calibration is None:
            if self.settings.CALIBRATE_WHEN_MISSING:
                self._calibration = self.calibration_service.load_or_calibrate()
            else:
                self._calibration = CalibrationFixture.load(self.settings.calibration_path)
            if self._calibration is None:
                logger.warning(
                    f"No calibration fixture at {self.settings.calibration_path}; "
                    f"implicit-constant checks report uncalibrated ratios"
                )
        return self._calibration

    def use_calibration(self, fixture: CalibrationFixture) -> None:
        self._calibration = fixture

    @staticmethod
    def checks_for(s: float, inequalities: Sequence[Inequality]) -> List[CheckSpec]:
        return [
            CheckSpec(inequality=i, s=None if i == Inequality.BMO else s) for i in inequalities
        ]

    def scan(
        self,
        s_values: Sequence[float],
        inequalities: Sequence[Inequality],
        spec: EnsembleSpec,
        workers: Optional[int] = None,
    ) -> List[ExperimentReport]:
        plan = [(s, self.checks_for(s, inequalities)) for s in s_values]
        # reject out-of-range parameters before any sample is drawn
        for _, checks in plan:
            for check in checks:
                validate_check(check)
        workers = workers if workers is not None else self.settings.WORKERS
        needs_fixture = any(c.inequality in CALIBRATION_GRID for _, checks in plan for c in checks)
        calibration = self.calibration if needs_fixture else None
        reports = []
        for s, checks in plan:
            report = run_ensemble(spec, checks, calibration=calibration, workers=workers)
            report.parameters["s"] = s
            reports.append(report)
        return reports

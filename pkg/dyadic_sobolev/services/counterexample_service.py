import logging
from typing import Optional, Sequence

from dyadic_sobolev.config import Settings
from dyadic_sobolev.core.counterexamples import divergence_experiment
from dyadic_sobolev.schemas.experiment import CounterexampleSpec, ExperimentReport, Family

logger = logging.getLogger(__name__)

DEFAULT_N = {
    Family.LOWREG: list(range(8, 25)),
    Family.CRITICAL: [64, 96, 128, 192, 256, 384, 512],
}


class CounterexampleService:
    """Runs the tower divergence experiments with tolerances from settings."""

    def __init__(self, settings: Settings):
        self.settings = settings

    def run(
        self,
        family: Family,
        s: float,
        alpha: float,
        n_list: Optional[Sequence[int]] = None,
    ) -> ExperimentReport:
        levels = list(n_list) if n_list else DEFAULT_N[family]
        spec = CounterexampleSpec(family=family, s=s, alpha=alpha, N=max(max(levels), 1))
        if family == Family.LOWREG:
            fit_tolerance = self.settings.LOWREG_FIT_TOLERANCE
        else:
            fit_tolerance = self.settings.CRITICAL_FIT_TOLERANCE
        report = divergence_experiment(
            spec,
            levels,
            fit_tolerance=fit_tolerance,
            increment_tolerance=self.settings.INCREMENT_RATIO_TOLERANCE,
            grid_step=self.settings.FIT_GRID_STEP,
            cross_check_tolerance=self.settings.TRANSCENDENTAL_TOLERANCE,
            critical_reference_N=self.settings.CRITICAL_MAX_N,
        )
        if not report.passed:
            failed = [name for name, ok in report.checks.items() if not ok]
            logger.warning(f"Counterexample {family.value}: verdict {report.verdict.value}, failed {failed}")
        return report

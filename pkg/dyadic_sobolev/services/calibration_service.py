import logging
from pathlib import Path
from typing import Dict, Optional, Tuple

from dyadic_sobolev.config import Settings
from dyadic_sobolev.core.embeddings import evaluate_ratios
from dyadic_sobolev.schemas.calibration import CalibrationEntry, CalibrationFixture
from dyadic_sobolev.schemas.embedding import (
    CheckSpec,
    CoefficientDistribution,
    EnsembleSpec,
    Inequality,
)
from dyadic_sobolev.utils.ensembles import generate_ensemble

logger = logging.getLogger(__name__)

CALIBRATION_GRID: Dict[Inequality, Tuple[float, ...]] = {
    Inequality.GNS: (0.1, 0.25, 0.4),
    Inequality.ALGEBRA: (0.6, 0.75, 0.9),
    Inequality.LOCAL: (0.6, 0.75, 0.9),
}


class CalibrationService:
    """Measures sup ratios of the implicit-constant inequalities on a seeded ensemble."""

    def __init__(self, settings: Settings):
        self.settings = settings

    def calibrate(
        self, seed: Optional[int] = None, count: Optional[int] = None
    ) -> CalibrationFixture:
        seed = self.settings.CALIBRATION_SEED if seed is None else seed
        count = self.settings.CALIBRATION_COUNT if count is None else count
        samples = []
        for offset, distribution in enumerate(CoefficientDistribution):
            spec = EnsembleSpec(
                seed=seed + offset,
                count=count,
                scale_range=tuple(self.settings.DEFAULT_SCALE_RANGE),
                index_range=tuple(self.settings.DEFAULT_INDEX_RANGE),
                distribution=distribution,
                sparsity=self.settings.DEFAULT_SPARSITY,
            )
            samples.extend(generate_ensemble(spec))

        entries = []
        for inequality, s_values in CALIBRATION_GRID.items():
            for s in s_values:
                check = CheckSpec(inequality=inequality, s=s)
                ratios = [
                    r
                    for r in evaluate_ratios(check, samples, workers=self.settings.WORKERS)
                    if r is not None
                ]
                sup_ratio = max(ratios, default=0.0)
                logger.info(f"Calibrated {check.label()}: sup ratio {sup_ratio:.6g} on {len(ratios)}")
                entries.append(
                    CalibrationEntry(inequality=inequality, s=s, sup_ratio=sup_ratio, samples=len(ratios))
                )
        return CalibrationFixture(
            seed=seed, count=count, margin=self.settings.CALIBRATION_MARGIN, entries=entries
        )

    def write(self, fixture: CalibrationFixture, path: Optional[Path] = None) -> Path:
        target = Path(path) if path is not None else self.settings.calibration_path
        fixture.save(target)
        logger.info(f"Calibration fixture written to {target}")
        return target

    def load_or_calibrate(self, path: Optional[Path] = None) -> CalibrationFixture:
        """The stored fixture, or a freshly measured one written to the same place."""
        target = Path(path) if path is not None else self.settings.calibration_path
        stored = CalibrationFixture.load(target)
        if stored is not None:
            return stored
        logger.info(f"No calibration fixture at {target}; measuring one")
        fixture = self.calibrate()
        self.write(fixture, target)
        return fixture

from pathlib import Path
from typing import List

from pydantic import model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


PACKAGE_DIR = Path(__file__).resolve().parent


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file="dyadic_sobolev/.env",
        env_file_encoding="utf-8",
        extra="allow",
    )
    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "simple"  # simple | json

    # Tolerances
    EXACT_TOLERANCE: float = 1e-12  # identities among exactly representable quantities
    TRANSCENDENTAL_TOLERANCE: float = 1e-9  # chains of pow/log evaluations
    COEFFICIENT_TOLERANCE: float = 1e-10  # dual-route square coefficients

    # Dense step functions
    MAX_STEP_PIECES: int = 2**22

    # Ensembles
    DEFAULT_SEED: int = 1
    DEFAULT_COUNT: int = 100
    DEFAULT_SPARSITY: int = 8
    DEFAULT_SCALE_RANGE: List[int] = [-6, 2]
    DEFAULT_INDEX_RANGE: List[int] = [-4, 4]
    WORKERS: int = 1

    # Calibration fixtures
    CALIBRATION_MARGIN: float = 1.5
    CALIBRATION_SEED: int = 20240101
    CALIBRATION_COUNT: int = 1000
    CALIBRATION_PATH: str = str(PACKAGE_DIR / "data" / "calibration.json")
    CALIBRATE_WHEN_MISSING: bool = True

    # Critical tower depth used for the remaining-norm reference
    CRITICAL_MAX_N: int = 4096

    # Growth fits
    FIT_GRID_STEP: float = 1e-3
    LOWREG_FIT_TOLERANCE: float = 0.15
    CRITICAL_FIT_TOLERANCE: float = 0.20
    INCREMENT_RATIO_TOLERANCE: float = 0.05

    @model_validator(mode="after")
    def validate_ranges(self) -> "Settings":
        if self.DEFAULT_SCALE_RANGE[0] > self.DEFAULT_SCALE_RANGE[1]:
            raise ValueError("DEFAULT_SCALE_RANGE must be ordered")
        if self.DEFAULT_INDEX_RANGE[0] > self.DEFAULT_INDEX_RANGE[1]:
            raise ValueError("DEFAULT_INDEX_RANGE must be ordered")
        if self.CALIBRATION_MARGIN <= 1.0:
            raise ValueError("CALIBRATION_MARGIN must exceed 1")
        return self

    @property
    def calibration_path(self) -> Path:
        """Return the calibration fixture location as a Path."""
        return Path(self.CALIBRATION_PATH)


settings = Settings()

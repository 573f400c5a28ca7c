import pytest
from dependency_injector import providers

from dyadic_sobolev.config import Settings
from dyadic_sobolev.containers import Container
from dyadic_sobolev.schemas.calibration import CalibrationFixture
from dyadic_sobolev.services.calibration_service import CalibrationService

# ensemble size measured when no fixture is stored in the package
FALLBACK_CALIBRATION_COUNT = 100


@pytest.fixture
def test_settings(tmp_path):
    return Settings(
        LOG_LEVEL="WARNING",
        DEFAULT_COUNT=20,
        CALIBRATION_COUNT=30,
        CALIBRATION_PATH=str(tmp_path / "calibration.json"),
        CALIBRATE_WHEN_MISSING=False,
    )


@pytest.fixture
def container(test_settings):
    container = Container()
    container.config.config.override(providers.Object(test_settings))
    yield container
    container.config.config.reset_override()


@pytest.fixture(scope="session")
def stored_calibration():
    """The package fixture, measured at the default seed when none is stored."""
    settings = Settings(LOG_LEVEL="WARNING")
    stored = CalibrationFixture.load(settings.calibration_path)
    if stored is not None:
        return stored
    fallback = Settings(LOG_LEVEL="WARNING", CALIBRATION_COUNT=FALLBACK_CALIBRATION_COUNT)
    return CalibrationService(fallback).calibrate()

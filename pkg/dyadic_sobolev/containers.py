from dependency_injector import containers, providers

from dyadic_sobolev.config import Settings
from dyadic_sobolev.services.calibration_service import CalibrationService
from dyadic_sobolev.services.counterexample_service import CounterexampleService
from dyadic_sobolev.services.embedding_service import EmbeddingService
from dyadic_sobolev.services.norm_service import NormService
from dyadic_sobolev.services.verification_service import VerificationService


class ConfigModule(containers.DeclarativeContainer):
    """Application configuration."""

    config = providers.Singleton(Settings)


class ServiceModule(containers.DeclarativeContainer):
    """Service layer dependencies."""

    config = providers.DependenciesContainer()

    norm_service = providers.Factory(NormService, settings=config.config)
    verification_service = providers.Factory(VerificationService, settings=config.config)
    calibration_service = providers.Factory(CalibrationService, settings=config.config)
    embedding_service = providers.Factory(
        EmbeddingService, settings=config.config, calibration_service=calibration_service
    )
    counterexample_service = providers.Factory(CounterexampleService, settings=config.config)


class Container(containers.DeclarativeContainer):
    """Application container."""

    config = providers.Container(ConfigModule)
    services = providers.Container(ServiceModule, config=config)

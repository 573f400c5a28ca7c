import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from dyadic_sobolev.config import Settings
from dyadic_sobolev.containers import Container
from dyadic_sobolev.core.exceptions import EXIT_ASSERTION, EXIT_USAGE, DyadicError
from dyadic_sobolev.logging_config import setup_logging
from dyadic_sobolev.schemas.embedding import CoefficientDistribution, Inequality
from dyadic_sobolev.schemas.experiment import Family
from dyadic_sobolev.schemas.run import Command, OutputFormat, RunConfig
from dyadic_sobolev.utils.writers import render

logger = logging.getLogger(__name__)

EXIT_OK = 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dyadic_sobolev",
        description="Haar-coefficient norms, identities and counterexamples for dyadic Sobolev spaces.",
    )
    parser.add_argument("--log-level", default=None, help="Override LOG_LEVEL")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", type=Path, default=None, help="Write the report here instead of stdout")
    common.add_argument("--format", choices=[f.value for f in OutputFormat], default="json")

    ensemble = argparse.ArgumentParser(add_help=False)
    ensemble.add_argument("--seed", type=int, default=None, help="Default DEFAULT_SEED")
    ensemble.add_argument("--count", type=int, default=None, help="Default DEFAULT_COUNT")
    ensemble.add_argument("--workers", type=int, default=None, help="Default WORKERS")

    commands = parser.add_subparsers(dest="command", required=True)

    norms = commands.add_parser("norms", parents=[common], help="Norm report of a Haar series")
    norms.add_argument(
        "--input", type=Path, default=None, help="HaarSeries or StepFunction JSON (stdin if omitted)"
    )
    norms.add_argument("--s", type=float, action="append", required=True, dest="s_values")
    norms.add_argument("--depth", type=int, default=None, help="Cross-check ancestor tails to this depth")
    norms.add_argument("--square", action="store_true", help="Report f^2 instead of f")

    verify = commands.add_parser("verify", parents=[common, ensemble], help="Identity suites")
    verify.add_argument("--suite", action="append", default=[], dest="suites")

    scan = commands.add_parser("embedding-scan", parents=[common, ensemble], help="Embedding ensembles")
    scan.add_argument("--s", type=float, action="append", required=True, dest="s_values")
    scan.add_argument(
        "--check",
        action="append",
        default=[],
        dest="checks",
        choices=[i.value for i in Inequality],
    )
    scan.add_argument(
        "--distribution",
        choices=[d.value for d in CoefficientDistribution],
        default=CoefficientDistribution.UNIFORM.value,
    )
    scan.add_argument("--sparsity", type=int, default=None, help="Default DEFAULT_SPARSITY")

    counter = commands.add_parser("counterexample", parents=[common], help="Tower divergence experiment")
    counter.add_argument("--family", choices=[f.value for f in Family], required=True)
    counter.add_argument("--s", type=float, required=True)
    counter.add_argument("--alpha", type=float, required=True)
    counter.add_argument("--n", type=int, action="append", default=[], dest="n_list")

    calibrate = commands.add_parser("calibrate", help="Write the calibration fixture")
    calibrate.add_argument("--seed", type=int, default=None, help="Default CALIBRATION_SEED")
    calibrate.add_argument("--count", type=int, default=None, help="Default CALIBRATION_COUNT")
    calibrate.add_argument("--output", type=Path, default=None)
    return parser


def to_run_config(args: argparse.Namespace, settings: Settings) -> RunConfig:
    """Fill unset flags from settings and validate the whole invocation."""
    if args.command == "calibrate":
        defaults = {"seed": settings.CALIBRATION_SEED, "count": settings.CALIBRATION_COUNT}
    else:
        defaults = {"seed": settings.DEFAULT_SEED, "count": settings.DEFAULT_COUNT}
    defaults.update(
        workers=settings.WORKERS,
        sparsity=settings.DEFAULT_SPARSITY,
        scale_range=tuple(settings.DEFAULT_SCALE_RANGE),
        index_range=tuple(settings.DEFAULT_INDEX_RANGE),
    )
    values = {**defaults, **{key: value for key, value in vars(args).items() if value is not None}}
    values.pop("log_level", None)
    if args.command == "counterexample":
        values["s_values"] = [values.pop("s")]
    if args.command == "embedding-scan" and not values.get("checks"):
        values["checks"] = [Inequality.MORREY.value]
    return RunConfig(**values)


def _emit(text: str, output: Optional[Path]) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    output.parent.mkdir(parents=True, exist_ok=True)
    output.write_text(text, encoding="utf-8")
    logger.info(f"Report written to {output}")


def execute(config: RunConfig, container: Container) -> int:
    services = container.services
    fmt = config.format.value

    if config.command == Command.NORMS:
        service = services.norm_service()
        f = service.load_function(config.input)
        if config.square:
            reports = service.square_reports(f, config.s_values)
        else:
            reports = service.reports(f, config.s_values, config.depth)
        _emit(render(reports, fmt), config.output)
        return EXIT_OK

    if config.command == Command.VERIFY:
        report = services.verification_service().run(config.suites, config.seed, config.count)
        _emit(render([report], fmt), config.output)
        return EXIT_OK if report.passed else EXIT_ASSERTION

    if config.command == Command.EMBEDDING_SCAN:
        reports = services.embedding_service().scan(
            config.s_values, config.checks, config.ensemble(), workers=config.workers
        )
        _emit(render(reports, fmt), config.output)
        return EXIT_OK if all(r.passed for r in reports) else EXIT_ASSERTION

    if config.command == Command.COUNTEREXAMPLE:
        report = services.counterexample_service().run(
            config.family, config.s_values[0], config.alpha, config.n_list
        )
        _emit(render([report], fmt), config.output)
        return EXIT_OK if report.passed else EXIT_ASSERTION

    service = services.calibration_service()
    fixture = service.calibrate(config.seed, config.count)
    service.write(fixture, config.output)
    return EXIT_OK


def main(argv: Optional[List[str]] = None, container: Optional[Container] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    container = container or Container()
    app_settings = container.config.config()
    setup_logging(args.log_level or app_settings.LOG_LEVEL, app_settings.LOG_FORMAT)
    try:
        config = to_run_config(args, app_settings)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"])
        sys.stderr.write(f"error: invalid {field}: {first['msg']}\n")
        return EXIT_USAGE

    try:
        return execute(config, container)
    except DyadicError as e:
        logger.debug(f"{e.error_code} details: {e.details}")
        sys.stderr.write(f"error: {e.message}\n")
        return e.exit_code
    except ValidationError as e:
        sys.stderr.write(f"error: {e.errors()[0]['msg']}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

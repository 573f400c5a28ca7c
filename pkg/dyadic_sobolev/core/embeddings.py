"""
Embedding inequalities checked sample by sample.

Morrey and BMO come with explicit constants and are hard assertions. The
Sobolev embedding below s = 1/2, the algebra bound and the local square
estimate have constants the theory does not pin down; those are compared
against a calibration fixture when one is available.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence, Tuple

from dyadic_sobolev.core.algebra import high_reg_bound_ratio, local_square_estimate
from dyadic_sobolev.core.dyadic import DyadicInterval
from dyadic_sobolev.core.exceptions import ParameterRangeError
from dyadic_sobolev.core.haar import HaarSeries, regions
from dyadic_sobolev.core.norms import bmo_norm, hs_seminorm, l2_norm, lq_norm
from dyadic_sobolev.core.operators import FractionalParameter
from dyadic_sobolev.schemas.calibration import CalibrationFixture
from dyadic_sobolev.schemas.embedding import (
    CheckSpec,
    ConstantSource,
    EmbeddingVerdict,
    EnsembleSpec,
    Inequality,
    SampleFailure,
)
from dyadic_sobolev.schemas.experiment import ExperimentReport, Verdict
from dyadic_sobolev.schemas.series import HaarSeriesPayload
from dyadic_sobolev.utils.ensembles import generate_ensemble

logger = logging.getLogger(__name__)

DEFAULT_LOCAL_INTERVAL = DyadicInterval(0, 0)
EXPLICIT_SLACK = 1e-12


def morrey_constant(s: float) -> float:
    """(1 - 2^(1-2s))^(-1/2), from the ancestor chain up to the scale-0 interval."""
    validate_check(CheckSpec(inequality=Inequality.MORREY, s=s))
    return (1.0 - 2.0 ** (1.0 - 2.0 * s)) ** -0.5


def validate_check(check: CheckSpec) -> None:
    inequality, s = check.inequality, check.s
    if inequality == Inequality.BMO:
        return
    if s is None:
        raise ParameterRangeError("s", details={"inequality": inequality.value})
    FractionalParameter(s)
    if inequality == Inequality.MORREY and not s > 0.5:
        raise ParameterRangeError("s > 1/2", details={"s": s})
    if inequality == Inequality.ALGEBRA and not s > 0.5:
        raise ParameterRangeError("s > 1/2", details={"s": s})
    if inequality == Inequality.LOCAL and not s > 0.5:
        raise ParameterRangeError("1/2 < s < 1", details={"s": s})
    if inequality == Inequality.GNS and not s < 0.5:
        raise ParameterRangeError("s < 1/2", details={"s": s})


def morrey_ratio(f: HaarSeries, s: float) -> float:
    """sup |f| / (|f|_L2 + C_s |f|_Hs), at most 1 for every f."""
    rhs = l2_norm(f) + morrey_constant(s) * hs_seminorm(f, s)
    if rhs == 0.0:
        return 0.0
    return max((abs(v) for v, _ in regions(f)), default=0.0) / rhs


def bmo_ratio(f: HaarSeries) -> float:
    """|f|_BMO / |f|_H^(1/2), at most 1."""
    seminorm = hs_seminorm(f, 0.5)
    return bmo_norm(f) / seminorm if seminorm > 0.0 else 0.0


def gns_ratio(f: HaarSeries, s: float) -> float:
    """|f|_Lq / |f|_Hs with q = 2 / (1 - 2s)."""
    validate_check(CheckSpec(inequality=Inequality.GNS, s=s))
    if not f:
        raise ParameterRangeError("f ≠ 0")
    q = FractionalParameter(s).q
    return lq_norm(f, q) / hs_seminorm(f, s)


def algebra_ratio(f: HaarSeries, s: float) -> float:
    validate_check(CheckSpec(inequality=Inequality.ALGEBRA, s=s))
    return high_reg_bound_ratio(f, s)


def local_ratio(
    f: HaarSeries, s: float, interval: DyadicInterval = DEFAULT_LOCAL_INTERVAL
) -> float:
    lhs, rhs = local_square_estimate(f, s, interval)
    return lhs / rhs if rhs > 0.0 else 0.0


def sample_ratio(
    check: CheckSpec, f: HaarSeries, interval: DyadicInterval = DEFAULT_LOCAL_INTERVAL
) -> Optional[float]:
    """Ratio of one inequality on one sample; None where it is undefined (f = 0)."""
    inequality = check.inequality
    if inequality == Inequality.MORREY:
        return morrey_ratio(f, check.s)
    if inequality == Inequality.BMO:
        return bmo_ratio(f)
    if not f:
        return None
    if inequality == Inequality.GNS:
        return gns_ratio(f, check.s)
    if inequality == Inequality.ALGEBRA:
        return algebra_ratio(f, check.s)
    return local_ratio(f, check.s, interval)


def _bound(
    check: CheckSpec, calibration: Optional[CalibrationFixture]
) -> Tuple[Optional[float], Optional[float], ConstantSource]:
    """(ratio bound, reported constant, source)"""
    if check.inequality == Inequality.MORREY:
        return 1.0, morrey_constant(check.s), ConstantSource.EXPLICIT
    if check.inequality == Inequality.BMO:
        return 1.0, 1.0, ConstantSource.EXPLICIT
    bound = calibration.bound_for(check.inequality, check.s) if calibration else None
    if bound is None:
        return None, None, ConstantSource.UNCALIBRATED
    return bound, bound, ConstantSource.CALIBRATED


def build_verdict(
    check: CheckSpec,
    samples: Sequence[HaarSeries],
    ratios: Sequence[Optional[float]],
    calibration: Optional[CalibrationFixture] = None,
) -> EmbeddingVerdict:
    bound, constant, source = _bound(check, calibration)
    measured: List[float] = []
    failures: List[SampleFailure] = []
    for number, (f, ratio) in enumerate(zip(samples, ratios)):
        if ratio is None:
            continue
        measured.append(ratio)
        limit = bound * (1.0 + EXPLICIT_SLACK) if source == ConstantSource.EXPLICIT else bound
        if limit is not None and ratio > limit:
            logger.warning(f"{check.label()} fails on sample {number}: ratio {ratio!r} > {bound!r}")
            failures.append(
                SampleFailure(
                    sample=number,
                    ratio=ratio,
                    series=HaarSeriesPayload.from_series(f).model_dump(),
                )
            )
    return EmbeddingVerdict(
        inequality=check.inequality,
        s=check.s,
        ratios=measured,
        sup_ratio=max(measured, default=0.0),
        constant=constant,
        constant_source=source,
        passed=not failures,
        failures=failures,
    )


def morrey_check(f: HaarSeries, s: float) -> EmbeddingVerdict:
    check = CheckSpec(inequality=Inequality.MORREY, s=s)
    validate_check(check)
    return build_verdict(check, [f], [morrey_ratio(f, s)])


def bmo_check(f: HaarSeries) -> EmbeddingVerdict:
    check = CheckSpec(inequality=Inequality.BMO)
    return build_verdict(check, [f], [bmo_ratio(f)])


def algebra_check(
    f: HaarSeries, s: float, calibration: Optional[CalibrationFixture] = None
) -> EmbeddingVerdict:
    check = CheckSpec(inequality=Inequality.ALGEBRA, s=s)
    validate_check(check)
    return build_verdict(check, [f], [sample_ratio(check, f)], calibration)


def local_estimate_check(
    f: HaarSeries,
    s: float,
    interval: DyadicInterval = DEFAULT_LOCAL_INTERVAL,
    calibration: Optional[CalibrationFixture] = None,
) -> EmbeddingVerdict:
    check = CheckSpec(inequality=Inequality.LOCAL, s=s)
    validate_check(check)
    return build_verdict(check, [f], [sample_ratio(check, f, interval)], calibration)


def _evaluate(job: Tuple[CheckSpec, HaarSeries, DyadicInterval]) -> Optional[float]:
    check, f, interval = job
    return sample_ratio(check, f, interval)


def evaluate_ratios(
    check: CheckSpec,
    samples: Sequence[HaarSeries],
    workers: int = 1,
    interval: DyadicInterval = DEFAULT_LOCAL_INTERVAL,
) -> List[Optional[float]]:
    """Ratios in sample order, whatever the number of workers."""
    jobs = [(check, f, interval) for f in samples]
    if workers <= 1 or len(jobs) < 2:
        return [_evaluate(job) for job in jobs]
    chunk = max(1, math.ceil(len(jobs) / (4 * workers)))
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(_evaluate, jobs, chunksize=chunk))


def run_ensemble(
    spec: EnsembleSpec,
    checks: Sequence[CheckSpec],
    calibration: Optional[CalibrationFixture] = None,
    workers: int = 1,
    interval: DyadicInterval = DEFAULT_LOCAL_INTERVAL,
) -> ExperimentReport:
    for check in checks:
        validate_check(check)
    parameters = {
        "seed": spec.seed,
        "count": spec.count,
        "distribution": spec.distribution.value,
        "sparsity": spec.sparsity,
        "scale_range": list(spec.scale_range),
        "index_range": list(spec.index_range),
        "checks": [check.label() for check in checks],
    }
    if not checks:
        return ExperimentReport(kind="embedding", parameters=parameters)

    samples = generate_ensemble(spec)
    logger.info(f"Ensemble of {len(samples)} ({spec.distribution.value}, seed={spec.seed})")
    verdicts = []
    for check in checks:
        ratios = evaluate_ratios(check, samples, workers=workers, interval=interval)
        verdict = build_verdict(check, samples, ratios, calibration)
        logger.info(
            f"{check.label()}: sup ratio {verdict.sup_ratio:.6g} "
            f"({verdict.constant_source.value}) {'pass' if verdict.passed else 'FAIL'}"
        )
        verdicts.append(verdict)
    passed = all(v.passed for v in verdicts)
    return ExperimentReport(
        kind="embedding",
        parameters=parameters,
        verdicts=verdicts,
        checks={check.label(): v.passed for check, v in zip(checks, verdicts)},
        verdict=Verdict.PASS if passed else Verdict.FAIL,
    )

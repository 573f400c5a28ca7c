import logging
import math
from typing import Callable, Dict, List, Sequence

from dyadic_sobolev.config import Settings
from dyadic_sobolev.core.algebra import (
    analyze_product,
    compare_analyses,
    product_coefficients,
    square_coefficients,
    square_haar_coefficient,
)
from dyadic_sobolev.core.counterexamples import (
    critical_function,
    critical_square_coeff_closed,
    lowreg_function,
    lowreg_square_coeff_closed,
    tower_interval,
)
from dyadic_sobolev.core.dyadic import DyadicInterval, children
from dyadic_sobolev.core.embeddings import run_ensemble
from dyadic_sobolev.core.exceptions import UnknownSuiteError, VerificationFailure
from dyadic_sobolev.core.haar import (
    HaarSeries,
    StepFunction,
    analyze,
    average,
    evaluate,
    series_sup,
    telescope_residual,
    to_step,
    weighted_haar_sum,
    weighted_indicator_sum,
)
from dyadic_sobolev.core.norms import (
    hs_seminorm_sq_of_step,
    l2_norm,
    linf_norm,
    lq_norm,
    truncated_hs_bound,
)
from dyadic_sobolev.core.operators import (
    reconstruction_residual,
    reconstruction_tolerance,
    t_s_truncation_error,
)
from dyadic_sobolev.schemas.embedding import (
    CheckSpec,
    CoefficientDistribution,
    EnsembleSpec,
    Inequality,
)
from dyadic_sobolev.schemas.verification import SuiteResult, VerificationReport
from dyadic_sobolev.utils.ensembles import generate_ensemble

logger = logging.getLogger(__name__)

S_VALUES = (0.1, 0.25, 0.5, 0.75, 0.9)
INDICATOR_S_VALUES = (0.25, 0.5, 0.75)
MORREY_S_VALUES = (0.6, 0.75, 0.9)
CLOSED_FORM_DEPTH = 40
TRUNCATION_DEPTHS = (5, 6)


def _relative(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(a), abs(b))


class VerificationService:
    """Runs the identity suites on seeded ensembles and reports per-check max residuals."""

    def __init__(self, settings: Settings):
        self.settings = settings
        self._suites: Dict[str, Callable[[Sequence[HaarSeries], EnsembleSpec], SuiteResult]] = {
            "identities": self.identities,
            "operators": self.operators,
            "algebra-coefficients": self.algebra_coefficients,
            "embeddings": self.embeddings,
        }

    @property
    def suite_names(self) -> List[str]:
        return list(self._suites)

    def ensemble_spec(self, seed: int, count: int) -> EnsembleSpec:
        return EnsembleSpec(
            seed=seed,
            count=count,
            scale_range=tuple(self.settings.DEFAULT_SCALE_RANGE),
            index_range=tuple(self.settings.DEFAULT_INDEX_RANGE),
            sparsity=self.settings.DEFAULT_SPARSITY,
        )

    def run(self, suites: Sequence[str], seed: int, count: int) -> VerificationReport:
        names = list(suites) or self.suite_names
        for name in names:
            if name not in self._suites:
                raise UnknownSuiteError(name, self.suite_names)
        spec = self.ensemble_spec(seed, count)
        samples = generate_ensemble(spec)
        report = VerificationReport(seed=seed, count=count)
        for name in names:
            logger.info(f"Suite {name}: {len(samples)} samples")
            result = self._suites[name](samples, spec)
            report.suites.append(result)
            for check in result.failures:
                logger.warning(
                    f"Suite {name} check {check} failed: "
                    f"{result.max_residuals[check]!r} > {result.tolerances[check]!r}"
                )
        return report

    def identities(self, samples: Sequence[HaarSeries], spec: EnsembleSpec) -> SuiteResult:
        exact = self.settings.EXACT_TOLERANCE
        transcendental = self.settings.TRANSCENDENTAL_TOLERANCE
        result = SuiteResult(name="identities", samples=len(samples))
        for f in samples:
            if not f:
                continue
            scale = 1.0 + series_sup(f)
            step = to_step(f, max_pieces=self.settings.MAX_STEP_PIECES)
            for interval in f.intervals():
                result.record(
                    "telescoping_averages",
                    abs(telescope_residual(f, interval, 3)) / scale,
                    exact,
                )
                result.record(
                    "average_haar_vs_step",
                    abs(average(f, interval) - average(step, interval)) / scale,
                    exact,
                )
                result.record(
                    "evaluate_vs_step",
                    abs(evaluate(f, interval.midpoint) - step.value_at(interval.midpoint)) / scale,
                    exact,
                )
            analysis = analyze(step)
            gap = max(
                (abs(analysis.coefficient(i) - v) for i, v in f.coefficients.items()),
                default=0.0,
            )
            result.record("analyze_recovers_coefficients", gap / scale, exact)
            result.record(
                "sup_regions_vs_step", abs(series_sup(f) - linf_norm(step)) / scale, exact
            )
            l2 = l2_norm(f)
            result.record("parseval_regions", abs(lq_norm(f, 2.0) - l2) / (1.0 + l2), exact)
            result.record("parseval_step", abs(l2_norm(step) - l2) / (1.0 + l2), exact)
            for s in S_VALUES:
                lower, upper = truncated_hs_bound(f, s)
                result.record("norm_equivalence", 0.0 if lower and upper else 1.0, 0.5)

        self._closed_form_sums(result, transcendental)
        for s in INDICATOR_S_VALUES:
            unit = StepFunction.indicator(DyadicInterval(0, 0))
            finite_part, tail = hs_seminorm_sq_of_step(unit, s, depth=50)
            expected = 1.0 / (2.0 ** (2.0 * s + 1.0) - 1.0)
            result.record(
                "indicator_seminorm", abs(finite_part + tail - expected) / expected, exact
            )
        return result

    def _closed_form_sums(self, result: SuiteResult, tolerance: float) -> None:
        interval = DyadicInterval(0, 0)
        points = (0.3, 0.75, 0.999)
        for s in S_VALUES + (1.0,):
            for x in points:
                truncated, closed = weighted_indicator_sum(interval, s, x, CLOSED_FORM_DEPTH)
                error = closed * 2.0 ** (-s * (CLOSED_FORM_DEPTH + 1))
                result.record(
                    "weighted_indicator_error", _relative(closed - truncated, error), tolerance
                )
                truncated, closed = weighted_haar_sum(interval, s, x, CLOSED_FORM_DEPTH)
                error = closed * 2.0 ** (-s * CLOSED_FORM_DEPTH)
                result.record(
                    "weighted_haar_error", _relative(closed - truncated, error), tolerance
                )

    def operators(self, samples: Sequence[HaarSeries], spec: EnsembleSpec) -> SuiteResult:
        result = SuiteResult(name="operators", samples=len(samples))
        budget = self.settings.MAX_STEP_PIECES
        for f in samples:
            if not f:
                continue
            for s in S_VALUES:
                result.record(
                    "reconstruction",
                    reconstruction_residual(f, s) / reconstruction_tolerance(f, 1.0),
                    self.settings.EXACT_TOLERANCE,
                )
                shallow, deep = (
                    t_s_truncation_error(f, s, depth, max_pieces=budget)
                    for depth in TRUNCATION_DEPTHS
                )
                if shallow > 1e3 * self.settings.EXACT_TOLERANCE * (1.0 + series_sup(f)):
                    target = 2.0**-s
                    result.record("truncation_ratio", abs(deep / shallow - target) / target, 0.05)
        return result

    def algebra_coefficients(self, samples: Sequence[HaarSeries], spec: EnsembleSpec) -> SuiteResult:
        tolerance = self.settings.COEFFICIENT_TOLERANCE
        budget = self.settings.MAX_STEP_PIECES
        result = SuiteResult(name="algebra-coefficients", samples=len(samples))
        for number, f in enumerate(samples):
            if not f:
                continue
            analysis = square_coefficients(f)
            step = to_step(f, max_pieces=budget)
            try:
                gap = compare_analyses(analysis, analyze_product(step, step, budget), tolerance)
            except VerificationFailure as e:
                logger.warning(f"Sample {number}: {e.message}")
                gap = math.inf
            result.record("square_dual_route", gap, tolerance)
            direct = max(
                (
                    abs(square_haar_coefficient(f, k) - analysis.coefficient(k))
                    / (1.0 + abs(analysis.coefficient(k)))
                    for k in f.intervals()
                ),
                default=0.0,
            )
            result.record("square_direct_formula", direct, tolerance)

            g = samples[(number + 1) % len(samples)]
            if g:
                product = product_coefficients(f, g)
                other = analyze_product(step, to_step(g, max_pieces=budget), budget)
                try:
                    gap = compare_analyses(product, other, tolerance)
                except VerificationFailure as e:
                    logger.warning(f"Sample {number}: {e.message}")
                    gap = math.inf
                result.record("polarization", gap, tolerance)

        self._tower_closed_forms(result, tolerance)
        return result

    def _tower_closed_forms(self, result: SuiteResult, tolerance: float) -> None:
        for alpha, N in ((0.3, 12), (0.35, 20)):
            analysis = square_coefficients(lowreg_function(alpha, N))
            for n in range(-3, N + 2):
                expected = lowreg_square_coeff_closed(alpha, n, N)
                actual = analysis.coefficient(tower_interval(n))
                result.record(
                    "lowreg_closed_form", abs(actual - expected) / (1.0 + abs(expected)), tolerance
                )
        for alpha, N in ((1.25, 16), (1.5, 30)):
            analysis = square_coefficients(critical_function(alpha, N))
            for n in range(-3, N + 2):
                expected = critical_square_coeff_closed(alpha, n, N)
                actual = analysis.coefficient(tower_interval(n))
                result.record(
                    "critical_closed_form",
                    abs(actual - expected) / (1.0 + abs(expected)),
                    tolerance,
                )
        # the left half of a tower interval holds no finer stored interval
        sibling, _ = children(tower_interval(2))
        analysis = square_coefficients(lowreg_function(0.3, 8))
        result.record("tower_support", abs(analysis.coefficient(sibling)), tolerance)

    def embeddings(self, samples: Sequence[HaarSeries], spec: EnsembleSpec) -> SuiteResult:
        result = SuiteResult(name="embeddings", samples=len(samples))
        checks = [CheckSpec(inequality=Inequality.MORREY, s=s) for s in MORREY_S_VALUES]
        checks.append(CheckSpec(inequality=Inequality.BMO))
        for distribution in CoefficientDistribution:
            member = spec.model_copy(update={"distribution": distribution})
            report = run_ensemble(member, checks, workers=self.settings.WORKERS)
            for verdict in report.verdicts:
                name = f"{verdict.inequality.value}_ratio"
                result.record(name, verdict.sup_ratio, 1.0 + self.settings.EXACT_TOLERANCE)
        return result

"""
The two tower counterexamples to the algebra property below and at s = 1/2.

Both live on the tower I^(k) = [-2^-k, 0): nested right children of [-1, 0)
for k >= 0 and its ancestors for k < 0. Writing the Haar coefficients as
c_k = 2^(-k/2) d_k keeps every quantity below in a range where doubles do
not underflow, so the critical family runs far past the scale clamp in
coefficient space.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional

import numpy as np

from dyadic_sobolev.core.algebra import square_coefficients
from dyadic_sobolev.core.dyadic import K_MIN, DyadicInterval
from dyadic_sobolev.core.exceptions import (
    ParameterRangeError,
    ScaleClampError,
    VerificationFailure,
)
from dyadic_sobolev.core.haar import HaarSeries
from dyadic_sobolev.core.norms import ancestor_tail_closed, hs_seminorm_sq_parts
from dyadic_sobolev.schemas.experiment import (
    CounterexampleRow,
    CounterexampleSpec,
    ExperimentReport,
    Family,
    GrowthFit,
    Verdict,
)
from dyadic_sobolev.utils.fitting import (
    EXPONENTIAL,
    POWER,
    correction_model,
    fit_growth_exponent,
)
from dyadic_sobolev.utils.summation import ordered_sum

logger = logging.getLogger(__name__)

LOWREG_MAX_N = -K_MIN - 1
CRITICAL_MAX_N = 4096


def tower_interval(k: int) -> DyadicInterval:
    """I^(k) = [-2^-k, 0)"""
    return DyadicInterval(-k, -1)


def validate_lowreg(s: float, alpha: float) -> None:
    if not 0.0 < s < 0.5:
        raise ParameterRangeError("0 < s < 1/2", details={"s": s})
    if not s < alpha < s / 2.0 + 0.25:
        raise ParameterRangeError("s < α < s/2 + 1/4", details={"s": s, "alpha": alpha})


def validate_critical(s: float, alpha: float) -> None:
    if s != 0.5:
        raise ParameterRangeError("s = 1/2", details={"s": s})
    if not 1.0 < alpha <= 1.5:
        raise ParameterRangeError("1 < α ≤ 3/2", details={"alpha": alpha})


def validate_spec(spec: CounterexampleSpec) -> None:
    if spec.family == Family.LOWREG:
        validate_lowreg(spec.s, spec.alpha)
    else:
        validate_critical(spec.s, spec.alpha)


def _check_series_depth(N: int) -> None:
    if N > LOWREG_MAX_N:
        raise ScaleClampError(
            message=f"Tower depth {N} needs scale {-N - 1} below the clamp",
            details={"N": N, "max_N": LOWREG_MAX_N},
        )


def lowreg_function(alpha: float, N: int) -> HaarSeries:
    """sum_{k=0}^{N} |I^(k)|^alpha h_{I^(k)}"""
    if not alpha > 0:
        raise ParameterRangeError("α > 0", details={"alpha": alpha})
    if N < 0:
        raise ParameterRangeError("N ≥ 0", details={"N": N})
    _check_series_depth(N)
    return HaarSeries((tower_interval(k), 2.0 ** (-k * alpha)) for k in range(N + 1))


def critical_function(alpha: float, N: int) -> HaarSeries:
    """sum_{k=1}^{N} 2^(-k/2) k^(-alpha/2) h_{I^(k)}"""
    if not alpha > 1:
        raise ParameterRangeError("α > 1", details={"alpha": alpha})
    if N < 1:
        raise ParameterRangeError("N ≥ 1", details={"N": N})
    _check_series_depth(N)
    return HaarSeries(
        (tower_interval(k), 2.0 ** (-k / 2.0) * k ** (-alpha / 2.0)) for k in range(1, N + 1)
    )


def lowreg_square_coeff_closed(alpha: float, n: int, N: int) -> float:
    """(f_N^2, h_{I^(n)}) for the low-regularity tower, summed term by term."""
    if n > N:
        return 0.0
    if n < 0:
        return 2.0 ** (n / 2.0) * ordered_sum(2.0 ** (-2.0 * alpha * k) for k in range(N + 1))
    descendants = ordered_sum(2.0 ** (-2.0 * alpha * k) for k in range(n + 1, N + 1))
    ancestors = ordered_sum(2.0 ** (-m * (alpha - 0.5)) for m in range(n))
    return 2.0 ** (n / 2.0) * descendants + 2.0 * 2.0 ** (-n * alpha) * ancestors


def critical_square_coeff_closed(alpha: float, n: int, N: int) -> float:
    """(f_N^2, h_{I^(n)}) for the critical tower."""
    if n > N:
        return 0.0
    if n <= 0:
        return 2.0 ** (n / 2.0) * ordered_sum(2.0 ** -k * k ** -alpha for k in range(1, N + 1))
    descendants = ordered_sum(2.0 ** -k * k ** -alpha for k in range(n + 1, N + 1))
    ancestors = ordered_sum(m ** (-alpha / 2.0) for m in range(1, n))
    return 2.0 ** (n / 2.0) * descendants + 2.0 * 2.0 ** (-n / 2.0) * n ** (-alpha / 2.0) * ancestors


@dataclass(frozen=True)
class Tower:
    """Coefficients c_k = 2^(-k/2) d[k] on I^(k), k = 0..N."""

    d: np.ndarray

    @property
    def N(self) -> int:
        return self.d.size - 1

    @classmethod
    def lowreg(cls, alpha: float, N: int) -> "Tower":
        k = np.arange(N + 1, dtype=float)
        return cls(np.exp2(k * (0.5 - alpha)))

    @classmethod
    def critical(cls, alpha: float, N: int) -> "Tower":
        k = np.arange(N + 1, dtype=float)
        d = np.zeros(N + 1)
        d[1:] = k[1:] ** (-alpha / 2.0)
        return cls(d)

    def hs_norm_sq(self, s: float) -> float:
        """sum_k c_k^2 (1 + |I^(k)|^-2s)"""
        k = np.arange(self.N + 1, dtype=float)
        weights = np.exp2(-k) + np.exp2(k * (2.0 * s - 1.0))
        return math.fsum(weights * self.d**2)

    def square_integral(self) -> float:
        """int f^2 = sum c_k^2, the integral over the tree of f^2."""
        k = np.arange(self.N + 1, dtype=float)
        return math.fsum(np.exp2(-k) * self.d**2)

    def _descendant_energy(self) -> np.ndarray:
        """T_n = sum_{k>n} 2^-(k-n) d_k^2"""
        squares = self.d**2
        t = np.zeros(self.N + 1)
        for n in range(self.N - 1, -1, -1):
            t[n] = 0.5 * (squares[n + 1] + t[n + 1])
        return t

    def _ancestor_sums(self) -> np.ndarray:
        """D_{n-1} = sum_{m<n} d_m, equal to <f>_{I^(n)}"""
        return np.concatenate(([0.0], np.cumsum(self.d)[:-1]))

    def square_weighted_coefficients(self, s: float) -> np.ndarray:
        """|I^(n)|^-s (f^2, h_{I^(n)}) for n = 0..N."""
        n = np.arange(self.N + 1, dtype=float)
        inner = self._descendant_energy() + 2.0 * self.d * self._ancestor_sums()
        return np.exp2(n * (s - 0.5)) * inner

    def square_coefficient(self, n: int) -> float:
        if n > self.N:
            return 0.0
        if n < 0:
            return 2.0 ** (n / 2.0) * self.square_integral()
        inner = self._descendant_energy()[n] + 2.0 * self.d[n] * self._ancestor_sums()[n]
        return float(2.0 ** (-n / 2.0) * inner)

    def square_seminorm_sq(self, s: float) -> float:
        """|f^2|^2 in the homogeneous space, ancestors of [-1, 0) in closed form."""
        weighted = self.square_weighted_coefficients(s)
        tail = ancestor_tail_closed(tower_interval(0), s, self.square_integral())
        return math.fsum(weighted**2) + tail

    def square_l2_sq(self) -> float:
        """int f^4: f = D_{n-1} - d_n on the left half of I^(n), D_N on I^(N)_+."""
        n = np.arange(self.N + 1, dtype=float)
        left = self._ancestor_sums() - self.d
        total = math.fsum(left**4 * np.exp2(-n - 1.0))
        return total + float(np.sum(self.d)) ** 4 * 2.0 ** (-self.N - 1.0)


def lowreg_lower_bound(s: float, alpha: float, N: int) -> float:
    """e_alpha^2 sum_{m=1}^{N} 2^(m(2s - 4 alpha + 1)), a floor for the square's seminorm."""
    rho = 2.0 ** (0.5 - alpha)
    e_alpha = 2.0 * (1.0 - 1.0 / rho) / (rho - 1.0)
    exponent = 2.0 * s - 4.0 * alpha + 1.0
    return e_alpha**2 * ordered_sum(2.0 ** (m * exponent) for m in range(1, N + 1))


def critical_lower_bound(alpha: float, N: int) -> float:
    """sum_{n=1}^{N} n^-alpha e_{alpha,n}^2 with e_{alpha,n} = sum_{m<n} m^(-alpha/2)."""
    m = np.arange(1, N + 1, dtype=float)
    e = np.concatenate(([0.0], np.cumsum(m ** (-alpha / 2.0))[:-1]))
    return math.fsum(m ** (-alpha) * e**2)


def critical_tail_bound(alpha: float, N: int) -> float:
    """(1 + 2^-N) N^(1-alpha) / (alpha - 1), above sum_{k>N} c_k^2 (1 + 2^k)."""
    return (1.0 + 2.0**-N) * N ** (1.0 - alpha) / (alpha - 1.0)


def lowreg_increment(s: float, alpha: float, N: int) -> float:
    """|f_{N+1}|^2 - |f_N|^2 = (1 + 2^(2(N+1)s)) 2^(-2(N+1)alpha)"""
    return (1.0 + 2.0 ** (2.0 * (N + 1) * s)) * 2.0 ** (-2.0 * (N + 1) * alpha)


def critical_increment(alpha: float, N: int) -> float:
    return (2.0 ** -(N + 1) + 1.0) * (N + 1) ** -alpha


def predicted_exponent(spec: CounterexampleSpec) -> float:
    if spec.family == Family.LOWREG:
        return 2.0 * spec.s - 4.0 * spec.alpha + 1.0
    return 3.0 - 2.0 * spec.alpha


def correction_exponent(spec: CounterexampleSpec) -> float:
    if spec.family == Family.LOWREG:
        return 0.5 - spec.alpha
    return 1.0 - spec.alpha / 2.0


def _tower(spec: CounterexampleSpec, N: int) -> Tower:
    if spec.family == Family.LOWREG:
        return Tower.lowreg(spec.alpha, N)
    return Tower.critical(spec.alpha, N)


def _series(spec: CounterexampleSpec, N: int) -> HaarSeries:
    if spec.family == Family.LOWREG:
        return lowreg_function(spec.alpha, N)
    return critical_function(spec.alpha, N)


def _cross_check(spec: CounterexampleSpec, N: int, tower_value: float, tolerance: float) -> None:
    finite_part, tail = hs_seminorm_sq_parts(square_coefficients(_series(spec, N)), spec.s)
    series_value = finite_part + tail
    if not math.isclose(series_value, tower_value, rel_tol=tolerance):
        raise VerificationFailure(
            message=f"Tower and series routes disagree at N={N}",
            details={"N": N, "tower": tower_value, "series": series_value},
        )


def _verdict(exponent: float, predicted: float, tolerance: float) -> Verdict:
    if exponent <= 0.0:
        return Verdict.BOUNDED
    if abs(exponent - predicted) <= tolerance * abs(predicted):
        return Verdict.DIVERGES
    return Verdict.ANOMALOUS


def divergence_experiment(
    spec: CounterexampleSpec,
    N_list: Iterable[int],
    fit_tolerance: Optional[float] = None,
    increment_tolerance: float = 0.05,
    grid_step: float = 1e-3,
    cross_check_tolerance: float = 1e-9,
    critical_reference_N: int = CRITICAL_MAX_N,
) -> ExperimentReport:
    validate_spec(spec)
    levels = sorted(set(int(n) for n in N_list))
    if not levels:
        raise ParameterRangeError("at least one N")
    ceiling = LOWREG_MAX_N if spec.family == Family.LOWREG else CRITICAL_MAX_N
    if levels[0] < 1 or levels[-1] > ceiling:
        raise ParameterRangeError(f"1 ≤ N ≤ {ceiling}", details={"N": levels})
    if fit_tolerance is None:
        fit_tolerance = 0.15 if spec.family == Family.LOWREG else 0.20
    logger.info(
        f"Divergence experiment {spec.family.value}: s={spec.s} alpha={spec.alpha} N={levels}"
    )

    s = spec.s
    reference: Optional[float] = None
    if spec.family == Family.CRITICAL:
        reference = Tower.critical(spec.alpha, max(critical_reference_N, levels[-1])).hs_norm_sq(s)

    rows: List[CounterexampleRow] = []
    for N in levels:
        tower = _tower(spec, N)
        norm_sq = tower.hs_norm_sq(s)
        increment = _tower(spec, N + 1).hs_norm_sq(s) - norm_sq
        previous = norm_sq - _tower(spec, N - 1).hs_norm_sq(s) if N > 1 else None
        seminorm_sq_f2 = tower.square_seminorm_sq(s)
        route = "tower"
        if N <= LOWREG_MAX_N:
            _cross_check(spec, N, seminorm_sq_f2, cross_check_tolerance)
            route = "tower+series"
        if spec.family == Family.LOWREG:
            expected = lowreg_increment(s, spec.alpha, N)
            lower = lowreg_lower_bound(s, spec.alpha, N)
            tail_bound = tail_observed = None
        else:
            expected = critical_increment(spec.alpha, N)
            lower = critical_lower_bound(spec.alpha, N)
            tail_bound = critical_tail_bound(spec.alpha, N)
            tail_observed = reference - norm_sq
        rows.append(
            CounterexampleRow(
                N=N,
                route=route,
                hs_norm_f=math.sqrt(norm_sq),
                hs_norm_sq_f=norm_sq,
                norm_increment=increment,
                increment_expected=expected,
                increment_ratio=increment / previous if previous else None,
                hs_seminorm_sq_f2=seminorm_sq_f2,
                log2_hs_seminorm_sq_f2=math.log2(seminorm_sq_f2),
                l2_sq_f2=tower.square_l2_sq(),
                lower_bound=lower,
                tail_bound=tail_bound,
                tail_observed=tail_observed,
            )
        )

    checks = _checks(spec, rows, increment_tolerance)
    fit = None
    verdict = Verdict.BOUNDED
    if len(rows) >= 3:
        fit = _fit(spec, rows, fit_tolerance, grid_step)
        verdict = _verdict(fit.exponent, fit.predicted, fit_tolerance)
    else:
        checks["enough_points_for_fit"] = False
    logger.info(f"Divergence experiment {spec.family.value} finished: {verdict.value}")
    return ExperimentReport(
        kind="counterexample",
        parameters={"family": spec.family.value, "s": s, "alpha": spec.alpha, "N": levels},
        rows=rows,
        fit=fit,
        checks=checks,
        verdict=verdict,
    )


def _checks(
    spec: CounterexampleSpec, rows: List[CounterexampleRow], increment_tolerance: float
) -> Dict[str, bool]:
    values = [row.hs_seminorm_sq_f2 for row in rows]
    checks = {
        "square_seminorm_increasing": all(b > a for a, b in zip(values, values[1:])),
        "lower_bound_holds": all(row.lower_bound <= row.hs_seminorm_sq_f2 for row in rows),
        "increments_match_closed_form": all(
            math.isclose(row.norm_increment, row.increment_expected, rel_tol=1e-9)
            for row in rows
        ),
    }
    if spec.family == Family.LOWREG:
        target = 2.0 ** (2.0 * (spec.s - spec.alpha))
        checks["increment_ratio_geometric"] = all(
            abs(row.increment_ratio - target) <= increment_tolerance * target
            for row in rows
            if row.increment_ratio is not None
        )
    else:
        checks["norm_tail_bounded"] = all(
            row.tail_observed <= row.tail_bound for row in rows if row.tail_bound is not None
        )
    return checks


def _fit(
    spec: CounterexampleSpec,
    rows: List[CounterexampleRow],
    tolerance: float,
    grid_step: float,
) -> GrowthFit:
    r = correction_exponent(spec)
    if spec.family == Family.LOWREG:
        model = correction_model(
            EXPONENTIAL, r, extra=((False, -2.0 * spec.alpha), (False, -4.0 * spec.alpha))
        )
    else:
        model = correction_model(POWER, r, extra=((True, -1.0),))
    x = [row.N for row in rows]
    y = [row.hs_seminorm_sq_f2 for row in rows]
    outcome = fit_growth_exponent(model, x, y, step=grid_step)
    predicted = predicted_exponent(spec)
    logger.debug(
        f"Growth fit: p={outcome.exponent:.4f} naive={outcome.naive_exponent:.4f} "
        f"terms={outcome.terms} residual={outcome.residual:.3e}"
    )
    return GrowthFit(
        model=model.kind,
        exponent=outcome.exponent,
        predicted=predicted,
        relative_error=abs(outcome.exponent - predicted) / abs(predicted),
        tolerance=tolerance,
        correction_exponent=r,
        naive_exponent=outcome.naive_exponent,
        band_low=outcome.band_low,
        band_high=outcome.band_high,
        residual=outcome.residual,
        terms=outcome.terms,
    )

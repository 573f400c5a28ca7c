import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dyadic_sobolev.core.dyadic import DyadicInterval
from dyadic_sobolev.core.exceptions import ParameterRangeError
from dyadic_sobolev.core.haar import HaarSeries, StepFunction, analyze, to_step
from dyadic_sobolev.core.norms import (
    ancestor_tail_closed,
    ancestor_tail_sum,
    bmo_norm,
    hs_norm,
    hs_seminorm,
    hs_seminorm_sq_of_step,
    hs_seminorm_sq_parts,
    l2_norm,
    linf_norm,
    lq_exponent,
    lq_norm,
    norm_equivalence_terms,
    norm_report,
    truncated_hs_bound,
)

UNIT = DyadicInterval(0, 0)

series_strategy = st.dictionaries(
    st.builds(
        DyadicInterval,
        scale=st.integers(min_value=-5, max_value=2),
        index=st.integers(min_value=-6, max_value=6),
    ),
    st.floats(min_value=-1.0, max_value=1.0, allow_nan=False).filter(lambda v: abs(v) > 1e-6),
    min_size=1,
    max_size=6,
).map(HaarSeries)


@pytest.fixture
def unit_haar():
    return HaarSeries({UNIT: 1.0})


class TestUnitHaarReport:
    """Every norm of h_[0,1) is known exactly"""

    @pytest.mark.parametrize("s", [0.25, 0.75])
    def test_report_values(self, unit_haar, s):
        # Act
        report = norm_report(unit_haar, s)

        # Assert
        assert report.l2 == 1.0
        assert report.hs_seminorm == 1.0
        assert report.hs_norm == pytest.approx(math.sqrt(2.0))
        assert report.linf == 1.0
        assert report.bmo == 1.0
        assert report.truncation.route == "haar"
        assert report.truncation.hulls == ["0:0"]

    def test_lq_present_only_below_one_half(self, unit_haar):
        below = norm_report(unit_haar, 0.25)
        above = norm_report(unit_haar, 0.75)

        assert below.q == 4.0
        assert below.lq == pytest.approx(1.0)
        assert above.q is None and above.lq is None

    def test_seminorm_weight(self):
        f = HaarSeries({DyadicInterval(-3, 2): 2.0})

        assert hs_seminorm(f, 0.5) == pytest.approx(2.0 * 2.0**1.5)
        assert hs_norm(f, 0.5) == pytest.approx(math.hypot(2.0, 2.0 * 2.0**1.5))


class TestIndicator:
    """1_[0,1) has no in-hull coefficients; its energy sits above the hull"""

    @pytest.mark.parametrize("s", [0.1, 0.25, 0.5, 0.75, 0.9])
    def test_indicator_seminorm(self, s):
        # Arrange
        g = StepFunction.indicator(UNIT)

        # Act
        finite_part, tail = hs_seminorm_sq_of_step(g, s)

        # Assert
        assert finite_part == 0.0
        assert tail == pytest.approx(1.0 / (2.0 ** (2.0 * s + 1.0) - 1.0), rel=1e-12)

    def test_step_report_uses_step_route(self):
        report = norm_report(StepFunction.indicator(UNIT), 0.5)

        assert report.truncation.route == "step"
        assert report.l2 == 1.0
        assert report.linf == 1.0
        assert report.hs_seminorm == pytest.approx(math.sqrt(1.0 / 3.0))

    @pytest.mark.parametrize("depth", [1, 10, 40])
    def test_tail_cross_check_passes(self, depth):
        finite_part, tail = hs_seminorm_sq_of_step(StepFunction.indicator(UNIT), 0.3, depth)

        assert finite_part == 0.0 and tail > 0.0


class TestAncestorTail:
    """Closed form of the ancestor sum above a hull"""

    @pytest.mark.parametrize("s", [0.1, 0.5, 0.9])
    def test_closed_form_matches_long_sum(self, s):
        hull = DyadicInterval(-3, 5)

        closed = ancestor_tail_closed(hull, s, integral=0.5)
        brute = ancestor_tail_sum(hull, s, depth=200, integral=0.5)

        assert brute == pytest.approx(closed, rel=1e-12)

    def test_tail_scales_with_integral_squared(self):
        hull = DyadicInterval(2, -1)

        assert ancestor_tail_closed(hull, 0.5, 3.0) == pytest.approx(9.0 * ancestor_tail_closed(hull, 0.5))


class TestRoutesAgree:
    """Haar route and step route measure the same function"""

    @settings(max_examples=50, deadline=None)
    @given(series_strategy, st.sampled_from([0.1, 0.5, 0.9]))
    def test_seminorm_through_step(self, f, s):
        finite_part, tail = hs_seminorm_sq_parts(analyze(to_step(f)), s)

        assert finite_part + tail == pytest.approx(hs_seminorm(f, s) ** 2, rel=1e-9)

    @settings(max_examples=50, deadline=None)
    @given(series_strategy)
    def test_l2_and_sup_through_step(self, f):
        step = to_step(f)

        assert l2_norm(step) == pytest.approx(l2_norm(f), rel=1e-12)
        assert linf_norm(step) == pytest.approx(linf_norm(f), rel=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(series_strategy)
    def test_lq_through_step(self, f):
        q = lq_exponent(0.25)

        assert lq_norm(to_step(f), q) == pytest.approx(lq_norm(f, q), rel=1e-12)


class TestNormEquivalence:
    """Large intervals may be traded for the L2 norm"""

    @settings(max_examples=80, deadline=None)
    @given(series_strategy, st.sampled_from([0.1, 0.25, 0.5, 0.75, 0.9]))
    def test_bounds_hold(self, f, s):
        lower_ok, upper_ok = truncated_hs_bound(f, s)

        assert lower_ok and upper_ok

    def test_terms_for_large_interval(self):
        f = HaarSeries({DyadicInterval(2, 0): 1.0})

        half, middle, full = norm_equivalence_terms(f, 0.5)

        # |I| = 4 drops out of the middle term
        assert middle == 1.0
        assert full == pytest.approx(1.25)
        assert half == pytest.approx(0.625)


class TestBmoAndLq:
    """Dyadic BMO and Lebesgue norms"""

    def test_bmo_takes_sup_over_intervals(self):
        f = HaarSeries({DyadicInterval(-5, 0): 1.0})

        assert bmo_norm(f) == pytest.approx(2.0**2.5)

    def test_bmo_accumulates_nested_energy(self):
        f = HaarSeries({UNIT: 1.0, DyadicInterval(-1, 0): 1.0})

        # inside [0,1): (1 + 1) / 1; inside [0,1/2): 1 / (1/2)
        assert bmo_norm(f) == pytest.approx(math.sqrt(2.0))

    def test_bmo_of_indicator_peaks_above_hull(self):
        # (1_[0,1), h_[0,2)) = -2^(-1/2), so [0,2) carries energy 1/2 over length 2
        report = norm_report(StepFunction.indicator(UNIT), 0.5)

        assert report.bmo == pytest.approx(0.5)

    def test_bmo_of_step_matches_explicit_sup(self):
        # Arrange
        g = StepFunction(-2, {0: 1.0, 1: -0.5, 3: 2.0})
        analysis = analyze(g)

        # Act
        best = 0.0
        for k in range(-1, 9):
            for n in range(max(1, 2 ** (-k))):
                energy = sum(
                    analysis.coefficient(DyadicInterval(j, m)) ** 2
                    for j in range(-1, k + 1)
                    for m in range(n * 2 ** (k - j), (n + 1) * 2 ** (k - j))
                )
                best = max(best, energy / 2.0**k)

        # Assert
        assert bmo_norm(analysis) == pytest.approx(math.sqrt(best), rel=1e-12)
        assert norm_report(g, 0.25).bmo == pytest.approx(math.sqrt(best), rel=1e-12)

    def test_bmo_of_mean_zero_step_ignores_ancestors(self):
        f = HaarSeries({UNIT: 1.0, DyadicInterval(-1, 0): 1.0})

        assert norm_report(to_step(f), 0.5).bmo == pytest.approx(math.sqrt(2.0))

    def test_lq_requires_q_at_least_one(self, unit_haar):
        with pytest.raises(ParameterRangeError):
            lq_norm(unit_haar, 0.5)

    def test_lq_of_empty_series(self):
        assert lq_norm(HaarSeries(), 2.0) == 0.0

    def test_l2_matches_lq_two(self):
        f = HaarSeries({UNIT: 0.5, DyadicInterval(-2, 1): -1.5, DyadicInterval(1, -1): 1.0})

        assert lq_norm(f, 2.0) == pytest.approx(l2_norm(f), rel=1e-12)


class TestSeminormInS:
    """Monotone in s when every interval sits on one side of length 1"""

    small_series = st.dictionaries(
        st.builds(
            DyadicInterval,
            scale=st.integers(min_value=-6, max_value=-1),
            index=st.integers(min_value=-6, max_value=6),
        ),
        st.floats(min_value=-1.0, max_value=1.0, allow_nan=False).filter(lambda v: abs(v) > 1e-6),
        min_size=1,
        max_size=6,
    ).map(HaarSeries)

    @settings(max_examples=60, deadline=None)
    @given(small_series)
    def test_small_intervals_grow_with_s(self, f):
        values = [hs_seminorm(f, s) for s in (0.1, 0.25, 0.5, 0.75, 0.9)]

        assert all(a <= b for a, b in zip(values, values[1:]))

    @settings(max_examples=60, deadline=None)
    @given(small_series)
    def test_large_intervals_shrink_with_s(self, f):
        large = f.dilated().dilated().dilated().dilated().dilated().dilated().dilated()

        values = [hs_seminorm(large, s) for s in (0.1, 0.25, 0.5, 0.75, 0.9)]

        assert all(a >= b for a, b in zip(values, values[1:]))


class TestStepReportIdentity:
    """hs_norm^2 = hs_seminorm^2 + l2^2 on step input"""

    @pytest.mark.parametrize("s", [0.1, 0.5, 0.9])
    @pytest.mark.parametrize(
        "g",
        [
            StepFunction.indicator(UNIT),
            StepFunction(-2, {-3: 1.5, 0: 1.0, 1: -0.5, 3: 2.0}),
            StepFunction(1, {4: -1.0}),
        ],
    )
    def test_report_identity(self, g, s):
        report = norm_report(g, s)

        assert report.truncation.route == "step"
        assert report.hs_norm**2 == pytest.approx(report.hs_seminorm**2 + report.l2**2, rel=1e-12)
        assert report.l2**2 == pytest.approx(sum(v * v for v in g.pieces.values()) * g.piece_measure)

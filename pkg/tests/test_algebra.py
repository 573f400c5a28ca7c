import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dyadic_sobolev.core.algebra import (
    analyze_product,
    compare_analyses,
    high_reg_bound_ratio,
    local_square_estimate,
    multiply,
    product_coefficients,
    square_coefficients,
    square_haar_coefficient,
    square_hs_norm,
    square_integral,
    square_series_decomposition,
)
from dyadic_sobolev.core.dyadic import DyadicInterval, Tree
from dyadic_sobolev.core.exceptions import ParameterRangeError, VerificationFailure
from dyadic_sobolev.core.haar import HaarAnalysis, HaarSeries, StepFunction, TreeHull, to_step
from dyadic_sobolev.core.norms import hs_seminorm_sq_of_step

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
def nested_series():
    return HaarSeries(
        {
            UNIT: 1.0,
            DyadicInterval(-1, 1): 0.5,
            DyadicInterval(-3, 1): -0.75,
            DyadicInterval(2, -1): 0.25,
        }
    )


class TestMultiply:
    """Dense pointwise products"""

    def test_product_of_overlapping_indicators(self):
        g1 = StepFunction(0, {0: 2.0, 1: 1.0})
        g2 = StepFunction(-1, {1: 3.0, 2: 4.0})

        product = multiply(g1, g2)

        assert product.base_scale == -1
        assert dict(product.pieces) == {1: 6.0, 2: 4.0}

    def test_product_with_empty_is_empty(self):
        assert not multiply(StepFunction.indicator(UNIT), StepFunction.empty())


class TestSquareCoefficients:
    """Sparse square coefficients against the dense route"""

    def test_square_of_single_haar_is_indicator(self):
        # Arrange
        f = HaarSeries({UNIT: 1.0})

        # Act
        analysis = square_coefficients(f)

        # Assert
        assert not analysis.series
        assert analysis.hulls[Tree.POSITIVE].hull == UNIT
        assert analysis.hulls[Tree.POSITIVE].integral == 1.0
        assert analysis.coefficient(DyadicInterval(1, 0)) == pytest.approx(-(2**-0.5))

    def test_direct_formula_on_nested_series(self, nested_series):
        analysis = square_coefficients(nested_series)

        for interval in analysis.series.intervals():
            direct = square_haar_coefficient(nested_series, interval)
            assert direct == pytest.approx(analysis.coefficient(interval), abs=1e-12)

    def test_decomposition_parts_add_up(self, nested_series):
        decomposition = square_series_decomposition(nested_series)
        analysis = decomposition.to_analysis()

        for interval in decomposition.candidates():
            parts = decomposition.square_series_part.get(interval, 0.0) + decomposition.average_part.get(
                interval, 0.0
            )
            assert analysis.coefficient(interval) == pytest.approx(parts)

    @settings(max_examples=60, deadline=None)
    @given(series_strategy)
    def test_dense_route_agrees(self, f):
        step = to_step(f)

        worst = compare_analyses(square_coefficients(f), analyze_product(step, step), 1e-10)

        assert worst <= 1e-10

    @settings(max_examples=40, deadline=None)
    @given(series_strategy, series_strategy)
    def test_polarization_matches_dense_product(self, f, g):
        dense = analyze_product(to_step(f), to_step(g))

        worst = compare_analyses(product_coefficients(f, g), dense, 1e-10)

        assert worst <= 1e-10

    def test_compare_raises_on_disagreement(self):
        hulls = {tree: TreeHull(tree=tree, hull=None) for tree in Tree}
        one = HaarAnalysis(series=HaarSeries({UNIT: 1.0}), hulls=hulls)
        other = HaarAnalysis(series=HaarSeries({UNIT: 2.0}), hulls=hulls)

        with pytest.raises(VerificationFailure) as exc_info:
            compare_analyses(one, other, 1e-10)

        assert exc_info.value.details["interval"] == {"scale": 0, "index": 0}

    @settings(max_examples=60, deadline=None)
    @given(series_strategy)
    def test_integral_of_square_is_energy(self, f):
        energy = sum(v * v for v in f.coefficients.values())

        assert square_integral(f) == pytest.approx(energy, rel=1e-12)


class TestSquareNorm:
    """Hs norm of f^2 from coefficient space"""

    @pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
    def test_square_of_single_haar(self, s):
        # f^2 = 1_[0,1)
        norm_sq, report = square_hs_norm(HaarSeries({UNIT: 1.0}), s)

        assert report.l2 == pytest.approx(1.0)
        assert report.linf == pytest.approx(1.0)
        assert report.truncation.route == "square"
        assert norm_sq == pytest.approx(1.0 + 1.0 / (2.0 ** (2.0 * s + 1.0) - 1.0))

    def test_bmo_of_square_sees_ancestors(self):
        # 1_[0,1) has no coefficient inside its hull; the parent [0,2) gives 1/4
        _, report = square_hs_norm(HaarSeries({UNIT: 1.0}), 0.75)

        assert report.bmo == pytest.approx(0.5)

    @settings(max_examples=30, deadline=None)
    @given(series_strategy)
    def test_seminorm_matches_dense_square(self, f):
        s = 0.75
        step = to_step(f)
        finite_part, tail = hs_seminorm_sq_of_step(multiply(step, step), s)

        _, report = square_hs_norm(f, s)

        assert report.hs_seminorm**2 == pytest.approx(finite_part + tail, rel=1e-9)

    def test_high_reg_ratio_rejects_zero(self):
        with pytest.raises(ParameterRangeError) as exc_info:
            high_reg_bound_ratio(HaarSeries(), 0.75)

        assert exc_info.value.message == "requires f ≠ 0"

    def test_high_reg_ratio_of_single_haar(self):
        s = 0.75
        expected = math.sqrt(1.0 + 1.0 / (2.0 ** (2.0 * s + 1.0) - 1.0)) / 2.0

        assert high_reg_bound_ratio(HaarSeries({UNIT: 1.0}), s) == pytest.approx(expected)


class TestLocalEstimate:
    """Localized square-function estimate above s = 1/2"""

    @pytest.mark.parametrize("s", [0.25, 0.5])
    def test_requires_high_regularity(self, s):
        with pytest.raises(ParameterRangeError) as exc_info:
            local_square_estimate(HaarSeries({UNIT: 1.0}), s, UNIT)

        assert exc_info.value.message == "requires 1/2 < s < 1"

    def test_single_haar_has_no_local_square_energy(self):
        lhs, rhs = local_square_estimate(HaarSeries({UNIT: 1.0}), 0.75, UNIT)

        assert lhs == 0.0
        assert rhs == pytest.approx(1.0)

    def test_nested_series_sees_inner_intervals(self, nested_series):
        lhs, rhs = local_square_estimate(nested_series, 0.75, UNIT)

        assert lhs > 0.0
        assert rhs > 0.0

    def test_empty_series(self):
        assert local_square_estimate(HaarSeries(), 0.75, UNIT) == (0.0, 0.0)

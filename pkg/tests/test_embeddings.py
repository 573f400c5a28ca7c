import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dyadic_sobolev.core.counterexamples import lowreg_function
from dyadic_sobolev.core.dyadic import DyadicInterval
from dyadic_sobolev.core.embeddings import (
    algebra_check,
    bmo_check,
    bmo_ratio,
    build_verdict,
    evaluate_ratios,
    gns_ratio,
    local_estimate_check,
    morrey_check,
    morrey_constant,
    morrey_ratio,
    run_ensemble,
    sample_ratio,
    validate_check,
)
from dyadic_sobolev.core.exceptions import ParameterRangeError
from dyadic_sobolev.core.haar import HaarSeries
from dyadic_sobolev.schemas.calibration import CalibrationEntry, CalibrationFixture
from dyadic_sobolev.schemas.embedding import (
    CheckSpec,
    CoefficientDistribution,
    ConstantSource,
    EnsembleSpec,
    Inequality,
)
from dyadic_sobolev.schemas.experiment import Verdict
from dyadic_sobolev.utils.ensembles import generate_ensemble

UNIT = DyadicInterval(0, 0)

series_strategy = st.dictionaries(
    st.builds(
        DyadicInterval,
        scale=st.integers(min_value=-8, max_value=3),
        index=st.integers(min_value=-8, max_value=8),
    ),
    st.floats(min_value=-1.0, max_value=1.0, allow_nan=False).filter(lambda v: abs(v) > 1e-6),
    min_size=1,
    max_size=8,
).map(HaarSeries)


def shifted(f: HaarSeries, k: int) -> HaarSeries:
    """f dilated by 2^k"""
    return HaarSeries((DyadicInterval(i.scale + k, i.index), v) for i, v in f.coefficients.items())


@pytest.fixture
def small_spec():
    return EnsembleSpec(seed=7, count=25)


class TestValidateCheck:
    """Parameter windows per inequality"""

    @pytest.mark.parametrize(
        "inequality, s, constraint",
        [
            (Inequality.MORREY, 0.4, "s > 1/2"),
            (Inequality.ALGEBRA, 0.5, "s > 1/2"),
            (Inequality.LOCAL, 0.3, "1/2 < s < 1"),
            (Inequality.GNS, 0.5, "s < 1/2"),
            (Inequality.GNS, 0.75, "s < 1/2"),
            (Inequality.MORREY, 1.0, "0 < s < 1"),
        ],
    )
    def test_out_of_window(self, inequality, s, constraint):
        with pytest.raises(ParameterRangeError) as exc_info:
            validate_check(CheckSpec(inequality=inequality, s=s))

        assert exc_info.value.message == f"requires {constraint}"

    def test_bmo_takes_no_parameter(self):
        validate_check(CheckSpec(inequality=Inequality.BMO))

    def test_missing_s_is_rejected(self):
        with pytest.raises(ParameterRangeError):
            validate_check(CheckSpec(inequality=Inequality.GNS))


class TestMorrey:
    """sup |f| <= |f|_L2 + C_s |f|_Hs above s = 1/2"""

    def test_constant(self):
        assert morrey_constant(0.75) == pytest.approx((1.0 - 2.0**-0.5) ** -0.5)

    def test_unit_haar_passes(self):
        # Act
        verdict = morrey_check(HaarSeries({UNIT: 1.0}), 0.75)

        # Assert
        assert verdict.passed
        assert verdict.constant_source == ConstantSource.EXPLICIT
        assert verdict.sup_ratio == pytest.approx(1.0 / (1.0 + morrey_constant(0.75)))

    def test_zero_function_ratio(self):
        assert morrey_ratio(HaarSeries(), 0.75) == 0.0

    @settings(max_examples=80, deadline=None)
    @given(series_strategy, st.sampled_from([0.55, 0.75, 0.95]))
    def test_ratio_never_exceeds_one(self, f, s):
        assert morrey_ratio(f, s) <= 1.0 + 1e-12

    def test_below_one_half_rejected(self):
        with pytest.raises(ParameterRangeError):
            morrey_check(HaarSeries({UNIT: 1.0}), 0.4)


class TestBmo:
    """|f|_BMO <= |f|_H^(1/2) with equality on single Haar functions"""

    @pytest.mark.parametrize("interval", [UNIT, DyadicInterval(-5, 3), DyadicInterval(4, -2)])
    def test_single_haar_is_extremal(self, interval):
        verdict = bmo_check(HaarSeries({interval: 1.0}))

        assert verdict.passed
        assert verdict.sup_ratio == pytest.approx(1.0)

    @settings(max_examples=80, deadline=None)
    @given(series_strategy)
    def test_ratio_never_exceeds_one(self, f):
        assert bmo_ratio(f) <= 1.0 + 1e-12

    def test_zero_function(self):
        assert bmo_ratio(HaarSeries()) == 0.0


class TestGns:
    """Lq against the Hs seminorm below s = 1/2"""

    @pytest.mark.parametrize("s", [0.1, 0.25, 0.4])
    def test_dilation_invariance(self, s):
        # Arrange
        f = HaarSeries({UNIT: 1.0, DyadicInterval(-2, 1): -0.5, DyadicInterval(-1, -3): 0.25})
        base = gns_ratio(f, s)

        # Act
        ratios = [gns_ratio(shifted(f, k), s) for k in range(-20, 21)]

        # Assert
        assert all(abs(r - base) <= 1e-10 * base for r in ratios)

    def test_single_haar_value(self):
        s = 0.25
        f = HaarSeries({DyadicInterval(-3, 0): 1.0})

        # |h_I|_Lq = |I|^(1/q - 1/2) = |I|^-s and |h_I|_Hs = |I|^-s
        assert gns_ratio(f, s) == pytest.approx(1.0)

    def test_bounded_along_lacunary_tower(self):
        # Arrange
        s, alpha = 0.1, 0.29

        # Act
        ratios = [gns_ratio(lowreg_function(alpha, N), s) for N in range(41)]

        # Assert
        assert max(ratios[21:]) <= 1.01 * max(ratios[:21])
        assert abs(ratios[40] - ratios[39]) <= 1e-4 * ratios[40]

    def test_rejects_zero_function(self):
        with pytest.raises(ParameterRangeError) as exc_info:
            gns_ratio(HaarSeries(), 0.25)

        assert exc_info.value.message == "requires f ≠ 0"

    def test_zero_function_skipped_in_ensembles(self):
        check = CheckSpec(inequality=Inequality.GNS, s=0.25)

        assert sample_ratio(check, HaarSeries()) is None

    @pytest.mark.parametrize("s", [0.5, 0.75])
    def test_rejects_s_at_or_above_one_half(self, s):
        with pytest.raises(ParameterRangeError):
            gns_ratio(HaarSeries({UNIT: 1.0}), s)


class TestVerdicts:
    """Explicit, calibrated and uncalibrated constants"""

    def test_uncalibrated_check_always_passes(self):
        check = CheckSpec(inequality=Inequality.ALGEBRA, s=0.75)

        verdict = build_verdict(check, [HaarSeries({UNIT: 1.0})], [5.0])

        assert verdict.passed
        assert verdict.constant is None
        assert verdict.constant_source == ConstantSource.UNCALIBRATED

    def test_calibrated_bound_includes_margin(self):
        check = CheckSpec(inequality=Inequality.ALGEBRA, s=0.75)
        fixture = CalibrationFixture(
            seed=1,
            count=1,
            margin=1.5,
            entries=[CalibrationEntry(inequality=Inequality.ALGEBRA, s=0.75, sup_ratio=2.0, samples=1)],
        )
        f = HaarSeries({UNIT: 1.0})

        passing = build_verdict(check, [f], [2.9], fixture)
        failing = build_verdict(check, [f], [3.1], fixture)

        assert passing.passed and passing.constant == 3.0
        assert not failing.passed
        assert failing.failures[0].sample == 0
        assert failing.failures[0].series["coefficients"]

    def test_explicit_failure_is_recorded(self):
        check = CheckSpec(inequality=Inequality.BMO)

        verdict = build_verdict(check, [HaarSeries({UNIT: 1.0})], [1.5])

        assert not verdict.passed
        assert len(verdict.failures) == 1

    def test_none_ratios_are_not_counted(self):
        check = CheckSpec(inequality=Inequality.GNS, s=0.25)

        verdict = build_verdict(check, [HaarSeries(), HaarSeries({UNIT: 1.0})], [None, 1.0])

        assert verdict.samples == 1

    def test_local_estimate_uncalibrated(self):
        verdict = local_estimate_check(HaarSeries({UNIT: 1.0}), 0.75)

        assert verdict.passed
        assert verdict.sup_ratio == 0.0

    def test_algebra_ratio_of_single_haar(self):
        s = 0.75
        tail = 1.0 / (2.0 ** (2.0 * s + 1.0) - 1.0)

        verdict = algebra_check(HaarSeries({UNIT: 1.0}), s)

        assert verdict.constant_source == ConstantSource.UNCALIBRATED
        assert verdict.sup_ratio == pytest.approx(math.sqrt(1.0 + tail) / 2.0)

    def test_algebra_needs_high_regularity(self):
        with pytest.raises(ParameterRangeError):
            algebra_check(HaarSeries({UNIT: 1.0}), 0.4)


class TestRunEnsemble:
    """Seeded ensembles end to end"""

    def test_same_seed_same_ratios(self, small_spec):
        checks = [CheckSpec(inequality=Inequality.MORREY, s=0.75), CheckSpec(inequality=Inequality.BMO)]

        first = run_ensemble(small_spec, checks)
        second = run_ensemble(small_spec, checks)

        assert [v.ratios for v in first.verdicts] == [v.ratios for v in second.verdicts]
        assert first.verdict == Verdict.PASS
        assert first.checks == {"morrey@s=0.75": True, "bmo": True}

    @pytest.mark.parametrize("distribution", list(CoefficientDistribution))
    def test_explicit_checks_pass_on_every_distribution(self, distribution):
        spec = EnsembleSpec(seed=3, count=30, distribution=distribution)
        checks = [CheckSpec(inequality=Inequality.MORREY, s=0.6), CheckSpec(inequality=Inequality.BMO)]

        report = run_ensemble(spec, checks)

        assert report.passed

    def test_no_checks_gives_empty_report(self, small_spec):
        report = run_ensemble(small_spec, [])

        assert report.verdicts == []
        assert report.parameters["checks"] == []
        assert report.parameters["seed"] == 7

    def test_invalid_check_rejected_before_sampling(self, small_spec):
        with pytest.raises(ParameterRangeError):
            run_ensemble(small_spec, [CheckSpec(inequality=Inequality.MORREY, s=0.4)])

    def test_worker_count_does_not_change_ratios(self, small_spec):
        check = CheckSpec(inequality=Inequality.GNS, s=0.25)
        samples = generate_ensemble(small_spec)

        serial = evaluate_ratios(check, samples, workers=1)
        parallel = evaluate_ratios(check, samples, workers=2)

        assert serial == parallel


class TestEnsembles:
    """Seeded generation"""

    def test_generation_is_deterministic(self, small_spec):
        assert generate_ensemble(small_spec) == generate_ensemble(small_spec)

    def test_different_seed_differs(self, small_spec):
        other = small_spec.model_copy(update={"seed": 8})

        assert generate_ensemble(small_spec) != generate_ensemble(other)

    def test_scales_stay_in_range(self, small_spec):
        for f in generate_ensemble(small_spec):
            assert all(-6 <= i.scale <= 2 for i in f.intervals())

    def test_lacunary_is_a_chain(self):
        spec = EnsembleSpec(seed=2, count=5, distribution=CoefficientDistribution.LACUNARY, sparsity=4)

        for f in generate_ensemble(spec):
            scales = [i.scale for i in f.intervals()]
            assert len(scales) <= 4
            assert len(set(scales)) == len(scales)

    def test_single_has_unit_coefficient(self):
        spec = EnsembleSpec(seed=2, count=5, distribution=CoefficientDistribution.SINGLE)

        for f in generate_ensemble(spec):
            assert list(f.coefficients.values()) == [1.0]

    def test_ratio_is_finite_for_every_sample(self, small_spec):
        check = CheckSpec(inequality=Inequality.GNS, s=0.4)

        ratios = evaluate_ratios(check, generate_ensemble(small_spec))

        assert all(r is None or math.isfinite(r) for r in ratios)

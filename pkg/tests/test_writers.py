import json

import pytest

from dyadic_sobolev.core.exceptions import PayloadError
from dyadic_sobolev.core.dyadic import DyadicInterval
from dyadic_sobolev.core.haar import HaarSeries, StepFunction
from dyadic_sobolev.core.norms import norm_report
from dyadic_sobolev.schemas.embedding import EmbeddingVerdict, Inequality
from dyadic_sobolev.schemas.experiment import ExperimentReport
from dyadic_sobolev.schemas.series import parse_function_payload, parse_series_payload
from dyadic_sobolev.utils.writers import VERDICT_COLUMNS, render, rows_to_csv

UNIT = DyadicInterval(0, 0)


@pytest.fixture
def unit_report():
    return norm_report(HaarSeries({UNIT: 1.0}), 0.25)


class TestPayloads:
    """JSON input parsing"""

    def test_series_payload(self):
        text = '{"coefficients": [{"scale": -1, "index": 1, "value": 0.5}]}'

        assert parse_series_payload(text) == HaarSeries({DyadicInterval(-1, 1): 0.5})

    def test_base_scale_selects_step(self):
        text = '{"base_scale": 0, "pieces": [{"index": 3, "value": 1.0}]}'

        assert parse_function_payload(text) == StepFunction(0, {3: 1.0})

    def test_malformed_json_names_position(self):
        with pytest.raises(PayloadError) as exc_info:
            parse_series_payload('{"coefficients": [}')

        assert exc_info.value.message.startswith("Malformed JSON at line 1, column")

    def test_invalid_field_is_named(self):
        text = '{"coefficients": [{"scale": 0, "index": 0}]}'

        with pytest.raises(PayloadError) as exc_info:
            parse_series_payload(text)

        assert exc_info.value.details["field"] == "coefficients.0.value"


class TestCsv:
    """Table rendering"""

    def test_header_without_rows(self):
        assert rows_to_csv(["a", "b"], []) == "a,b\n"

    def test_none_is_empty_and_floats_round_trip(self):
        text = rows_to_csv(["x", "y"], [{"x": 0.1, "y": None}])

        assert text.splitlines()[1] == "0.1,"

    def test_norm_reports_share_one_table(self, unit_report):
        lines = render([unit_report, unit_report], "csv").splitlines()

        assert len(lines) == 3
        assert lines[1] == lines[2]

    def test_embedding_verdicts_concatenate(self):
        verdict = EmbeddingVerdict(inequality=Inequality.BMO, ratios=[0.5], sup_ratio=0.5, constant=1.0)
        reports = [ExperimentReport(kind="embedding", verdicts=[verdict])] * 2

        lines = render(reports, "csv").splitlines()

        assert lines[0].split(",") == VERDICT_COLUMNS
        assert lines[1] == "bmo,,1,0.5,1.0,explicit,True,0"
        assert len(lines) == 3

    def test_counterexample_without_fit_keeps_both_headers(self):
        report = ExperimentReport(kind="counterexample")

        table, fit = render([report], "csv").split("\n\n")

        assert table.startswith("N,route")
        assert fit.strip().startswith("model,exponent")


class TestJson:
    """JSON rendering"""

    def test_single_report_is_object(self, unit_report):
        assert json.loads(render([unit_report], "json"))["s"] == 0.25

    def test_several_reports_are_list(self, unit_report):
        data = json.loads(render([unit_report, unit_report], "json"))

        assert isinstance(data, list)
        assert len(data) == 2

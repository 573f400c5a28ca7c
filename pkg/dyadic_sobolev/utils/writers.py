import csv
import io
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

from pydantic import BaseModel

from dyadic_sobolev.schemas.embedding import EmbeddingVerdict
from dyadic_sobolev.schemas.experiment import CounterexampleRow, ExperimentReport
from dyadic_sobolev.schemas.norms import NormReport
from dyadic_sobolev.schemas.verification import VerificationReport

VERDICT_COLUMNS = [
    "inequality",
    "s",
    "samples",
    "sup_ratio",
    "constant",
    "constant_source",
    "passed",
    "failures",
]

FIT_COLUMNS = [
    "model",
    "exponent",
    "predicted",
    "relative_error",
    "tolerance",
    "naive_exponent",
    "band_low",
    "band_high",
    "verdict",
]

SUITE_COLUMNS = ["suite", "check", "max_residual", "tolerance", "passed"]

Report = Union[NormReport, ExperimentReport, VerificationReport, BaseModel]


def _cell(value: Any) -> Any:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value


def rows_to_csv(columns: Sequence[str], rows: Iterable[Dict[str, Any]]) -> str:
    """Header always present, even for an empty table."""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({column: _cell(row.get(column)) for column in columns})
    return buffer.getvalue()


def counterexample_rows(report: ExperimentReport) -> List[Dict[str, Any]]:
    return [row.model_dump() for row in report.rows]


def fit_row(report: ExperimentReport) -> Optional[Dict[str, Any]]:
    if report.fit is None:
        return None
    return {**report.fit.model_dump(), "verdict": report.verdict.value}


def report_to_csv(report: Report) -> str:
    if isinstance(report, NormReport):
        return rows_to_csv(NormReport.CSV_COLUMNS, [report.to_row()])
    if isinstance(report, VerificationReport):
        return rows_to_csv(SUITE_COLUMNS, [row for suite in report.suites for row in suite.to_rows()])
    if isinstance(report, ExperimentReport) and report.kind == "counterexample":
        table = rows_to_csv(CounterexampleRow.CSV_COLUMNS, counterexample_rows(report))
        fit = fit_row(report)
        return table + "\n" + rows_to_csv(FIT_COLUMNS, [fit] if fit else [])
    if isinstance(report, ExperimentReport):
        return rows_to_csv(VERDICT_COLUMNS, [v.to_row() for v in report.verdicts])
    raise TypeError(f"No CSV layout for {type(report).__name__}")


def reports_to_csv(reports: Sequence[Report]) -> str:
    """Several reports of one kind as a single table; verdict tables concatenate."""
    if not reports:
        return ""
    if all(isinstance(r, NormReport) for r in reports):
        return rows_to_csv(NormReport.CSV_COLUMNS, [r.to_row() for r in reports])
    if all(isinstance(r, ExperimentReport) and r.kind == "embedding" for r in reports):
        verdicts: List[EmbeddingVerdict] = [v for r in reports for v in r.verdicts]
        return rows_to_csv(VERDICT_COLUMNS, [v.to_row() for v in verdicts])
    return "\n".join(report_to_csv(r) for r in reports)


def reports_to_json(reports: Sequence[Report]) -> str:
    if len(reports) == 1:
        return reports[0].model_dump_json(indent=2) + "\n"
    parts = ",\n".join(r.model_dump_json(indent=2) for r in reports)
    return f"[\n{parts}\n]\n"


def render(reports: Sequence[Report], fmt: str) -> str:
    if fmt == "csv":
        return reports_to_csv(reports)
    return reports_to_json(reports)

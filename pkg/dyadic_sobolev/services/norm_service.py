import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Union

from dyadic_sobolev.config import Settings
from dyadic_sobolev.core.algebra import multiply, square_hs_norm
from dyadic_sobolev.core.exceptions import PayloadError
from dyadic_sobolev.core.haar import HaarSeries, StepFunction
from dyadic_sobolev.core.norms import norm_report
from dyadic_sobolev.schemas.norms import NormReport
from dyadic_sobolev.schemas.series import parse_function_payload

logger = logging.getLogger(__name__)

Function = Union[HaarSeries, StepFunction]


class NormService:
    """Loads function payloads and builds norm reports."""

    def __init__(self, settings: Settings):
        self.settings = settings

    def load_function(self, path: Optional[Path] = None) -> Function:
        """Read from a file, or from stdin when no path is given."""
        if path is None:
            return parse_function_payload(sys.stdin.read())
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise PayloadError(
                message=f"Cannot read {path}: {e.strerror}", details={"path": str(path)}
            )
        return parse_function_payload(text)

    def reports(
        self, f: Function, s_values: Sequence[float], depth: Optional[int] = None
    ) -> List[NormReport]:
        logger.info(f"Norm reports for {len(f)} terms at s={list(s_values)}")
        return [norm_report(f, s, depth) for s in s_values]

    def square_reports(self, f: Function, s_values: Sequence[float]) -> List[NormReport]:
        """Reports of f^2; Haar input is cross-checked on the dense product within MAX_STEP_PIECES."""
        if isinstance(f, StepFunction):
            square = multiply(f, f, max_pieces=self.settings.MAX_STEP_PIECES)
            return [norm_report(square, s) for s in s_values]
        reports = []
        for s in s_values:
            _, report = square_hs_norm(
                f,
                s,
                max_pieces=self.settings.MAX_STEP_PIECES,
                tolerance=self.settings.COEFFICIENT_TOLERANCE,
            )
            reports.append(report)
        return reports

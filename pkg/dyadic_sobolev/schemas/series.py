import json
from typing import List, Union

from pydantic import BaseModel, Field, ValidationError, model_validator

from dyadic_sobolev.core.dyadic import K_MAX, K_MIN, DyadicInterval
from dyadic_sobolev.core.exceptions import PayloadError
from dyadic_sobolev.core.haar import HaarSeries, StepFunction


class CoefficientEntry(BaseModel):
    scale: int = Field(..., ge=K_MIN, le=K_MAX)
    index: int = Field(..., ge=-(2**63), le=2**63 - 1)
    value: float = Field(..., allow_inf_nan=False)


class HaarSeriesPayload(BaseModel):
    """{"coefficients": [{"scale": k, "index": n, "value": v}, ...]}"""

    coefficients: List[CoefficientEntry] = Field(default_factory=list)

    @model_validator(mode="after")
    def validate_unique_intervals(self) -> "HaarSeriesPayload":
        seen = set()
        for entry in self.coefficients:
            key = (entry.scale, entry.index)
            if key in seen:
                raise ValueError(f"duplicate interval {entry.scale}:{entry.index}")
            seen.add(key)
        return self

    def to_series(self) -> HaarSeries:
        return HaarSeries(
            (DyadicInterval(entry.scale, entry.index), entry.value)
            for entry in self.coefficients
        )

    @classmethod
    def from_series(cls, f: HaarSeries) -> "HaarSeriesPayload":
        return cls(
            coefficients=[
                CoefficientEntry(scale=i.scale, index=i.index, value=v) for i, v in f.items()
            ]
        )


class StepPiece(BaseModel):
    index: int
    value: float = Field(..., allow_inf_nan=False)


class StepFunctionPayload(BaseModel):
    """{"base_scale": k, "pieces": [{"index": n, "value": v}, ...]}"""

    base_scale: int = Field(..., ge=K_MIN, le=K_MAX)
    pieces: List[StepPiece] = Field(default_factory=list)

    def to_step(self) -> StepFunction:
        return StepFunction(self.base_scale, ((p.index, p.value) for p in self.pieces))

    @classmethod
    def from_step(cls, g: StepFunction) -> "StepFunctionPayload":
        return cls(
            base_scale=g.base_scale,
            pieces=[StepPiece(index=i, value=v) for i, v in g.items()],
        )


def _load_json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise PayloadError(
            message=f"Malformed JSON at line {e.lineno}, column {e.colno}: {e.msg}",
            details={"line": e.lineno, "column": e.colno},
        )


def _validated(model, raw):
    try:
        return model.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"]) or "<root>"
        raise PayloadError(
            message=f"Invalid field {field}: {first['msg']}",
            details={"field": field, "errors": len(e.errors())},
        )


def parse_series_payload(text: str) -> HaarSeries:
    """Parse HaarSeries JSON, naming the line or field of the first problem."""
    return _validated(HaarSeriesPayload, _load_json(text)).to_series()


def parse_function_payload(text: str) -> Union[HaarSeries, StepFunction]:
    """HaarSeries JSON, or StepFunction JSON when a base_scale key is present."""
    raw = _load_json(text)
    if isinstance(raw, dict) and "base_scale" in raw:
        return _validated(StepFunctionPayload, raw).to_step()
    return _validated(HaarSeriesPayload, raw).to_series()

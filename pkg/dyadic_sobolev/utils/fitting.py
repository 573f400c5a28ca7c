"""
Growth-exponent fits with correction-to-scaling terms.

The model is y(x) = sum_j a_j phi(e_j) where phi(e) = 2^(e x) (exponential)
or x^e (power). Exponents are either tied to the leading exponent p (p + offset)
or fixed. For a given p the amplitudes a_j solve a weighted linear least
squares problem, so p itself is found by a 1-D search.
"""

import math
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np

EXPONENTIAL = "exponential"
POWER = "power"

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class GrowthModel:
    kind: str
    # (tied, exponent): tied terms use p + exponent, others use the exponent itself.
    # Listed by importance; the fit keeps as many as the data support.
    terms: Tuple[Tuple[bool, float], ...] = ((True, 0.0), (False, 0.0))
    correction: float = 0.0

    def exponents(self, p: float, count: int) -> List[float]:
        return [p + e if tied else e for tied, e in self.terms[:count]]

    def phi(self, x: np.ndarray, exponent: float) -> np.ndarray:
        if self.kind == EXPONENTIAL:
            return np.exp2(exponent * x)
        return x**exponent


@dataclass(frozen=True)
class FitOutcome:
    exponent: float
    residual: float
    amplitudes: Tuple[float, ...]
    terms: int
    band_low: float
    band_high: float
    naive_exponent: float


def correction_model(kind: str, correction: float, extra: Sequence[Tuple[bool, float]] = ()) -> GrowthModel:
    """Leading term, constant, then p - r and p - 2r, then any extra terms."""
    terms = ((True, 0.0), (False, 0.0), (True, -correction), (True, -2.0 * correction))
    return GrowthModel(kind=kind, terms=terms + tuple(extra), correction=correction)


def _solve(model: GrowthModel, x: np.ndarray, y: np.ndarray, p: float, count: int):
    columns = np.column_stack([model.phi(x, e) for e in model.exponents(p, count)])
    weights = 1.0 / np.abs(y)
    weighted = columns * weights[:, None]
    scale = np.max(np.abs(weighted), axis=0)
    scale[scale == 0.0] = 1.0
    target = y * weights
    amplitudes, *_ = np.linalg.lstsq(weighted / scale, target, rcond=None)
    residual = target - (weighted / scale) @ amplitudes
    return float(residual @ residual), amplitudes / scale


def _golden_section(objective: Callable[[float], float], lo: float, hi: float, iterations: int = 60) -> float:
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = objective(c), objective(d)
    for _ in range(iterations):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = objective(d)
    return 0.5 * (a + b)


def _search(model, x, y, count, lo, hi, step) -> Tuple[float, float]:
    grid = np.arange(lo, hi + 0.5 * step, step)
    residuals = np.array([_solve(model, x, y, p, count)[0] for p in grid])
    best = int(np.argmin(residuals))
    left = grid[max(best - 1, 0)]
    right = grid[min(best + 1, grid.size - 1)]
    p = _golden_section(lambda q: _solve(model, x, y, q, count)[0], left, right)
    return p, _solve(model, x, y, p, count)[0]


def naive_exponent(kind: str, x: Sequence[float], y: Sequence[float]) -> float:
    """Slope of log2 y against x, or of log y against log x."""
    x_arr = np.asarray(x, dtype=float)
    y_arr = np.log2(np.asarray(y, dtype=float))
    if kind == POWER:
        x_arr = np.log2(x_arr)
    slope, _ = np.polyfit(x_arr, y_arr, 1)
    return float(slope)


def fit_growth_exponent(
    model: GrowthModel,
    x: Sequence[float],
    y: Sequence[float],
    lo: float = -1.0,
    hi: float = 2.0,
    step: float = 1e-3,
) -> FitOutcome:
    x_arr = np.asarray(x, dtype=float)
    y_arr = np.asarray(y, dtype=float)
    if x_arr.size < 3:
        raise ValueError("growth fit needs at least three points")
    if np.any(y_arr == 0.0):
        raise ValueError("growth fit needs nonzero values")
    # one degree of freedom left over after the amplitudes and p
    count = max(1, min(len(model.terms), x_arr.size - 2))
    p, residual = _search(model, x_arr, y_arr, count, lo, hi, step)
    _, amplitudes = _solve(model, x_arr, y_arr, p, count)

    estimates = [p]
    if x_arr.size - 1 >= count + 2:
        for skip in range(x_arr.size):
            keep = np.arange(x_arr.size) != skip
            estimate, _ = _search(
                model, x_arr[keep], y_arr[keep], count, p - 0.25, p + 0.25, 10 * step
            )
            estimates.append(estimate)

    return FitOutcome(
        exponent=float(p),
        residual=float(residual),
        amplitudes=tuple(float(a) for a in amplitudes),
        terms=count,
        band_low=float(min(estimates)),
        band_high=float(max(estimates)),
        naive_exponent=naive_exponent(model.kind, x_arr, y_arr),
    )

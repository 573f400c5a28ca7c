"""
Dyadic fractional derivative D^s and fractional integral T_s.

D^s multiplies the coefficient at I by |I|^-s. T_s g = sum_I |I|^s <g>_I 1_I;
on the finite Haar span it collapses to (2^s - 1)^-1 sum_J |J|^s (g, h_J) h_J,
which is the form used everywhere except validation.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from dyadic_sobolev.core.dyadic import DyadicInterval
from dyadic_sobolev.core.exceptions import ParameterRangeError, StepBudgetError
from dyadic_sobolev.core.haar import (
    DEFAULT_MAX_PIECES,
    HaarSeries,
    StepFunction,
    series_sup,
    to_step,
    tree_closures,
)


@dataclass(frozen=True)
class FractionalParameter:
    s: float

    def __post_init__(self):
        if not (0.0 < self.s < 1.0) or math.isnan(self.s):
            raise ParameterRangeError("0 < s < 1", details={"s": self.s})

    @property
    def subcritical(self) -> bool:
        return self.s < 0.5

    @property
    def q(self) -> float:
        """Sobolev exponent 2 / (1 - 2s), defined only below s = 1/2."""
        if not self.subcritical:
            raise ParameterRangeError("s < 1/2", details={"s": self.s})
        return 2.0 / (1.0 - 2.0 * self.s)

    @property
    def t_s_factor(self) -> float:
        return 2.0**self.s - 1.0


def _weight(interval: DyadicInterval, exponent: float) -> float:
    """|I|^exponent"""
    return 2.0 ** (interval.scale * exponent)


def frac_derivative(f: HaarSeries, s: float) -> HaarSeries:
    FractionalParameter(s)
    return f.map_values(lambda interval, value: _weight(interval, -s) * value)


def frac_inverse_derivative(f: HaarSeries, s: float) -> HaarSeries:
    """D^-s: coefficient-wise |I|^s."""
    FractionalParameter(s)
    return f.map_values(lambda interval, value: _weight(interval, s) * value)


def t_s_closed(g: HaarSeries, s: float) -> HaarSeries:
    factor = 1.0 / FractionalParameter(s).t_s_factor
    return g.map_values(lambda interval, value: factor * _weight(interval, s) * value)


def t_s_truncated(
    g: HaarSeries, s: float, depth: int, max_pieces: int = DEFAULT_MAX_PIECES
) -> StepFunction:
    """The defining series of T_s over scales >= (min stored scale - depth), for any s > 0.

    The result lives on base scale k_min - 1. Scales below it see <g>_J equal to
    the piece value, so each contributes a geometric multiple of that value.
    """
    if not s > 0.0:
        raise ParameterRangeError("s > 0", details={"s": s})
    if depth < 0:
        raise ParameterRangeError("depth ≥ 0")
    if not g:
        return StepFunction.empty()
    k_min = g.min_scale
    base = k_min - 1
    lowest = k_min - depth
    step = to_step(g, max_pieces=max_pieces)

    below = math.fsum(2.0 ** ((base - j) * s) for j in range(1, base - lowest + 1))
    pieces = {}
    for closure in tree_closures(g).values():
        hull = closure.hull
        levels = hull.scale - base
        if 1 << levels > max_pieces:
            raise StepBudgetError(1 << levels, max_pieces)
        offset = hull.index << levels
        values = np.zeros(1 << levels)
        for index, value in step.pieces.items():
            if 0 <= index - offset < values.size:
                values[index - offset] = value

        # averages over every level strictly below the hull, finest first
        averages = [values]
        for _ in range(levels - 1):
            current = averages[-1]
            averages.append(0.5 * (current[0::2] + current[1::2]))

        total = np.zeros(1)
        for level in range(levels - 1, -1, -1):
            total = np.repeat(total, 2)
            scale = base + level
            if scale >= lowest:
                total = total + 2.0 ** (scale * s) * averages[level]
        total = total + below * values
        for position in np.flatnonzero(total):
            pieces[offset + int(position)] = float(total[position])
    return StepFunction(base, pieces)


def t_s_truncation_error(
    g: HaarSeries, s: float, depth: int, max_pieces: int = DEFAULT_MAX_PIECES
) -> float:
    """sup |t_s_closed(g) - t_s_truncated(g, depth)|"""
    closed = to_step(t_s_closed(g, s), max_pieces=max_pieces)
    truncated = t_s_truncated(g, s, depth, max_pieces=max_pieces)
    difference = closed - truncated
    return max((abs(v) for v in difference.pieces.values()), default=0.0)


def reconstruction_residual(f: HaarSeries, s: float) -> float:
    """sup |(2^s - 1) T_s D^s f - f|"""
    factor = FractionalParameter(s).t_s_factor
    rebuilt = t_s_closed(frac_derivative(f, s), s).scaled(factor)
    return series_sup(rebuilt - f)


def reconstruction_tolerance(f: HaarSeries, tolerance: Optional[float] = None) -> float:
    return (tolerance if tolerance is not None else 1e-12) * (1.0 + series_sup(f))

"""
Exact arithmetic on the standard dyadic grid of the real line.

An interval is identified by its scale k and index n and stands for the
half-open interval [n * 2^k, (n + 1) * 2^k). Every membership test goes
through integer shifts, so no floating point rounding can move a point
across an endpoint.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterator, Optional, Tuple, Union

from dyadic_sobolev.core.exceptions import ContainmentError, ScaleClampError

K_MIN = -60
K_MAX = 60
INDEX_MIN = -(2**63)
INDEX_MAX = 2**63 - 1

_TEXT_PATTERN = re.compile(r"^\s*(-?\d+)\s*:\s*(-?\d+)\s*$")


class Relation(str, Enum):
    DISJOINT = "Disjoint"
    EQUAL = "Equal"
    I_CONTAINS_J = "IContainsJ"
    J_CONTAINS_I = "JContainsI"


class Tree(str, Enum):
    """The two ancestor-closed halves of the standard grid."""

    NEGATIVE = "negative"
    POSITIVE = "positive"


def _check_scale(scale: int) -> None:
    if not K_MIN <= scale <= K_MAX:
        raise ScaleClampError(
            message=f"Scale {scale} outside clamp [{K_MIN}, {K_MAX}]",
            details={"scale": scale, "k_min": K_MIN, "k_max": K_MAX},
        )


@dataclass(frozen=True, order=True, slots=True)
class DyadicInterval:
    """[index * 2^scale, (index + 1) * 2^scale)"""

    scale: int
    index: int

    def __post_init__(self):
        _check_scale(self.scale)
        if not INDEX_MIN <= self.index <= INDEX_MAX:
            raise ScaleClampError(
                message=f"Index {self.index} outside signed 64-bit range",
                details={"scale": self.scale, "index": self.index},
            )

    @property
    def tree(self) -> Tree:
        return Tree.NEGATIVE if self.index < 0 else Tree.POSITIVE

    @property
    def left(self) -> Fraction:
        return Fraction(self.index) * Fraction(2) ** self.scale

    @property
    def right(self) -> Fraction:
        return Fraction(self.index + 1) * Fraction(2) ** self.scale

    @property
    def midpoint(self) -> "DyadicPoint":
        return DyadicPoint.of(2 * self.index + 1, self.scale - 1)

    def to_dict(self) -> dict:
        return {"scale": self.scale, "index": self.index}

    def to_text(self) -> str:
        return f"{self.scale}:{self.index}"

    @classmethod
    def from_text(cls, text: str) -> "DyadicInterval":
        match = _TEXT_PATTERN.match(text)
        if match is None:
            raise ValueError(f"Invalid dyadic interval text: {text!r}")
        return cls(int(match.group(1)), int(match.group(2)))

    def __reduce__(self):
        # worker processes receive intervals by pickle
        return (DyadicInterval, (self.scale, self.index))

    def __repr__(self) -> str:
        return f"DyadicInterval({self.to_text()})"


@dataclass(frozen=True, slots=True)
class DyadicPoint:
    """The rational mantissa * 2^exponent, canonical with odd mantissa or zero."""

    mantissa: int
    exponent: int

    def __post_init__(self):
        if self.mantissa == 0:
            if self.exponent != 0:
                raise ValueError("zero must be stored with exponent 0")
        elif self.mantissa % 2 == 0:
            raise ValueError("canonical form requires an odd mantissa")

    @classmethod
    def of(cls, mantissa: int, exponent: int) -> "DyadicPoint":
        if mantissa == 0:
            return cls(0, 0)
        shift = (mantissa & -mantissa).bit_length() - 1
        return cls(mantissa >> shift, exponent + shift)

    @classmethod
    def from_float(cls, x: float) -> "DyadicPoint":
        if not math.isfinite(x):
            raise ValueError(f"Point must be finite, got {x}")
        numerator, denominator = float(x).as_integer_ratio()
        # denominator is a power of two for every finite float
        return cls.of(numerator, -(denominator.bit_length() - 1))

    def to_fraction(self) -> Fraction:
        return Fraction(self.mantissa) * Fraction(2) ** self.exponent

    def __float__(self) -> float:
        return math.ldexp(float(self.mantissa), self.exponent)


PointLike = Union[DyadicPoint, float, int]


def as_point(x: PointLike) -> DyadicPoint:
    if isinstance(x, DyadicPoint):
        return x
    return DyadicPoint.from_float(float(x))


def measure(interval: DyadicInterval) -> float:
    return math.ldexp(1.0, interval.scale)


def parent(interval: DyadicInterval) -> DyadicInterval:
    return DyadicInterval(interval.scale + 1, interval.index >> 1)


def children(interval: DyadicInterval) -> Tuple[DyadicInterval, DyadicInterval]:
    """Return (I_minus, I_plus); I_plus is the right half."""
    scale = interval.scale - 1
    return (
        DyadicInterval(scale, 2 * interval.index),
        DyadicInterval(scale, 2 * interval.index + 1),
    )


def ancestor(interval: DyadicInterval, generations: int) -> DyadicInterval:
    if generations < 0:
        raise ValueError("generations must be nonnegative")
    if generations == 0:
        return interval
    return DyadicInterval(interval.scale + generations, interval.index >> generations)


def contains(outer: DyadicInterval, inner: DyadicInterval) -> bool:
    """True when inner is a subset of outer (reflexive)."""
    gap = outer.scale - inner.scale
    if gap < 0:
        return False
    return inner.index >> gap == outer.index


def relation(first: DyadicInterval, second: DyadicInterval) -> Relation:
    if first == second:
        return Relation.EQUAL
    if contains(first, second):
        return Relation.I_CONTAINS_J
    if contains(second, first):
        return Relation.J_CONTAINS_I
    return Relation.DISJOINT


def is_right_half(outer: DyadicInterval, inner: DyadicInterval) -> bool:
    """For inner strictly inside outer: does inner lie in the right half?"""
    gap = outer.scale - inner.scale
    return (inner.index >> (gap - 1)) & 1 == 1


def grid_index(x: PointLike, scale: int) -> int:
    """floor(x / 2^scale) computed by shifts; the scale is not clamped."""
    point = as_point(x)
    shift = point.exponent - scale
    if shift >= 0:
        return point.mantissa << shift
    return point.mantissa >> -shift


def locate(x: PointLike, scale: int) -> Optional[DyadicInterval]:
    """The scale-k interval containing x, or None past the signed 64-bit index range."""
    index = grid_index(x, scale)
    if not INDEX_MIN <= index <= INDEX_MAX:
        return None
    return DyadicInterval(scale, index)


def point_in(interval: DyadicInterval, x: PointLike) -> bool:
    return grid_index(x, interval.scale) == interval.index


def haar_value_at(interval: DyadicInterval, x: PointLike) -> float:
    point = as_point(x)
    if not point_in(interval, point):
        return 0.0
    amplitude = math.ldexp(1.0, -interval.scale) ** 0.5
    return amplitude if grid_index(point, interval.scale - 1) & 1 else -amplitude


def haar_constant_on(outer: DyadicInterval, inner: DyadicInterval) -> float:
    """h_I(J), the constant value of h_I on J for J strictly inside I."""
    if outer == inner or not contains(outer, inner):
        raise ContainmentError(
            message=f"{inner.to_text()} is not strictly inside {outer.to_text()}",
            details={"outer": outer.to_dict(), "inner": inner.to_dict()},
        )
    amplitude = math.ldexp(1.0, -outer.scale) ** 0.5
    return amplitude if is_right_half(outer, inner) else -amplitude


def dyadic_grid_level(interval: DyadicInterval, level: int) -> Iterator[DyadicInterval]:
    """D_k(I): the subintervals of I of measure 2^-k |I|."""
    if level < 0:
        raise ValueError("level must be nonnegative")
    scale = interval.scale - level
    _check_scale(scale)
    first = interval.index << level
    for index in range(first, first + (1 << level)):
        yield DyadicInterval(scale, index)


def common_ancestor(
    first: DyadicInterval, second: DyadicInterval
) -> Optional[DyadicInterval]:
    """Smallest interval containing both, or None across the two trees."""
    if first.tree is not second.tree:
        return None
    a, b = first, second
    while a.scale < b.scale:
        a = parent(a)
    while b.scale < a.scale:
        b = parent(b)
    while a != b:
        a, b = parent(a), parent(b)
    return a

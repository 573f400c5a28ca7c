"""
Finite Haar expansions, dyadic step functions and the conversions between
them.

A HaarSeries is a finite map from dyadic intervals to the coefficients
(f, h_I). A StepFunction is constant on the intervals of one base scale and
zero outside finitely many of them. Products and indicators leave the finite
Haar span, so `analyze` returns the coefficients inside each tree hull plus
the per-tree integral; coefficients above a hull follow analytically.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

from dyadic_sobolev.core.dyadic import (
    K_MIN,
    DyadicInterval,
    PointLike,
    Tree,
    ancestor,
    as_point,
    children,
    common_ancestor,
    contains,
    grid_index,
    haar_constant_on,
    is_right_half,
    locate,
    measure,
    parent,
    point_in,
)
from dyadic_sobolev.core.exceptions import ParameterRangeError, StepBudgetError
from dyadic_sobolev.utils.summation import ordered_sum

DEFAULT_MAX_PIECES = 2**22


def haar_amplitude(interval: DyadicInterval) -> float:
    """|I|^{-1/2}"""
    return math.ldexp(1.0, -interval.scale) ** 0.5


class HaarSeries:
    """Finite Haar expansion f = sum (f, h_I) h_I in canonical form."""

    __slots__ = ("_coefficients",)

    def __init__(
        self,
        coefficients: Union[
            Mapping[DyadicInterval, float], Iterable[Tuple[DyadicInterval, float]]
        ] = (),
    ):
        items = coefficients.items() if isinstance(coefficients, Mapping) else coefficients
        canonical: Dict[DyadicInterval, float] = {}
        for interval, value in items:
            value = float(value)
            if not math.isfinite(value):
                raise ValueError(f"Coefficient at {interval.to_text()} is not finite")
            if value != 0.0:
                canonical[interval] = value
        self._coefficients = canonical

    @property
    def coefficients(self) -> Mapping[DyadicInterval, float]:
        return MappingProxyType(self._coefficients)

    def get(self, interval: DyadicInterval) -> float:
        return self._coefficients.get(interval, 0.0)

    def items(self) -> List[Tuple[DyadicInterval, float]]:
        return sorted(self._coefficients.items())

    def intervals(self) -> List[DyadicInterval]:
        return sorted(self._coefficients)

    @property
    def min_scale(self) -> Optional[int]:
        return min((i.scale for i in self._coefficients), default=None)

    @property
    def max_scale(self) -> Optional[int]:
        return max((i.scale for i in self._coefficients), default=None)

    def by_tree(self) -> Dict[Tree, Dict[DyadicInterval, float]]:
        trees: Dict[Tree, Dict[DyadicInterval, float]] = {}
        for interval, value in self._coefficients.items():
            trees.setdefault(interval.tree, {})[interval] = value
        return trees

    def map_values(self, fn) -> "HaarSeries":
        return HaarSeries((i, fn(i, v)) for i, v in self._coefficients.items())

    def scaled(self, factor: float) -> "HaarSeries":
        return HaarSeries((i, factor * v) for i, v in self._coefficients.items())

    def dilated(self) -> "HaarSeries":
        """Dyadic dilation by 2: [n 2^k, (n+1) 2^k) -> [n 2^(k+1), (n+1) 2^(k+1))."""
        return HaarSeries(
            (DyadicInterval(i.scale + 1, i.index), v) for i, v in self._coefficients.items()
        )

    def __add__(self, other: "HaarSeries") -> "HaarSeries":
        merged = dict(self._coefficients)
        for interval, value in other._coefficients.items():
            merged[interval] = merged.get(interval, 0.0) + value
        return HaarSeries(merged)

    def __sub__(self, other: "HaarSeries") -> "HaarSeries":
        return self + other.scaled(-1.0)

    def __mul__(self, factor: float) -> "HaarSeries":
        return self.scaled(factor)

    __rmul__ = __mul__

    def __neg__(self) -> "HaarSeries":
        return self.scaled(-1.0)

    def __len__(self) -> int:
        return len(self._coefficients)

    def __bool__(self) -> bool:
        return bool(self._coefficients)

    def __contains__(self, interval: DyadicInterval) -> bool:
        return interval in self._coefficients

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HaarSeries):
            return NotImplemented
        return self._coefficients == other._coefficients

    def __repr__(self) -> str:
        body = ", ".join(f"{i.to_text()}: {v!r}" for i, v in self.items()[:6])
        more = "" if len(self) <= 6 else f", ... ({len(self)} terms)"
        return f"HaarSeries({{{body}{more}}})"


class StepFunction:
    """Dyadic step function: constant on each base-scale interval, zero elsewhere."""

    __slots__ = ("base_scale", "_pieces")

    def __init__(
        self,
        base_scale: int,
        pieces: Union[Mapping[int, float], Iterable[Tuple[int, float]]] = (),
    ):
        items = pieces.items() if isinstance(pieces, Mapping) else pieces
        canonical: Dict[int, float] = {}
        for index, value in items:
            value = float(value)
            if not math.isfinite(value):
                raise ValueError(f"Piece {index} is not finite")
            if value != 0.0:
                canonical[int(index)] = value
        self.base_scale = int(base_scale)
        self._pieces = canonical

    @classmethod
    def empty(cls) -> "StepFunction":
        return cls(0)

    @classmethod
    def indicator(cls, interval: DyadicInterval, value: float = 1.0) -> "StepFunction":
        return cls(interval.scale, {interval.index: value})

    @property
    def pieces(self) -> Mapping[int, float]:
        return MappingProxyType(self._pieces)

    @property
    def piece_measure(self) -> float:
        return math.ldexp(1.0, self.base_scale)

    def items(self) -> List[Tuple[int, float]]:
        return sorted(self._pieces.items())

    def piece(self, index: int) -> DyadicInterval:
        return DyadicInterval(self.base_scale, index)

    def value_at(self, x: PointLike) -> float:
        if not self._pieces:
            return 0.0
        piece = locate(x, self.base_scale)
        return self._pieces.get(piece.index, 0.0) if piece is not None else 0.0

    def integral(self) -> float:
        return ordered_sum(self._pieces.values()) * self.piece_measure

    def tree_integrals(self) -> Dict[Tree, float]:
        totals: Dict[Tree, List[float]] = {Tree.NEGATIVE: [], Tree.POSITIVE: []}
        for index, value in self._pieces.items():
            totals[Tree.NEGATIVE if index < 0 else Tree.POSITIVE].append(value)
        return {tree: ordered_sum(values) * self.piece_measure for tree, values in totals.items()}

    def refined(self, scale: int, max_pieces: int = DEFAULT_MAX_PIECES) -> "StepFunction":
        """The same function on a finer base scale."""
        if scale > self.base_scale:
            raise ValueError("refinement must not coarsen the base scale")
        if scale == self.base_scale:
            return self
        if not self._pieces:
            return StepFunction(scale)
        factor = 1 << (self.base_scale - scale)
        needed = factor * len(self._pieces)
        if needed > max_pieces:
            raise StepBudgetError(needed, max_pieces)
        DyadicInterval(scale, 0)  # clamp check
        refined: Dict[int, float] = {}
        for index, value in self._pieces.items():
            start = index * factor
            for sub in range(start, start + factor):
                refined[sub] = value
        return StepFunction(scale, refined)

    def scaled(self, factor: float) -> "StepFunction":
        return StepFunction(self.base_scale, ((i, factor * v) for i, v in self._pieces.items()))

    def __add__(self, other: "StepFunction") -> "StepFunction":
        if not self._pieces:
            return other
        if not other._pieces:
            return self
        scale = min(self.base_scale, other.base_scale)
        left, right = self.refined(scale), other.refined(scale)
        merged = dict(left._pieces)
        for index, value in right._pieces.items():
            merged[index] = merged.get(index, 0.0) + value
        return StepFunction(scale, merged)

    def __sub__(self, other: "StepFunction") -> "StepFunction":
        return self + other.scaled(-1.0)

    def __len__(self) -> int:
        return len(self._pieces)

    def __bool__(self) -> bool:
        return bool(self._pieces)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StepFunction):
            return NotImplemented
        if not self._pieces and not other._pieces:
            return True
        return self.base_scale == other.base_scale and self._pieces == other._pieces

    def __repr__(self) -> str:
        return f"StepFunction(base_scale={self.base_scale}, pieces={len(self._pieces)})"


@dataclass(frozen=True)
class TreeHull:
    """Smallest dyadic interval containing one tree's support, with its integral."""

    tree: Tree
    hull: Optional[DyadicInterval]
    integral: float = 0.0


@dataclass(frozen=True)
class HaarAnalysis:
    """In-hull Haar coefficients of a step function plus per-tree integrals."""

    series: HaarSeries
    hulls: Mapping[Tree, TreeHull] = field(default_factory=dict)

    def integrals(self) -> Tuple[float, float]:
        return (
            self.hulls[Tree.NEGATIVE].integral if Tree.NEGATIVE in self.hulls else 0.0,
            self.hulls[Tree.POSITIVE].integral if Tree.POSITIVE in self.hulls else 0.0,
        )

    def coefficient(self, interval: DyadicInterval) -> float:
        """(g, h_K) for any K, including the analytic values above a hull."""
        if interval in self.series:
            return self.series.get(interval)
        hull = self.hulls.get(interval.tree)
        if hull is None or hull.hull is None:
            return 0.0
        if interval != hull.hull and contains(interval, hull.hull):
            return haar_constant_on(interval, hull.hull) * hull.integral
        return 0.0


def evaluate(f: HaarSeries, x: PointLike) -> float:
    point = as_point(x)
    terms = []
    for scale in sorted({i.scale for i in f.coefficients}):
        interval = locate(point, scale)
        value = f.get(interval) if interval is not None else 0.0
        if value:
            sign = 1.0 if grid_index(point, scale - 1) & 1 else -1.0
            terms.append(sign * value * haar_amplitude(interval))
    return ordered_sum(terms)


def step_piece_count(f: HaarSeries) -> int:
    """Pieces touched by to_step, counted with multiplicity."""
    base = f.min_scale
    if base is None:
        return 0
    base -= 1
    return sum(1 << (i.scale - base) for i in f.coefficients)


def to_step(f: HaarSeries, max_pieces: int = DEFAULT_MAX_PIECES) -> StepFunction:
    if not f:
        return StepFunction.empty()
    base = f.min_scale - 1
    needed = step_piece_count(f)
    if needed > max_pieces:
        raise StepBudgetError(needed, max_pieces)
    DyadicInterval(base, 0)  # clamp check
    contributions: Dict[int, List[float]] = defaultdict(list)
    for interval, value in f.coefficients.items():
        half_width = 1 << (interval.scale - base - 1)
        start = interval.index << (interval.scale - base)
        amplitude = value * haar_amplitude(interval)
        for index in range(start, start + half_width):
            contributions[index].append(-amplitude)
        for index in range(start + half_width, start + 2 * half_width):
            contributions[index].append(amplitude)
    return StepFunction(base, ((i, ordered_sum(v)) for i, v in contributions.items()))


def analyze(g: StepFunction) -> HaarAnalysis:
    """Haar coefficients inside each tree hull, bottom-up over the pyramid."""
    coefficients: Dict[DyadicInterval, float] = {}
    hulls: Dict[Tree, TreeHull] = {}
    width = g.piece_measure
    by_tree: Dict[Tree, Dict[int, float]] = {Tree.NEGATIVE: {}, Tree.POSITIVE: {}}
    for index, value in g.pieces.items():
        by_tree[Tree.NEGATIVE if index < 0 else Tree.POSITIVE][index] = value * width

    for tree, level in by_tree.items():
        if not level:
            hulls[tree] = TreeHull(tree=tree, hull=None, integral=0.0)
            continue
        scale = g.base_scale
        while len(level) > 1:
            halves: Dict[int, List[float]] = {}
            for index, integral in level.items():
                pair = halves.setdefault(index >> 1, [0.0, 0.0])
                pair[index & 1] += integral
            scale += 1
            parent_level: Dict[int, float] = {}
            for index, (left, right) in halves.items():
                interval = DyadicInterval(scale, index)
                coefficient = (right - left) * haar_amplitude(interval)
                if coefficient != 0.0:
                    coefficients[interval] = coefficient
                parent_level[index] = left + right
            level = parent_level
        (index, integral), = level.items()
        hulls[tree] = TreeHull(tree=tree, hull=DyadicInterval(scale, index), integral=integral)
    return HaarAnalysis(series=HaarSeries(coefficients), hulls=hulls)


def indicator_coefficient(interval: DyadicInterval, other: DyadicInterval) -> float:
    """(1_I, h_K) = |I| h_K(I) for K strictly containing I, zero otherwise."""
    if other == interval or not contains(other, interval):
        return 0.0
    return measure(interval) * haar_constant_on(other, interval)


def _average_of_series(f: HaarSeries, interval: DyadicInterval) -> float:
    top = f.max_scale
    if top is None or interval.scale >= top:
        return 0.0
    terms = []
    for generations in range(1, top - interval.scale + 1):
        outer = ancestor(interval, generations)
        value = f.get(outer)
        if value:
            terms.append(value * haar_constant_on(outer, interval))
    return ordered_sum(terms)


def _average_of_step(g: StepFunction, interval: DyadicInterval) -> float:
    if not g:
        return 0.0
    if interval.scale <= g.base_scale:
        covering = ancestor(interval, g.base_scale - interval.scale)
        return g.pieces.get(covering.index, 0.0)
    gap = interval.scale - g.base_scale
    values = [v for i, v in g.pieces.items() if i >> gap == interval.index]
    return ordered_sum(values) / (1 << gap)


def average(f: Union[HaarSeries, StepFunction], interval: DyadicInterval) -> float:
    """<f>_I; the Haar route sums over stored strict ancestors of I."""
    if isinstance(f, HaarSeries):
        return _average_of_series(f, interval)
    return _average_of_step(f, interval)


def telescope_residual(
    f: Union[HaarSeries, StepFunction], interval: DyadicInterval, generations: int
) -> float:
    """<f>_I - <f>_{I_(k)} - sum_{I < J <= I_(k)} (f, h_J) h_J(I); zero up to rounding."""
    if generations < 0:
        raise ParameterRangeError("k ≥ 0")
    top = ancestor(interval, generations)
    series = f if isinstance(f, HaarSeries) else analyze(f)
    terms = []
    for step in range(1, generations + 1):
        outer = ancestor(interval, step)
        value = (
            series.get(outer) if isinstance(series, HaarSeries) else series.coefficient(outer)
        )
        if value:
            terms.append(value * haar_constant_on(outer, interval))
    return average(f, interval) - average(f, top) - ordered_sum(terms)


def weighted_indicator_sum(
    interval: DyadicInterval, s: float, x: PointLike, depth: int
) -> Tuple[float, float]:
    """sum_{k<=depth} sum_{J in D_k(I)} |J|^s 1_J(x) and (1 - 2^-s)^-1 |I|^s 1_I(x)."""
    if s <= 0:
        raise ParameterRangeError("s > 0")
    if depth < 0:
        raise ParameterRangeError("depth ≥ 0")
    if not point_in(interval, x):
        return 0.0, 0.0
    size = measure(interval)
    # the intervals in D_k(I) are disjoint, so exactly one of them holds x
    truncated = ordered_sum(
        math.ldexp(size, -level) ** s for level in range(depth + 1)
    )
    closed_form = size**s / (1.0 - 2.0**-s)
    return truncated, closed_form


def weighted_haar_sum(
    interval: DyadicInterval, s: float, x: PointLike, depth: int
) -> Tuple[float, float]:
    """sum_{J < I, depth levels} |J|^s h_I(J) 1_J(x) and (2^s - 1)^-1 |I|^s h_I(x)."""
    if s <= 0:
        raise ParameterRangeError("s > 0")
    if depth < 0:
        raise ParameterRangeError("depth ≥ 0")
    point = as_point(x)
    if not point_in(interval, point):
        return 0.0, 0.0
    size = measure(interval)
    value = haar_amplitude(interval) * (1.0 if grid_index(point, interval.scale - 1) & 1 else -1.0)
    truncated = value * ordered_sum(
        math.ldexp(size, -level) ** s for level in range(1, depth + 1)
    )
    closed_form = size**s * value / (2.0**s - 1.0)
    return truncated, closed_form


@dataclass(frozen=True)
class TreeClosure:
    """Stored intervals of one tree together with every ancestor up to the hull."""

    tree: Tree
    hull: DyadicInterval
    nodes: Tuple[DyadicInterval, ...]  # ascending scale

    def top_down(self) -> Iterator[DyadicInterval]:
        return reversed(self.nodes)


def _left_key(interval: DyadicInterval) -> int:
    return interval.index << (interval.scale - K_MIN)


def _right_key(interval: DyadicInterval) -> int:
    return (interval.index + 1) << (interval.scale - K_MIN)


def tree_closures(f: HaarSeries) -> Dict[Tree, TreeClosure]:
    closures: Dict[Tree, TreeClosure] = {}
    for tree, stored in f.by_tree().items():
        leftmost = min(stored, key=_left_key)
        rightmost = max(stored, key=_right_key)
        hull = common_ancestor(leftmost, rightmost)
        nodes = set(stored)
        for interval in stored:
            current = interval
            while current != hull:
                current = parent(current)
                if current in nodes:
                    break
                nodes.add(current)
        closures[tree] = TreeClosure(tree=tree, hull=hull, nodes=tuple(sorted(nodes)))
    return closures


def tree_hulls(f: HaarSeries) -> Dict[Tree, TreeHull]:
    hulls = {tree: TreeHull(tree=tree, hull=None) for tree in Tree}
    for tree, closure in tree_closures(f).items():
        hulls[tree] = TreeHull(tree=tree, hull=closure.hull, integral=0.0)
    return hulls


def subtree_energy(
    f: HaarSeries, closures: Optional[Dict[Tree, TreeClosure]] = None
) -> Dict[DyadicInterval, float]:
    """sum_{stored J inside I} (f, h_J)^2 for every I in the tree closures."""
    closures = closures if closures is not None else tree_closures(f)
    energy: Dict[DyadicInterval, float] = {}
    for closure in closures.values():
        for interval in closure.nodes:
            value = f.get(interval)
            energy[interval] = energy.get(interval, 0.0) + value * value
            if interval != closure.hull:
                up = parent(interval)
                energy[up] = energy.get(up, 0.0) + energy[interval]
    return energy


def closure_averages(
    f: HaarSeries, closures: Optional[Dict[Tree, TreeClosure]] = None
) -> Dict[DyadicInterval, float]:
    """<f>_I for every I in the tree closures, top-down from each hull."""
    closures = closures if closures is not None else tree_closures(f)
    averages: Dict[DyadicInterval, float] = {}
    for closure in closures.values():
        for interval in closure.top_down():
            if interval == closure.hull:
                averages[interval] = 0.0
                continue
            up = parent(interval)
            averages[interval] = averages[up] + f.get(up) * haar_constant_on(up, interval)
    return averages


def regions(f: HaarSeries) -> List[Tuple[float, float]]:
    """(value, measure) pairs covering the support of f.

    On the part of a half H of a stored interval that no finer stored interval
    covers, f equals <f>_H.
    """
    closures = tree_closures(f)
    averages = closure_averages(f, closures)
    covered: Dict[DyadicInterval, float] = defaultdict(float)
    for closure in closures.values():
        nearest: Dict[DyadicInterval, Optional[DyadicInterval]] = {}
        for interval in closure.top_down():
            if interval == closure.hull:
                nearest[interval] = None
                continue
            up = parent(interval)
            nearest[interval] = up if up in f else nearest[up]
            owner = nearest[interval]
            if interval in f and owner is not None:
                left, right = children(owner)
                half = right if is_right_half(owner, interval) else left
                covered[half] += measure(interval)

    result: List[Tuple[float, float]] = []
    for interval, value in f.items():
        for half in children(interval):
            uncovered = measure(half) - covered.get(half, 0.0)
            if uncovered > 0.0:
                level = averages[interval] + value * haar_constant_on(interval, half)
                result.append((level, uncovered))
    return result


def series_sup(f: HaarSeries) -> float:
    """sup |f|, read off the region decomposition."""
    return max((abs(value) for value, _ in regions(f)), default=0.0)

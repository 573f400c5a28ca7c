"""
Pointwise products and the Haar coefficients of squares.

For a finite series f and any dyadic K,

    (f^2, h_K) = sum_{I < K} (f, h_I)^2 h_K(I) + 2 (f, h_K) <f>_K,

which is nonzero only on the stored intervals, their ancestors up to each
tree hull, and analytically above the hull. Products of two series follow by
polarization.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

from dyadic_sobolev.core.dyadic import (
    DyadicInterval,
    Tree,
    children,
    common_ancestor,
    contains,
    measure,
    parent,
)
from dyadic_sobolev.core.exceptions import (
    ParameterRangeError,
    VerificationFailure,
)
from dyadic_sobolev.core.haar import (
    DEFAULT_MAX_PIECES,
    HaarAnalysis,
    HaarSeries,
    StepFunction,
    TreeHull,
    analyze,
    average,
    closure_averages,
    haar_amplitude,
    haar_constant_on,
    regions,
    step_piece_count,
    subtree_energy,
    to_step,
    tree_closures,
)
from dyadic_sobolev.core.norms import bmo_norm, hs_norm, hs_seminorm, hs_seminorm_sq_parts
from dyadic_sobolev.core.operators import FractionalParameter
from dyadic_sobolev.schemas.norms import NormReport, TruncationInfo
from dyadic_sobolev.utils.summation import measure_ordered_sum, ordered_sum

logger = logging.getLogger(__name__)


def multiply(
    g1: StepFunction, g2: StepFunction, max_pieces: int = DEFAULT_MAX_PIECES
) -> StepFunction:
    if not g1 or not g2:
        return StepFunction.empty()
    scale = min(g1.base_scale, g2.base_scale)
    left = g1.refined(scale, max_pieces=max_pieces)
    right = g2.refined(scale, max_pieces=max_pieces)
    if len(left) > len(right):
        left, right = right, left
    other = right.pieces
    return StepFunction(
        scale,
        ((index, value * other[index]) for index, value in left.pieces.items() if index in other),
    )


def square_haar_coefficient(f: HaarSeries, interval: DyadicInterval) -> float:
    """(f^2, h_K) summed straight from the stored coefficients."""
    terms = [
        value * value * haar_constant_on(interval, stored)
        for stored, value in f.coefficients.items()
        if stored != interval and contains(interval, stored)
    ]
    own = f.get(interval)
    if own:
        terms.append(2.0 * own * average(f, interval))
    return ordered_sum(terms)


@dataclass(frozen=True)
class ProductDecomposition:
    """The two sums of the square-coefficient formula, per candidate interval."""

    square_series_part: Dict[DyadicInterval, float]
    average_part: Dict[DyadicInterval, float]
    integrals: Dict[Tree, float] = field(default_factory=dict)
    hulls: Dict[Tree, DyadicInterval] = field(default_factory=dict)

    def candidates(self) -> List[DyadicInterval]:
        return sorted(set(self.square_series_part) | set(self.average_part))

    def coefficient(self, interval: DyadicInterval) -> float:
        if interval in self.square_series_part or interval in self.average_part:
            return self.square_series_part.get(interval, 0.0) + self.average_part.get(
                interval, 0.0
            )
        return self.to_analysis().coefficient(interval)

    def to_analysis(self) -> HaarAnalysis:
        series = HaarSeries(
            (k, self.square_series_part.get(k, 0.0) + self.average_part.get(k, 0.0))
            for k in self.candidates()
        )
        hulls = {tree: TreeHull(tree=tree, hull=None) for tree in Tree}
        for tree, hull in self.hulls.items():
            hulls[tree] = TreeHull(tree=tree, hull=hull, integral=self.integrals.get(tree, 0.0))
        return HaarAnalysis(series=series, hulls=hulls)


def square_series_decomposition(f: HaarSeries) -> ProductDecomposition:
    closures = tree_closures(f)
    energy = subtree_energy(f, closures)
    averages = closure_averages(f, closures)
    series_part: Dict[DyadicInterval, float] = {}
    average_part: Dict[DyadicInterval, float] = {}
    for closure in closures.values():
        for interval in closure.nodes:
            left, right = children(interval)
            series_part[interval] = haar_amplitude(interval) * (
                energy.get(right, 0.0) - energy.get(left, 0.0)
            )
            average_part[interval] = 2.0 * f.get(interval) * averages[interval]
    return ProductDecomposition(
        square_series_part=series_part,
        average_part=average_part,
        integrals={tree: energy[c.hull] for tree, c in closures.items()},
        hulls={tree: c.hull for tree, c in closures.items()},
    )


def square_coefficients(f: HaarSeries) -> HaarAnalysis:
    """All in-hull (f^2, h_K) plus the per-tree integrals of f^2."""
    return square_series_decomposition(f).to_analysis()


def _chain(hull: DyadicInterval, top: DyadicInterval) -> Iterator[DyadicInterval]:
    current = hull
    while current != top:
        current = parent(current)
        yield current


def combine_analyses(weighted: List[Tuple[float, HaarAnalysis]]) -> HaarAnalysis:
    """Linear combination of analyses, re-hulled at the common tree hull."""
    hulls: Dict[Tree, TreeHull] = {}
    candidates = set()
    for _, analysis in weighted:
        candidates.update(analysis.series.coefficients)
    for tree in Tree:
        present = [
            a.hulls[tree].hull
            for _, a in weighted
            if tree in a.hulls and a.hulls[tree].hull is not None
        ]
        if not present:
            hulls[tree] = TreeHull(tree=tree, hull=None)
            continue
        top = present[0]
        for hull in present[1:]:
            top = common_ancestor(top, hull)
        for hull in present:
            candidates.update(_chain(hull, top))
        integral = ordered_sum(
            w * a.hulls[tree].integral for w, a in weighted if tree in a.hulls
        )
        hulls[tree] = TreeHull(tree=tree, hull=top, integral=integral)
    series = HaarSeries(
        (k, ordered_sum(w * a.coefficient(k) for w, a in weighted)) for k in candidates
    )
    return HaarAnalysis(series=series, hulls=hulls)


def product_coefficients(f: HaarSeries, g: HaarSeries) -> HaarAnalysis:
    """Coefficients of f*g as ((f+g)^2 - f^2 - g^2) / 2."""
    return combine_analyses(
        [
            (0.5, square_coefficients(f + g)),
            (-0.5, square_coefficients(f)),
            (-0.5, square_coefficients(g)),
        ]
    )


def compare_analyses(
    primary: HaarAnalysis, other: HaarAnalysis, tolerance: float
) -> float:
    """Largest scaled coefficient disagreement; raises past the tolerance."""
    keys = set(primary.series.coefficients) | set(other.series.coefficients)
    worst = 0.0
    for key in keys:
        a, b = primary.coefficient(key), other.coefficient(key)
        gap = abs(a - b) / (1.0 + abs(a))
        worst = max(worst, gap)
        if gap > tolerance:
            raise VerificationFailure(
                message=f"Square coefficient routes disagree at {key.to_text()}",
                details={"interval": key.to_dict(), "coefficient": a, "step_route": b},
            )
    return worst


def square_norm_report(f: HaarSeries, s: float, analysis: Optional[HaarAnalysis] = None) -> NormReport:
    """NormReport of f^2 without building a step function."""
    parameter = FractionalParameter(s)
    analysis = analysis if analysis is not None else square_coefficients(f)
    finite_part, tail = hs_seminorm_sq_parts(analysis, s)
    pairs = regions(f)
    l2 = math.sqrt(ordered_sum(v**4 * m for v, m in pairs))
    seminorm_sq = finite_part + tail
    q = parameter.q if parameter.subcritical else None
    lq = None
    if q is not None:
        lq = ordered_sum(abs(v) ** (2.0 * q) * m for v, m in pairs) ** (1.0 / q) if pairs else 0.0
    return NormReport(
        s=s,
        l2=l2,
        hs_seminorm=math.sqrt(seminorm_sq),
        hs_norm=math.sqrt(l2 * l2 + seminorm_sq),
        linf=max((v * v for v, _ in pairs), default=0.0),
        lq=lq,
        q=q,
        bmo=bmo_norm(analysis),
        truncation=TruncationInfo(
            route="square",
            finite_part=finite_part,
            tail_closed_form=tail,
            hulls=[h.hull.to_text() for h in analysis.hulls.values() if h.hull is not None],
        ),
    )


def analyze_product(
    g1: StepFunction, g2: StepFunction, max_pieces: int = DEFAULT_MAX_PIECES
) -> HaarAnalysis:
    """Haar analysis of the dense product, the reference route for product coefficients."""
    return analyze(multiply(g1, g2, max_pieces=max_pieces))


def square_hs_norm(
    f: HaarSeries,
    s: float,
    max_pieces: int = DEFAULT_MAX_PIECES,
    tolerance: float = 1e-10,
) -> Tuple[float, NormReport]:
    """|f^2|^2_Hs from coefficient space, cross-checked on the dense product when it fits."""
    analysis = square_coefficients(f)
    report = square_norm_report(f, s, analysis)
    needed = step_piece_count(f)
    if f and needed <= max_pieces:
        step = to_step(f, max_pieces=max_pieces)
        product = analyze_product(step, step, max_pieces)
        worst = compare_analyses(analysis, product, tolerance)
        logger.debug(f"Step route cross-check on {len(step)} pieces, worst gap {worst:.3e}")
    elif f:
        logger.debug(f"Step route skipped: {needed} pieces exceed budget {max_pieces}")
    return report.hs_norm**2, report


def _hs_weight(interval: DyadicInterval, s: float) -> float:
    return 2.0 ** (-2.0 * s * interval.scale)


def local_square_estimate(
    f: HaarSeries, s: float, interval: DyadicInterval
) -> Tuple[float, float]:
    """(sum_{J in I} |J|^-2s (f^2,h_J)^2, |I|^(2s-1) |f|^2_Hs sum_{J in I} |J|^-2s (f,h_J)^2)"""
    FractionalParameter(s)
    if not s > 0.5:
        raise ParameterRangeError("1/2 < s < 1", details={"s": s})
    if not f:
        return 0.0, 0.0
    analysis = square_coefficients(f)
    inside = [k for k in analysis.series.coefficients if contains(interval, k)]
    tree_hull = analysis.hulls.get(interval.tree)
    if tree_hull is not None and tree_hull.hull is not None:
        hull = tree_hull.hull
        if hull != interval and contains(interval, hull):
            inside.extend(_chain(hull, interval))
    lhs = measure_ordered_sum(
        (k.scale, _hs_weight(k, s) * analysis.coefficient(k) ** 2) for k in set(inside)
    )
    local_energy = measure_ordered_sum(
        (k.scale, _hs_weight(k, s) * v * v) for k, v in f.coefficients.items() if contains(interval, k)
    )
    rhs_factor = measure(interval) ** (2.0 * s - 1.0) * hs_seminorm(f, s) ** 2 * local_energy
    return lhs, rhs_factor


def high_reg_bound_ratio(f: HaarSeries, s: float) -> float:
    """|f^2|_Hs / |f|^2_Hs"""
    if not f:
        raise ParameterRangeError("f ≠ 0")
    square_norm_sq, _ = square_hs_norm(f, s, max_pieces=0)
    return math.sqrt(square_norm_sq) / hs_norm(f, s) ** 2


def square_integral(f: HaarSeries) -> float:
    """int f^2 dx from the region decomposition."""
    return ordered_sum(v * v * m for v, m in regions(f))

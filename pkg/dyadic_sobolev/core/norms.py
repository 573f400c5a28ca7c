"""
L^2, Hs, L^q, L^infinity and dyadic BMO norms.

Haar series are measured in coefficient space or through their region
decomposition; step functions go through `analyze`, with the Haar
coefficients above each tree hull summed in closed form.
"""

import logging
import math
from typing import Mapping, Optional, Tuple, Union

import numpy as np

from dyadic_sobolev.core.dyadic import DyadicInterval, Tree, measure
from dyadic_sobolev.core.exceptions import ParameterRangeError, VerificationFailure
from dyadic_sobolev.core.haar import (
    HaarAnalysis,
    HaarSeries,
    StepFunction,
    TreeHull,
    analyze,
    regions,
    series_sup,
    subtree_energy,
    tree_closures,
)
from dyadic_sobolev.core.operators import FractionalParameter
from dyadic_sobolev.schemas.norms import NormReport, TruncationInfo
from dyadic_sobolev.utils.summation import geometric_tail, measure_ordered_sum, ordered_sum

logger = logging.getLogger(__name__)

Function = Union[HaarSeries, StepFunction]


def _weighted_energy(f: HaarSeries, s: float) -> float:
    return measure_ordered_sum(
        (i.scale, 2.0 ** (-2.0 * s * i.scale) * v * v) for i, v in f.coefficients.items()
    )


def l2_norm(f: Function) -> float:
    if isinstance(f, HaarSeries):
        return math.sqrt(measure_ordered_sum((i.scale, v * v) for i, v in f.coefficients.items()))
    return math.sqrt(ordered_sum(v * v for v in f.pieces.values()) * f.piece_measure)


def hs_seminorm(f: HaarSeries, s: float) -> float:
    FractionalParameter(s)
    return math.sqrt(_weighted_energy(f, s))


def hs_norm(f: HaarSeries, s: float) -> float:
    return math.hypot(l2_norm(f), hs_seminorm(f, s))


def ancestor_tail_closed(hull: DyadicInterval, s: float, integral: float = 1.0) -> float:
    """M^2 sum_{j>=1} |ancestor(H, j)|^(-2s-1) in closed form."""
    exponent = 2.0 * s + 1.0
    ratio = 2.0**-exponent
    return geometric_tail(integral * integral * measure(hull) ** -exponent * ratio, ratio)


def ancestor_tail_sum(
    hull: DyadicInterval, s: float, depth: int, integral: float = 1.0
) -> float:
    """The same ancestor sum cut after `depth` generations, term by term."""
    exponent = 2.0 * s + 1.0
    return integral * integral * ordered_sum(
        math.ldexp(1.0, hull.scale + j) ** -exponent for j in range(1, depth + 1)
    )


def hs_seminorm_sq_parts(
    analysis: HaarAnalysis, s: float, depth: Optional[int] = None
) -> Tuple[float, float]:
    """(in-hull part, closed-form part above the hulls) of the squared Hs seminorm."""
    FractionalParameter(s)
    finite_part = _weighted_energy(analysis.series, s)
    tail = 0.0
    for tree_hull in analysis.hulls.values():
        if tree_hull.hull is None or tree_hull.integral == 0.0:
            continue
        closed = ancestor_tail_closed(tree_hull.hull, s, tree_hull.integral)
        if depth is not None:
            _check_tail(tree_hull, s, depth, closed)
        tail += closed
    return finite_part, tail


def _check_tail(tree_hull: TreeHull, s: float, depth: int, closed: float) -> None:
    brute = ancestor_tail_sum(tree_hull.hull, s, depth, tree_hull.integral)
    ratio = 2.0 ** -(2.0 * s + 1.0)
    remainder = closed * ratio**depth
    logger.debug(
        f"Ancestor tail {tree_hull.tree.value}: closed={closed!r} brute={brute!r} depth={depth}"
    )
    if abs(closed - brute - remainder) > 1e-12 * closed:
        raise VerificationFailure(
            message="Ancestor tail closed form disagrees with the truncated sum",
            details={"closed": closed, "brute": brute, "depth": depth},
        )


def hs_seminorm_sq_of_step(
    g: StepFunction, s: float, depth: Optional[int] = None
) -> Tuple[float, float]:
    return hs_seminorm_sq_parts(analyze(g), s, depth)


def truncated_hs_bound(f: HaarSeries, s: float) -> Tuple[bool, bool]:
    """Check 1/2 |f|^2_Hs <= |f|^2_L2 + sum_{|I|<1} |I|^-2s (f,h_I)^2 <= |f|^2_Hs."""
    half, middle, full = norm_equivalence_terms(f, s)
    slack = 1e-12 * full
    return half <= middle + slack, middle <= full + slack


def norm_equivalence_terms(f: HaarSeries, s: float) -> Tuple[float, float, float]:
    FractionalParameter(s)
    l2_sq = l2_norm(f) ** 2
    small = HaarSeries((i, v) for i, v in f.coefficients.items() if i.scale < 0)
    full = l2_sq + _weighted_energy(f, s)
    return 0.5 * full, l2_sq + _weighted_energy(small, s), full


def lq_exponent(s: float) -> float:
    return FractionalParameter(s).q


def _values_and_measures(g: Function) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(g, HaarSeries):
        pairs = regions(g)
        values = np.array([v for v, _ in pairs], dtype=float)
        weights = np.array([m for _, m in pairs], dtype=float)
        return values, weights
    values = np.array(list(g.pieces.values()), dtype=float)
    return values, np.full(values.shape, g.piece_measure)


def lq_norm(g: Function, q: float) -> float:
    if not q >= 1.0:
        raise ParameterRangeError("q ≥ 1", details={"q": q})
    values, weights = _values_and_measures(g)
    if values.size == 0:
        return 0.0
    return math.fsum(np.abs(values) ** q * weights) ** (1.0 / q)


def linf_norm(g: Function) -> float:
    if isinstance(g, HaarSeries):
        return series_sup(g)
    return max((abs(v) for v in g.pieces.values()), default=0.0)


def _above_hull_bmo_sq(hull: TreeHull, inside_energy: float) -> float:
    """Largest (1/|A|) sum_{J in A} (g, h_J)^2 over the strict ancestors A of a tree hull.

    The j-th ancestor adds M^2 / (|H| 2^j), so with x = 2^-j the quotient is
    (a + b (1 - x)) x, a = E_H/|H|, b = M^2/|H|^2. Its vertex sits at x >= 1/2,
    so the parent of the hull attains the sup.
    """
    if hull.hull is None or hull.integral == 0.0:
        return 0.0
    size = measure(hull.hull)
    a = inside_energy / size
    b = hull.integral * hull.integral / (size * size)
    return 0.5 * (a + 0.5 * b)


def bmo_norm(f: Union[HaarSeries, HaarAnalysis]) -> float:
    """sup_I ((1/|I|) sum_{J in I} (f, h_J)^2)^(1/2) over stored intervals and ancestors.

    An analysis also carries analytic coefficients above each tree hull.
    """
    series = f.series if isinstance(f, HaarAnalysis) else f
    energy = subtree_energy(series)
    best = 0.0
    for interval, total in energy.items():
        best = max(best, total / measure(interval))
    if isinstance(f, HaarAnalysis):
        by_tree = series.by_tree()
        for tree, hull in f.hulls.items():
            inside = ordered_sum(v * v for v in by_tree.get(tree, {}).values())
            best = max(best, _above_hull_bmo_sq(hull, inside))
    return math.sqrt(best)


def _hull_labels(hulls: Mapping[Tree, TreeHull]) -> list:
    return [h.hull.to_text() for h in hulls.values() if h.hull is not None]


def norm_report(f: Function, s: float, depth: Optional[int] = None) -> NormReport:
    parameter = FractionalParameter(s)
    q = parameter.q if parameter.subcritical else None
    if isinstance(f, HaarSeries):
        l2 = l2_norm(f)
        seminorm_sq = _weighted_energy(f, s)
        truncation = TruncationInfo(
            route="haar",
            depth=depth,
            finite_part=seminorm_sq,
            tail_closed_form=0.0,
            hulls=[c.hull.to_text() for c in tree_closures(f).values()],
        )
        bmo = bmo_norm(f)
    else:
        analysis = analyze(f)
        l2 = l2_norm(f)
        finite_part, tail = hs_seminorm_sq_parts(analysis, s, depth)
        seminorm_sq = finite_part + tail
        truncation = TruncationInfo(
            route="step",
            depth=depth,
            finite_part=finite_part,
            tail_closed_form=tail,
            hulls=_hull_labels(analysis.hulls),
        )
        bmo = bmo_norm(analysis)
    seminorm = math.sqrt(seminorm_sq)
    return NormReport(
        s=s,
        l2=l2,
        hs_seminorm=seminorm,
        hs_norm=math.sqrt(l2 * l2 + seminorm_sq),
        linf=linf_norm(f),
        lq=lq_norm(f, q) if q is not None else None,
        q=q,
        bmo=bmo,
        truncation=truncation,
    )

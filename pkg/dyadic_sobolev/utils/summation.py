import math
from typing import Iterable, Tuple


def ordered_sum(values: Iterable[float]) -> float:
    """Correctly rounded sum, independent of the order of the terms."""
    return math.fsum(values)


def measure_ordered_sum(terms: Iterable[Tuple[int, float]]) -> float:
    """Sum (scale, value) terms from the smallest interval measure up."""
    return math.fsum(value for _, value in sorted(terms, key=lambda term: term[0]))


def geometric_tail(first: float, ratio: float) -> float:
    """first + first*ratio + first*ratio^2 + ... for 0 <= ratio < 1."""
    if not 0.0 <= ratio < 1.0:
        raise ValueError(f"ratio must lie in [0, 1), got {ratio}")
    return first / (1.0 - ratio)

"""Seeded random Haar series for ensemble runs."""

from typing import Dict, List

import numpy as np

from dyadic_sobolev.core.dyadic import DyadicInterval, children
from dyadic_sobolev.core.haar import HaarSeries
from dyadic_sobolev.schemas.embedding import CoefficientDistribution, EnsembleSpec


def _random_interval(rng: np.random.Generator, spec: EnsembleSpec) -> DyadicInterval:
    """Interval of random scale whose support stays inside [n_lo, n_hi + 1) when it can."""
    k_lo, k_hi = spec.scale_range
    n_lo, n_hi = spec.index_range
    scale = int(rng.integers(k_lo, k_hi + 1))
    if scale <= 0:
        per_unit = 1 << -scale
        index = int(rng.integers(n_lo * per_unit, (n_hi + 1) * per_unit))
    else:
        index = int(rng.integers(n_lo >> scale, (n_hi >> scale) + 1))
    return DyadicInterval(scale, index)


def _uniform(rng: np.random.Generator, spec: EnsembleSpec) -> HaarSeries:
    coefficients: Dict[DyadicInterval, float] = {}
    for _ in range(spec.sparsity):
        coefficients[_random_interval(rng, spec)] = float(rng.uniform(-1.0, 1.0))
    return HaarSeries(coefficients)


def _lacunary(rng: np.random.Generator, spec: EnsembleSpec) -> HaarSeries:
    interval = _random_interval(rng, spec)
    coefficients: Dict[DyadicInterval, float] = {}
    for _ in range(spec.sparsity):
        coefficients[interval] = float(rng.uniform(-1.0, 1.0))
        _, interval = children(interval)
    return HaarSeries(coefficients)


def _single(rng: np.random.Generator, spec: EnsembleSpec) -> HaarSeries:
    return HaarSeries([(_random_interval(rng, spec), 1.0)])


_BUILDERS = {
    CoefficientDistribution.UNIFORM: _uniform,
    CoefficientDistribution.LACUNARY: _lacunary,
    CoefficientDistribution.SINGLE: _single,
}


def generate_ensemble(spec: EnsembleSpec) -> List[HaarSeries]:
    """Identical specs give identical ensembles."""
    rng = np.random.default_rng(spec.seed)
    build = _BUILDERS[spec.distribution]
    return [build(rng, spec) for _ in range(spec.count)]

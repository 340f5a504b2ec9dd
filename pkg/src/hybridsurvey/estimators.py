"""Population-mean estimators for single- and dual-annotator sample sets.

All estimators are plain functions over Python floats. None of them clamp:
an estimate slightly outside [0, 1] is information about sampling noise,
and clamping is left to presentation layers that explicitly ask for it.
"""

from __future__ import annotations

import math
from typing import Sequence

from .types import PairedSampleSet

__all__ = [
    "conventional_mean",
    "offset_mean",
    "ratio_mean",
    "auxiliary_mean",
    "aggregate_points",
]


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


def conventional_mean(values: Sequence[float]) -> float:
    """Sample mean of primary annotations."""
    if len(values) == 0:
        raise ValueError("no samples")
    return _mean(values)


def auxiliary_mean(values: Sequence[float]) -> float:
    """Sample mean of auxiliary annotations, systematic error and all."""
    if len(values) == 0:
        raise ValueError("no samples")
    return _mean(values)


def offset_mean(samples: PairedSampleSet) -> float:
    """Auxiliary mean minus the bias estimated on the paired prefix.

    The prefix carries both annotations, so the per-sample differences
    aux - primary estimate the auxiliary annotator's systematic offset;
    subtracting it from the full auxiliary mean is design-unbiased no
    matter how the auxiliary error correlates with the true values. With
    n_a = n_b the auxiliary terms cancel exactly and the estimate equals
    the conventional mean of the primary values.
    """
    n_a, n_b = samples.n_a, samples.n_b
    if n_b == 0:
        raise ValueError("no samples")
    if n_a == 0:
        raise ValueError("offset estimator requires paired samples")
    aux_all = _mean(samples.aux_values)
    aux_paired = _mean(samples.aux_values[:n_a])
    # Grouped so the aux means cancel bit-for-bit when n_a == n_b, making
    # the full-pairing collapse exact rather than within rounding.
    return _mean(samples.primary_values) + (aux_all - aux_paired)


def ratio_mean(samples: PairedSampleSet) -> float:
    """Auxiliary mean rescaled by the primary/auxiliary ratio on the prefix.

    The ratio defaults to 1 when either prefix sum is zero; there is no
    information about scale in an all-zero prefix, and 1 leaves the
    auxiliary mean untouched.
    """
    n_a, n_b = samples.n_a, samples.n_b
    if n_b == 0:
        raise ValueError("no samples")
    if n_a == 0:
        raise ValueError("ratio estimator requires paired samples")
    primary_sum = math.fsum(samples.primary_values)
    aux_prefix_sum = math.fsum(samples.aux_values[:n_a])
    if primary_sum == 0.0 or aux_prefix_sum == 0.0:
        ratio = 1.0
    else:
        ratio = primary_sum / aux_prefix_sum
    return ratio * _mean(samples.aux_values)


def aggregate_points(labels: Sequence[float]) -> float:
    """Fraction of positive point labels within one sample.

    Point-count annotation reduces a sample to s binary point labels; the
    sample's value is their mean. Labels must be exactly 0 or 1.
    """
    if len(labels) == 0:
        raise ValueError("no point labels")
    total = 0.0
    for i, label in enumerate(labels):
        if label not in (0.0, 1.0):
            raise ValueError(f"point label at index {i} is not binary: {label!r}")
        total += label
    return total / len(labels)

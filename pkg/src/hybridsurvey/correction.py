"""Confusion-matrix bias correction for binary auxiliary annotators.

A binary annotator with sensitivity alpha and specificity beta reports 1
for a true positive with probability alpha and 0 for a true negative with
probability beta. Inverting that channel turns raw auxiliary label means
into unbiased abundance estimates, at the price of extra variance and of
assuming the matrix itself is known (or estimated from paired data).

Corrections refuse to run when alpha + beta - 1 < 1e-6: dividing by a
near-zero invertibility margin manufactures garbage, and regularizing it
would hide that from the caller.

The closed-form quantities here (correction variance, cost threshold) are
evaluated in exact rational arithmetic on the decimal reading of their
inputs, so textbook constants come out exact rather than a few ULP off.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .estimators import auxiliary_mean
from .planning import round_half_up, total_sampling_cost
from .types import (
    ConfusionMatrix,
    Design,
    DesignError,
    PairedSampleSet,
    PlanningInputs,
    PrecisionTarget,
    SamplingPlan,
    TwoStageConfig,
)

__all__ = [
    "MIN_INVERTIBILITY",
    "abundance_correct",
    "bias_corrected_mean",
    "correction_variance",
    "auxiliary_sample_size",
    "auxiliary_plan",
    "auxiliary_cost_threshold",
    "two_stage_variance",
    "two_stage_sample_size",
    "estimate_confusion",
    "hybrid_bias_corrected_mean",
]

MIN_INVERTIBILITY = 1e-6


def _require_invertible(cm: ConfusionMatrix) -> None:
    margin = cm.alpha + cm.beta - 1.0
    if margin < MIN_INVERTIBILITY:
        raise DesignError(
            f"confusion matrix not invertible: alpha + beta - 1 = {margin:.3g} "
            f"< {MIN_INVERTIBILITY}"
        )


def _frac(x: float) -> Fraction:
    # str() gives the shortest decimal that round-trips, so decimal inputs
    # like 0.9 become exactly 9/10 instead of their binary neighbors.
    return Fraction(str(float(x)))


def abundance_correct(value: float, cm: ConfusionMatrix) -> float:
    """Invert the annotator channel on a single value in [0, 1].

    The output is a real number and may step outside [0, 1]; that is the
    corrected estimate's honest location, not an error.
    """
    if not 0.0 <= value <= 1.0:
        raise DesignError(f"value to correct must lie in [0, 1], got {value}")
    _require_invertible(cm)
    return (value + cm.beta - 1.0) / (cm.alpha + cm.beta - 1.0)


def bias_corrected_mean(values: Sequence[float], cm: ConfusionMatrix) -> float:
    """Mean of auxiliary values, channel-inverted.

    Correction is affine, so correcting the mean equals the mean of the
    corrected values; this computes the former.
    """
    return abundance_correct(auxiliary_mean(values), cm)


def correction_variance(mu_p: Optional[float], cm: ConfusionMatrix) -> float:
    """Variance added by channel inversion at abundance mu_p.

    With alpha = beta the expression collapses to
    alpha*(1-alpha)/(2*alpha-1)^2 and mu_p drops out entirely; mu_p may be
    omitted (None) exactly in that case.
    """
    _require_invertible(cm)
    alpha, beta = _frac(cm.alpha), _frac(cm.beta)
    if mu_p is None:
        if cm.alpha != cm.beta:
            raise DesignError(
                "mu_p is required unless alpha == beta (only then is the "
                "correction variance abundance-free)"
            )
        mu = Fraction(1, 2)
    else:
        if not 0.0 <= mu_p <= 1.0:
            raise DesignError(f"mu_p must lie in [0, 1], got {mu_p}")
        mu = _frac(mu_p)
    numerator = mu * alpha * (1 - alpha) + (1 - mu) * (1 - beta) * beta
    return float(numerator / (alpha + beta - 1) ** 2)


def _check_binary_ack(binary_values: bool, op: str) -> None:
    if not binary_values:
        raise DesignError(
            f"{op} is derived for binary-valued populations; pass "
            "binary_values=True to acknowledge that assumption"
        )


def auxiliary_sample_size(
    inputs: PlanningInputs,
    cm: ConfusionMatrix,
    *,
    binary_values: bool = False,
) -> int:
    """Auxiliary-only sample count meeting the precision target after correction."""
    _check_binary_ack(binary_values, "auxiliary_sample_size")
    sigma_s2 = correction_variance(inputs.population.mu_p, cm)
    raw = (sigma_s2 + inputs.sigma_p ** 2) / inputs.target.variance_ceiling
    return max(1, round_half_up(raw))


def auxiliary_plan(
    inputs: PlanningInputs,
    cm: ConfusionMatrix,
    *,
    binary_values: bool = False,
) -> SamplingPlan:
    """Bias-corrected auxiliary-only design meeting the precision target."""
    n_b = auxiliary_sample_size(inputs, cm, binary_values=binary_values)
    sigma_s2 = correction_variance(inputs.population.mu_p, cm)
    return SamplingPlan(
        design=Design.AUXILIARY_BIAS_CORRECTED,
        n_a=0,
        n_b=n_b,
        predicted_variance=(sigma_s2 + inputs.sigma_p ** 2) / n_b,
        tsc=total_sampling_cost(0, n_b, inputs.costs),
    )


def auxiliary_cost_threshold(
    inputs: PlanningInputs,
    cm: ConfusionMatrix,
    *,
    binary_values: bool = False,
) -> float:
    """Cost ratio k' above which the corrected auxiliary design is cheaper.

    Compares against k' = (c_c + c_a) / (c_c + c_b): the auxiliary design
    wins once a conventional sample costs more than this many auxiliary
    samples.
    """
    _check_binary_ack(binary_values, "auxiliary_cost_threshold")
    _require_invertible(cm)
    alpha, beta = _frac(cm.alpha), _frac(cm.beta)
    if inputs.population.mu_p is None:
        if cm.alpha != cm.beta:
            raise DesignError("mu_p is required unless alpha == beta")
        mu = Fraction(1, 2)
    else:
        mu = _frac(inputs.population.mu_p)
    sigma_s2 = (mu * alpha * (1 - alpha) + (1 - mu) * (1 - beta) * beta) / (
        alpha + beta - 1
    ) ** 2
    sp2 = _frac(inputs.sigma_p) ** 2
    sa2 = _frac(inputs.sigma_a) ** 2
    if sp2 + sa2 == 0:
        raise DesignError("threshold undefined: sigma_p and sigma_a are both zero")
    return float((sp2 + sigma_s2) / (sp2 + sa2))


def two_stage_variance(
    mu_p: float,
    sigma_p: float,
    cfg: TwoStageConfig,
    n_b: float,
) -> float:
    """Variance of the corrected mean when each sample is s point labels.

    Point subsampling adds a within-sample binomial term on top of the
    correction variance; both shrink as 1/s while the population term
    sigma_p^2 does not.
    """
    if not 0.0 <= mu_p <= 1.0:
        raise DesignError(f"mu_p must lie in [0, 1], got {mu_p}")
    if sigma_p < 0:
        raise DesignError(f"sigma_p must be nonnegative, got {sigma_p}")
    if n_b <= 0:
        raise DesignError(f"n_b must be positive, got {n_b}")
    sigma_s2 = correction_variance(mu_p, cfg.confusion)
    within = (sigma_s2 + mu_p * (1.0 - mu_p)) / cfg.points_per_sample
    return (within + sigma_p ** 2) / n_b


def two_stage_sample_size(
    mu_p: float,
    sigma_p: float,
    cfg: TwoStageConfig,
    target: PrecisionTarget,
) -> int:
    """Samples needed to hit the target given s point labels per sample."""
    per_sample = two_stage_variance(mu_p, sigma_p, cfg, 1.0)
    return max(1, round_half_up(per_sample / target.variance_ceiling))


def estimate_confusion(
    paired_binary: Iterable[tuple[float, float]],
) -> ConfusionMatrix:
    """Estimate (alpha, beta) from (primary, aux) binary label pairs.

    Sensitivity is the aux hit rate among primary positives, specificity
    the aux miss rate among primary negatives. Either class being absent
    leaves the corresponding rate undefined and raises. The estimate is
    not guaranteed invertible; callers must check before correcting.
    """
    positives = negatives = 0
    hits = rejections = 0
    for i, (primary, aux) in enumerate(paired_binary):
        if primary not in (0.0, 1.0):
            raise DesignError(f"primary label at index {i} is not binary: {primary!r}")
        if aux not in (0.0, 1.0):
            raise DesignError(f"aux label at index {i} is not binary: {aux!r}")
        if primary == 1.0:
            positives += 1
            hits += int(aux == 1.0)
        else:
            negatives += 1
            rejections += int(aux == 0.0)
    if positives == 0:
        raise DesignError("cannot estimate sensitivity: no positive primary labels")
    if negatives == 0:
        raise DesignError("cannot estimate specificity: no negative primary labels")
    return ConfusionMatrix(alpha=hits / positives, beta=rejections / negatives)


def hybrid_bias_corrected_mean(
    samples: PairedSampleSet,
    cm: ConfusionMatrix,
) -> float:
    """Primary prefix plus channel-inverted auxiliary tail, averaged over n_b.

    The hybrid counterpart of bias_corrected_mean: samples with a primary
    annotation contribute it directly, the rest contribute their corrected
    auxiliary label. All values must be binary except the corrected output.
    Unlike the offset estimator this is biased when the matrix itself was
    estimated from the same prefix.
    """
    n_a, n_b = samples.n_a, samples.n_b
    if n_b == 0:
        raise ValueError("no samples")
    if n_a == 0:
        raise ValueError("hybrid bias-corrected estimator requires paired samples")
    for name, values in (
        ("primary", samples.primary_values),
        ("aux", samples.aux_values),
    ):
        for i, v in enumerate(values):
            if v not in (0.0, 1.0):
                raise DesignError(f"{name} value at index {i} is not binary: {v!r}")
    _require_invertible(cm)
    denom = cm.alpha + cm.beta - 1.0
    tail = samples.aux_values[n_a:]
    corrected_tail = math.fsum((v + cm.beta - 1.0) / denom for v in tail)
    return (math.fsum(samples.primary_values) + corrected_tail) / n_b

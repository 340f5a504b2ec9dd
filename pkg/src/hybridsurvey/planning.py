"""Sample-size planning for conventional, hybrid and budget-capped designs.

The planner answers two questions. Forward: given a precision target
(CI half-width d at confidence 1 - delta), how many samples must be
collected (n_b) and primary-annotated (n_a) to meet it at minimum total
sampling cost? Inverse: given a budget, which (n_a, n_b) allocation
minimizes the offset estimator's variance?

Real-valued optima are computed in closed form and then rounded: n_b and
n_a half-up, followed by a repair step that increments n_a until the
predicted variance actually meets the target (rounding down by half a
sample can otherwise leave the plan a hair short of the target). The
conventional size rounds up, since there is no second knob to repair with.
"""

from __future__ import annotations

import math
from dataclasses import replace
from typing import Optional

from .types import (
    ConfusionMatrix,
    CostModel,
    Design,
    DesignError,
    InfeasibleDesignError,
    PlanningInputs,
    SamplingPlan,
)

__all__ = [
    "round_half_up",
    "conventional_sample_size",
    "conventional_variance",
    "offset_variance",
    "required_primary_size",
    "total_sampling_cost",
    "optimal_offset_plan",
    "conventional_plan",
    "relative_cost_threshold",
    "plan_from_budget",
    "conventional_plan_from_budget",
    "auxiliary_size_from_budget",
    "compare_designs",
    "tradeoff_curve",
    "cost_gap_curve",
]

# Relative slack for float comparisons against the variance ceiling; keeps
# exact boundary solutions from tripping the repair loop.
_REL_EPS = 1e-12


def round_half_up(x: float) -> int:
    """Round to the nearest integer, ties away from zero for positive x."""
    return int(math.floor(x + 0.5))


def _ceil_with_slack(x: float) -> int:
    """Ceiling that forgives ~1e-9 of float fuzz above an exact integer."""
    return int(math.ceil(x - 1e-9))


def conventional_sample_size(inputs: PlanningInputs) -> int:
    """Primary annotations needed to hit the target without any auxiliary help.

    Rounded up (never down: there is no repair knob), floor of one sample.
    """
    raw = (inputs.sigma_p ** 2 + inputs.sigma_a ** 2) / inputs.target.variance_ceiling
    return max(1, _ceil_with_slack(raw))


def conventional_variance(n_a: float, inputs: PlanningInputs) -> float:
    """Variance of the conventional mean over n_a primary-annotated samples."""
    if n_a <= 0:
        raise DesignError(f"n_a must be positive, got {n_a}")
    return (inputs.sigma_p ** 2 + inputs.sigma_a ** 2) / n_a


def offset_variance(n_a: float, n_b: float, inputs: PlanningInputs) -> float:
    """Variance of the offset estimator at sizes (n_a, n_b).

    Any correlation between auxiliary error and true values cancels out of
    this expression, so it needs only the three marginal SDs.
    """
    if n_a <= 0 or n_b < n_a:
        raise DesignError(f"offset design requires n_b >= n_a > 0, got ({n_a}, {n_b})")
    sp2 = inputs.sigma_p ** 2
    sb2 = inputs.sigma_b ** 2
    sa2 = inputs.sigma_a ** 2
    return (sp2 - sb2) / n_b + (sa2 + sb2) / n_a


def required_primary_size(n_b: float, inputs: PlanningInputs) -> float:
    """Real-valued n_a that meets the precision target given n_b collected.

    This is the trade-off curve between the two sample sizes: at
    n_b equal to the conventional size it returns that same size, and it
    decreases toward an asymptote as n_b grows.
    """
    if n_b <= 0:
        raise DesignError(f"n_b must be positive, got {n_b}")
    sp2 = inputs.sigma_p ** 2
    sb2 = inputs.sigma_b ** 2
    denom = inputs.target.variance_ceiling - (sp2 - sb2) / n_b
    if denom <= 0:
        raise DesignError("n_b too small for target precision")
    return (inputs.sigma_b ** 2 + inputs.sigma_a ** 2) / denom


def total_sampling_cost(n_a: float, n_b: float, costs: CostModel) -> float:
    """Collection plus annotation cost of a design with sizes (n_a, n_b)."""
    if n_a < 0 or n_b < 0:
        raise DesignError("sample sizes cannot be negative")
    return costs.c_a * n_a + costs.c_b * n_b + max(n_a, n_b) * costs.c_c


def conventional_plan(inputs: PlanningInputs) -> SamplingPlan:
    """Smallest conventional design meeting the precision target."""
    n_a = conventional_sample_size(inputs)
    return SamplingPlan(
        design=Design.CONVENTIONAL,
        n_a=n_a,
        n_b=0,
        predicted_variance=conventional_variance(n_a, inputs),
        tsc=total_sampling_cost(n_a, 0, inputs.costs),
    )


def relative_cost_threshold(inputs: PlanningInputs) -> float:
    """Cost ratio above which the hybrid offset design is strictly cheaper.

    Compares against k = c_a / (c_c + c_b). Derived for c_b = 0; a warning
    is emitted otherwise because the threshold is only exact in that case.
    """
    sp2 = inputs.sigma_p ** 2
    sb2 = inputs.sigma_b ** 2
    if sb2 >= sp2:
        raise DesignError("threshold undefined: requires sigma_b < sigma_p")
    if inputs.costs.c_b != 0:
        import warnings

        warnings.warn(
            "the cost threshold is exact only for c_b = 0; interpret with care",
            stacklevel=2,
        )
    return (inputs.sigma_a ** 2 + sb2) / (sp2 - sb2)


def _hybrid_plan(n_a: int, n_b: int, inputs: PlanningInputs) -> SamplingPlan:
    return SamplingPlan(
        design=Design.HYBRID_OFFSET,
        n_a=n_a,
        n_b=n_b,
        predicted_variance=offset_variance(n_a, n_b, inputs),
        tsc=total_sampling_cost(n_a, n_b, inputs.costs),
    )


def optimal_offset_plan(inputs: PlanningInputs) -> SamplingPlan:
    """Cheapest offset design meeting the precision target.

    Falls back to the conventional plan when the auxiliary annotator is at
    least as noisy as the population itself (it can never help then), and
    collapses to annotate-everything when primary annotation is too cheap
    relative to collection for subsampling to pay off.
    """
    sp2 = inputs.sigma_p ** 2
    sa2 = inputs.sigma_a ** 2
    sb2 = inputs.sigma_b ** 2
    ceiling = inputs.target.variance_ceiling
    if sb2 >= sp2:
        return conventional_plan(inputs)
    na_star_raw = (sp2 + sa2) / ceiling
    if sa2 + sb2 == 0.0:
        # Noise-free annotators: one pair pins the auxiliary offset exactly
        # and collection alone drives the variance.
        n_b = max(1, _ceil_with_slack(sp2 / ceiling))
        return _hybrid_plan(1, n_b, inputs)
    nb_raw = (sp2 - sb2 + math.sqrt(inputs.k * (sb2 + sa2) * (sp2 - sb2))) / ceiling
    if nb_raw <= na_star_raw:
        # Optimum sits on the n_b = n_a boundary: annotate every sample,
        # same size (and, at c_b = 0, same cost) as the conventional plan.
        n = conventional_sample_size(inputs)
        return _hybrid_plan(n, n, inputs)
    n_b = max(1, round_half_up(nb_raw))
    while True:
        denom = ceiling - (sp2 - sb2) / n_b
        if denom <= 0:
            n_b += 1
            continue
        n_a = max(1, round_half_up((sb2 + sa2) / denom))
        if n_a > n_b:
            n_b += 1
            continue
        while (
            n_a < n_b
            and offset_variance(n_a, n_b, inputs) > ceiling * (1 + _REL_EPS)
        ):
            n_a += 1
        if offset_variance(n_a, n_b, inputs) <= ceiling * (1 + _REL_EPS):
            return _hybrid_plan(n_a, n_b, inputs)
        n_b += 1


def plan_from_budget(budget: float, inputs: PlanningInputs) -> SamplingPlan:
    """Variance-minimizing offset design whose total cost fits the budget.

    The continuous optimum splits the budget in closed form; integer sizes
    are found by flooring it and scanning the nearby lattice (plus the
    n_a = 1 corner) for the lowest-variance affordable point. The result
    always satisfies tsc <= budget.
    """
    if not math.isfinite(budget) or budget <= 0:
        raise InfeasibleDesignError(f"infeasible budget: must be positive, got {budget}")
    sp2 = inputs.sigma_p ** 2
    sa2 = inputs.sigma_a ** 2
    sb2 = inputs.sigma_b ** 2
    if sb2 >= sp2:
        raise DesignError(
            "hybrid budget allocation requires sigma_b < sigma_p; "
            "use a conventional design instead"
        )
    costs = inputs.costs
    cbc = costs.c_b + costs.c_c
    sigma_delta = (sa2 + sb2) / (sp2 - sb2)
    if costs.c_a > 0 and abs(costs.c_a * sigma_delta - cbc) < 1e-12:
        raise DesignError(
            "budget allocation denominator is singular: "
            "c_a * sigma_delta equals c_b + c_c"
        )
    if costs.c_a == 0:
        # Free primary annotation: annotate everything collected.
        n = int(math.floor(budget / (costs.c_a + cbc) + 1e-12))
        if n < 1:
            raise InfeasibleDesignError(
                f"infeasible budget {budget}: cannot afford a single sample"
            )
        return _hybrid_plan(n, n, inputs)
    nb_star = budget / (cbc + math.sqrt(costs.c_a * cbc * sigma_delta))
    base = int(math.floor(nb_star + 1e-12))
    window = int(math.ceil(costs.c_a / cbc)) + 3
    candidates = set(range(max(1, base - window), base + window + 1))
    if budget >= costs.c_a:
        candidates.add(int(math.floor((budget - costs.c_a) / cbc + 1e-12)))
    best: Optional[tuple[tuple[float, float, int], int, int]] = None
    for n_b in sorted(candidates):
        if n_b < 1:
            continue
        n_a = int(math.floor((budget - n_b * cbc) / costs.c_a + 1e-12))
        if n_a < 1:
            continue
        n_a = min(n_a, n_b)
        cost = total_sampling_cost(n_a, n_b, costs)
        if cost > budget * (1 + 1e-9):
            continue
        var = offset_variance(n_a, n_b, inputs)
        key = (var, cost, n_b)
        if best is None or key < best[0]:
            best = (key, n_a, n_b)
    if best is None:
        raise InfeasibleDesignError(
            f"infeasible budget {budget}: cannot afford n_b >= n_a >= 1"
        )
    return _hybrid_plan(best[1], best[2], inputs)


def conventional_plan_from_budget(budget: float, inputs: PlanningInputs) -> SamplingPlan:
    """Largest conventional design affordable within the budget."""
    per_sample = inputs.costs.c_a + inputs.costs.c_c
    n_a = int(math.floor(budget / per_sample + 1e-12)) if per_sample > 0 else 0
    if n_a < 1:
        raise InfeasibleDesignError(
            f"infeasible budget {budget}: one conventional sample costs {per_sample}"
        )
    return SamplingPlan(
        design=Design.CONVENTIONAL,
        n_a=n_a,
        n_b=0,
        predicted_variance=conventional_variance(n_a, inputs),
        tsc=total_sampling_cost(n_a, 0, inputs.costs),
    )


def auxiliary_size_from_budget(budget: float, costs: CostModel) -> int:
    """Auxiliary-only sample count affordable within the budget."""
    per_sample = costs.c_c + costs.c_b
    n_b = int(math.floor(budget / per_sample + 1e-12))
    if n_b < 1:
        raise InfeasibleDesignError(
            f"infeasible budget {budget}: one auxiliary sample costs {per_sample}"
        )
    return n_b


def compare_designs(
    inputs: PlanningInputs,
    cm: Optional[ConfusionMatrix] = None,
    *,
    binary_values: bool = False,
) -> list[SamplingPlan]:
    """Target-meeting plans for each applicable design, cheapest first.

    Ties go to the lower predicted variance, then to fewer total samples
    (which puts the conventional plan ahead of a hybrid that collapsed
    onto it). An auxiliary plan is included when a confusion matrix is
    supplied; that path additionally needs mu_p and the binary-value
    acknowledgment, see auxiliary_sample_size.
    """
    plans = [conventional_plan(inputs)]
    hybrid = optimal_offset_plan(inputs)
    if hybrid.design is not Design.CONVENTIONAL:
        plans.append(hybrid)
    if cm is not None:
        from .correction import auxiliary_plan

        plans.append(auxiliary_plan(inputs, cm, binary_values=binary_values))
    plans.sort(key=lambda p: (p.tsc, p.predicted_variance, p.n_a + p.n_b))
    return plans


def tradeoff_curve(
    inputs: PlanningInputs,
    points: int = 200,
    max_n_b: Optional[float] = None,
) -> list[tuple[float, float, float]]:
    """(n_b, n_a, tsc) triples tracing the precision-preserving trade-off.

    Starts exactly at the conventional corner (n_a*, n_a*). Intended for
    plotting and CSV export; values are real, not rounded.
    """
    if points < 2:
        raise DesignError("a trade-off curve needs at least two points")
    sp2 = inputs.sigma_p ** 2
    sa2 = inputs.sigma_a ** 2
    na_star_raw = (sp2 + sa2) / inputs.target.variance_ceiling
    if na_star_raw <= 0:
        raise DesignError("trade-off curve undefined for a zero-variance population")
    if max_n_b is None:
        try:
            max_n_b = 2.0 * float(optimal_offset_plan(inputs).n_b)
        except DesignError:
            max_n_b = 0.0
        max_n_b = max(max_n_b, 3.0 * na_star_raw)
    if max_n_b <= na_star_raw:
        raise DesignError("max_n_b must exceed the conventional sample size")
    step = (max_n_b - na_star_raw) / (points - 1)
    curve = [
        (
            na_star_raw,
            na_star_raw,
            total_sampling_cost(na_star_raw, na_star_raw, inputs.costs),
        )
    ]
    for i in range(1, points):
        n_b = na_star_raw + i * step
        n_a = required_primary_size(n_b, inputs)
        curve.append((n_b, n_a, total_sampling_cost(n_a, n_b, inputs.costs)))
    return curve


def cost_gap_curve(
    inputs: PlanningInputs,
    k_min: int = 1,
    k_max: int = 200,
) -> list[tuple[int, float, float, float]]:
    """(k, conventional TSC, hybrid TSC, difference) across cost ratios.

    Sweeps the primary annotation cost as k * (c_c + c_b) while holding
    the other costs fixed, replanning both designs at each integer k. The
    difference turns positive once k clears the relative cost threshold.
    """
    if k_min < 1 or k_max < k_min:
        raise DesignError(f"need 1 <= k_min <= k_max, got [{k_min}, {k_max}]")
    rows = []
    for k in range(k_min, k_max + 1):
        costs_k = CostModel(
            c_c=inputs.costs.c_c,
            c_a=k * (inputs.costs.c_c + inputs.costs.c_b),
            c_b=inputs.costs.c_b,
        )
        inputs_k = replace(inputs, costs=costs_k)
        conv = conventional_plan(inputs_k)
        hybrid = optimal_offset_plan(inputs_k)
        rows.append((k, conv.tsc, hybrid.tsc, conv.tsc - hybrid.tsc))
    return rows

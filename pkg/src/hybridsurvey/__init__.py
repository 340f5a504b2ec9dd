"""Survey design planning with a cheap auxiliary annotator.

Estimate a population mean from samples scored by two annotators: an
accurate but expensive primary one and a noisy but cheap auxiliary one.
The package sizes mixed designs that hit a precision target at minimum
total sampling cost, provides the matching estimators and bias
corrections for binary labels, and ships a Monte Carlo engine plus a CLI
for planning, estimation, and simulation reports.
"""

from .correction import (
    MIN_INVERTIBILITY,
    abundance_correct,
    auxiliary_cost_threshold,
    auxiliary_plan,
    auxiliary_sample_size,
    bias_corrected_mean,
    correction_variance,
    estimate_confusion,
    hybrid_bias_corrected_mean,
    two_stage_sample_size,
    two_stage_variance,
)
from .dataio import (
    IngestError,
    build_estimates_document,
    build_plan_document,
    emit_report,
    ingest_paired_csv,
    ingest_point_csv,
    write_paired_csv,
)
from .estimators import (
    aggregate_points,
    auxiliary_mean,
    conventional_mean,
    offset_mean,
    ratio_mean,
)
from .planning import (
    auxiliary_size_from_budget,
    compare_designs,
    conventional_plan,
    conventional_plan_from_budget,
    conventional_sample_size,
    conventional_variance,
    cost_gap_curve,
    offset_variance,
    optimal_offset_plan,
    plan_from_budget,
    relative_cost_threshold,
    required_primary_size,
    round_half_up,
    total_sampling_cost,
    tradeoff_curve,
)
from .quantile import normal_quantile, zeta_for_confidence
from .simulate import (
    AdditiveNoise,
    ConfusionBernoulli,
    EstimatorMetrics,
    SimulationCell,
    SimulationReport,
    SyntheticAnnotatorSpec,
    apply_annotator,
    estimator_metrics,
    generate_population,
    offset_vs_corrected_sd_gaps,
    run_bernoulli_comparison,
    run_pool_bootstrap,
    variance_standard_error,
)
from .types import (
    AnnotatorProfile,
    ConfusionMatrix,
    CostModel,
    Design,
    DesignError,
    InfeasibleDesignError,
    PairedSampleSet,
    PlanningInputs,
    PopulationModel,
    PrecisionTarget,
    SamplingPlan,
    TwoStageConfig,
)

__version__ = "0.1.0"

__all__ = [
    "AdditiveNoise",
    "AnnotatorProfile",
    "ConfusionBernoulli",
    "ConfusionMatrix",
    "CostModel",
    "Design",
    "DesignError",
    "EstimatorMetrics",
    "InfeasibleDesignError",
    "IngestError",
    "MIN_INVERTIBILITY",
    "PairedSampleSet",
    "PlanningInputs",
    "PopulationModel",
    "PrecisionTarget",
    "SamplingPlan",
    "SimulationCell",
    "SimulationReport",
    "SyntheticAnnotatorSpec",
    "TwoStageConfig",
    "abundance_correct",
    "aggregate_points",
    "apply_annotator",
    "auxiliary_cost_threshold",
    "auxiliary_mean",
    "auxiliary_plan",
    "auxiliary_sample_size",
    "auxiliary_size_from_budget",
    "bias_corrected_mean",
    "build_estimates_document",
    "build_plan_document",
    "compare_designs",
    "conventional_mean",
    "conventional_plan",
    "conventional_plan_from_budget",
    "conventional_sample_size",
    "conventional_variance",
    "correction_variance",
    "cost_gap_curve",
    "emit_report",
    "estimate_confusion",
    "estimator_metrics",
    "generate_population",
    "hybrid_bias_corrected_mean",
    "ingest_paired_csv",
    "ingest_point_csv",
    "normal_quantile",
    "offset_mean",
    "offset_variance",
    "offset_vs_corrected_sd_gaps",
    "optimal_offset_plan",
    "plan_from_budget",
    "ratio_mean",
    "relative_cost_threshold",
    "required_primary_size",
    "round_half_up",
    "run_bernoulli_comparison",
    "run_pool_bootstrap",
    "total_sampling_cost",
    "tradeoff_curve",
    "two_stage_sample_size",
    "two_stage_variance",
    "variance_standard_error",
    "write_paired_csv",
    "zeta_for_confidence",
]

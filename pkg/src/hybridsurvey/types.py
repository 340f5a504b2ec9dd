"""Domain types shared across the package.

Everything here is a small frozen dataclass with eager validation: a value
that constructs is safe to hand to any estimator or planner. Estimation
error moments follow the additive-error convention: an annotator reports
f(x) = y + eps with E[eps] = bias and SD[eps] = sigma.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .quantile import zeta_for_confidence

__all__ = [
    "Design",
    "DesignError",
    "InfeasibleDesignError",
    "PopulationModel",
    "AnnotatorProfile",
    "CostModel",
    "PrecisionTarget",
    "PairedSampleSet",
    "SamplingPlan",
    "ConfusionMatrix",
    "TwoStageConfig",
    "PlanningInputs",
]


class DesignError(ValueError):
    """Invalid input to a design computation."""


class InfeasibleDesignError(DesignError):
    """The requested design or budget admits no feasible plan."""


class Design(str, enum.Enum):
    """Sampling designs the toolkit can plan, estimate and simulate."""

    CONVENTIONAL = "conventional"
    HYBRID_OFFSET = "hybrid_offset"
    HYBRID_RATIO = "hybrid_ratio"
    AUXILIARY = "auxiliary"
    AUXILIARY_BIAS_CORRECTED = "auxiliary_bias_corrected"
    HYBRID_BIAS_CORRECTED = "hybrid_bias_corrected"

    def __str__(self) -> str:  # CSV/JSON friendly
        return self.value


def _require_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise DesignError(f"{name} must be finite, got {value}")


@dataclass(frozen=True)
class PopulationModel:
    """First and second moments of the quantity surveyed.

    mu_p may be unknown (None): the cost planners only need sigma_p. When
    both moments are given they must be jointly feasible for a [0, 1]
    valued population, i.e. sigma_p^2 <= mu_p * (1 - mu_p).
    """

    sigma_p: float
    mu_p: Optional[float] = None

    def __post_init__(self) -> None:
        _require_finite("sigma_p", self.sigma_p)
        if self.sigma_p < 0:
            raise DesignError(f"sigma_p must be nonnegative, got {self.sigma_p}")
        if self.mu_p is not None:
            _require_finite("mu_p", self.mu_p)
            if not 0.0 <= self.mu_p <= 1.0:
                raise DesignError(f"mu_p must lie in [0, 1], got {self.mu_p}")
            bound = self.mu_p * (1.0 - self.mu_p)
            if self.sigma_p ** 2 > bound + 1e-12:
                raise DesignError(
                    f"sigma_p^2 = {self.sigma_p ** 2:.6g} exceeds the feasible "
                    f"maximum mu_p*(1-mu_p) = {bound:.6g} for mu_p = {self.mu_p}"
                )


@dataclass(frozen=True)
class AnnotatorProfile:
    """Error moments and marginal cost of one annotator."""

    bias: float = 0.0
    sigma: float = 0.0
    cost_per_sample: float = 0.0

    def __post_init__(self) -> None:
        _require_finite("bias", self.bias)
        _require_finite("sigma", self.sigma)
        _require_finite("cost_per_sample", self.cost_per_sample)
        if self.sigma < 0:
            raise DesignError(f"annotator sigma must be nonnegative, got {self.sigma}")
        if self.cost_per_sample < 0:
            raise DesignError(
                f"cost_per_sample must be nonnegative, got {self.cost_per_sample}"
            )


@dataclass(frozen=True)
class CostModel:
    """Per-sample costs: collection c_c, primary annotation c_a, auxiliary c_b.

    A sample that is collected but never annotated still pays c_c, which is
    why c_c + c_b > 0 is required: otherwise auxiliary samples would be
    free and every budget question degenerates.
    """

    c_c: float
    c_a: float
    c_b: float = 0.0

    def __post_init__(self) -> None:
        for name in ("c_c", "c_a", "c_b"):
            value = getattr(self, name)
            _require_finite(name, value)
            if value < 0:
                raise DesignError(f"{name} must be nonnegative, got {value}")
        if self.c_c + self.c_b <= 0:
            raise DesignError("c_c + c_b must be positive")
        if self.c_a <= self.c_b:
            warnings.warn(
                "primary annotation cost c_a does not exceed auxiliary cost c_b; "
                "a hybrid design cannot save anything in this regime",
                stacklevel=2,
            )


@dataclass(frozen=True)
class PrecisionTarget:
    """Half-width d of the two-sided (1 - delta) confidence interval.

    zeta is derived from delta; passing it explicitly is allowed for
    callers that cache it, but it must agree with the quantile to 1e-8.
    """

    d: float
    delta: float = 0.05
    zeta: float = field(default=math.nan)

    def __post_init__(self) -> None:
        _require_finite("d", self.d)
        if self.d <= 0:
            raise DesignError(f"precision half-width d must be positive, got {self.d}")
        if not 0.0 < self.delta < 1.0:
            raise DesignError(f"delta must lie in (0, 1), got {self.delta}")
        expected = zeta_for_confidence(self.delta)
        if math.isnan(self.zeta):
            object.__setattr__(self, "zeta", expected)
        elif abs(self.zeta - expected) > 1e-8:
            raise DesignError(
                f"zeta = {self.zeta!r} does not match the upper 1-delta/2 normal "
                f"quantile {expected!r} for delta = {self.delta}"
            )

    @property
    def variance_ceiling(self) -> float:
        """Largest estimator variance that still meets the target, d^2/zeta^2."""
        return self.d ** 2 / self.zeta ** 2


@dataclass(frozen=True)
class PairedSampleSet:
    """Auxiliary annotations for n_b samples, primary ones for a prefix of n_a.

    The pairing convention is positional: primary_values[i] annotates the
    same sample as aux_values[i]. Values are not forced into [0, 1] here
    because synthetic annotators with additive noise legitimately step
    outside; file ingestion applies validate_unit_interval() instead.
    """

    aux_values: tuple[float, ...]
    primary_values: tuple[float, ...] = ()
    sample_ids: Optional[tuple[str, ...]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "aux_values", tuple(float(v) for v in self.aux_values))
        object.__setattr__(
            self, "primary_values", tuple(float(v) for v in self.primary_values)
        )
        if len(self.primary_values) > len(self.aux_values):
            raise DesignError(
                f"paired prefix longer than the sample set: n_a = "
                f"{len(self.primary_values)} > n_b = {len(self.aux_values)}"
            )
        for name, values in (("aux", self.aux_values), ("primary", self.primary_values)):
            for i, v in enumerate(values):
                if not math.isfinite(v):
                    raise DesignError(f"{name} value at index {i} is not finite: {v}")
        if self.sample_ids is not None:
            object.__setattr__(self, "sample_ids", tuple(self.sample_ids))
            if len(self.sample_ids) != len(self.aux_values):
                raise DesignError(
                    f"{len(self.sample_ids)} sample ids for "
                    f"{len(self.aux_values)} samples"
                )

    @property
    def n_a(self) -> int:
        return len(self.primary_values)

    @property
    def n_b(self) -> int:
        return len(self.aux_values)

    @classmethod
    def from_pairs(
        cls,
        pairs: Iterable[tuple[float, Optional[float]]],
        sample_ids: Optional[Sequence[str]] = None,
        reorder: bool = False,
    ) -> "PairedSampleSet":
        """Build from (aux_value, primary_value_or_None) records.

        With reorder=True the primary-annotated records are moved to the
        front (stable in both halves), which is how file ingestion
        normalizes arbitrary row order into the prefix convention.
        """
        records = list(pairs)
        ids = list(sample_ids) if sample_ids is not None else None
        if ids is not None and len(ids) != len(records):
            raise DesignError(f"{len(ids)} sample ids for {len(records)} records")
        indices = range(len(records))
        if reorder:
            indices = sorted(indices, key=lambda i: records[i][1] is None)
        else:
            seen_unpaired = False
            for aux, primary in records:
                if primary is None:
                    seen_unpaired = True
                elif seen_unpaired:
                    raise DesignError(
                        "primary-annotated records must form a prefix; "
                        "pass reorder=True to normalize arbitrary order"
                    )
        aux = tuple(records[i][0] for i in indices)
        primary = tuple(
            records[i][1] for i in indices if records[i][1] is not None  # type: ignore[misc]
        )
        out_ids = tuple(ids[i] for i in indices) if ids is not None else None
        return cls(aux_values=aux, primary_values=primary, sample_ids=out_ids)

    def validate_unit_interval(self) -> None:
        """Raise if any value falls outside [0, 1]."""
        for name, values in (("aux", self.aux_values), ("primary", self.primary_values)):
            for i, v in enumerate(values):
                if not 0.0 <= v <= 1.0:
                    raise DesignError(
                        f"{name} value at index {i} outside [0, 1]: {v}"
                    )


@dataclass(frozen=True)
class SamplingPlan:
    """A concrete (design, n_a, n_b) decision with its predicted performance."""

    design: Design
    n_a: int
    n_b: int
    predicted_variance: float
    tsc: float

    def __post_init__(self) -> None:
        if self.n_a < 0 or self.n_b < 0:
            raise DesignError("sample sizes cannot be negative")
        if self.n_a != int(self.n_a) or self.n_b != int(self.n_b):
            raise DesignError("sample sizes must be integers")
        if self.design is Design.CONVENTIONAL:
            if self.n_b != 0 or self.n_a < 1:
                raise DesignError(
                    "a conventional plan annotates every collected sample: "
                    f"requires n_b = 0 and n_a >= 1, got n_a={self.n_a}, n_b={self.n_b}"
                )
        elif self.design in (Design.AUXILIARY, Design.AUXILIARY_BIAS_CORRECTED):
            if self.n_a != 0 or self.n_b < 1:
                raise DesignError(
                    "an auxiliary plan takes no primary annotations: "
                    f"requires n_a = 0 and n_b >= 1, got n_a={self.n_a}, n_b={self.n_b}"
                )
        else:
            if not 1 <= self.n_a <= self.n_b:
                raise DesignError(
                    f"a hybrid plan requires n_b >= n_a >= 1, got "
                    f"n_a={self.n_a}, n_b={self.n_b}"
                )
        _require_finite("predicted_variance", self.predicted_variance)
        if self.predicted_variance < 0:
            raise DesignError("predicted variance cannot be negative")
        _require_finite("tsc", self.tsc)
        if self.tsc < 0:
            raise DesignError("total sampling cost cannot be negative")


@dataclass(frozen=True)
class ConfusionMatrix:
    """Binary annotator characteristics: sensitivity alpha, specificity beta.

    alpha + beta > 1 is what makes the correction invertible. Instances
    with alpha + beta <= 1 are still constructible because generation (as
    opposed to correction) is well defined for them, and estimated
    matrices can land there.
    """

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta"):
            value = getattr(self, name)
            _require_finite(name, value)
            if not 0.0 <= value <= 1.0:
                raise DesignError(f"{name} must lie in [0, 1], got {value}")

    @property
    def is_invertible(self) -> bool:
        return self.alpha + self.beta > 1.0


@dataclass(frozen=True)
class TwoStageConfig:
    """Point-count subsampling: s point labels per sample, one confusion matrix."""

    points_per_sample: int
    confusion: ConfusionMatrix

    def __post_init__(self) -> None:
        if self.points_per_sample < 1 or self.points_per_sample != int(self.points_per_sample):
            raise DesignError(
                f"points_per_sample must be a positive integer, got {self.points_per_sample}"
            )


@dataclass(frozen=True)
class PlanningInputs:
    """Everything a cost planner needs, bundled.

    The primary annotator is trusted, so its profile must carry zero bias;
    its noise sigma_a only widens confidence intervals. Costs live in the
    CostModel; per-profile cost_per_sample figures, when present, must
    agree with it.
    """

    population: PopulationModel
    primary: AnnotatorProfile
    auxiliary: AnnotatorProfile
    costs: CostModel
    target: PrecisionTarget

    def __post_init__(self) -> None:
        if self.primary.bias != 0.0:
            raise DesignError(
                f"the primary annotator must be unbiased, got bias = {self.primary.bias}"
            )
        for profile, cost, name in (
            (self.primary, self.costs.c_a, "c_a"),
            (self.auxiliary, self.costs.c_b, "c_b"),
        ):
            if profile.cost_per_sample and profile.cost_per_sample != cost:
                warnings.warn(
                    f"annotator cost_per_sample = {profile.cost_per_sample} disagrees "
                    f"with cost model {name} = {cost}; the cost model wins",
                    stacklevel=2,
                )

    @property
    def sigma_p(self) -> float:
        return self.population.sigma_p

    @property
    def sigma_a(self) -> float:
        return self.primary.sigma

    @property
    def sigma_b(self) -> float:
        return self.auxiliary.sigma

    @property
    def k(self) -> float:
        """Cost of a primary annotation relative to a collected+aux-annotated sample."""
        return self.costs.c_a / (self.costs.c_c + self.costs.c_b)

    @property
    def k_prime(self) -> float:
        """Cost of a conventional sample relative to an auxiliary sample."""
        return (self.costs.c_c + self.costs.c_a) / (self.costs.c_c + self.costs.c_b)

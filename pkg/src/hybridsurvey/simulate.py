"""Monte Carlo engine: synthetic populations, annotators, design comparisons.

Reproducibility contract: every replicate draws from its own RNG stream,
seeded deterministically from (seed, cell index, replicate index). Results
are aggregated by replicate index, so the same inputs and seed produce the
same report no matter how replicates would be scheduled. Execution here is
sequential; the per-replicate streams are what keep that a non-promise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .planning import (
    auxiliary_size_from_budget,
    conventional_plan_from_budget,
    plan_from_budget,
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
)

__all__ = [
    "AdditiveNoise",
    "ConfusionBernoulli",
    "SyntheticAnnotatorSpec",
    "EstimatorMetrics",
    "SimulationCell",
    "SimulationReport",
    "generate_population",
    "apply_annotator",
    "estimator_metrics",
    "variance_standard_error",
    "run_pool_bootstrap",
    "run_bernoulli_comparison",
    "offset_vs_corrected_sd_gaps",
]

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class AdditiveNoise:
    """Annotator reporting y + bias + noise with SD sigma.

    correlation couples the noise to the true values: the error is
    sigma * (rho * z + sqrt(1 - rho^2) * g) + bias, where z is the true
    value standardized against the reference population and g is white.
    A nonzero correlation therefore needs the reference moments.
    """

    bias: float = 0.0
    sigma: float = 0.0
    correlation: float = 0.0
    population: Optional[PopulationModel] = None

    def __post_init__(self) -> None:
        if self.sigma < 0:
            raise DesignError(f"noise sigma must be nonnegative, got {self.sigma}")
        if not -1.0 <= self.correlation <= 1.0:
            raise DesignError(
                f"correlation must lie in [-1, 1], got {self.correlation}"
            )


@dataclass(frozen=True)
class ConfusionBernoulli:
    """Binary annotator: reports Ber(alpha) on positives, Ber(1 - beta) on negatives.

    Generation never needs the matrix to be invertible; only corrections do.
    """

    confusion: ConfusionMatrix


SyntheticAnnotatorSpec = Union[AdditiveNoise, ConfusionBernoulli]


@dataclass(frozen=True)
class EstimatorMetrics:
    """Replicate-level quality summary of one estimator in one cell."""

    bias: float
    mae: float
    mse: float
    se: float
    sd: float
    replicates: int

    def __post_init__(self) -> None:
        for name in ("bias", "mae", "mse", "se", "sd"):
            if not math.isfinite(getattr(self, name)):
                raise DesignError(f"metric {name} is not finite")
        slack = 1e-12 * (1.0 + self.mse)
        if self.mse + slack < self.bias ** 2:
            raise DesignError("mse cannot be smaller than bias^2")
        if self.mae + slack < abs(self.bias):
            raise DesignError("mae cannot be smaller than |bias|")


@dataclass(frozen=True)
class SimulationCell:
    """One (design, parameter point) entry of a report.

    metrics is None when the cell was infeasible (for example, a budget too
    small to buy a single sample); note carries the reason then.
    replicates counts the estimates that survived; dropped counts the ones
    discarded as degenerate.
    """

    design: Design
    params: tuple[tuple[str, float], ...]
    metrics: Optional[EstimatorMetrics]
    replicates: int
    dropped: int = 0
    note: str = ""

    @property
    def feasible(self) -> bool:
        return self.metrics is not None

    def param(self, name: str) -> float:
        for key, value in self.params:
            if key == name:
                return value
        raise KeyError(name)


@dataclass(frozen=True)
class SimulationReport:
    kind: str
    seed: int
    requested_replicates: int
    truth: Optional[float]
    cells: tuple[SimulationCell, ...]


def _rng(seed: int, *indices: int) -> np.random.Generator:
    return np.random.default_rng([seed, *indices])


def _check_seed(seed: int) -> None:
    if seed < 0 or seed != int(seed):
        raise DesignError(f"seed must be a nonnegative integer, got {seed}")


# ---------------------------------------------------------------------------
# population + annotator generation


def _norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / _SQRT2)


def _norm_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def _truncated_moments(m: float, s: float) -> tuple[float, float]:
    a = (0.0 - m) / s
    b = (1.0 - m) / s
    z = _norm_cdf(b) - _norm_cdf(a)
    if z <= 0:
        return math.nan, math.nan
    pa, pb = _norm_pdf(a), _norm_pdf(b)
    mean = m + s * (pa - pb) / z
    var = s * s * (1.0 + (a * pa - b * pb) / z - ((pa - pb) / z) ** 2)
    return mean, var


def _solve_truncated_normal(mu: float, sigma: float) -> tuple[float, float]:
    """Parent (m, s) whose [0, 1]-truncation has moments (mu, sigma^2)."""
    m, s = mu, max(sigma, 1e-4)
    target_var = sigma * sigma
    for _ in range(200):
        mean, var = _truncated_moments(m, s)
        if not (math.isfinite(mean) and math.isfinite(var)):
            break
        f1 = mean - mu
        f2 = var - target_var
        if abs(f1) < 1e-12 and abs(f2) < 1e-12:
            return m, s
        hm = 1e-7 * max(1.0, abs(m))
        hs = 1e-7 * max(1e-3, s)
        mean_m, var_m = _truncated_moments(m + hm, s)
        mean_s, var_s = _truncated_moments(m, s + hs)
        j11 = (mean_m - mean) / hm
        j12 = (mean_s - mean) / hs
        j21 = (var_m - var) / hm
        j22 = (var_s - var) / hs
        det = j11 * j22 - j12 * j21
        if det == 0 or not math.isfinite(det):
            break
        dm = (f1 * j22 - f2 * j12) / det
        ds = (f2 * j11 - f1 * j21) / det
        # Damp steps so s never collapses or explodes in one move.
        dm = max(-0.5, min(0.5, dm))
        ds = max(-s / 2.0, min(s, ds))
        m -= dm
        s -= ds
        s = max(s, 1e-9)
    raise DesignError(
        f"no truncated gaussian on [0, 1] matches mu_p={mu}, sigma_p={sigma}"
    )


def generate_population(
    mu_p: float,
    sigma_p: Optional[float],
    size: int,
    model: str = "beta",
    seed: int = 0,
) -> np.ndarray:
    """Draw a synthetic population of true values on [0, 1].

    Models: "beta" (method-of-moments Beta), "bernoulli" (sigma_p implied
    by the mean; a conflicting value is an error), "truncated_gaussian"
    (parent normal solved so the truncated moments match). Infeasible
    moment pairs (sigma_p^2 >= mu_p*(1-mu_p) for the continuous models)
    raise rather than silently drifting.
    """
    _check_seed(seed)
    if size < 1:
        raise DesignError(f"population size must be positive, got {size}")
    if not 0.0 <= mu_p <= 1.0:
        raise DesignError(f"mu_p must lie in [0, 1], got {mu_p}")
    rng = _rng(seed)
    if model == "bernoulli":
        implied = math.sqrt(mu_p * (1.0 - mu_p))
        if sigma_p is not None and abs(sigma_p - implied) > 1e-9:
            raise DesignError(
                f"a bernoulli population's sigma_p is fixed by its mean "
                f"({implied:.6g}); got {sigma_p}"
            )
        return (rng.random(size) < mu_p).astype(float)
    if sigma_p is None:
        raise DesignError(f"sigma_p is required for the {model!r} model")
    if sigma_p < 0:
        raise DesignError(f"sigma_p must be nonnegative, got {sigma_p}")
    if sigma_p == 0.0:
        return np.full(size, float(mu_p))
    bound = mu_p * (1.0 - mu_p)
    if sigma_p ** 2 >= bound:
        raise DesignError(
            f"moments infeasible on [0, 1]: sigma_p^2 = {sigma_p ** 2:.6g} "
            f">= mu_p*(1-mu_p) = {bound:.6g}"
        )
    if model == "beta":
        nu = bound / sigma_p ** 2 - 1.0
        return rng.beta(mu_p * nu, (1.0 - mu_p) * nu, size)
    if model == "truncated_gaussian":
        from .quantile import normal_quantile

        m, s = _solve_truncated_normal(mu_p, sigma_p)
        lo = _norm_cdf((0.0 - m) / s)
        hi = _norm_cdf((1.0 - m) / s)
        u = lo + rng.random(size) * (hi - lo)
        return np.array([m + s * normal_quantile(v) for v in u])
    raise DesignError(f"unknown population model {model!r}")


def apply_annotator(
    values: Sequence[float],
    spec: SyntheticAnnotatorSpec,
    seed: int = 0,
) -> np.ndarray:
    """Annotate true values with a synthetic annotator.

    AdditiveNoise output is NOT clamped to [0, 1]; clamping would bias the
    very estimators the simulations are meant to validate.
    """
    _check_seed(seed)
    y = np.asarray(values, dtype=float)
    rng = _rng(seed)
    if isinstance(spec, AdditiveNoise):
        if spec.sigma == 0.0:
            return y + spec.bias
        rho = spec.correlation
        if rho == 0.0:
            return y + spec.bias + spec.sigma * rng.standard_normal(y.size)
        if spec.population is None or spec.population.sigma_p <= 0:
            raise DesignError(
                "correlated noise needs reference population moments with "
                "sigma_p > 0"
            )
        if spec.population.mu_p is None:
            raise DesignError("correlated noise needs the reference mu_p")
        z = (y - spec.population.mu_p) / spec.population.sigma_p
        g = rng.standard_normal(y.size)
        return y + spec.bias + spec.sigma * (
            rho * z + math.sqrt(1.0 - rho * rho) * g
        )
    if isinstance(spec, ConfusionBernoulli):
        if not np.isin(y, (0.0, 1.0)).all():
            raise DesignError("a confusion annotator requires binary true values")
        cm = spec.confusion
        u = rng.random(y.size)
        return np.where(y == 1.0, u < cm.alpha, u < 1.0 - cm.beta).astype(float)
    raise DesignError(f"unknown annotator spec {spec!r}")


# ---------------------------------------------------------------------------
# metrics


def estimator_metrics(estimates: Sequence[float], truth: float) -> EstimatorMetrics:
    """bias / MAE / MSE / standard error of a batch of estimates."""
    est = np.asarray(estimates, dtype=float)
    if est.size == 0:
        raise DesignError("no estimates to summarize")
    errors = est - truth
    bias = float(errors.mean())
    mae = float(np.abs(errors).mean())
    mse = float((errors ** 2).mean())
    sd = float(est.std(ddof=1)) if est.size > 1 else 0.0
    se = sd / math.sqrt(est.size)
    return EstimatorMetrics(
        bias=bias, mae=mae, mse=mse, se=se, sd=sd, replicates=int(est.size)
    )


def variance_standard_error(values: Sequence[float]) -> float:
    """Monte Carlo standard error of the sample variance of ``values``.

    Uses the fourth-moment formula; this is the yardstick for checking an
    empirical variance against a theoretical one.
    """
    x = np.asarray(values, dtype=float)
    n = x.size
    if n < 4:
        raise DesignError("need at least 4 values to estimate the SE of a variance")
    s2 = x.var(ddof=1)
    m4 = ((x - x.mean()) ** 4).mean()
    inner = (m4 - s2 * s2 * (n - 3) / (n - 1)) / n
    return math.sqrt(max(inner, 0.0))


# ---------------------------------------------------------------------------
# pool bootstrap

_DESIGN_STREAM = {design: i for i, design in enumerate(Design)}

_DEFAULT_POOL_DESIGNS = (
    Design.CONVENTIONAL,
    Design.HYBRID_OFFSET,
    Design.HYBRID_RATIO,
    Design.AUXILIARY,
)


def _pool_arrays(pool: PairedSampleSet) -> tuple[np.ndarray, np.ndarray]:
    if pool.n_b < 2:
        raise DesignError("pool bootstrap needs at least two samples")
    if pool.n_a != pool.n_b:
        raise DesignError(
            "pool bootstrap requires a fully primary-annotated pool "
            f"(n_a = {pool.n_a} < n_b = {pool.n_b})"
        )
    primary = np.asarray(pool.primary_values, dtype=float)
    aux = np.asarray(pool.aux_values, dtype=float)
    return primary, aux


def _hybrid_sizes(
    budget: float,
    sigma_p: float,
    sigma_b: float,
    costs: CostModel,
) -> tuple[int, int]:
    # The planner wants full inputs; the target is irrelevant on the
    # budget path, so a placeholder precision is supplied.
    inputs = PlanningInputs(
        population=PopulationModel(sigma_p=sigma_p),
        primary=AnnotatorProfile(),
        auxiliary=AnnotatorProfile(sigma=sigma_b),
        costs=costs,
        target=PrecisionTarget(d=1.0),
    )
    plan = plan_from_budget(budget, inputs)
    return plan.n_a, plan.n_b


def run_pool_bootstrap(
    pool: PairedSampleSet,
    designs: Optional[Sequence[Design]] = None,
    budgets: Sequence[float] = (),
    costs: Optional[CostModel] = None,
    replicates: int = 500,
    seed: int = 0,
    cm: Optional[ConfusionMatrix] = None,
    sigma_p: Optional[float] = None,
    sigma_b: Optional[float] = None,
) -> SimulationReport:
    """Resample a fully annotated pool and score designs across budgets.

    Ground truth is the pool's own primary mean. Sample sizes per budget
    come from the budget planner, with the pool's empirical moments
    standing in for sigma_p / sigma_b unless overridden. Budgets too small
    for a design mark that cell infeasible instead of failing the run.

    Requested replicates that cannot produce an estimate (degenerate
    confusion estimates under the hybrid bias-corrected design) are
    dropped and counted in the cell's dropped field.
    """
    _check_seed(seed)
    if replicates < 1:
        raise DesignError(f"replicates must be positive, got {replicates}")
    if costs is None:
        raise DesignError("a cost model is required")
    if not budgets:
        raise DesignError("at least one budget is required")
    if any(b <= 0 for b in budgets):
        raise DesignError("budgets must be strictly positive")
    designs = tuple(designs) if designs is not None else _DEFAULT_POOL_DESIGNS
    if Design.AUXILIARY_BIAS_CORRECTED in designs and cm is None:
        raise DesignError(
            "the auxiliary_bias_corrected design needs a confusion matrix"
        )
    primary, aux = _pool_arrays(pool)
    truth = float(primary.mean())
    pool_n = primary.size
    binary_pool = bool(
        np.isin(primary, (0.0, 1.0)).all() and np.isin(aux, (0.0, 1.0)).all()
    )
    if Design.HYBRID_BIAS_CORRECTED in designs and not binary_pool:
        raise DesignError(
            "the hybrid_bias_corrected design is defined for binary pools only"
        )
    sp = float(np.std(primary, ddof=1)) if sigma_p is None else float(sigma_p)
    sb = float(np.std(aux - primary, ddof=1)) if sigma_b is None else float(sigma_b)

    cells = []
    for design in designs:
        di = _DESIGN_STREAM[design]
        for bi, budget in enumerate(budgets):
            params = (("budget", float(budget)),)
            try:
                n_a, n_b = _cell_sizes(design, budget, sp, sb, costs)
            except (InfeasibleDesignError, DesignError) as err:
                cells.append(
                    SimulationCell(
                        design=design,
                        params=params,
                        metrics=None,
                        replicates=0,
                        note=str(err),
                    )
                )
                continue
            estimates = []
            dropped = 0
            for rep in range(replicates):
                rng = _rng(seed, di, bi, rep)
                value = _bootstrap_estimate(
                    design, rng, primary, aux, pool_n, n_a, n_b, cm
                )
                if value is None:
                    dropped += 1
                else:
                    estimates.append(value)
            if estimates:
                metrics = estimator_metrics(estimates, truth)
                cells.append(
                    SimulationCell(
                        design=design,
                        params=params,
                        metrics=metrics,
                        replicates=len(estimates),
                        dropped=dropped,
                    )
                )
            else:
                cells.append(
                    SimulationCell(
                        design=design,
                        params=params,
                        metrics=None,
                        replicates=0,
                        dropped=dropped,
                        note="all replicates degenerate",
                    )
                )
    return SimulationReport(
        kind="pool_bootstrap",
        seed=seed,
        requested_replicates=replicates,
        truth=truth,
        cells=tuple(cells),
    )


def _cell_sizes(
    design: Design,
    budget: float,
    sigma_p: float,
    sigma_b: float,
    costs: CostModel,
) -> tuple[int, int]:
    if design is Design.CONVENTIONAL:
        plan = conventional_plan_from_budget(
            budget,
            PlanningInputs(
                population=PopulationModel(sigma_p=sigma_p),
                primary=AnnotatorProfile(),
                auxiliary=AnnotatorProfile(sigma=sigma_b),
                costs=costs,
                target=PrecisionTarget(d=1.0),
            ),
        )
        return plan.n_a, 0
    if design in (Design.HYBRID_OFFSET, Design.HYBRID_RATIO, Design.HYBRID_BIAS_CORRECTED):
        return _hybrid_sizes(budget, sigma_p, sigma_b, costs)
    if design in (Design.AUXILIARY, Design.AUXILIARY_BIAS_CORRECTED):
        return 0, auxiliary_size_from_budget(budget, costs)
    raise DesignError(f"unsupported design {design}")


def _bootstrap_estimate(
    design: Design,
    rng: np.random.Generator,
    primary: np.ndarray,
    aux: np.ndarray,
    pool_n: int,
    n_a: int,
    n_b: int,
    cm: Optional[ConfusionMatrix],
) -> Optional[float]:
    if design is Design.CONVENTIONAL:
        idx = rng.integers(0, pool_n, size=n_a)
        return float(primary[idx].mean())
    if design is Design.AUXILIARY:
        idx = rng.integers(0, pool_n, size=n_b)
        return float(aux[idx].mean())
    if design is Design.AUXILIARY_BIAS_CORRECTED:
        idx = rng.integers(0, pool_n, size=n_b)
        assert cm is not None
        return float(
            (aux[idx].mean() + cm.beta - 1.0) / (cm.alpha + cm.beta - 1.0)
        )
    idx = rng.integers(0, pool_n, size=n_b)
    a = aux[idx]
    p = primary[idx[:n_a]]
    if design is Design.HYBRID_OFFSET:
        return float(a.mean() - (a[:n_a].mean() - p.mean()))
    if design is Design.HYBRID_RATIO:
        num = p.sum()
        den = a[:n_a].sum()
        ratio = num / den if (num != 0.0 and den != 0.0) else 1.0
        return float(ratio * a.mean())
    if design is Design.HYBRID_BIAS_CORRECTED:
        pos = p.sum()
        neg = n_a - pos
        if pos == 0 or neg == 0:
            return None
        alpha_hat = float((a[:n_a] * p).sum() / pos)
        beta_hat = float(((1.0 - a[:n_a]) * (1.0 - p)).sum() / neg)
        margin = alpha_hat + beta_hat - 1.0
        if margin <= 0.0:
            return None
        corrected_tail = (a[n_a:] + beta_hat - 1.0) / margin
        return float((p.sum() + corrected_tail.sum()) / n_b)
    raise DesignError(f"unsupported design {design}")


# ---------------------------------------------------------------------------
# paired comparison of the two hybrid estimators on binary populations


def run_bernoulli_comparison(
    alphas: Sequence[float],
    betas: Sequence[float],
    mu_values: Sequence[float],
    n_a_values: Sequence[int],
    n_b: int = 1000,
    replicates: int = 2000,
    seed: int = 0,
) -> SimulationReport:
    """Head-to-head of offset vs hybrid bias-corrected on Bernoulli data.

    For each (alpha, beta, mu_p, n_a) cell: draw n_a paired samples,
    estimate the confusion matrix and the auxiliary offset from them, draw
    n_b - n_a auxiliary-only samples, and compute both estimators on the
    identical data. Replicates whose estimated matrix is non-invertible
    (alpha_hat + beta_hat <= 1, or a primary class entirely absent) are
    dropped from both estimators and counted. Two cells per parameter
    point are reported, one per design, sharing the dropped count.
    """
    _check_seed(seed)
    if replicates < 2:
        raise DesignError(f"need at least 2 replicates, got {replicates}")
    cells = []
    ci = 0
    for alpha in alphas:
        for beta in betas:
            for mu in mu_values:
                for n_a in n_a_values:
                    if not 1 <= n_a <= n_b:
                        raise DesignError(
                            f"need 1 <= n_a <= n_b, got n_a={n_a}, n_b={n_b}"
                        )
                    offs, bcs, dropped = _comparison_cell(
                        float(alpha), float(beta), float(mu),
                        int(n_a), int(n_b), replicates, seed, ci,
                    )
                    params = (
                        ("alpha", float(alpha)),
                        ("beta", float(beta)),
                        ("mu_p", float(mu)),
                        ("n_a", float(n_a)),
                        ("n_b", float(n_b)),
                    )
                    for design, estimates in (
                        (Design.HYBRID_OFFSET, offs),
                        (Design.HYBRID_BIAS_CORRECTED, bcs),
                    ):
                        metrics = (
                            estimator_metrics(estimates, float(mu))
                            if estimates
                            else None
                        )
                        cells.append(
                            SimulationCell(
                                design=design,
                                params=params,
                                metrics=metrics,
                                replicates=len(estimates),
                                dropped=dropped,
                                note="" if estimates else "all replicates degenerate",
                            )
                        )
                    ci += 1
    return SimulationReport(
        kind="bernoulli_comparison",
        seed=seed,
        requested_replicates=replicates,
        truth=None,
        cells=tuple(cells),
    )


def _comparison_cell(
    alpha: float,
    beta: float,
    mu: float,
    n_a: int,
    n_b: int,
    replicates: int,
    seed: int,
    cell_index: int,
) -> tuple[list[float], list[float], int]:
    offsets: list[float] = []
    corrected: list[float] = []
    dropped = 0
    n_tail = n_b - n_a
    for rep in range(replicates):
        rng = _rng(seed, cell_index, rep)
        y = (rng.random(n_a) < mu).astype(float)
        u = rng.random(n_a)
        fb = np.where(y == 1.0, u < alpha, u < 1.0 - beta).astype(float)
        y_tail = (rng.random(n_tail) < mu).astype(float)
        u_tail = rng.random(n_tail)
        fb_tail = np.where(
            y_tail == 1.0, u_tail < alpha, u_tail < 1.0 - beta
        ).astype(float)
        pos = y.sum()
        neg = n_a - pos
        if pos == 0 or neg == 0:
            dropped += 1
            continue
        alpha_hat = float((fb * y).sum() / pos)
        beta_hat = float(((1.0 - fb) * (1.0 - y)).sum() / neg)
        margin = alpha_hat + beta_hat - 1.0
        if margin <= 0.0:
            dropped += 1
            continue
        mu_b_hat = float(fb.mean() - y.mean())
        offsets.append(float((fb.sum() + fb_tail.sum()) / n_b - mu_b_hat))
        corrected.append(
            float((y.sum() + ((fb_tail + beta_hat - 1.0) / margin).sum()) / n_b)
        )
    return offsets, corrected, dropped


def offset_vs_corrected_sd_gaps(
    report: SimulationReport,
) -> list[tuple[dict[str, float], float]]:
    """Per-cell SD(offset) - SD(bias-corrected) from a comparison report.

    Negative values mean the offset estimator was steadier. Cells where
    either side lost every replicate are skipped.
    """
    by_params: dict[tuple, dict[Design, EstimatorMetrics]] = {}
    for cell in report.cells:
        if cell.metrics is not None:
            by_params.setdefault(cell.params, {})[cell.design] = cell.metrics
    gaps = []
    for params, pair in by_params.items():
        if Design.HYBRID_OFFSET in pair and Design.HYBRID_BIAS_CORRECTED in pair:
            gap = pair[Design.HYBRID_OFFSET].sd - pair[Design.HYBRID_BIAS_CORRECTED].sd
            gaps.append((dict(params), gap))
    return gaps

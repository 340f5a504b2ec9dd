"""End-to-end checks of the package's headline guarantees.

Each test covers one numbered claim; the terminal summary prints a
one-line verdict per claim (see conftest). These are deliberately run
through the public API only.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

import hybridsurvey as hs
from hybridsurvey import (
    AdditiveNoise,
    AnnotatorProfile,
    ConfusionMatrix,
    CostModel,
    Design,
    PairedSampleSet,
    PlanningInputs,
    PopulationModel,
    PrecisionTarget,
    TwoStageConfig,
)
from hybridsurvey.cli import main


def make_inputs(sigma_p, sigma_b, sigma_a, d, delta, c_c, c_a, c_b):
    return PlanningInputs(
        population=PopulationModel(sigma_p=sigma_p),
        primary=AnnotatorProfile(sigma=sigma_a),
        auxiliary=AnnotatorProfile(sigma=sigma_b, bias=0.0),
        costs=CostModel(c_c=c_c, c_a=c_a, c_b=c_b),
        target=PrecisionTarget(d=d, delta=delta),
    )


def test_criterion_1_coral_plan(coral_inputs):
    start = time.perf_counter()
    plan = hs.optimal_offset_plan(coral_inputs)
    elapsed = time.perf_counter() - start
    assert abs(plan.n_b - 53) <= 1
    assert abs(plan.n_a - 5) <= 1
    assert elapsed < 1.0


@pytest.mark.parametrize("sigma_b", [0.05, 0.10, 0.15])
def test_criterion_2_cost_crossover(sigma_b):
    inputs = make_inputs(
        sigma_p=0.2, sigma_b=sigma_b, sigma_a=0.02,
        d=0.04, delta=0.05, c_c=1.0, c_a=1.0, c_b=0.0,
    )
    sigma_delta = (0.02 ** 2 + sigma_b ** 2) / (0.2 ** 2 - sigma_b ** 2)
    assert hs.relative_cost_threshold(inputs) == pytest.approx(sigma_delta, rel=1e-12)

    rows = hs.cost_gap_curve(inputs, k_min=1, k_max=200)
    assert [k for k, *_ in rows] == list(range(1, 201))
    # the curve must agree with per-k plans priced straight from the
    # cost identity, so the sign analysis rests on direct evaluation
    import dataclasses

    for k, conv_tsc, hybrid_tsc, diff in rows:
        inputs_k = dataclasses.replace(
            inputs, costs=CostModel(c_c=1.0, c_a=float(k), c_b=0.0)
        )
        conv = hs.conventional_plan(inputs_k)
        hybrid = hs.optimal_offset_plan(inputs_k)
        assert conv_tsc == k * conv.n_a + conv.n_a
        assert hybrid_tsc == k * hybrid.n_a + hybrid.n_b
        assert conv_tsc == conv.tsc and hybrid_tsc == hybrid.tsc
        assert diff == conv_tsc - hybrid_tsc

    diffs = {k: diff for k, _, _, diff in rows}
    first_positive = min(k for k, diff in diffs.items() if diff > 0)
    assert max(1, math.floor(sigma_delta)) <= first_positive
    assert first_positive <= math.ceil(sigma_delta) + 1
    assert all(diff <= 0 for k, diff in diffs.items() if k < first_positive)
    assert all(diff > 0 for k, diff in diffs.items() if k >= first_positive)


def test_criterion_3_exhaustive_search_agrees():
    start = time.perf_counter()
    rng = np.random.default_rng(20260814)
    for _ in range(12):
        sigma_p = rng.uniform(0.05, 0.5)
        sigma_b = sigma_p * rng.uniform(0.05, 0.9)
        sigma_a = sigma_p * rng.uniform(0.0, 0.5)
        d = sigma_p * rng.uniform(0.2, 1.0)
        delta = rng.choice([0.01, 0.05, 0.1])
        c_c = rng.uniform(0.5, 5.0)
        c_b = c_c * rng.choice([0.0, rng.uniform(0.05, 0.5)])
        c_a = (c_c + c_b) * rng.uniform(1.5, 50.0)
        inputs = make_inputs(sigma_p, sigma_b, sigma_a, d, delta, c_c, c_a, c_b)

        plan = hs.optimal_offset_plan(inputs)
        ceiling = inputs.target.variance_ceiling
        assert hs.offset_variance(plan.n_a, plan.n_b, inputs) <= ceiling * (1 + 1e-9)

        # brute force: total cost over every candidate n_b, with the
        # exact (real-valued) primary subset size each n_b requires
        na_star = hs.conventional_sample_size(inputs)
        n_b = np.arange(na_star, 10 * na_star + 1, dtype=float)
        v = sigma_p ** 2 - sigma_b ** 2
        s = sigma_a ** 2 + sigma_b ** 2
        n_a = s / (ceiling - v / n_b)
        cost = c_a * n_a + (c_b + c_c) * n_b
        best = cost.min()
        minimizers = n_b[cost <= best * (1 + 1e-12)]
        assert np.abs(minimizers - plan.n_b).min() <= 1
    assert time.perf_counter() - start < 10.0


def test_criterion_4_offset_bias_and_variance(coral_inputs):
    start = time.perf_counter()
    plan = hs.optimal_offset_plan(coral_inputs)
    n_a, n_b = plan.n_a, plan.n_b
    mu, sigma_p, sigma_b = 0.3, 0.16, 0.047
    bias, rho, reps = 0.05, 0.8, 10_000

    rng = np.random.default_rng(42)
    nu = mu * (1 - mu) / sigma_p ** 2 - 1
    y = rng.beta(mu * nu, (1 - mu) * nu, size=(reps, n_b))
    white = rng.standard_normal((reps, n_b))
    errors = bias + sigma_b * (
        rho * (y - mu) / sigma_p + math.sqrt(1 - rho ** 2) * white
    )
    aux = y + errors
    estimates = (
        aux.mean(axis=1) - aux[:, :n_a].mean(axis=1) + y[:, :n_a].mean(axis=1)
    )

    se = estimates.std(ddof=1) / math.sqrt(reps)
    assert abs(estimates.mean() - mu) < 4 * se

    predicted = hs.offset_variance(n_a, n_b, coral_inputs)
    mc_se = hs.variance_standard_error(estimates)
    assert abs(estimates.var(ddof=1) - predicted) < 3 * mc_se
    assert time.perf_counter() - start < 30.0


def test_criterion_5_correction_constants():
    assert hs.correction_variance(None, ConfusionMatrix(0.9, 0.9)) == 0.140625
    assert hs.correction_variance(None, ConfusionMatrix(0.7, 0.7)) == 1.3125
    inputs = make_inputs(
        sigma_p=0.2, sigma_b=0.0, sigma_a=0.0,
        d=0.05, delta=0.05, c_c=1.0, c_a=10.0, c_b=0.0,
    )
    threshold = hs.auxiliary_cost_threshold(
        inputs, ConfusionMatrix(0.9, 0.9), binary_values=True
    )
    assert threshold == 4.515625


def test_criterion_6_offset_no_worse_than_corrected():
    start = time.perf_counter()
    report = hs.run_bernoulli_comparison(
        alphas=(0.6, 0.8, 0.95),
        betas=(0.6, 0.8, 0.95),
        mu_values=(0.5, 0.75, 0.9),
        n_a_values=tuple(range(100, 501, 50)),
        n_b=1000,
        replicates=2000,
        seed=20260814,
    )
    gaps = hs.offset_vs_corrected_sd_gaps(report)
    assert len(gaps) == 3 * 3 * 3 * 9
    wins = sum(1 for _, gap in gaps if gap <= 0)
    assert wins / len(gaps) >= 0.95
    assert time.perf_counter() - start < 300.0


def test_criterion_7_two_stage_variance_matches_simulation():
    alpha = beta = 0.9
    mu, sigma_p, n_b, reps = 0.3, 0.02, 25, 40_000
    margin = alpha + beta - 1.0
    empirical = []
    predicted = []
    for s in (1, 10, 200):
        cfg = TwoStageConfig(points_per_sample=s, confusion=ConfusionMatrix(alpha, beta))
        rng = np.random.default_rng(1000 + s)
        nu = mu * (1 - mu) / sigma_p ** 2 - 1
        y = rng.beta(mu * nu, (1 - mu) * nu, size=(reps, n_b))
        positive_rate = y * margin + (1 - beta)
        fractions = rng.binomial(s, positive_rate) / s
        corrected = (fractions + beta - 1.0) / margin
        estimates = corrected.mean(axis=1)

        variance = estimates.var(ddof=1)
        formula = hs.two_stage_variance(mu, sigma_p, cfg, n_b)
        assert abs(variance - formula) < 3 * hs.variance_standard_error(estimates)
        empirical.append(variance)
        predicted.append(formula)
    assert empirical[0] > empirical[1] > empirical[2]
    assert predicted[0] > predicted[1] > predicted[2]


def test_criterion_8_synthetic_pool_cost_cut():
    y = hs.generate_population(0.3, 0.16, 20_000, seed=101)
    aux = hs.apply_annotator(
        y, AdditiveNoise(bias=0.05, sigma=0.047), seed=102
    )
    pool = PairedSampleSet(
        aux_values=tuple(float(v) for v in aux),
        primary_values=tuple(float(v) for v in y),
    )
    unit = 60.0  # one person-hour at the coral rates (collect 1, annotate 10)
    hours = range(1, 13)
    reference_budget = 7.3 * unit
    report = hs.run_pool_bootstrap(
        pool,
        designs=(Design.CONVENTIONAL, Design.HYBRID_OFFSET),
        budgets=tuple(unit * h for h in hours) + (reference_budget,),
        costs=CostModel(c_c=1.0, c_a=10.0, c_b=0.0),
        replicates=4000,
        seed=7,
        sigma_p=0.16,
        sigma_b=0.047,
    )
    mae = {
        (cell.design, cell.param("budget")): cell.metrics.mae
        for cell in report.cells
        if cell.feasible
    }
    for h in hours:
        if h >= 3:
            budget = unit * h
            assert mae[(Design.HYBRID_OFFSET, budget)] < mae[(Design.CONVENTIONAL, budget)]

    conventional_reference = mae[(Design.CONVENTIONAL, reference_budget)]
    crossover = min(
        h for h in hours
        if mae[(Design.HYBRID_OFFSET, unit * h)] <= conventional_reference
    )
    assert 2.5 <= crossover <= 5.5


def test_criterion_9_simulate_is_deterministic(tmp_path):
    y = hs.generate_population(0.3, 0.16, 300, seed=31)
    aux = hs.apply_annotator(y, AdditiveNoise(bias=0.05, sigma=0.047), seed=32)
    pool_file = hs.write_paired_csv(
        tmp_path / "pool.csv",
        PairedSampleSet(
            aux_values=tuple(float(v) for v in aux),
            primary_values=tuple(float(v) for v in y),
        ),
    )
    argv = [
        "simulate", "--input", str(pool_file),
        "--budget", "103", "--budget", "330",
        "--cost-collect", "1", "--cost-primary", "10",
        "--replicates", "200", "--seed", "11",
    ]
    first = tmp_path / "first"
    second = tmp_path / "second"
    assert main([*argv, "--outdir", str(first)]) == 0
    assert main([*argv, "--outdir", str(second)]) == 0

    first_files = sorted(p.name for p in first.iterdir())
    assert first_files == sorted(p.name for p in second.iterdir())
    assert first_files == ["simulation.csv", "simulation.png"]
    for name in first_files:
        assert (first / name).read_bytes() == (second / name).read_bytes(), name

"""File formats: paired-sample CSV, point-label CSV, and report emission.

All numeric report output is written with 12 significant digits, and the
writers are deterministic: the same data produces byte-identical files.
Ingestion errors carry 1-based row numbers from the source file.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

from .estimators import aggregate_points
from .planning import relative_cost_threshold
from .simulate import SimulationReport
from .types import (
    DesignError,
    PairedSampleSet,
    PlanningInputs,
    SamplingPlan,
)

__all__ = [
    "IngestError",
    "ingest_paired_csv",
    "ingest_point_csv",
    "write_paired_csv",
    "build_plan_document",
    "build_estimates_document",
    "emit_report",
    "PAIRED_HEADER",
    "POINT_HEADER",
]

PAIRED_HEADER = ("sample_id", "aux_value", "primary_value")
POINT_HEADER = ("sample_id", "point_id", "aux_label", "primary_label")


class IngestError(DesignError):
    """A data file could not be parsed."""


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _round12(obj):
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        return float(_fmt(obj))
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    return obj


def _read_rows(path: Union[str, Path], header: Sequence[str]) -> list[list[str]]:
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as err:
        raise IngestError(f"cannot read {path}: {err}") from err
    if not rows:
        raise IngestError(f"{path}: empty file")
    got = [field.strip() for field in rows[0]]
    if got != list(header):
        raise IngestError(
            f"{path}: bad header {got!r}, expected {list(header)!r}"
        )
    return rows[1:]


def _parse_float(text: str, path: Path, row: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError as err:
        raise IngestError(
            f"{path}: row {row}: {column} {text!r} is not a number"
        ) from err
    if not math.isfinite(value):
        raise IngestError(f"{path}: row {row}: {column} must be finite")
    return value


def ingest_paired_csv(
    path: Union[str, Path], *, reorder: bool = False
) -> PairedSampleSet:
    """Read a paired-sample file: sample_id, aux_value, primary_value.

    An empty primary_value marks a sample without a primary annotation.
    Annotated samples must already sit in a leading block unless reorder
    is set, in which case they are moved there (stably).
    """
    path = Path(path)
    rows = _read_rows(path, PAIRED_HEADER)
    pairs: list[tuple[float, Optional[float]]] = []
    ids: list[str] = []
    seen: dict[str, int] = {}
    for i, row in enumerate(rows, start=2):
        if len(row) != 3:
            raise IngestError(
                f"{path}: row {i}: expected 3 fields, got {len(row)}"
            )
        sample_id, aux_text, primary_text = (field.strip() for field in row)
        if not sample_id:
            raise IngestError(f"{path}: row {i}: empty sample_id")
        if sample_id in seen:
            raise IngestError(
                f"{path}: row {i}: duplicate sample_id {sample_id!r} "
                f"(first seen at row {seen[sample_id]})"
            )
        seen[sample_id] = i
        aux = _parse_float(aux_text, path, i, "aux_value")
        primary = (
            _parse_float(primary_text, path, i, "primary_value")
            if primary_text
            else None
        )
        pairs.append((aux, primary))
        ids.append(sample_id)
    if not pairs:
        raise IngestError(f"{path}: no data rows")
    return PairedSampleSet.from_pairs(pairs, sample_ids=ids, reorder=reorder)


def ingest_point_csv(
    path: Union[str, Path], *, reorder: bool = False
) -> PairedSampleSet:
    """Read point-level binary labels and aggregate them per sample.

    Each sample's value is its fraction of positive labels. A sample
    counts as primary-annotated only when every one of its points has a
    primary_label; labeling only some points of a sample is an error.
    """
    path = Path(path)
    rows = _read_rows(path, POINT_HEADER)
    order: list[str] = []
    aux_by_sample: dict[str, list[float]] = {}
    primary_by_sample: dict[str, list[Optional[float]]] = {}
    point_seen: dict[tuple[str, str], int] = {}
    for i, row in enumerate(rows, start=2):
        if len(row) != 4:
            raise IngestError(
                f"{path}: row {i}: expected 4 fields, got {len(row)}"
            )
        sample_id, point_id, aux_text, primary_text = (
            field.strip() for field in row
        )
        if not sample_id or not point_id:
            raise IngestError(f"{path}: row {i}: empty sample_id or point_id")
        key = (sample_id, point_id)
        if key in point_seen:
            raise IngestError(
                f"{path}: row {i}: duplicate point {point_id!r} for sample "
                f"{sample_id!r} (first seen at row {point_seen[key]})"
            )
        point_seen[key] = i
        aux = _parse_float(aux_text, path, i, "aux_label")
        if aux not in (0.0, 1.0):
            raise IngestError(
                f"{path}: row {i}: aux_label must be 0 or 1, got {aux_text!r}"
            )
        primary: Optional[float] = None
        if primary_text:
            primary = _parse_float(primary_text, path, i, "primary_label")
            if primary not in (0.0, 1.0):
                raise IngestError(
                    f"{path}: row {i}: primary_label must be 0 or 1, "
                    f"got {primary_text!r}"
                )
        if sample_id not in aux_by_sample:
            order.append(sample_id)
            aux_by_sample[sample_id] = []
            primary_by_sample[sample_id] = []
        aux_by_sample[sample_id].append(aux)
        primary_by_sample[sample_id].append(primary)
    pairs: list[tuple[float, Optional[float]]] = []
    for sample_id in order:
        aux_fraction = aggregate_points(aux_by_sample[sample_id])
        primaries = primary_by_sample[sample_id]
        labeled = [v for v in primaries if v is not None]
        if labeled and len(labeled) != len(primaries):
            raise IngestError(
                f"{path}: sample {sample_id!r}: {len(labeled)} of "
                f"{len(primaries)} points have a primary_label; "
                f"label all of them or none"
            )
        primary_fraction = aggregate_points(labeled) if labeled else None
        pairs.append((aux_fraction, primary_fraction))
    return PairedSampleSet.from_pairs(pairs, sample_ids=order, reorder=reorder)


def write_paired_csv(path: Union[str, Path], samples: PairedSampleSet) -> Path:
    """Write a paired-sample file that round-trips exactly through ingest."""
    path = Path(path)
    ids = samples.sample_ids or tuple(
        f"s{i + 1}" for i in range(samples.n_b)
    )
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PAIRED_HEADER)
        for i, aux in enumerate(samples.aux_values):
            primary = (
                repr(samples.primary_values[i]) if i < samples.n_a else ""
            )
            writer.writerow([ids[i], repr(aux), primary])
    return path


# ---------------------------------------------------------------------------
# report documents


def _plan_entry(plan: SamplingPlan) -> dict:
    return {
        "design": str(plan.design),
        "n_a": plan.n_a,
        "n_b": plan.n_b,
        "predicted_variance": plan.predicted_variance,
        "tsc": plan.tsc,
    }


def build_plan_document(
    inputs: PlanningInputs,
    plans: Sequence[SamplingPlan],
    *,
    budget: Optional[float] = None,
    budget_plans: Sequence[SamplingPlan] = (),
) -> dict:
    document = {
        "inputs": {
            "sigma_p": inputs.sigma_p,
            "sigma_a": inputs.sigma_a,
            "sigma_b": inputs.sigma_b,
            "d": inputs.target.d,
            "delta": inputs.target.delta,
            "zeta": inputs.target.zeta,
            "variance_ceiling": inputs.target.variance_ceiling,
            "cost_collect": inputs.costs.c_c,
            "cost_primary": inputs.costs.c_a,
            "cost_aux": inputs.costs.c_b,
        },
        "plans": [_plan_entry(plan) for plan in plans],
        "diagnostics": _diagnostics(inputs),
    }
    if budget is not None:
        document["budget"] = float(budget)
        document["budget_plans"] = [_plan_entry(plan) for plan in budget_plans]
    return document


def _diagnostics(inputs: PlanningInputs) -> dict:
    diagnostics: dict = {
        "k": inputs.k,
        "k_prime": inputs.k_prime,
    }
    try:
        threshold = relative_cost_threshold(inputs)
    except DesignError:
        diagnostics["sigma_delta"] = None
        diagnostics["hybrid_is_cheaper"] = False
    else:
        diagnostics["sigma_delta"] = threshold
        diagnostics["hybrid_is_cheaper"] = inputs.k > threshold
    return diagnostics


def build_estimates_document(
    estimates: Mapping[str, float],
    *,
    n_a: int,
    n_b: int,
    clamped: bool = False,
) -> dict:
    return {
        "estimates": dict(estimates),
        "n_a": n_a,
        "n_b": n_b,
        "clamped": clamped,
    }


# ---------------------------------------------------------------------------
# emission


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def emit_report(
    outdir: Union[str, Path],
    *,
    plan: Optional[dict] = None,
    estimates: Optional[dict] = None,
    tradeoff: Optional[Sequence[tuple[float, float, float]]] = None,
    cost_gap: Optional[Sequence[tuple[int, float, float, float]]] = None,
    simulation: Optional[SimulationReport] = None,
    figures: bool = True,
) -> list[Path]:
    """Write whichever report pieces are present into outdir.

    Produces plan.json / estimates.json / tradeoff.csv / tsc_diff.csv /
    simulation.csv, plus a PNG next to each delimited file when figures
    is set. Returns the written paths in a fixed order.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    if plan is not None:
        path = outdir / "plan.json"
        path.write_text(
            json.dumps(_round12(plan), indent=2) + "\n", encoding="utf-8"
        )
        written.append(path)
    if estimates is not None:
        path = outdir / "estimates.json"
        path.write_text(
            json.dumps(_round12(estimates), indent=2) + "\n", encoding="utf-8"
        )
        written.append(path)
    if tradeoff is not None:
        path = outdir / "tradeoff.csv"
        _write_csv(
            path,
            ("n_b", "n_a", "tsc"),
            ([_fmt(n_b), _fmt(n_a), _fmt(tsc)] for n_b, n_a, tsc in tradeoff),
        )
        written.append(path)
    if cost_gap is not None:
        path = outdir / "tsc_diff.csv"
        _write_csv(
            path,
            ("k", "conventional_tsc", "hybrid_tsc", "diff"),
            (
                [str(int(k)), _fmt(conv), _fmt(hyb), _fmt(diff)]
                for k, conv, hyb, diff in cost_gap
            ),
        )
        written.append(path)
    if simulation is not None:
        if simulation.kind != "pool_bootstrap":
            raise DesignError(
                "simulation.csv is defined for pool bootstrap reports, "
                f"got {simulation.kind!r}"
            )
        path = outdir / "simulation.csv"
        rows = []
        for cell in simulation.cells:
            base = [str(cell.design), _fmt(cell.param("budget"))]
            if cell.metrics is None:
                rows.append(base + ["", "", "", "", "0", str(cell.dropped)])
            else:
                m = cell.metrics
                rows.append(
                    base
                    + [
                        _fmt(m.bias),
                        _fmt(m.mae),
                        _fmt(m.mse),
                        _fmt(m.se),
                        str(cell.replicates),
                        str(cell.dropped),
                    ]
                )
        _write_csv(
            path,
            (
                "design",
                "budget",
                "bias",
                "mae",
                "mse",
                "se",
                "replicates",
                "dropped",
            ),
            rows,
        )
        written.append(path)

    if figures:
        from . import figures as fig

        if tradeoff is not None:
            written.append(fig.render_tradeoff(tradeoff, outdir / "tradeoff.png"))
        if cost_gap is not None:
            written.append(fig.render_cost_gap(cost_gap, outdir / "tsc_diff.png"))
        if simulation is not None:
            written.append(
                fig.render_simulation(simulation, outdir / "simulation.png")
            )
    return written

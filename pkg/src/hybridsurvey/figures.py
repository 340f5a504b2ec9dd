"""Figure rendering for the report writer.

Everything goes through the Agg backend so reports render identically on
headless machines, and PNG metadata is pinned so repeated runs produce
byte-identical files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .simulate import SimulationReport
from .types import Design

__all__ = ["render_tradeoff", "render_cost_gap", "render_simulation"]

_SAVE_OPTS = {"dpi": 120, "metadata": {"Software": "hybridsurvey"}}


def render_tradeoff(
    rows: Sequence[tuple[float, float, float]], path: Path
) -> Path:
    """Primary-vs-auxiliary trade-off curve with its total cost."""
    n_b = [r[0] for r in rows]
    n_a = [r[1] for r in rows]
    tsc = [r[2] for r in rows]
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(n_b, n_a, color="tab:blue", label="primary annotations $n_a$")
    ax.set_xlabel("auxiliary annotations $n_b$")
    ax.set_ylabel("primary annotations $n_a$", color="tab:blue")
    ax.tick_params(axis="y", labelcolor="tab:blue")
    twin = ax.twinx()
    twin.plot(n_b, tsc, color="tab:red", linestyle="--", label="total cost")
    twin.set_ylabel("total sampling cost", color="tab:red")
    twin.tick_params(axis="y", labelcolor="tab:red")
    ax.set_title("designs meeting the precision target")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)
    return Path(path)


def render_cost_gap(
    rows: Sequence[tuple[int, float, float, float]], path: Path
) -> Path:
    """Conventional vs hybrid total cost across relative primary cost k."""
    k = [r[0] for r in rows]
    conv = [r[1] for r in rows]
    hyb = [r[2] for r in rows]
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(k, conv, color="tab:gray", label="conventional")
    ax.plot(k, hyb, color="tab:green", label="hybrid")
    ax.set_xlabel("relative primary annotation cost $k$")
    ax.set_ylabel("total sampling cost")
    ax.set_title("cost of meeting the target vs annotation cost ratio")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)
    return Path(path)


_DESIGN_COLORS = {
    Design.CONVENTIONAL: "tab:gray",
    Design.HYBRID_OFFSET: "tab:green",
    Design.HYBRID_RATIO: "tab:olive",
    Design.AUXILIARY: "tab:orange",
    Design.AUXILIARY_BIAS_CORRECTED: "tab:purple",
    Design.HYBRID_BIAS_CORRECTED: "tab:cyan",
}


def render_simulation(report: SimulationReport, path: Path) -> Path:
    """Mean absolute error against budget, one line per simulated design."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    designs = []
    for cell in report.cells:
        if cell.design not in designs:
            designs.append(cell.design)
    for design in designs:
        points = [
            (cell.param("budget"), cell.metrics.mae)
            for cell in report.cells
            if cell.design is design and cell.metrics is not None
        ]
        if not points:
            continue
        points.sort()
        ax.plot(
            [p[0] for p in points],
            [p[1] for p in points],
            marker="o",
            markersize=3,
            color=_DESIGN_COLORS.get(design),
            label=str(design),
        )
    ax.set_xlabel("budget")
    ax.set_ylabel("mean absolute error")
    ax.set_title(f"bootstrap comparison ({report.requested_replicates} replicates)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)
    return Path(path)

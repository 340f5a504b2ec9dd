"""Command line interface.

Three subcommands share one flag vocabulary:

  plan      size designs for a precision target (and optionally a budget)
  estimate  run the estimators over an annotated sample file
  simulate  bootstrap designs from a fully annotated pool across budgets

Values can also come from a flat ``key = value`` config file via
--config; explicit flags win over config values, with a warning. The
default output directory may be supplied through HYBRIDSURVEY_OUTDIR;
no other setting is read from the environment.

Exit codes: 0 success, 1 usage or data error, 2 infeasible design.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import dataio
from .estimators import auxiliary_mean, conventional_mean, offset_mean, ratio_mean
from .planning import (
    compare_designs,
    conventional_plan_from_budget,
    cost_gap_curve,
    plan_from_budget,
    tradeoff_curve,
)
from .simulate import run_pool_bootstrap
from .types import (
    AnnotatorProfile,
    CostModel,
    Design,
    DesignError,
    InfeasibleDesignError,
    PlanningInputs,
    PopulationModel,
    PrecisionTarget,
)

__all__ = ["main", "parse_config"]

OUTDIR_ENV = "HYBRIDSURVEY_OUTDIR"


class CliUsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); we reserve 2
        raise CliUsageError(message)


_FLOAT_KEYS = (
    "sigma_p",
    "sigma_a",
    "sigma_b",
    "d",
    "delta",
    "cost_collect",
    "cost_primary",
    "cost_aux",
)
_INT_KEYS = ("replicates", "seed")
_BOOL_KEYS = ("clamp", "binary")
_LIST_FLOAT_KEYS = ("budget",)
_LIST_STR_KEYS = ("design",)
_STR_KEYS = ("input", "outdir")
_CONFIG_KEYS = (
    _FLOAT_KEYS + _INT_KEYS + _BOOL_KEYS + _LIST_FLOAT_KEYS + _LIST_STR_KEYS + _STR_KEYS
)

_DEFAULTS = {
    "sigma_a": 0.0,
    "cost_aux": 0.0,
    "delta": 0.05,
    "replicates": 500,
    "seed": 0,
    "clamp": False,
    "binary": False,
}


def parse_config(path) -> dict[str, str]:
    """Read a flat ``key = value`` file; '#' starts a comment."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise CliUsageError(f"cannot read config {path}: {err}") from err
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise CliUsageError(
                f"{path}: line {lineno}: expected 'key = value', got {raw.strip()!r}"
            )
        key = key.strip().replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise CliUsageError(f"{path}: line {lineno}: unknown key {key!r}")
        if key in values:
            raise CliUsageError(f"{path}: line {lineno}: duplicate key {key!r}")
        values[key] = value.strip()
    return values


def _coerce_config(key: str, text: str) -> object:
    try:
        if key in _FLOAT_KEYS:
            return float(text)
        if key in _INT_KEYS:
            return int(text)
        if key in _BOOL_KEYS:
            lowered = text.lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {text!r}")
        if key in _LIST_FLOAT_KEYS:
            return [float(part) for part in text.replace(",", " ").split()]
        if key in _LIST_STR_KEYS:
            return [part for part in text.replace(",", " ").split()]
        return text
    except ValueError as err:
        raise CliUsageError(f"config value for {key}: {err}") from err


def _build_parser() -> _Parser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", default=None, metavar="FILE")
    shared.add_argument("--sigma-p", dest="sigma_p", type=float, default=None)
    shared.add_argument("--sigma-a", dest="sigma_a", type=float, default=None)
    shared.add_argument("--sigma-b", dest="sigma_b", type=float, default=None)
    shared.add_argument("--d", dest="d", type=float, default=None)
    shared.add_argument("--delta", dest="delta", type=float, default=None)
    shared.add_argument(
        "--cost-collect", dest="cost_collect", type=float, default=None
    )
    shared.add_argument(
        "--cost-primary", dest="cost_primary", type=float, default=None
    )
    shared.add_argument("--cost-aux", dest="cost_aux", type=float, default=None)
    shared.add_argument(
        "--budget", dest="budget", type=float, action="append", default=None
    )
    shared.add_argument("--replicates", dest="replicates", type=int, default=None)
    shared.add_argument("--seed", dest="seed", type=int, default=None)
    shared.add_argument("--design", dest="design", action="append", default=None)
    shared.add_argument("--input", dest="input", default=None, metavar="CSV")
    shared.add_argument("--outdir", dest="outdir", default=None, metavar="DIR")
    shared.add_argument(
        "--clamp", dest="clamp", action="store_true", default=None
    )
    shared.add_argument(
        "--binary", dest="binary", action="store_true", default=None
    )

    parser = _Parser(
        prog="hybridsurvey",
        description="survey design planning with a cheap auxiliary annotator",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("plan", parents=[shared], help="size designs for a target")
    sub.add_parser("estimate", parents=[shared], help="estimate from a sample file")
    sub.add_parser("simulate", parents=[shared], help="bootstrap designs from a pool")
    return parser


def _merge_settings(ns: argparse.Namespace) -> dict:
    config = parse_config(ns.config) if ns.config else {}
    settings: dict = {}
    for key in _CONFIG_KEYS:
        flag_value = getattr(ns, key)
        if key in config:
            config_value = _coerce_config(key, config[key])
            if flag_value is not None and flag_value != config_value:
                print(
                    f"warning: --{key.replace('_', '-')} overrides config "
                    f"value {config[key]!r}",
                    file=sys.stderr,
                )
        else:
            config_value = None
        settings[key] = flag_value if flag_value is not None else config_value
    for key, value in _DEFAULTS.items():
        if settings[key] is None:
            settings[key] = value
    if settings["outdir"] is None:
        settings["outdir"] = os.environ.get(OUTDIR_ENV, ".")
    return settings


def _require(settings: dict, keys: Sequence[str], command: str) -> None:
    missing = [f"--{key.replace('_', '-')}" for key in keys if settings[key] is None]
    if missing:
        raise CliUsageError(f"{command} requires {', '.join(missing)}")


def _planning_inputs(settings: dict) -> PlanningInputs:
    return PlanningInputs(
        population=PopulationModel(sigma_p=settings["sigma_p"]),
        primary=AnnotatorProfile(),
        auxiliary=AnnotatorProfile(sigma=settings["sigma_b"]),
        costs=CostModel(
            c_c=settings["cost_collect"],
            c_a=settings["cost_primary"],
            c_b=settings["cost_aux"],
        ),
        target=PrecisionTarget(d=settings["d"], delta=settings["delta"]),
    )


def _parse_designs(tokens: Optional[Sequence[str]]) -> Optional[list[Design]]:
    if not tokens:
        return None
    designs = []
    for token in tokens:
        name = token.strip().lower().replace("-", "_")
        try:
            designs.append(Design(name))
        except ValueError:
            valid = ", ".join(d.value for d in Design)
            raise CliUsageError(
                f"unknown design {token!r} (choose from: {valid})"
            ) from None
    return designs


def _single_budget(settings: dict) -> Optional[float]:
    budgets = settings["budget"]
    if budgets is None:
        return None
    if len(budgets) != 1:
        raise CliUsageError("plan takes a single --budget")
    return budgets[0]


def _cmd_plan(settings: dict) -> int:
    _require(
        settings, ("sigma_p", "sigma_b", "d", "cost_collect", "cost_primary"), "plan"
    )
    inputs = _planning_inputs(settings)
    plans = compare_designs(inputs)
    budget = _single_budget(settings)
    budget_plans = []
    if budget is not None:
        budget_plans.append(conventional_plan_from_budget(budget, inputs))
        try:
            budget_plans.append(plan_from_budget(budget, inputs))
        except InfeasibleDesignError:
            raise
        except DesignError:
            pass  # no hybrid exists here (e.g. auxiliary noisier than nature)
    document = dataio.build_plan_document(
        inputs, plans, budget=budget, budget_plans=budget_plans
    )
    curve = tradeoff_curve(inputs)
    gap = cost_gap_curve(inputs)
    written = dataio.emit_report(
        settings["outdir"], plan=document, tradeoff=curve, cost_gap=gap
    )
    for plan in plans:
        print(
            f"{plan.design}: n_a={plan.n_a} n_b={plan.n_b} "
            f"tsc={plan.tsc:.12g} variance={plan.predicted_variance:.12g}"
        )
    for path in written:
        print(f"wrote: {path}")
    return 0


def _cmd_estimate(settings: dict) -> int:
    _require(settings, ("input",), "estimate")
    ingest = dataio.ingest_point_csv if settings["binary"] else dataio.ingest_paired_csv
    samples = ingest(settings["input"], reorder=True)
    requested = _parse_designs(settings["design"])
    if requested is None:
        requested = [Design.AUXILIARY]
        if samples.n_a >= 1:
            requested = [
                Design.CONVENTIONAL,
                Design.HYBRID_OFFSET,
                Design.HYBRID_RATIO,
                Design.AUXILIARY,
            ]
    runners = {
        Design.CONVENTIONAL: lambda: conventional_mean(samples.primary_values),
        Design.AUXILIARY: lambda: auxiliary_mean(samples.aux_values),
        Design.HYBRID_OFFSET: lambda: offset_mean(samples),
        Design.HYBRID_RATIO: lambda: ratio_mean(samples),
    }
    estimates: dict[str, float] = {}
    for design in requested:
        if design not in runners:
            raise CliUsageError(
                f"design {design} is not available in the estimate command"
            )
        value = runners[design]()
        if settings["clamp"]:
            value = min(1.0, max(0.0, value))
        estimates[str(design)] = value
    document = dataio.build_estimates_document(
        estimates,
        n_a=samples.n_a,
        n_b=samples.n_b,
        clamped=bool(settings["clamp"]),
    )
    written = dataio.emit_report(settings["outdir"], estimates=document)
    for name, value in estimates.items():
        print(f"{name}: {value:.12g}")
    for path in written:
        print(f"wrote: {path}")
    return 0


def _cmd_simulate(settings: dict) -> int:
    _require(
        settings, ("input", "budget", "cost_collect", "cost_primary"), "simulate"
    )
    ingest = dataio.ingest_point_csv if settings["binary"] else dataio.ingest_paired_csv
    pool = ingest(settings["input"], reorder=True)
    costs = CostModel(
        c_c=settings["cost_collect"],
        c_a=settings["cost_primary"],
        c_b=settings["cost_aux"],
    )
    report = run_pool_bootstrap(
        pool,
        designs=_parse_designs(settings["design"]),
        budgets=settings["budget"],
        costs=costs,
        replicates=settings["replicates"],
        seed=settings["seed"],
        sigma_p=settings["sigma_p"],
        sigma_b=settings["sigma_b"],
    )
    written = dataio.emit_report(settings["outdir"], simulation=report)
    feasible = sum(1 for cell in report.cells if cell.feasible)
    print(
        f"simulated {len(report.cells)} cells ({feasible} feasible), "
        f"truth={report.truth:.12g}"
    )
    for path in written:
        print(f"wrote: {path}")
    return 0


_COMMANDS = {
    "plan": _cmd_plan,
    "estimate": _cmd_estimate,
    "simulate": _cmd_simulate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
        settings = _merge_settings(ns)
        return _COMMANDS[ns.command](settings)
    except CliUsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except InfeasibleDesignError as err:
        print(f"infeasible: {err}", file=sys.stderr)
        return 2
    except (DesignError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

import re

import pytest

import hybridsurvey as hs

# One-line verdict per acceptance criterion, printed after the run. The
# criterion number is parsed from the test name (test_criterion_<n>_...).

_CRITERIA = {
    1: "coral survey plan (n_b=53±1, n_a=5±1, <1s)",
    2: "cost-ratio crossover matches threshold within one integer step",
    3: "closed-form plan matches exhaustive search on random draws (<10s)",
    4: "offset estimator unbiased, variance matches formula under correlation",
    5: "correction variance and auxiliary threshold constants are exact",
    6: "offset SD <= bias-corrected SD in >=95% of comparison grid (<5min)",
    7: "two-stage variance matches Monte Carlo and decreases in s",
    8: "synthetic pool: hybrid beats conventional MAE, crossover in [2.5, 5.5]",
    9: "same seed gives byte-identical simulate output files",
}

_NAME_RE = re.compile(r"test_criterion_(\d+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = {}
    for outcome in ("passed", "failed", "error", "skipped"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" not in nodeid:
                continue
            match = _NAME_RE.search(nodeid)
            if not match:
                continue
            number = int(match.group(1))
            verdict = "PASS" if outcome == "passed" else "FAIL"
            # keep the worst verdict if a criterion shows up twice
            if results.get(number) != "FAIL":
                results[number] = verdict
    if not results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_CRITERIA):
        verdict = results.get(number, "NOT RUN")
        terminalreporter.write_line(
            f"criterion {number}: {verdict} - {_CRITERIA[number]}"
        )


@pytest.fixture
def coral_inputs():
    """The running coral-survey example used throughout the docs."""
    return hs.PlanningInputs(
        population=hs.PopulationModel(sigma_p=0.16),
        primary=hs.AnnotatorProfile(),
        auxiliary=hs.AnnotatorProfile(sigma=0.047),
        costs=hs.CostModel(c_c=1.0, c_a=10.0, c_b=0.0),
        target=hs.PrecisionTarget(d=0.058, delta=0.05),
    )

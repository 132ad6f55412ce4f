"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Each criterion is judged by the checks of the experiments that map to it,
run at their default configuration (the same runs the CLI performs).
Run ``python tests/test_acceptance.py`` for the bare list of lines.
"""

import time
from functools import lru_cache

import pytest

from spectral_interfaces.experiments import EXPERIMENTS, run_experiment
from spectral_interfaces.rates import fit_rate

# criterion -> (experiments, runtime budget in seconds or None)
CRITERIA = {
    "1": (["selftest"], 10.0),
    "2": (["wigner-airy"], 30.0),
    "3": (["bulk-interface", "weyl-bulk", "weyl-hlocal", "weyl-23"], None),
    "4": (["wigner-bessel"], None),
    "5": (["wigner-exterior"], None),
    "6": (["caustic-kernel"], None),
    "7": (["nodal-kr", "nodal-mc"], 600.0),
    "8": (["nodal-kr"], None),
    "9": (["bf-erf", "szasz", "linebundle-bf", "pbk-cp1"], 120.0),
    "10": (["pbk-critical"], None),
    "11": (["trace"], None),
    "12": (["metaplectic", "selftest"], 60.0),
}


@lru_cache(maxsize=None)
def _result(name):
    return run_experiment(name)


def evaluate(criterion):
    """(passed, line) for one criterion from the checks tagged with it."""
    names, budget = CRITERIA[criterion]
    checks, seconds = [], 0.0
    for name in names:
        res = _result(name)
        seconds += res.seconds
        checks += [c for c in res.checks if c.criterion == criterion]
    failed = [c for c in checks if not c.passed]
    within = budget is None or seconds < budget
    passed = bool(checks) and not failed and within
    if failed:
        detail = "; ".join(f"{c.name}: {c.detail}" for c in failed)
    else:
        detail = f"all {len(checks)} checks passed" if len(checks) > 1 else "the single check passed"
    timing = f"{seconds:.1f} s" + ("" if budget is None else f" (budget {budget:.0f} s)")
    return passed, f"{'PASS' if passed else 'FAIL'} criterion {criterion}: {detail} [{timing}]"


def test_every_experiment_maps_to_a_criterion():
    for exp in EXPERIMENTS.values():
        assert exp.criteria
    assert {c for names, _ in CRITERIA.values() for n in names for c in EXPERIMENTS[n].criteria} == set(CRITERIA)


SLOW = {"3", "7"}


@pytest.mark.parametrize(
    "criterion",
    [pytest.param(c, id=f"criterion_{c}", marks=[pytest.mark.slow] if c in SLOW else []) for c in CRITERIA],
)
def test_acceptance(criterion, report_criterion):
    passed, line = evaluate(criterion)
    report_criterion(line)
    assert passed, line


def test_airy_profile_rate_beyond_the_stated_range(report_criterion):
    # not a criterion: the local rate on the 49-point grid approaches 2/3 only for larger N
    t0 = time.perf_counter()
    res = run_experiment("wigner-airy", {"N": [4000, 8000, 16000]})
    hbars, errors = _sup_errors(res)
    rep = fit_rate(hbars, errors, 2 / 3, 0.15)
    report_criterion(f"INFO criterion 2 at N = 4000..16000: fitted {rep.exponent:.3f} ({time.perf_counter() - t0:.1f} s)")
    assert 0.55 < rep.exponent < 0.75


def _sup_errors(res):
    col_h, col_e = res.columns.index("hbar"), res.columns.index("abs_error")
    worst = {}
    for row in res.rows:
        worst[row[col_h]] = max(worst.get(row[col_h], 0.0), row[col_e])
    return list(worst), list(worst.values())


if __name__ == "__main__":
    for c in CRITERIA:
        print(evaluate(c)[1])

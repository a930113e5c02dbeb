"""Smoke runs of the verification suites at reduced trial counts.

The acceptance module runs these at their full sizes; here we only pin
the reporting shape and that small runs come out clean.
"""

from dpptest.suites import (
    run_coupling_suite,
    run_crosspath_suite,
    run_det_perturbation_suite,
    run_helper_inequality_suite,
    run_min_singular_suite,
)


def test_min_singular_suite_small():
    res = run_min_singular_suite(trials=40, n_max=5, seed=0)
    assert res.passed
    assert res.trials == 40
    assert res.failures == 0
    assert res.worst_slack >= 0.0
    assert res.name in res.summary_line()


def test_det_perturbation_suite_small():
    res = run_det_perturbation_suite(trials=2000, n_max=4, seed=0)
    assert res.passed
    assert res.checks >= res.trials  # zero-perturbation spot checks add on


def test_helper_suite_small():
    res = run_helper_inequality_suite(trials=5000, seed=0)
    assert res.passed
    assert res.failures == 0


def test_coupling_suite_small():
    res = run_coupling_suite(reps=60, marginal_draws=30_000, seed=0)
    assert res.passed
    assert "coupling" in res.name


def test_crosspath_suite_small():
    res = run_crosspath_suite(trials=25, n_hi=5, seed=0)
    assert res.passed
    assert res.failures == 0


def test_summary_lines_mention_pass_state():
    res = run_min_singular_suite(trials=5, n_max=3, seed=1)
    line = res.summary_line()
    assert "pass" in line or "PASS" in line

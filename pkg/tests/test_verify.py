import pytest

from ilwb.groupoid import BudgetExceeded
from ilwb.verify import RunConfig, render_text, run_verify_suite


def test_vaught_suite_at_cap_two():
    report = run_verify_suite(RunConfig(cap=2), "vaught")
    assert report["failed"] == 0 and report["passed"] > 0


def test_morley_suite_counts_agree():
    report = run_verify_suite(RunConfig(cap=3), "morley")
    assert report["failed"] == 0
    (counts,) = [c for c in report["suites"][0]["checks"] if c["name"] == "model counts agree"]
    assert counts["detail"].startswith("source 12, target 12")


def test_everything_at_cap_zero():
    report = run_verify_suite(RunConfig(cap=0), "all")
    assert report["failed"] == 0
    assert len(report["suites"]) == 6


def test_reports_are_deterministic_given_the_seed():
    cfg = RunConfig(cap=2, seed=7)
    assert run_verify_suite(cfg, "pretopos") == run_verify_suite(cfg, "pretopos")
    assert render_text(run_verify_suite(cfg, "groupoid")).endswith("0 failed\n")


def test_budget_is_reported_not_truncated():
    with pytest.raises(BudgetExceeded, match="cap"):
        run_verify_suite(RunConfig(cap=3, budget=5), "groupoid")


@pytest.mark.parametrize("kwargs", [{"cap": -1}, {"budget": 0}, {"output": "xml"}])
def test_config_is_validated(kwargs):
    with pytest.raises(ValueError):
        RunConfig(**kwargs)


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_verify_suite(RunConfig(cap=0), "nonsense")

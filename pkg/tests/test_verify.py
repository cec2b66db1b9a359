import pytest

from marl_avoidance.errors import ConfigurationError
from marl_avoidance.harness.verify import (
    SUITES,
    buffers_suite,
    collapse_suite,
    grad_check_suite,
    run_suite,
    run_suites,
)


def failed(criteria):
    return [c.name for c in criteria if not c.passed]


@pytest.mark.parametrize("suite", ["td-target", "mixers", "reward-oracle", "staged"])
def test_cheap_suites_pass(suite):
    report = run_suite(suite)
    assert report.passed, failed(report.criteria)


def test_grad_check_suite_passes():
    criteria = grad_check_suite()
    assert len(criteria) == 25
    assert not failed(criteria)


def test_grad_criteria_state_acceptance_rule():
    """Test that each gradient criterion reports the error at h and the retry rule."""
    for criterion in grad_check_suite():
        assert "h/10" in criterion.detail
        assert "err@h=" in criterion.detail


def test_perturbed_gradients_fail():
    """Test the negative control: offset analytic gradients must be caught."""
    criteria = grad_check_suite(perturb=1e-2)
    assert len(failed(criteria)) == len(criteria)


def test_perturbed_staged_suite_fails():
    report = run_suite("staged", perturb=1e-2)
    assert not report.passed
    assert failed(report.criteria) == ["stage-one-actor-gradient"]


def test_collapse_suite():
    assert not failed(collapse_suite(updates=20))


def test_buffers_suite():
    assert not failed(buffers_suite(programs=500))


def test_determinism_suite(tmp_path):
    report = run_suite("determinism", workdir=str(tmp_path))
    assert report.passed, failed(report.criteria)


def test_unknown_suite():
    with pytest.raises(ConfigurationError, match="unknown suite"):
        run_suite("speed")


def test_all_excludes_learning(monkeypatch):
    seen = []
    monkeypatch.setattr("marl_avoidance.harness.verify.run_suite", lambda name, **kwargs: seen.append(name))
    run_suites("all")
    assert seen == [s for s in SUITES if s != "learning"]


@pytest.mark.slow
def test_learning_suite(tmp_path):
    report = run_suite("learning", workdir=str(tmp_path))
    assert report.passed, failed(report.criteria)

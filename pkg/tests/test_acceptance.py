"""Acceptance criteria 1-11 at full scale, one pass/fail line per check."""
import pytest

from hypconc.acceptance import SUITES, run_suite


@pytest.mark.parametrize("name", list(SUITES))
def test_criterion(name, capsys):
    res = run_suite(name, seed=0)
    with capsys.disabled():
        print("\n" + res.summary())
    failed = [c.label for c in res.checks if not c.passed]
    assert not failed, f"criterion {res.criterion} ({name}) failed: {failed}"

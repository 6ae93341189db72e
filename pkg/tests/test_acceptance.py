"""Acceptance criteria 1-11.

Each test runs one criterion at its full instance count with seed 0 and prints
a single PASS/FAIL line. All comparisons are exact over the rationals
(tolerance 0); the two timed criteria also report their wall-clock budget.
"""
import pytest

from hsw.suites import CRITERIA, SuiteConfig, acceptance_line


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k, capsys):
    res = CRITERIA[k](SuiteConfig(seed=0))
    with capsys.disabled():
        print("\n" + acceptance_line(k, res))
    assert not res.failures, res.failures[:3]
    if res.limit is not None:
        assert res.elapsed <= res.limit

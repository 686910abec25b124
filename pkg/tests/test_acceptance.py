"""Acceptance criteria, one test each; prints a PASS/FAIL line per criterion.

Run ``pytest tests/test_acceptance.py -v`` to see the lines next to the test
names. Each criterion function carries its own tolerances.
"""
import json

import pytest

from levilens.verification import CRITERIA


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    result = CRITERIA[number]()
    with capsys.disabled():
        print(f"\n{result.line()}  {json.dumps(result.measured, sort_keys=True, default=str)}")
    assert result.passed, result.measured


def test_injected_determinant_error_is_caught():
    # negative control: a wrong constant must fail criterion 1
    result = CRITERIA[1](det_constant_scale=1 + 1e-6)
    assert not result.passed

"""One test per acceptance criterion, at the stated tolerances.

Each test prints a line ``criterion NN  <name>  PASS|FAIL|UNPROVEN``; the
lines are also repeated in the pytest terminal summary.  Run this file
directly to get only those lines.
"""
import sys

import pytest

from rvlab.checks import CRITERIA, CheckConfig, run_criterion

# criteria where an unfinished search or derivation is an allowed outcome
MAY_BE_UNPROVEN = {2, 12}

LINES: dict[int, str] = {}


def _line(number, res):
    return f"criterion {number:2d}  {res.name[3:]:<26} {res.status:<9} ({res.elapsed:.1f} s)"


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    res = run_criterion(number, CheckConfig())
    LINES[number] = _line(number, res)
    print(LINES[number])
    allowed = {"PASS", "UNPROVEN"} if number in MAY_BE_UNPROVEN else {"PASS"}
    assert res.status in allowed, res.details


if __name__ == "__main__":
    failed = 0
    for number in sorted(CRITERIA):
        res = run_criterion(number, CheckConfig())
        print(_line(number, res), flush=True)
        failed += res.status == "FAIL"
    sys.exit(1 if failed else 0)

"""Every acceptance criterion at full size, one PASS/FAIL line each.

The lines are repeated in the terminal summary.  Three criteria (1, 3, 7)
fail with the current targets; the README and decisions ledger explain why.
These tests are left failing on purpose rather than relaxed.
"""

import pytest

from ptau import verify

from conftest import ACCEPTANCE_LINES

CHECKS = [
    verify.check_annulus_formula,
    verify.check_annulus_standard,
    verify.check_cross_sampler,
    verify.check_coupling,
    verify.check_annulus_center,
    verify.check_lmtd,
    verify.check_localize_intervals,
    verify.check_containment,
    verify.check_dumbbell,
    verify.check_disk_bias,
    verify.check_determinism,
    verify.check_annulus_fd,
]


@pytest.mark.slow
@pytest.mark.parametrize("check", CHECKS, ids=lambda f: f.__name__.removeprefix("check_"))
def test_criterion(check):
    res = check()
    line = res.line()
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert res.passed, line

"""Acceptance gate: every criterion runs at its stated tolerance and
reports a single pass/fail line.

The final criterion (quasilinear_run) is the expensive coarse 3-D sweep;
deselect it with `-m "not full"` for a quick pass.
"""

import pytest

from spikelab.acceptance import CRITERIA

_FUNCS = {name: func for name, _, func in CRITERIA}
_TIERS = {name: tier for name, tier, _ in CRITERIA}


def _param(name):
    marks = [pytest.mark.full] if _TIERS[name] == "full" else []
    return pytest.param(name, marks=marks, id=name)


@pytest.mark.parametrize("name", [_param(n) for n in _FUNCS])
def test_criterion(name, capsys):
    result = _FUNCS[name]()
    with capsys.disabled():
        status = "PASS" if result.passed else "FAIL"
        print(f"\n[{status}] {name}: {result.detail}")
    assert result.passed, f"{name}: {result.detail}"

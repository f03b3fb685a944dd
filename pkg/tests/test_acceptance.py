"""Acceptance gate: all numbered criteria run once per session; each test
asserts one criterion and prints its single pass/fail line."""

import pytest

from hilbertlab.acceptance import _CRITERIA, run_acceptance


@pytest.fixture(scope="module")
def records():
    return {r["index"]: r for r in run_acceptance()}


@pytest.mark.parametrize("index,name",
                         [(i, n) for i, n, _ in _CRITERIA],
                         ids=[f"{i:02d}-{n}" for i, n, _ in _CRITERIA])
def test_criterion(records, index, name):
    rec = records[index]
    status = "PASS" if rec["passed"] else "FAIL"
    print(f"[{status}] criterion {index:2d} {name}: {rec['detail']} "
          f"({rec['elapsed']:.1f}s)")
    assert rec["passed"], f"criterion {index} {name}: {rec['detail']}"

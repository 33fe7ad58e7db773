import pytest

from shiftdet.acceptance import CRITERIA, DEFAULT_SEED, run

OUTCOMES = []


@pytest.mark.parametrize("number", [k for k, _, _ in CRITERIA], ids=[f"c{k}-{n.replace(' ', '-')}" for k, n, _ in CRITERIA])
def test_criterion(number):
    outcome = run(number, DEFAULT_SEED)
    OUTCOMES.append(outcome)
    print(outcome.line())
    assert outcome.passed, outcome.detail

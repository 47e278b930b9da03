"""Acceptance gate: every criterion must pass within its runtime budget.

Each test prints its pass/fail line so the suite output doubles as the
acceptance report.
"""

import pytest

from gq3.acceptance import (
    check_collection_laws,
    check_deep_relator_example,
    check_duality_perfectness,
    check_finite_field_degeneration,
    check_morphism_equivalence,
    check_obstruction_verdicts,
    check_reconstruction_round_trip,
    check_tame_symbol_isomorphisms,
    check_two_adic,
    check_witt_counts,
)

BUDGETS = {
    "1 duality perfectness": 10.0,
    "2 collection laws": 30.0,
    "3 reconstruction round trip": 60.0,
    "4 deep relator example": None,
    "5 obstruction screening": None,
    "6 tame local symbol isomorphism": 180.0,  # < 60 s per instance, 3 instances
    "7 finite field degeneration": None,
    "8 dyadic field check": None,
    "9 morphism equivalence": 60.0,
    "10 Witt counts": None,
}

CHECKS = [
    check_duality_perfectness,
    check_collection_laws,
    check_reconstruction_round_trip,
    check_deep_relator_example,
    check_obstruction_verdicts,
    check_tame_symbol_isomorphisms,
    check_finite_field_degeneration,
    check_two_adic,
    check_morphism_equivalence,
    check_witt_counts,
]


@pytest.mark.parametrize("check", CHECKS, ids=lambda c: c.__name__)
def test_acceptance_criterion(check, capsys):
    result = check(0)
    status = "PASS" if result.passed else "FAIL"
    with capsys.disabled():
        print(f"[{status}] {result.name}: {result.detail} ({result.seconds:.2f}s)")
    assert result.passed, f"{result.name}: {result.detail}"
    budget = BUDGETS[result.name]
    if budget is not None:
        assert result.seconds < budget, (
            f"{result.name} took {result.seconds:.2f}s, over the {budget:.0f}s budget"
        )

"""The boundary-value system, its LP oracle, witnesses, and the decision layers."""

import random
from fractions import Fraction

import pytest

from reflecto import (
    DecisionStatus,
    NotCompletelySError,
    ProofMethod,
    RatMatrix,
    RationalParseError,
    Relation,
    ReflectoError,
    VarIndex,
    assignment_from_table,
    assignment_to_table,
    build_system,
    canonical_variables,
    check_tight_system,
    decide_tight_matrix,
    nonnegative_case_witness,
    parse_variable_key,
    sample_b_vectors,
    verify_assignment,
)

REFLECTION = RatMatrix([[1, 0, 0], [-3, 1, 0], [3, -2, 1]])
ONES3 = (Fraction(1), Fraction(1), Fraction(1))

# Hand-checked non-trivial solution of the system for (REFLECTION, ones).
# The x{1,2} corner is forced to 1 by the singleton balance rows together
# with monotonicity; the remaining variables form a one-parameter family and
# this is its midpoint.
WITNESS_TABLE = {
    "x{}": "1",
    "x{1}": "1",
    "x{2}": "1",
    "x{3}": "3/4",
    "x{1,2}": "1",
    "x{1,3}": "1/2",
    "x{2,3}": "1/2",
    "x{1,2,3}": "1/2",
    "x{}^(1)": "1",
    "x{2}^(1)": "1",
    "x{3}^(1)": "1/2",
    "x{2,3}^(1)": "1/2",
    "x{}^(2)": "1",
    "x{1}^(2)": "1",
    "x{3}^(2)": "1/2",
    "x{1,3}^(2)": "1/2",
    "x{}^(3)": "1",
    "x{1}^(3)": "1/2",
    "x{2}^(3)": "1/2",
    "x{1,2}^(3)": "1/2",
}


# --------------------------------------------------------------------------
# variable indexing
# --------------------------------------------------------------------------


def test_boundary_variables_merge_their_own_index():
    assert VarIndex.boundary(1, {1, 2}) == VarIndex.boundary(1, {2})
    assert VarIndex.boundary(3, {3}) == VarIndex.boundary(3, ())
    assert VarIndex.boundary(3, ()).is_constant


def test_canonical_variable_count():
    for d in range(1, 6):
        total = len(canonical_variables(d))
        assert total == 2**d + d * 2 ** (d - 1)
        free = sum(1 for v in canonical_variables(d) if not v.is_constant)
        assert free == (2**d - 1) + d * (2 ** (d - 1) - 1)


def test_variable_keys_round_trip():
    for d in range(1, 5):
        for var in canonical_variables(d):
            assert parse_variable_key(var.key(), d) == var


def test_parse_variable_key_canonicalizes_aliases():
    assert parse_variable_key("x{1,2}^(1)", 3) == parse_variable_key("x{2}^(1)", 3)


def test_parse_variable_key_rejects_malformed():
    for bad in ["x{0}", "x{4}", "y{1}", "x{1,1}", "x{1}^(0)", "x{1}^(5)", "x(1)"]:
        with pytest.raises(RationalParseError):
            parse_variable_key(bad, 3)


def test_conflicting_aliases_are_rejected():
    # Two names for the same canonical variable carrying different values:
    # exactly the inconsistency that makes naive transcriptions of published
    # witness tables unverifiable.
    table = {"x{1,2}^(1)": "1/2", "x{2}^(1)": "1"}
    with pytest.raises(RationalParseError):
        assignment_from_table(table, 2)


def test_assignment_table_round_trip():
    assignment = assignment_from_table(WITNESS_TABLE, 3)
    assert assignment_to_table(assignment) == WITNESS_TABLE


# --------------------------------------------------------------------------
# system assembly
# --------------------------------------------------------------------------


def test_dimension_one_system_forces_all_ones():
    R = RatMatrix([[Fraction(2)]])
    system = build_system(R, [1])
    assert [v.key() for v in system.variables] == ["x{1}"]
    balance = [row for row in system.rows if row.label.startswith("balance")]
    assert len(balance) == 1
    # single row 2*(1 - x{1}) = 0
    assert balance[0].terms == ((VarIndex.plain((1,)), Fraction(-2)),)
    assert balance[0].rhs == Fraction(-2)
    verdict = check_tight_system(R, [1])
    assert verdict.tight and verdict.optimum == 1


def test_two_dimensional_balance_rows_match_hand_expansion():
    R = RatMatrix([[2, -1], [-1, 2]])
    system = build_system(R, [Fraction(1), Fraction(3)])
    rows = {row.label: row for row in system.rows}
    # singleton row for D={1}, i=1: 2*(1 - x1) - 3*(x1^(2) - x1) = 0
    row = rows["balance[D={1},i=1]"]
    assert dict(row.terms) == {
        VarIndex.plain((1,)): Fraction(1),  # -(2) - (-3) = 1
        VarIndex.boundary(2, (1,)): Fraction(-3),
    }
    assert row.rhs == Fraction(-2)
    # pair rows exist for both i
    assert "balance[D={1,2},i=1]" in rows and "balance[D={1,2},i=2]" in rows
    # monotonicity on cover pairs
    assert "mono[x{1}>=x{1,2}]" in rows and "mono[x{2}>=x{1,2}]" in rows


def test_all_ones_is_feasible_in_every_built_system():
    rng = random.Random(41)
    for _ in range(20):
        d = rng.randint(1, 3)
        entries = [
            [Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(d)]
            for _ in range(d)
        ]
        for i in range(d):
            entries[i][i] = abs(entries[i][i]) + 1
        R = RatMatrix(entries)
        b = [Fraction(rng.randint(1, 5), rng.randint(1, 5)) for _ in range(d)]
        system = build_system(R, b, aux_bounded=rng.random() < 0.5)
        ones = {v: Fraction(1) for v in canonical_variables(d)}
        report = verify_assignment(system, ones)
        assert report.ok and report.is_all_ones


def test_unbounded_aux_mode_adds_anchor_cover_rows():
    R = RatMatrix([[2, -1], [-1, 2]])
    bounded = build_system(R, ONES3[:2], aux_bounded=True)
    relaxed = build_system(R, ONES3[:2], aux_bounded=False)
    anchors = [r for r in relaxed.rows if r.label.startswith("mono[x{}^")]
    assert len(anchors) == 2  # one per boundary family at d = 2
    assert not [r for r in bounded.rows if r.label.startswith("mono[x{}^")]
    assert bounded.bound(VarIndex.boundary(1, (2,))) == (Fraction(0), Fraction(1))
    assert relaxed.bound(VarIndex.boundary(1, (2,))) == (None, None)


# --------------------------------------------------------------------------
# witness verification
# --------------------------------------------------------------------------


def test_hand_witness_verifies_in_both_modes():
    assignment = assignment_from_table(WITNESS_TABLE, 3)
    for aux_bounded in (True, False):
        system = build_system(REFLECTION, ONES3, aux_bounded)
        report = verify_assignment(system, assignment)
        assert report.ok, report.failures()
        assert not report.is_all_ones


def test_all_ones_assignment_reports_trivial():
    system = build_system(REFLECTION, ONES3)
    ones = {v: Fraction(1) for v in canonical_variables(3)}
    report = verify_assignment(system, ones)
    assert report.ok and report.is_all_ones


def test_perturbed_witness_fails_a_balance_row():
    table = dict(WITNESS_TABLE)
    table["x{3}"] = "1"
    assignment = assignment_from_table(table, 3)
    system = build_system(REFLECTION, ONES3)
    report = verify_assignment(system, assignment)
    assert not report.ok
    failing = [c.label for c in report.failures()]
    assert "balance[D={3},i=3]" in failing


def test_missing_variable_is_reported_by_key():
    from reflecto import MissingVariableError

    table = dict(WITNESS_TABLE)
    del table["x{2,3}^(1)"]
    assignment = assignment_from_table(table, 3)
    system = build_system(REFLECTION, ONES3)
    with pytest.raises(MissingVariableError) as info:
        verify_assignment(system, assignment)
    assert "x{2,3}^(1)" in str(info.value)


# --------------------------------------------------------------------------
# the LP oracle
# --------------------------------------------------------------------------


def test_reflection_fixture_is_not_tight_for_unit_b():
    verdict = check_tight_system(REFLECTION, ONES3)
    assert not verdict.tight
    assert verdict.variable_count == 16
    assert verdict.optimum == Fraction(11, 2)
    system = build_system(REFLECTION, ONES3)
    report = verify_assignment(system, verdict.witness)
    assert report.ok and not report.is_all_ones


def test_reflection_fixture_modes_agree():
    bounded = check_tight_system(REFLECTION, ONES3, aux_bounded=True)
    relaxed = check_tight_system(REFLECTION, ONES3, aux_bounded=False)
    assert bounded.tight == relaxed.tight == False
    assert bounded.optimum == relaxed.optimum == Fraction(11, 2)


def test_reflection_fixture_is_tight_for_some_b():
    # Non-tightness genuinely depends on b here: the balance row for D={3}
    # degenerates when 3*b1 - 2*b2 + b3 = 0 and monotonicity then pins
    # every remaining variable at 1 (hand elimination).
    verdict = check_tight_system(REFLECTION, (1, 2, 1))
    assert verdict.tight
    assert verdict.optimum == verdict.variable_count


def test_symmetric_all_ones_matrix_is_not_tight():
    verdict = check_tight_system(RatMatrix([[1, 1], [1, 1]]), (1, 1))
    assert not verdict.tight
    system = build_system(RatMatrix([[1, 1], [1, 1]]), (1, 1))
    assert verify_assignment(system, verdict.witness).ok


def test_strictly_coupled_m_matrix_is_tight():
    R = RatMatrix([[3, -1, -1], [-1, 3, -1], [-1, -1, 3]])
    verdict = check_tight_system(R, ONES3)
    assert verdict.tight


def test_staircase_matrix_is_tight_for_several_b():
    R = RatMatrix(
        [
            [Fraction(1, 3), 0, 0],
            [Fraction(-1, 3), Fraction(1, 2), Fraction(-1, 6)],
            [0, Fraction(-1, 2), Fraction(1, 2)],
        ]
    )
    for b in (ONES3,) + sample_b_vectors(3, 3, 51):
        assert check_tight_system(R, b).tight


def test_decoupled_diagonal_system_admits_non_unit_solutions():
    # A decoupled coordinate never anchors its cross-boundary unknowns: for
    # diagonal R the variables x{1,2}, x{2}^(1), x{1}^(2) only appear in the
    # pair balance rows, which equate them without pinning the level.
    for d in (2, 3):
        verdict = check_tight_system(RatMatrix.identity(d), [1] * d)
        assert not verdict.tight
        system = build_system(RatMatrix.identity(d), [1] * d)
        report = verify_assignment(system, verdict.witness)
        assert report.ok and not report.is_all_ones


def test_block_diagonal_m_matrix_is_not_tight_either():
    R = RatMatrix([[1, -1, 0], [-1, 2, 0], [0, 0, 1]])
    verdict = check_tight_system(R, ONES3)
    assert not verdict.tight


def test_b_absorption_is_structural():
    rng = random.Random(42)
    for _ in range(15):
        d = rng.randint(1, 3)
        entries = [
            [Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(d)]
            for _ in range(d)
        ]
        for i in range(d):
            entries[i][i] = abs(entries[i][i]) + 1
        R = RatMatrix(entries)
        b = [Fraction(rng.randint(1, 6), rng.randint(1, 6)) for _ in range(d)]
        absorbed = R @ RatMatrix.diagonal(b)
        left = build_system(R, b)
        right = build_system(absorbed, [1] * d)
        assert left.rows == right.rows
        assert left.variables == right.variables


def test_rejects_nonpositive_b():
    from reflecto import MatrixShapeError

    with pytest.raises(MatrixShapeError):
        build_system(REFLECTION, (1, 0, 1))
    with pytest.raises(MatrixShapeError):
        build_system(REFLECTION, (1, 1))


# --------------------------------------------------------------------------
# explicit two-by-two witness
# --------------------------------------------------------------------------


def test_nonnegative_case_witness_matches_formulas():
    witness = nonnegative_case_witness(
        RatMatrix([[1, 1], [1, 1]]), (1, 1), Fraction(1, 2)
    )
    assert witness[VarIndex.plain((1,))] == Fraction(3, 4)
    assert witness[VarIndex.plain((2,))] == Fraction(3, 4)
    assert witness[VarIndex.plain((1, 2))] == Fraction(1, 2)
    assert witness[VarIndex.boundary(1, (2,))] == Fraction(1, 2)
    assert witness[VarIndex.boundary(2, (1,))] == Fraction(1, 2)


def test_nonnegative_case_witness_with_zero_entry():
    witness = nonnegative_case_witness(
        RatMatrix([[1, 0], [1, 1]]), (1, 1), Fraction(1, 2)
    )
    assert witness[VarIndex.plain((1,))] == Fraction(1)
    assert witness[VarIndex.plain((2,))] == Fraction(3, 4)
    assert witness[VarIndex.plain((1, 2))] == Fraction(1, 2)
    system = build_system(RatMatrix([[1, 0], [1, 1]]), (1, 1))
    assert verify_assignment(system, witness).ok


def test_nonnegative_case_witness_collapses_at_eps_one():
    witness = nonnegative_case_witness(RatMatrix([[1, 1], [1, 1]]), (1, 1), Fraction(1))
    assert all(v == 1 for v in witness.values())


def test_nonnegative_case_witness_validates_inputs():
    with pytest.raises(ReflectoError):
        nonnegative_case_witness(RatMatrix([[1, 1], [1, 1]]), (1, 1), Fraction(0))
    with pytest.raises(ReflectoError):
        nonnegative_case_witness(RatMatrix([[1, 1], [1, 1]]), (1, 1), Fraction(3, 2))
    with pytest.raises(ReflectoError):
        nonnegative_case_witness(RatMatrix([[2, -1], [-1, 2]]), (1, 1), Fraction(1, 2))


# --------------------------------------------------------------------------
# the layered decision
# --------------------------------------------------------------------------


def test_decide_reflection_fixture_not_tight_at_unit_b():
    decision = decide_tight_matrix(REFLECTION)
    assert decision.status is DecisionStatus.NOT_TIGHT
    assert decision.b_witness == ONES3
    system = build_system(REFLECTION, ONES3)
    assert verify_assignment(system, decision.witness).ok


def test_decide_staircase():
    R = RatMatrix(
        [
            [Fraction(1, 3), 0, 0],
            [Fraction(-1, 3), Fraction(1, 2), Fraction(-1, 6)],
            [0, Fraction(-1, 2), Fraction(1, 2)],
        ]
    )
    decision = decide_tight_matrix(R)
    assert decision.status is DecisionStatus.TIGHT_PROVEN
    assert decision.method is ProofMethod.STAIRCASE


def test_decide_two_by_two_and_dim_one():
    decision = decide_tight_matrix(RatMatrix([[2, -1], [-1, 2]]))
    assert decision.status is DecisionStatus.TIGHT_PROVEN
    assert decision.method is ProofMethod.TWO_BY_TWO
    decision = decide_tight_matrix(RatMatrix([[Fraction(1, 2)]]))
    assert decision.status is DecisionStatus.TIGHT_PROVEN
    assert decision.method is ProofMethod.DIM_ONE


def test_decide_m_matrix_route():
    R = RatMatrix([[1, 0, 0], [0, 1, 0], [-1, 0, 1]])
    # not staircase (zero subdiagonal), but an M-matrix
    decision = decide_tight_matrix(R)
    assert decision.status is DecisionStatus.TIGHT_PROVEN
    assert decision.method is ProofMethod.M_MATRIX


def test_decide_nonnegative_two_by_two_produces_witness():
    decision = decide_tight_matrix(RatMatrix([[1, 1], [1, 1]]))
    assert decision.status is DecisionStatus.NOT_TIGHT
    assert decision.b_witness == (Fraction(1), Fraction(1))
    system = build_system(RatMatrix([[1, 1], [1, 1]]), (1, 1))
    report = verify_assignment(system, decision.witness)
    assert report.ok and not report.is_all_ones


def test_decide_requires_completely_s():
    with pytest.raises(NotCompletelySError) as info:
        decide_tight_matrix(RatMatrix([[1, -1], [-1, 1]]))
    assert info.value.failing_subset == (1, 2)


def test_decide_sampled_stages():
    # Tight at unit b but outside every sign certificate: the column-scaled
    # variant of the reflection fixture, whose unit-b system is the fixture's
    # system at b = (1, 2, 1).
    R = RatMatrix([[1, 0, 0], [-3, 2, 0], [3, -4, 1]])
    decision = decide_tight_matrix(R, sample_count=0)
    assert decision.status is DecisionStatus.UNKNOWN_SAMPLED
    assert decision.tested_b == ((Fraction(1), Fraction(1), Fraction(1)),)

    # With sampling enabled the decision must stay sound either way.
    decision = decide_tight_matrix(R, sample_count=5, seed=3)
    if decision.status is DecisionStatus.NOT_TIGHT:
        system = build_system(R, decision.b_witness)
        assert verify_assignment(system, decision.witness).ok
    else:
        assert decision.status is DecisionStatus.UNKNOWN_SAMPLED


def test_sampled_b_vectors_are_reproducible():
    assert sample_b_vectors(3, 4, 0) == sample_b_vectors(3, 4, 0)
    assert sample_b_vectors(3, 4, 0) != sample_b_vectors(3, 4, 1)
    for b in sample_b_vectors(5, 10, 9):
        assert all(0 < v <= 16 for v in b)
        assert all(v.denominator <= 16 for v in b)

"""Membership tests for the matrix classes that govern reflection matrices.

A square matrix is an S-matrix when some positive vector has a strictly
positive image, completely-S when every principal submatrix is an S-matrix,
a P-matrix when every principal minor is positive, and an M-matrix when it is
a P-matrix with nonpositive off-diagonal entries.  The inclusions
M => P => completely-S hold and are asserted by the test suite.

The strict system {x > 0, Cx > 0} is decided through the closed feasibility
system {x >= 0, Cx >= 1}: a solution of the closed system yields x + eps*1 as
a strict solution for small eps, and conversely any strict solution scales
into the closed one.  This makes the question decidable by one exact LP.

Principal subsets are enumerated in lexicographic order of their sorted index
tuples, and the first failing subset is reported, so results are deterministic
regardless of any internal evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterator, Optional

from .errors import DimensionCapError, MatrixShapeError
from .linprog import LpStatus, Relation, constraint, linear_program, lp_solve
from .matrix import RatMatrix

DEFAULT_DIMENSION_CAP = 12


def subsets_lex(n: int) -> Iterator[tuple[int, ...]]:
    """All nonempty subsets of {1..n} in lexicographic order of sorted tuples."""

    def rec(prefix: tuple[int, ...], start: int) -> Iterator[tuple[int, ...]]:
        for k in range(start, n + 1):
            current = prefix + (k,)
            yield current
            yield from rec(current, k + 1)

    yield from rec((), 1)


def _require_square(matrix: RatMatrix) -> int:
    if not matrix.is_square:
        raise MatrixShapeError("classification requires a square matrix")
    return matrix.rows


def _check_cap(d: int, cap: int) -> None:
    if d > cap:
        raise DimensionCapError(
            f"dimension {d} exceeds the subset-enumeration cap {cap}"
        )


def is_s_matrix(matrix: RatMatrix) -> bool:
    """True iff some x > 0 has Cx > 0, decided by exact LP feasibility."""
    d = _require_square(matrix)
    rows = [
        constraint(matrix.row(i), Relation.GE, 1)
        for i in range(d)
    ]
    program = linear_program(
        [Fraction(0)] * d, rows, bounds=[(Fraction(0), None)] * d
    )
    outcome = lp_solve(program)
    return outcome.status is LpStatus.OPTIMAL


def is_completely_s(
    matrix: RatMatrix, cap: int = DEFAULT_DIMENSION_CAP
) -> tuple[bool, Optional[tuple[int, ...]]]:
    """Check every principal submatrix; returns the first failing subset."""
    d = _require_square(matrix)
    _check_cap(d, cap)
    for subset in subsets_lex(d):
        if not is_s_matrix(matrix.principal_submatrix(subset)):
            return False, subset
    return True, None


def is_p_matrix(
    matrix: RatMatrix, cap: int = DEFAULT_DIMENSION_CAP
) -> tuple[bool, Optional[tuple[int, ...]]]:
    """True iff every principal minor is positive; first failure reported."""
    d = _require_square(matrix)
    _check_cap(d, cap)
    for subset in subsets_lex(d):
        if matrix.principal_submatrix(subset).det() <= 0:
            return False, subset
    return True, None


def is_m_matrix(matrix: RatMatrix, cap: int = DEFAULT_DIMENSION_CAP) -> bool:
    """P-matrix with nonpositive off-diagonal entries."""
    d = _require_square(matrix)
    for i in range(d):
        for j in range(d):
            if i != j and matrix.at(i, j) > 0:
                return False
    ok, _ = is_p_matrix(matrix, cap)
    return ok


def is_positive_definite(matrix: RatMatrix) -> bool:
    """x'Mx > 0 for all nonzero real x, via Sylvester on the symmetric part.

    x'Mx equals x'((M + M')/2)x, so definiteness of a nonsymmetric matrix is
    exactly definiteness of its symmetric part.
    """
    d = _require_square(matrix)
    symmetric = (matrix + matrix.transpose()).scale(Fraction(1, 2))
    for k in range(1, d + 1):
        if symmetric.principal_submatrix(range(1, k + 1)).det() <= 0:
            return False
    return True


class TwoByTwoCase(Enum):
    """Exhaustive, mutually exclusive sign cases for a 2x2 reflection matrix."""

    DIAGONAL_FAIL = "diagonal_fail"          # some diagonal entry <= 0
    TIGHT_NONPOSITIVE = "tight_nonpositive"  # off-diag <= 0 and det > 0
    TIGHT_MIXED = "tight_mixed"              # off-diag of strictly opposite signs
    NOT_TIGHT_NONNEGATIVE = "not_tight_nonnegative"  # off-diag >= 0, not both 0
    NOT_COMPLETELY_S = "not_completely_s"    # off-diag <= 0 and det <= 0


def classify_two_by_two(matrix: RatMatrix) -> TwoByTwoCase:
    """Sign classification deciding tightness for 2x2 matrices.

    With a positive diagonal, the matrix is tight (and completely-S) exactly
    in the TIGHT_NONPOSITIVE and TIGHT_MIXED cases; NOT_TIGHT_NONNEGATIVE is
    completely-S but not tight; NOT_COMPLETELY_S fails the S-property.
    """
    if not matrix.is_square or matrix.rows != 2:
        raise MatrixShapeError("two-by-two classification requires a 2x2 matrix")
    a, b = matrix.at(0, 0), matrix.at(0, 1)
    c, d = matrix.at(1, 0), matrix.at(1, 1)
    if a <= 0 or d <= 0:
        return TwoByTwoCase.DIAGONAL_FAIL
    if (b < 0 < c) or (c < 0 < b):
        return TwoByTwoCase.TIGHT_MIXED
    if b >= 0 and c >= 0 and (b > 0 or c > 0):
        return TwoByTwoCase.NOT_TIGHT_NONNEGATIVE
    # both off-diagonal entries are <= 0 (and not in the mixed/nonnegative cases)
    if a * d - b * c > 0:
        return TwoByTwoCase.TIGHT_NONPOSITIVE
    return TwoByTwoCase.NOT_COMPLETELY_S


def has_staircase_sign_pattern(
    matrix: RatMatrix, cap: int = DEFAULT_DIMENSION_CAP
) -> bool:
    """P-matrix whose lower part is a strict staircase.

    Pattern: positive diagonal, strictly negative first subdiagonal, zeros
    everywhere below it, arbitrary entries above the diagonal.  Matrices of
    this shape are tight for every positive scale vector, and the pattern is
    invariant under right-multiplication by a positive diagonal matrix.
    """
    d = _require_square(matrix)
    for i in range(d):
        if matrix.at(i, i) <= 0:
            return False
        if i >= 1 and matrix.at(i, i - 1) >= 0:
            return False
        for j in range(0, i - 1):
            if matrix.at(i, j) != 0:
                return False
    ok, _ = is_p_matrix(matrix, cap)
    return ok


@dataclass(frozen=True)
class ClassReport:
    """Summary of class membership for one square matrix.

    ``failing_subset`` carries the first principal index set refuting
    completely-S membership, or, when completely-S holds but the P-property
    fails, the first subset with a nonpositive minor.
    """

    is_completely_s: bool
    is_p: bool
    is_m: bool
    is_positive_definite: bool
    failing_subset: Optional[tuple[int, ...]] = None


def classify_matrix(matrix: RatMatrix, cap: int = DEFAULT_DIMENSION_CAP) -> ClassReport:
    """Run every class test and package the result."""
    completely_s, cs_failure = is_completely_s(matrix, cap)
    p, p_failure = is_p_matrix(matrix, cap)
    m = is_m_matrix(matrix, cap)
    pd = is_positive_definite(matrix)
    failing = cs_failure if not completely_s else (p_failure if not p else None)
    return ClassReport(
        is_completely_s=completely_s,
        is_p=p,
        is_m=m,
        is_positive_definite=pd,
        failing_subset=failing,
    )

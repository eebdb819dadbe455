"""Exact linear programming with a two-phase primal simplex over the rationals.

The tableau is kept as scaled integers with one shared denominator
(fraction-free pivoting): after every pivot each entry equals a minor of the
original integer data, so divisions are exact and no gcd normalisation runs in
the hot loop.  Pricing is Dantzig with least-index tie-breaks, switching to
Bland's least-index rule after a fixed run of degenerate pivots; the leaving
row breaks ratio ties by least basic-variable index.  This makes the solver
deterministic (identical runs agree bit for bit) and immune to cycling.

Variables are free unless bounds are given; bounded variables are shifted or
mirrored onto nonnegative internal variables, free variables are split.
Optimal solutions are re-checked exactly against the original constraints
before they are returned.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import lcm
from typing import Iterable, Optional, Sequence

from .errors import InternalInconsistencyError, MatrixShapeError
from .rational import Rational, RationalLike, as_rational

_DEGENERATE_FALLBACK = 12
_MAX_PIVOTS = 1_000_000


class Relation(Enum):
    LE = "<="
    EQ = "="
    GE = ">="


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple[Rational, ...]
    relation: Relation
    rhs: Rational


@dataclass(frozen=True)
class LinearProgram:
    """minimize objective . x subject to constraints and optional bounds."""

    objective: tuple[Rational, ...]
    constraints: tuple[Constraint, ...]
    bounds: Optional[tuple[tuple[Optional[Rational], Optional[Rational]], ...]] = None


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpOutcome:
    """Solver result.

    For OPTIMAL, ``solution`` is the optimal point and ``optimum`` its value.
    For UNBOUNDED, ``solution`` is a feasible point and ``ray`` an improving
    direction, so ``solution + t * ray`` is feasible for every t >= 0 with the
    objective decreasing strictly in t.
    """

    status: LpStatus
    optimum: Optional[Rational] = None
    solution: Optional[tuple[Rational, ...]] = None
    ray: Optional[tuple[Rational, ...]] = None


def constraint(
    coeffs: Iterable[RationalLike], relation: Relation | str, rhs: RationalLike
) -> Constraint:
    rel = relation if isinstance(relation, Relation) else Relation(relation)
    return Constraint(tuple(as_rational(c) for c in coeffs), rel, as_rational(rhs))


def linear_program(
    objective: Iterable[RationalLike],
    constraints: Iterable[Constraint],
    bounds: Optional[Sequence[tuple[Optional[RationalLike], Optional[RationalLike]]]] = None,
) -> LinearProgram:
    obj = tuple(as_rational(c) for c in objective)
    rows = tuple(constraints)
    for c in rows:
        if len(c.coeffs) != len(obj):
            raise MatrixShapeError(
                f"constraint has {len(c.coeffs)} coefficients for {len(obj)} variables"
            )
    packed = None
    if bounds is not None:
        packed = tuple(
            (
                None if lo is None else as_rational(lo),
                None if hi is None else as_rational(hi),
            )
            for lo, hi in bounds
        )
        if len(packed) != len(obj):
            raise MatrixShapeError("bounds length must match variable count")
    return LinearProgram(obj, rows, packed)


# --------------------------------------------------------------------------
# integer tableau
# --------------------------------------------------------------------------


class _Tableau:
    """Simplex tableau of integers sharing one positive denominator."""

    def __init__(
        self,
        nz: int,
        rows: list[dict[int, Fraction]],
        relations: list[Relation],
        rhs: list[Fraction],
        cost: dict[int, Fraction],
    ):
        self.nz = nz
        m = len(rows)

        # Integer-scale each constraint row.
        int_rows: list[list[int]] = []
        int_rhs: list[int] = []
        for coeffs, b in zip(rows, rhs):
            denoms = [v.denominator for v in coeffs.values()] + [b.denominator]
            mult = lcm(*denoms) if denoms else 1
            dense = [0] * nz
            for col, v in coeffs.items():
                dense[col] = int(v * mult)
            int_rows.append(dense)
            int_rhs.append(int(b * mult))

        # Slack / surplus columns.
        slack_col: list[Optional[int]] = [None] * m
        ncols = nz
        for i, rel in enumerate(relations):
            if rel is not Relation.EQ:
                slack_col[i] = ncols
                ncols += 1
        for i, rel in enumerate(relations):
            row = int_rows[i]
            row.extend([0] * (ncols - len(row)))
            if rel is Relation.LE:
                row[slack_col[i]] = 1
            elif rel is Relation.GE:
                row[slack_col[i]] = -1
            if int_rhs[i] < 0:
                int_rows[i] = [-v for v in row]
                int_rhs[i] = -int_rhs[i]

        # Artificial columns where the slack cannot serve as the basic variable.
        self.art_start = ncols
        basis: list[int] = []
        art_rows: list[int] = []
        for i in range(m):
            sc = slack_col[i]
            if sc is not None and int_rows[i][sc] == 1:
                basis.append(sc)
            else:
                art_rows.append(i)
                basis.append(ncols)
                ncols += 1
        for i, row in enumerate(int_rows):
            row.extend([0] * (ncols - len(row)))
        for i in art_rows:
            int_rows[i][basis[i]] = 1

        self.m = m
        self.ncols = ncols
        self.rhs_col = ncols
        self.basis = basis
        self.den = 1

        # Objective scaled to integers; scale is reported back to the caller.
        cost_denoms = [v.denominator for v in cost.values()]
        self.obj_scale = lcm(*cost_denoms) if cost_denoms else 1
        cost_row = [0] * (ncols + 1)
        for col, v in cost.items():
            cost_row[col] = int(v * self.obj_scale)

        self.T: list[list[int]] = [row + [int_rhs[i]] for i, row in enumerate(int_rows)]
        self.T.append(cost_row)
        self.cost_row = m

        self.phase1_row: Optional[int] = None
        if art_rows:
            w = [0] * (ncols + 1)
            for i in art_rows:
                row = self.T[i]
                for j in range(ncols + 1):
                    w[j] -= row[j]
            for i in art_rows:
                w[self.basis[i]] += 1
            self.T.append(w)
            self.phase1_row = m + 1

    # -- pivoting ----------------------------------------------------------

    def _pivot(self, r: int, c: int) -> None:
        T = self.T
        den = self.den
        pivot_row = T[r]
        pivot = pivot_row[c]
        for i in range(len(T)):
            if i == r:
                continue
            row = T[i]
            factor = row[c]
            if factor == 0:
                if pivot != den:
                    T[i] = [(v * pivot) // den for v in row]
            else:
                T[i] = [
                    (v * pivot - factor * w) // den for v, w in zip(row, pivot_row)
                ]
        self.den = pivot
        if self.den < 0:
            self.den = -self.den
            self.T = [[-v for v in row] for row in self.T]
        self.basis[r] = c

    def _entering(self, cost_row: list[int], bland: bool) -> Optional[int]:
        best = None
        best_val = 0
        for j in range(self.ncols):
            if j >= self.art_start:
                continue
            v = cost_row[j]
            if v < 0:
                if bland:
                    return j
                if v < best_val:
                    best = j
                    best_val = v
        return best

    def _leaving(self, c: int) -> Optional[int]:
        best_row = None
        best_num = 0
        best_den = 1
        rc = self.rhs_col
        for i in range(self.m):
            a = self.T[i][c]
            if a <= 0:
                continue
            num = self.T[i][rc]
            if best_row is None or num * best_den < best_num * a or (
                num * best_den == best_num * a and self.basis[i] < self.basis[best_row]
            ):
                best_row = i
                best_num = num
                best_den = a
        return best_row

    def run_phase(self, cost_index: int, stop_at_zero: bool) -> Optional[int]:
        """Pivot until optimal; returns an entering column on unboundedness."""
        degenerate_streak = 0
        pivots = 0
        while True:
            if stop_at_zero and self.T[cost_index][self.rhs_col] == 0:
                return None
            bland = degenerate_streak >= _DEGENERATE_FALLBACK
            col = self._entering(self.T[cost_index], bland)
            if col is None:
                return None
            row = self._leaving(col)
            if row is None:
                return col
            before = (self.T[cost_index][self.rhs_col], self.den)
            self._pivot(row, col)
            after = (self.T[cost_index][self.rhs_col], self.den)
            if before[0] * after[1] == after[0] * before[1]:
                degenerate_streak += 1
            else:
                degenerate_streak = 0
            pivots += 1
            if pivots > _MAX_PIVOTS:
                raise InternalInconsistencyError("pivot limit exceeded")

    def drop_artificials(self) -> None:
        """Pivot artificials out of the basis, then delete their columns.

        Rows whose artificial cannot be pivoted out are identically zero on
        the real columns (redundant constraints) and are removed.
        """
        dead_rows: list[int] = []
        for r in range(self.m):
            if self.basis[r] < self.art_start:
                continue
            row = self.T[r]
            col = next((j for j in range(self.art_start) if row[j] != 0), None)
            if col is None:
                if row[self.rhs_col] != 0:
                    raise InternalInconsistencyError(
                        "redundant row with nonzero residual after phase one"
                    )
                dead_rows.append(r)
            else:
                self._pivot(r, col)

        keep = self.art_start
        new_T = []
        new_basis = []
        for i in range(self.m):
            if i in dead_rows:
                continue
            new_T.append(self.T[i][:keep] + [self.T[i][self.rhs_col]])
            new_basis.append(self.basis[i])
        new_T.append(self.T[self.cost_row][:keep] + [self.T[self.cost_row][self.rhs_col]])
        self.T = new_T
        self.basis = new_basis
        self.m = len(new_basis)
        self.cost_row = self.m
        self.ncols = keep
        self.rhs_col = keep
        self.phase1_row = None

    # -- extraction ----------------------------------------------------------

    def z_solution(self) -> list[Fraction]:
        z = [Fraction(0)] * self.nz
        for i in range(self.m):
            var = self.basis[i]
            if var < self.nz:
                z[var] = Fraction(self.T[i][self.rhs_col], self.den)
        return z

    def z_ray(self, col: int) -> list[Fraction]:
        dz = [Fraction(0)] * self.nz
        if col < self.nz:
            dz[col] = Fraction(1)
        for i in range(self.m):
            var = self.basis[i]
            if var < self.nz:
                dz[var] = Fraction(-self.T[i][col], self.den)
        return dz

    def objective_value(self) -> Fraction:
        return Fraction(-self.T[self.cost_row][self.rhs_col], self.den * self.obj_scale)


# --------------------------------------------------------------------------
# public solve
# --------------------------------------------------------------------------


def lp_solve(program: LinearProgram) -> LpOutcome:
    """Solve an exact LP; statuses Infeasible/Unbounded are outcomes, not errors."""
    n = len(program.objective)
    bounds = program.bounds if program.bounds is not None else ((None, None),) * n
    if len(bounds) != n:
        raise MatrixShapeError("bounds length must match variable count")
    for row in program.constraints:
        if len(row.coeffs) != n:
            raise MatrixShapeError("constraint width must match variable count")

    # Substitute every variable by nonnegative internal variables.
    modes: list[tuple] = []
    nz = 0
    caps: list[tuple[int, Fraction]] = []
    for lo, hi in bounds:
        if lo is not None and hi is not None and hi < lo:
            return LpOutcome(LpStatus.INFEASIBLE)
        if lo is not None:
            modes.append(("shift", nz, lo))
            if hi is not None:
                caps.append((nz, hi - lo))
            nz += 1
        elif hi is not None:
            modes.append(("mirror", nz, hi))
            nz += 1
        else:
            modes.append(("split", nz, nz + 1))
            nz += 2

    def to_z(coeffs: Sequence[Fraction], rhs: Fraction) -> tuple[dict[int, Fraction], Fraction]:
        cols: dict[int, Fraction] = {}
        r = rhs
        for j, a in enumerate(coeffs):
            if a == 0:
                continue
            mode = modes[j]
            if mode[0] == "shift":
                cols[mode[1]] = cols.get(mode[1], Fraction(0)) + a
                r -= a * mode[2]
            elif mode[0] == "mirror":
                cols[mode[1]] = cols.get(mode[1], Fraction(0)) - a
                r -= a * mode[2]
            else:
                cols[mode[1]] = cols.get(mode[1], Fraction(0)) + a
                cols[mode[2]] = cols.get(mode[2], Fraction(0)) - a
        return {c: v for c, v in cols.items() if v != 0}, r

    z_rows: list[dict[int, Fraction]] = []
    z_rels: list[Relation] = []
    z_rhs: list[Fraction] = []
    for row in program.constraints:
        cols, r = to_z(row.coeffs, row.rhs)
        if not cols:
            violated = (
                (row.relation is Relation.LE and not 0 <= r)
                or (row.relation is Relation.EQ and r != 0)
                or (row.relation is Relation.GE and not 0 >= r)
            )
            if violated:
                return LpOutcome(LpStatus.INFEASIBLE)
            continue
        if row.relation is Relation.GE:
            # a.z >= r becomes -a.z <= -r; homogeneous rows then start with a
            # feasible slack basis instead of an artificial variable.
            cols = {c: -v for c, v in cols.items()}
            r = -r
            z_rows.append(cols)
            z_rels.append(Relation.LE)
        else:
            z_rows.append(cols)
            z_rels.append(row.relation)
        z_rhs.append(r)
    for col, cap in caps:
        z_rows.append({col: Fraction(1)})
        z_rels.append(Relation.LE)
        z_rhs.append(cap)

    obj_cols, neg_offset = to_z(program.objective, Fraction(0))
    obj_offset = -neg_offset

    tab = _Tableau(nz, z_rows, z_rels, z_rhs, obj_cols)

    if tab.phase1_row is not None:
        unbounded = tab.run_phase(tab.phase1_row, stop_at_zero=True)
        if unbounded is not None:
            raise InternalInconsistencyError("phase one cannot be unbounded")
        if tab.T[tab.phase1_row][tab.rhs_col] != 0:
            return LpOutcome(LpStatus.INFEASIBLE)
        tab.drop_artificials()

    unbounded_col = tab.run_phase(tab.cost_row, stop_at_zero=False)

    def map_point(z: Sequence[Fraction], include_offset: bool) -> tuple[Fraction, ...]:
        out = []
        for mode in modes:
            if mode[0] == "shift":
                base = mode[2] if include_offset else Fraction(0)
                out.append(base + z[mode[1]])
            elif mode[0] == "mirror":
                base = mode[2] if include_offset else Fraction(0)
                out.append(base - z[mode[1]])
            else:
                out.append(z[mode[1]] - z[mode[2]])
        return tuple(out)

    if unbounded_col is not None:
        point = map_point(tab.z_solution(), include_offset=True)
        ray = map_point(tab.z_ray(unbounded_col), include_offset=False)
        _check_point(program, point)
        _check_point(program, tuple(p + r for p, r in zip(point, ray)))
        if _dot(program.objective, ray) >= 0:
            raise InternalInconsistencyError("unbounded ray does not improve the objective")
        return LpOutcome(LpStatus.UNBOUNDED, solution=point, ray=ray)

    solution = map_point(tab.z_solution(), include_offset=True)
    optimum = obj_offset + tab.objective_value()
    _check_point(program, solution)
    if _dot(program.objective, solution) != optimum:
        raise InternalInconsistencyError("objective value mismatch at reported optimum")
    return LpOutcome(LpStatus.OPTIMAL, optimum=optimum, solution=solution)


def _dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def _check_point(program: LinearProgram, point: Sequence[Fraction]) -> None:
    """Exact feasibility check; a failure means the solver itself is broken."""
    for row in program.constraints:
        lhs = _dot(row.coeffs, point)
        ok = (
            lhs <= row.rhs
            if row.relation is Relation.LE
            else lhs == row.rhs if row.relation is Relation.EQ else lhs >= row.rhs
        )
        if not ok:
            raise InternalInconsistencyError(
                f"reported point violates constraint {row.coeffs} {row.relation.value} {row.rhs}"
            )
    if program.bounds is not None:
        for x, (lo, hi) in zip(point, program.bounds):
            if lo is not None and x < lo:
                raise InternalInconsistencyError("reported point violates a lower bound")
            if hi is not None and x > hi:
                raise InternalInconsistencyError("reported point violates an upper bound")

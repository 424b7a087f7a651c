"""Exact rationals and a two-phase tableau simplex with dual extraction.

Every value that crosses this module's surface is a :class:`fractions.Fraction`.
Pivoting is done on ``gmpy2.mpq`` for speed; results are converted back, so the
arithmetic is exact end to end.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional

import gmpy2

Rational = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)

MIN, MAX = "min", "max"
LE, EQ, GE = "<=", "=", ">="

OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"


def make_rational(num: int, den: int = 1) -> Fraction:
    """Return ``num/den`` in lowest terms with a positive denominator."""
    if den == 0:
        raise ValueError("zero denominator")
    return Fraction(int(num), int(den))


def parse_rational(value) -> Fraction:
    """Parse ``"num/den"``, ``"n"`` or an int. Floats are rejected."""
    if isinstance(value, bool):
        raise ValueError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            num, _, den = text.partition("/")
            try:
                return make_rational(int(num), int(den))
            except ValueError as exc:
                raise ValueError(f"not a rational: {value!r}") from exc
        try:
            return Fraction(int(text))
        except ValueError as exc:
            raise ValueError(f"not a rational: {value!r}") from exc
    raise ValueError(f"not a rational: {value!r}")


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


# --------------------------------------------------------------------------
# LP model


@dataclass(frozen=True)
class Column:
    """A decision variable. ``lower`` is 0 or None (-inf); ``upper`` is None (+inf) or 0."""

    name: str
    lower: Optional[Fraction] = ZERO
    upper: Optional[Fraction] = None

    def __post_init__(self):
        if self.lower not in (ZERO, None) or self.upper not in (ZERO, None):
            raise ValueError(f"column {self.name}: bounds must be 0 or infinite")
        if self.lower == ZERO and self.upper == ZERO:
            raise ValueError(f"column {self.name}: fixed columns are not supported")

    @property
    def kind(self) -> str:
        if self.lower is None and self.upper is None:
            return "free"
        return "nonneg" if self.lower == ZERO else "nonpos"


@dataclass(frozen=True)
class Row:
    name: str
    coeffs: Mapping[str, Fraction]
    sense: str
    rhs: Fraction

    def activity(self, x: Mapping[str, Fraction]) -> Fraction:
        return sum((c * x.get(j, ZERO) for j, c in self.coeffs.items()), ZERO)


@dataclass(frozen=True)
class LinearProgram:
    direction: str
    columns: tuple
    rows: tuple
    objective: Mapping[str, Fraction]
    constant: Fraction = ZERO

    def __post_init__(self):
        if self.direction not in (MIN, MAX):
            raise ValueError(f"bad direction {self.direction!r}")
        names = [c.name for c in self.columns]
        known = set(names)
        if len(known) != len(names):
            raise ValueError("duplicate column name")
        row_names = [r.name for r in self.rows]
        if len(set(row_names)) != len(row_names):
            raise ValueError("duplicate row name")
        for r in self.rows:
            if r.sense not in (LE, EQ, GE):
                raise ValueError(f"row {r.name}: bad relation {r.sense!r}")
            unknown = set(r.coeffs) - known
            if unknown:
                raise ValueError(f"row {r.name} references undeclared columns {sorted(unknown)}")
        unknown = set(self.objective) - known
        if unknown:
            raise ValueError(f"objective references undeclared columns {sorted(unknown)}")

    def with_rows(self, rows: Iterable[Row]) -> "LinearProgram":
        return LinearProgram(self.direction, self.columns, self.rows + tuple(rows), self.objective, self.constant)

    def column(self, name: str) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise KeyError(name)

    def objective_value(self, x: Mapping[str, Fraction]) -> Fraction:
        return self.constant + sum((c * x.get(j, ZERO) for j, c in self.objective.items()), ZERO)


class LpBuilder:
    """Incremental construction of a :class:`LinearProgram`."""

    def __init__(self, direction: str = MIN):
        self.direction = direction
        self._columns: list[Column] = []
        self._rows: list[Row] = []
        self._objective: dict[str, Fraction] = {}
        self.constant = ZERO

    def column(self, name: str, lower=ZERO, upper=None, cost=ZERO) -> str:
        self._columns.append(Column(name, lower, upper))
        if cost:
            self._objective[name] = Fraction(cost)
        return name

    def row(self, name: str, coeffs: Mapping[str, Fraction], sense: str, rhs) -> None:
        merged: dict[str, Fraction] = {}
        for j, c in coeffs.items():
            merged[j] = merged.get(j, ZERO) + Fraction(c)
        merged = {j: c for j, c in merged.items() if c}
        self._rows.append(Row(name, merged, sense, Fraction(rhs)))

    def build(self) -> LinearProgram:
        return LinearProgram(
            self.direction, tuple(self._columns), tuple(self._rows), dict(self._objective), Fraction(self.constant)
        )


@dataclass(frozen=True)
class LpSolution:
    status: str
    primal: Mapping[str, Fraction] = field(default_factory=dict)
    dual: Mapping[str, Fraction] = field(default_factory=dict)
    objective: Optional[Fraction] = None
    pivots: int = 0


# --------------------------------------------------------------------------
# simplex


class _Tableau:
    """Dense tableau over mpq. Row i is ``rows[i]``; the last entry is the rhs."""

    def __init__(self, rows, basis, ncols):
        self.rows = rows
        self.basis = basis
        self.ncols = ncols
        self.pivots = 0

    def reduced_costs(self, cost):
        d = [gmpy2.mpq(c) for c in cost] + [gmpy2.mpq(0)]
        for i, b in enumerate(self.basis):
            cb = cost[b]
            if cb:
                row = self.rows[i]
                for j, v in enumerate(row):
                    if v:
                        d[j] -= cb * v
        return d  # d[-1] is -objective

    def pivot(self, r, e, d):
        prow = self.rows[r]
        piv = prow[e]
        if piv != 1:
            inv = 1 / piv
            for j, v in enumerate(prow):
                if v:
                    prow[j] = v * inv
        nz = [j for j, v in enumerate(prow) if v]
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row[e]
            if f:
                for j in nz:
                    row[j] -= f * prow[j]
        f = d[e]
        if f:
            for j in nz:
                d[j] -= f * prow[j]
        self.basis[r] = e
        self.pivots += 1

    def iterate(self, d, allowed, bland_after, max_pivots):
        """Run primal simplex on reduced-cost row ``d``. Returns OPTIMAL or UNBOUNDED."""
        start = self.pivots
        while True:
            bland = self.pivots - start >= bland_after
            e = -1
            best = None
            for j in range(self.ncols):
                if not allowed[j]:
                    continue
                dj = d[j]
                if dj < 0:
                    if bland:
                        e = j
                        break
                    if best is None or dj < best:
                        best, e = dj, j
            if e < 0:
                return OPTIMAL
            r = -1
            ratio = None
            for i, row in enumerate(self.rows):
                a = row[e]
                if a > 0:
                    q = row[-1] / a
                    if ratio is None or q < ratio or (q == ratio and self.basis[i] < self.basis[r]):
                        ratio, r = q, i
            if r < 0:
                return UNBOUNDED
            if max_pivots is not None and self.pivots >= max_pivots:
                raise RuntimeError("simplex pivot limit exceeded")
            self.pivot(r, e, d)


def solve_lp(lp: LinearProgram, bland_after: int = 50, max_pivots: Optional[int] = None) -> LpSolution:
    """Solve ``lp`` exactly with a two-phase primal simplex.

    The entering column is the most negative reduced cost until ``bland_after``
    pivots have been made in a phase, after which Bland's rule takes over.
    Row duals are read off the final tableau; their sign convention makes
    ``constant + sum(rhs * dual) == objective`` at optimality.
    """
    mpq = gmpy2.mpq
    # standard form: every structural column nonnegative
    std = []  # (column index, sign)
    col_std: dict[str, list[tuple[int, int]]] = {}
    for c in lp.columns:
        entries = []
        if c.kind == "nonneg":
            entries.append((len(std), 1))
            std.append(c.name)
        elif c.kind == "nonpos":
            entries.append((len(std), -1))
            std.append(c.name)
        else:
            entries.append((len(std), 1))
            std.append(c.name)
            entries.append((len(std), -1))
            std.append(c.name)
        col_std[c.name] = entries
    n_struct = len(std)
    m = len(lp.rows)

    flip = -1 if lp.direction == MAX else 1
    cost_struct = [mpq(0)] * n_struct
    for name, coef in lp.objective.items():
        for idx, sgn in col_std[name]:
            cost_struct[idx] = mpq(flip * sgn * coef)

    # slack / artificial layout
    row_sign = []
    senses = []
    for r in lp.rows:
        sense = r.sense
        sgn = 1
        if r.rhs < 0:
            sgn = -1
            sense = {LE: GE, GE: LE, EQ: EQ}[sense]
        row_sign.append(sgn)
        senses.append(sense)
    slack_of = {}
    ncols = n_struct
    for i, sense in enumerate(senses):
        if sense != EQ:
            slack_of[i] = ncols
            ncols += 1
    art_of = {}
    for i, sense in enumerate(senses):
        if sense != LE:
            art_of[i] = ncols
            ncols += 1

    rows = []
    basis = []
    unit_col = []
    for i, r in enumerate(lp.rows):
        row = [mpq(0)] * (ncols + 1)
        sgn = row_sign[i]
        for name, coef in r.coeffs.items():
            for idx, s in col_std[name]:
                row[idx] += sgn * s * mpq(coef)
        row[-1] = mpq(sgn * r.rhs)
        if senses[i] == LE:
            row[slack_of[i]] = mpq(1)
            basis.append(slack_of[i])
            unit_col.append(slack_of[i])
        else:
            if senses[i] == GE:
                row[slack_of[i]] = mpq(-1)
            row[art_of[i]] = mpq(1)
            basis.append(art_of[i])
            unit_col.append(art_of[i])
        rows.append(row)

    tab = _Tableau(rows, basis, ncols)
    is_art = [False] * ncols
    for j in art_of.values():
        is_art[j] = True

    if art_of:
        cost1 = [mpq(1) if is_art[j] else mpq(0) for j in range(ncols)]
        d1 = tab.reduced_costs(cost1)
        tab.iterate(d1, [True] * ncols, bland_after, max_pivots)
        if -d1[-1] > 0:
            return LpSolution(INFEASIBLE, pivots=tab.pivots)
        # drive zero-level artificials out of the basis where possible
        for i in range(m):
            if is_art[tab.basis[i]]:
                row = tab.rows[i]
                for j in range(ncols):
                    if not is_art[j] and row[j]:
                        tab.pivot(i, j, d1)
                        break

    cost2 = cost_struct + [mpq(0)] * (ncols - n_struct)
    d2 = tab.reduced_costs(cost2)
    allowed = [not a for a in is_art]
    status = tab.iterate(d2, allowed, bland_after, max_pivots)
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, pivots=tab.pivots)

    values = [mpq(0)] * ncols
    for i, b in enumerate(tab.basis):
        values[b] = tab.rows[i][-1]
    primal = {}
    for c in lp.columns:
        v = mpq(0)
        for idx, sgn in col_std[c.name]:
            v += sgn * values[idx]
        primal[c.name] = Fraction(int(v.numerator), int(v.denominator))
    dual = {}
    for i, r in enumerate(lp.rows):
        pi = -d2[unit_col[i]]
        y = flip * row_sign[i] * pi
        dual[r.name] = Fraction(int(y.numerator), int(y.denominator))
    objective = lp.objective_value(primal)
    return LpSolution(OPTIMAL, primal, dual, objective, tab.pivots)


# --------------------------------------------------------------------------
# certificate audit


@dataclass
class CertificateReport:
    checks: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def _record(self, name, problems):
        self.checks[name] = not problems
        self.failures.extend(f"{name}: {p}" for p in problems)


def check_lp_certificate(lp: LinearProgram, sol: LpSolution) -> CertificateReport:
    """Re-verify an optimal solution from scratch, without trusting the solver.

    Checks primal bounds and rows, dual sign conditions and reduced costs,
    the reported objective, and exact equality of primal and dual objectives.
    """
    report = CertificateReport()
    if sol.status != OPTIMAL:
        report._record("status", [f"status is {sol.status}"])
        return report
    x = sol.primal
    y = sol.dual

    problems = []
    for c in lp.columns:
        v = x.get(c.name, ZERO)
        if c.lower is not None and v < c.lower:
            problems.append(f"{c.name}={format_rational(v)} below 0")
        if c.upper is not None and v > c.upper:
            problems.append(f"{c.name}={format_rational(v)} above 0")
    for r in lp.rows:
        act = r.activity(x)
        ok = {LE: act <= r.rhs, GE: act >= r.rhs, EQ: act == r.rhs}[r.sense]
        if not ok:
            problems.append(f"row {r.name}: {format_rational(act)} {r.sense} {format_rational(r.rhs)} violated")
    report._record("primal_feasible", problems)

    # min: y >= 0 on >= rows, y <= 0 on <= rows. max: reversed.
    sgn = 1 if lp.direction == MIN else -1
    problems = []
    for r in lp.rows:
        v = y.get(r.name, ZERO) * sgn
        if (r.sense == GE and v < 0) or (r.sense == LE and v > 0):
            problems.append(f"dual of {r.name} has wrong sign")
    reduced = {c.name: lp.objective.get(c.name, ZERO) for c in lp.columns}
    for r in lp.rows:
        yr = y.get(r.name, ZERO)
        if yr:
            for j, a in r.coeffs.items():
                reduced[j] -= a * yr
    for c in lp.columns:
        v = reduced[c.name] * sgn
        if (c.kind == "free" and v != 0) or (c.kind == "nonneg" and v < 0) or (c.kind == "nonpos" and v > 0):
            problems.append(f"reduced cost of {c.name} is {format_rational(reduced[c.name])}")
    report._record("dual_feasible", problems)

    primal_obj = lp.objective_value(x)
    problems = []
    if sol.objective != primal_obj:
        problems.append(f"reported {sol.objective} but c.x = {primal_obj}")
    report._record("objective_reported", problems)

    dual_obj = lp.constant + sum((r.rhs * y.get(r.name, ZERO) for r in lp.rows), ZERO)
    problems = []
    if dual_obj != primal_obj:
        problems.append(f"primal {format_rational(primal_obj)} != dual {format_rational(dual_obj)}")
    report._record("strong_duality", problems)
    return report


def dump_lp(lp: LinearProgram) -> str:
    """Render ``lp`` in a CPLEX-LP-like text format with rationals as num/den."""

    def expr(coeffs):
        parts = []
        for j, c in coeffs.items():
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            term = j if mag == 1 else f"{format_rational(mag)} {j}"
            parts.append(f"{sign} {term}")
        if not parts:
            return "0"
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else text

    obj = expr(lp.objective)
    if lp.constant:
        obj += f" {'-' if lp.constant < 0 else '+'} {format_rational(abs(lp.constant))}"
    lines = ["Minimize" if lp.direction == MIN else "Maximize", f" obj: {obj}", "Subject To"]
    for r in lp.rows:
        lines.append(f" {r.name}: {expr(r.coeffs)} {r.sense} {format_rational(r.rhs)}")
    lines.append("Bounds")
    for c in lp.columns:
        if c.kind == "free":
            lines.append(f" {c.name} free")
        elif c.kind == "nonpos":
            lines.append(f" -inf <= {c.name} <= 0")
    lines.append("End")
    return "\n".join(lines) + "\n"

"""Dense two-phase tableau simplex over the rationals with Bland's rule.

Works on the normalized system ``A x (>= | =) b`` with a per-column flag telling
whether the variable is sign-constrained (``x_j >= 0``) or free. Returns either a
feasible basic solution (optionally optimal for ``min c.x``), a Farkas
certificate, or an unboundedness report. Callers re-verify everything.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import NumIterationsExceeded

try:  # gmpy2 rationals are an order of magnitude faster than Fraction
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover - exercised only without gmpy2
    _Q = Fraction

_ZERO = _Q(0)
_ONE = _Q(1)


def _to_fraction(v) -> Fraction:
    return Fraction(int(v.numerator), int(v.denominator))


@dataclass
class SimplexResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: list[Fraction] | None = None
    farkas: list[Fraction] | None = None  # multipliers per row (>= orientation)
    duals: list[Fraction] | None = None
    objective: Fraction | None = None
    pivots: int = 0
    meta: dict = field(default_factory=dict)


def solve_normalized(
    rows: Sequence[dict[int, Fraction]],
    is_eq: Sequence[bool],
    rhs: Sequence[Fraction],
    nonneg: Sequence[bool],
    cost: dict[int, Fraction] | None = None,
    max_pivots: int = 10**7,
    rule: str = "bland",
    degenerate_limit: int = 50,
) -> SimplexResult:
    """Solve ``min cost.x`` s.t. ``rows[i].x >= rhs[i]`` (or ``=`` when ``is_eq[i]``).

    ``rows`` are sparse maps column -> coefficient over ``len(nonneg)`` columns.
    Infeasible results carry multipliers ``z`` with ``z_i >= 0`` on inequality rows,
    ``sum_i z_i a_i <= 0`` on nonnegative columns, ``= 0`` on free columns and
    ``z.b > 0``. Optimal results carry duals with the analogous dual-feasibility
    conditions and ``duals.b == objective``.
    """
    m = len(rows)
    n = len(nonneg)

    # column layout: structural (free vars split into +/-), surplus, artificial
    col_of: list[tuple[int, int]] = []  # (orig var, sign)
    pos_col = [0] * n
    neg_col = [-1] * n
    for j in range(n):
        pos_col[j] = len(col_of)
        col_of.append((j, 1))
        if not nonneg[j]:
            neg_col[j] = len(col_of)
            col_of.append((j, -1))
    n_struct = len(col_of)
    surplus_col = [-1] * m
    k = n_struct
    for i in range(m):
        if not is_eq[i]:
            surplus_col[i] = k
            k += 1
    # rows with rhs <= 0 start with their (negated) surplus basic; the rest get
    # an artificial column
    art_col = [-1] * m
    art0 = k
    for i in range(m):
        if is_eq[i] or rhs[i] > 0:
            art_col[i] = k
            k += 1
    width = k + 1  # last entry holds the rhs

    sign = [1] * m
    tab: list[list] = []
    basis: list[int] = []
    for i in range(m):
        row = [_ZERO] * width
        for j, a in rows[i].items():
            a = _Q(a)
            row[pos_col[j]] = a
            if neg_col[j] >= 0:
                row[neg_col[j]] = -a
        if surplus_col[i] >= 0:
            row[surplus_col[i]] = -_ONE
        b = _Q(rhs[i])
        row[-1] = b
        if b < 0 or (b == 0 and not is_eq[i]):
            sign[i] = -1
            row = [-v for v in row]
        if art_col[i] >= 0:
            row[art_col[i]] = _ONE
            basis.append(art_col[i])
        else:
            basis.append(surplus_col[i])
        tab.append(row)

    # phase-1 objective row: reduced costs of "min sum(art)"
    obj = [_ZERO] * width
    for i in range(m):
        if art_col[i] < 0:
            continue
        r = tab[i]
        for c in range(width):
            if r[c]:
                obj[c] -= r[c]
    for i in range(m):
        if art_col[i] >= 0:
            obj[art_col[i]] = _ZERO

    pivots = 0
    allowed = [True] * (width - 1)

    def pivot(pr: int, pc: int) -> None:
        prow = tab[pr]
        inv = _ONE / prow[pc]
        if inv != 1:
            for c in range(width):
                if prow[c]:
                    prow[c] *= inv
        nz = [c for c in range(width) if prow[c]]
        for i in range(m):
            if i == pr:
                continue
            r = tab[i]
            f = r[pc]
            if f:
                for c in nz:
                    r[c] -= f * prow[c]
        f = obj[pc]
        if f:
            for c in nz:
                obj[c] -= f * prow[c]
        basis[pr] = pc

    def run() -> int | None:
        """Pivot on ``obj`` until optimal; returns an unbounded column, else None.

        Dantzig's rule while progress is made; after ``degenerate_limit``
        consecutive degenerate pivots it switches to Bland's rule for good,
        which guarantees termination.
        """
        nonlocal pivots
        bland = rule == "bland"
        stalled = 0
        while True:
            enter = -1
            if bland:
                for c in range(width - 1):
                    if allowed[c] and obj[c] < 0:
                        enter = c
                        break
            else:
                most = _ZERO
                for c in range(width - 1):
                    if allowed[c] and obj[c] < most:
                        enter, most = c, obj[c]
            if enter < 0:
                return None
            best = None
            leave = -1
            for i in range(m):
                a = tab[i][enter]
                if a > 0:
                    ratio = tab[i][-1] / a
                    if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                        best, leave = ratio, i
            if leave < 0:
                return enter
            if pivots >= max_pivots:
                raise NumIterationsExceeded(f"simplex exceeded {max_pivots} pivots")
            pivot(leave, enter)
            pivots += 1
            if not bland:
                stalled = stalled + 1 if best == 0 else 0
                if stalled >= degenerate_limit:
                    bland = True

    run()
    phase1 = -obj[-1]
    if phase1 > 0:
        farkas = [_to_fraction(_row_multiplier(i, obj, sign, surplus_col, art_col, _ONE))
                  for i in range(m)]
        return SimplexResult("infeasible", farkas=farkas, pivots=pivots)

    # drive zero-level artificials out of the basis where possible
    for i in range(m):
        if basis[i] >= art0:
            r = tab[i]
            for c in range(art0):
                if r[c]:
                    pivot(i, c)
                    pivots += 1
                    break
    for c in range(art0, width - 1):
        allowed[c] = False

    if cost:
        cvec = [_ZERO] * width
        for j, cj in cost.items():
            cj = _Q(cj)
            cvec[pos_col[j]] = cj
            if neg_col[j] >= 0:
                cvec[neg_col[j]] = -cj
        obj[:] = cvec
        # price out the basic columns
        for i in range(m):
            cb = cvec[basis[i]] if basis[i] < art0 else _ZERO
            if cb:
                r = tab[i]
                for c in range(width):
                    if r[c]:
                        obj[c] -= cb * r[c]
        unbounded_col = run()
        if unbounded_col is not None:
            return SimplexResult("unbounded", pivots=pivots, meta={"column": unbounded_col})

    xs = [_ZERO] * n_struct
    for i in range(m):
        if basis[i] < n_struct:
            xs[basis[i]] = tab[i][-1]
    x = [_ZERO] * n
    for c, (j, s) in enumerate(col_of):
        x[j] += s * xs[c]
    x = [_to_fraction(v) for v in x]
    result = SimplexResult("optimal", x=x, pivots=pivots)
    if cost:
        result.duals = [_to_fraction(_row_multiplier(i, obj, sign, surplus_col, art_col, _ZERO))
                        for i in range(m)]
        result.objective = sum((cost[j] * x[j] for j in cost), Fraction(0))
    return result


def _row_multiplier(i, obj, sign, surplus_col, art_col, art_cost):
    """Row multiplier in the caller's ``>=`` orientation, read off reduced costs.

    With ``y = c_B B^-1`` the surplus column of row ``i`` has reduced cost
    ``sign_i * y_i``; an artificial column has ``art_cost - y_i``.
    """
    if surplus_col[i] >= 0:
        return obj[surplus_col[i]]
    return sign[i] * (art_cost - obj[art_col[i]])

"""Float-guided exact solving for LPs too large for the dense rational tableau.

HiGHS proposes a vertex, a Farkas ray or an optimal dual; each proposal is
turned into exact rationals (snapping to small denominators, or an exact solve
restricted to the proposal's support) and accepted only after exact
verification against the full program. ``solve`` returns None whenever a
proposal cannot be confirmed; the caller then falls back to the exact simplex.
"""

from __future__ import annotations

import logging
from fractions import Fraction

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from . import _simplex
from .polycone import (
    LinearProgram,
    LpOutcome,
    _min_cost,
    _normalized_rows,
    verify_certificate,
    verify_duals,
    verify_witness,
)

log = logging.getLogger(__name__)

_DENOMINATORS = (1, 2, 3, 4, 6, 8, 12, 16, 24, 48, 60, 120, 720, 5040, 2**20, 10**6)
_ZERO_TOL = 1e-9


class _Problem:
    def __init__(self, program: LinearProgram):
        self.program = program
        keys, col, rows, eqs, rhs, nonneg = _normalized_rows(program)
        self.keys, self.col, self.rows, self.rhs = keys, col, rows, rhs
        self.eq = np.array(eqs, dtype=bool)
        self.nonneg = np.array(nonneg, dtype=bool)
        self.m, self.n = len(rows), len(keys)
        r, c, v = [], [], []
        for i, row in enumerate(rows):
            for j, a in row.items():
                r.append(i)
                c.append(j)
                v.append(float(a))
        self.A = sp.csr_matrix((v, (r, c)), shape=(self.m, self.n))
        self.b = np.array([float(x) for x in rhs])
        self.cost = {col[k]: v for k, v in _min_cost(program).items()}
        self.bounds = [(0, None) if nn else (None, None) for nn in nonneg]

    # -- float stage ------------------------------------------------------
    def _split(self, A, b):
        I = np.where(~self.eq)[0]
        E = np.where(self.eq)[0]
        return I, E

    def float_optimize(self, cvec):
        I, E = self._split(self.A, self.b)
        res = linprog(
            cvec,
            A_ub=-self.A[I] if len(I) else None,
            b_ub=-self.b[I] if len(I) else None,
            A_eq=self.A[E] if len(E) else None,
            b_eq=self.b[E] if len(E) else None,
            bounds=self.bounds,
            method="highs-ds",
        )
        return res, I, E

    def float_farkas(self, cost: np.ndarray | None = None, target: float = 1.0) -> np.ndarray | None:
        """An L1-minimal ``y`` with ``A^T y <= cost`` (``=`` on free columns) and ``b.y = target``.

        With ``cost = 0`` and ``target = 1`` this is a Farkas ray; with the real
        cost and the optimum as target it is a sparse optimal dual. Sparse
        supports are cheap to confirm exactly.
        """
        I, E = self._split(self.A, self.b)
        c = np.zeros(self.n) if cost is None else cost
        AI, AE = self.A[I].T, self.A[E].T
        blocks = sp.hstack([AI, AE, -AE]).tocsr()
        nn = np.where(self.nonneg)[0]
        fr = np.where(~self.nonneg)[0]
        bvec = np.r_[self.b[I], self.b[E], -self.b[E]]
        # interior point with crossover still ends on a vertex, and is much faster here
        for method in ("highs-ipm", "highs-ds"):
            res = linprog(
                np.ones(blocks.shape[1]),
                A_ub=blocks[nn] if len(nn) else None,
                b_ub=c[nn] if len(nn) else None,
                A_eq=sp.vstack([blocks[fr], sp.csr_matrix(bvec[None, :])]),
                b_eq=np.r_[c[fr], target],
                bounds=(0, None),
                method=method,
            )
            if res.status == 0:
                break
        else:
            return None
        z = res.x
        y = np.zeros(self.m)
        y[I] = z[: len(I)]
        y[E] = z[len(I): len(I) + len(E)] - z[len(I) + len(E):]
        return y

    # -- exact stage ------------------------------------------------------
    def snap(self, values, denominators=_DENOMINATORS):
        for d in denominators:
            yield [Fraction(round(v * d), d) if abs(v * d - round(v * d)) < 1e-6 * max(1, d)
                   else Fraction(float(v)).limit_denominator(d) for v in values]

    def exact_point(self, xf) -> dict | None:
        for cand in self.snap(xf):
            w = {k: cand[j] for j, k in enumerate(self.keys)}
            if verify_witness(self.program, w):
                return w
        w = self._active_set_point(xf)
        if w is not None and verify_witness(self.program, w):
            return w
        return None

    def _active_set_point(self, xf) -> dict | None:
        """Solve the rows active at ``xf`` exactly; unpinned coordinates keep snapped values."""
        act = np.abs(self.A @ xf - self.b) <= 1e-7 * (1 + np.abs(self.b))
        act |= self.eq
        eqs = [(dict(self.rows[i]), self.rhs[i]) for i in np.where(act)[0]]
        for j in range(self.n):
            if self.nonneg[j] and abs(xf[j]) <= 1e-9:
                eqs.append(({j: Fraction(1)}, Fraction(0)))
        sol = _solve_sparse_system(eqs, self.n)
        if sol is None:
            return None
        # rows are fully reduced, so each pivot depends only on unpinned columns
        guess = next(self.snap(xf, (10**6,)))
        val = {j: guess[j] for j in range(self.n) if j not in sol}
        for j, (row, rhs) in sol.items():
            val[j] = rhs - sum((a * val[k] for k, a in row.items() if k != j), Fraction(0))
        return {k: val[j] for j, k in enumerate(self.keys)}

    def exact_certificate(self, yf) -> list | None:
        for cand in self.snap(yf):
            if verify_certificate(self.program, cand):
                return cand
        support = [i for i in range(self.m) if abs(yf[i]) > _ZERO_TOL]
        return self._restricted_farkas(support)

    def _restricted_farkas(self, support) -> list | None:
        touched = sorted({j for i in support for j in self.rows[i]})
        rows, is_eq, rhs = [], [], []
        for j in touched:
            rows.append({s: -self.rows[i][j] for s, i in enumerate(support) if j in self.rows[i]})
            is_eq.append(not self.nonneg[j])
            rhs.append(Fraction(0))
        rows.append({s: self.rhs[i] for s, i in enumerate(support) if self.rhs[i]})
        if not rows[-1]:
            return None
        is_eq.append(True)
        rhs.append(Fraction(1))
        nonneg = [not self.eq[i] for i in support]
        res = _simplex.solve_normalized(rows, is_eq, rhs, nonneg)
        if res.status != "optimal":
            return None
        cert = [Fraction(0)] * self.m
        for s, i in enumerate(support):
            cert[i] = res.x[s]
        return cert if verify_certificate(self.program, cert) else None

    def exact_duals(self, yf, optimum: Fraction) -> list | None:
        for cand in self.snap(yf):
            if verify_duals(self.program, cand, optimum):
                return cand
        support = [i for i in range(self.m) if abs(yf[i]) > _ZERO_TOL]
        touched = sorted({j for i in support for j in self.rows[i]} | set(self.cost))
        for j in range(self.n):
            if j not in touched and self.cost.get(j, 0) != 0:
                return None
        rows, is_eq, rhs = [], [], []
        for j in touched:
            rows.append({s: -self.rows[i][j] for s, i in enumerate(support) if j in self.rows[i]})
            is_eq.append(not self.nonneg[j])
            rhs.append(-self.cost.get(j, Fraction(0)))
        keep = [r for r in range(len(rows)) if rows[r] or rhs[r] != 0]
        if any(not rows[r] for r in keep):
            return None
        rows = [rows[r] for r in keep]
        is_eq = [is_eq[r] for r in keep]
        rhs = [rhs[r] for r in keep]
        cost = {s: -self.rhs[i] for s, i in enumerate(support) if self.rhs[i]}
        nonneg = [not self.eq[i] for i in support]
        if not rows:
            return None
        res = _simplex.solve_normalized(rows, is_eq, rhs, nonneg, cost or None)
        if res.status != "optimal":
            return None
        duals = [Fraction(0)] * self.m
        for s, i in enumerate(support):
            duals[i] = res.x[s]
        return duals if verify_duals(self.program, duals, optimum) else None


def _solve_sparse_system(eqs, n):
    """Gauss-Jordan over the rationals on sparse rows; None if inconsistent."""
    pivots: dict[int, tuple[dict, Fraction]] = {}
    for row, rhs in eqs:
        row = dict(row)
        # eliminate existing pivots
        changed = True
        while changed:
            changed = False
            for j in list(row):
                if j in pivots and row.get(j):
                    prow, prhs = pivots[j]
                    f = row[j]
                    for k, a in prow.items():
                        v = row.get(k, 0) - f * a
                        if v:
                            row[k] = v
                        else:
                            row.pop(k, None)
                    rhs -= f * prhs
                    changed = True
        if not row:
            if rhs != 0:
                return None
            continue
        j = min(row, key=lambda k: (len(row), k))
        f = row[j]
        row = {k: a / f for k, a in row.items()}
        rhs = rhs / f
        # keep earlier pivot rows reduced with respect to the new pivot
        for pj, (prow, prhs) in list(pivots.items()):
            g = prow.get(j)
            if g:
                for k, a in row.items():
                    v = prow.get(k, 0) - g * a
                    if v:
                        prow[k] = v
                    else:
                        prow.pop(k, None)
                pivots[pj] = (prow, prhs - g * rhs)
        pivots[j] = (row, rhs)
    return pivots


def solve(program: LinearProgram, max_pivots: int) -> LpOutcome | None:
    prob = _Problem(program)
    zero = np.zeros(prob.n)
    res, _, _ = prob.float_optimize(zero)
    if res.status == 2:  # infeasible
        yf = prob.float_farkas()
        if yf is None:
            return None
        cert = prob.exact_certificate(yf)
        if cert is None:
            return None
        return LpOutcome("Infeasible", certificate=cert, method="guided")
    if res.status != 0:
        return None
    if not prob.cost:
        w = prob.exact_point(res.x)
        return None if w is None else LpOutcome("Feasible", witness=w, method="guided")

    cvec = np.zeros(prob.n)
    for j, v in prob.cost.items():
        cvec[j] = float(v)
    res, I, E = prob.float_optimize(cvec)
    if res.status != 0:
        return None
    w = prob.exact_point(res.x)
    if w is None:
        return None
    sign = 1 if program.sense == "min" else -1
    value = sum((prob.cost[j] * w[prob.keys[j]] for j in prob.cost), Fraction(0))
    # HiGHS duals tend to be dense; a sparse vertex of the optimal dual face snaps cleanly
    yf = prob.float_farkas(cvec, float(value))
    if yf is None:
        yf = np.zeros(prob.m)
        if len(I):
            yf[I] = -res.ineqlin.marginals
        if len(E):
            yf[E] = res.eqlin.marginals
    duals = prob.exact_duals(yf, sign * value)
    if duals is None:
        return None
    return LpOutcome("Feasible", witness=w, optimum=sign * value, duals=duals, method="guided")

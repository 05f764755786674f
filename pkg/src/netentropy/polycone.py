"""The Shannon cone via elemental inequalities, and exact LP solving over it.

Variables of a set-function LP are keyed by subset bitmask (first ground label is
bit 0). Extra scalar variables (e.g. a scaling factor) are keyed by name.
Every outcome returned by :func:`lp_solve` is checked in exact arithmetic before
it is handed back: witnesses by substitution, infeasibility by Farkas multipliers.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Hashable, Iterable, Mapping, Sequence

from . import _simplex
from .errors import DimensionMismatch, GroundSetTooLarge, ValidationError
from .probdist import SetFunction, to_fraction

log = logging.getLogger(__name__)

LP_GROUND_CAP = 12
RELATIONS = (">=", "<=", "=")

__all__ = [
    "LinearConstraint",
    "LinearProgram",
    "LpOutcome",
    "elemental_count",
    "elemental_inequalities",
    "lp_solve",
    "verify_certificate",
    "verify_witness",
]

Key = Hashable  # int subset mask, or str for extra variables


@dataclass(frozen=True)
class LinearConstraint:
    coeffs: Mapping[Key, Fraction]
    relation: str
    rhs: Fraction = Fraction(0)
    tag: str = ""

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise ValidationError(f"relation must be one of {RELATIONS}, got {self.relation!r}")
        clean = {k: to_fraction(v) for k, v in self.coeffs.items() if v != 0}
        if not clean:
            raise ValidationError(f"constraint {self.tag!r} has no nonzero coefficient")
        object.__setattr__(self, "coeffs", clean)
        object.__setattr__(self, "rhs", to_fraction(self.rhs))

    def lhs(self, x: Mapping[Key, Any]):
        return sum(c * x.get(k, 0) for k, c in self.coeffs.items())

    def holds(self, x: Mapping[Key, Any], tol=0) -> bool:
        v = self.lhs(x) - self.rhs
        if self.relation == ">=":
            return v >= -tol
        if self.relation == "<=":
            return v <= tol
        return abs(v) <= tol

    def normalized(self) -> tuple[dict[Key, Fraction], Fraction, bool]:
        """Coefficients and rhs in ``>=`` (or ``=``) orientation."""
        if self.relation == "<=":
            return {k: -c for k, c in self.coeffs.items()}, -self.rhs, False
        return dict(self.coeffs), self.rhs, self.relation == "="

    def describe(self, names: Mapping[Key, str] | None = None) -> str:
        def nm(k):
            return names[k] if names and k in names else str(k)

        terms = " ".join(f"{'+' if c > 0 else '-'} {abs(c)}*{nm(k)}" for k, c in self.coeffs.items())
        return f"{terms} {self.relation} {self.rhs}".lstrip("+ ")


@dataclass
class LinearProgram:
    """A rational LP over set-function variables plus optional named extras.

    All variables are constrained nonnegative unless listed in ``free``; for
    set-function variables this is implied by the polymatroid axioms anyway.
    """

    ground: tuple = ()
    constraints: list[LinearConstraint] = field(default_factory=list)
    extra: tuple[str, ...] = ()
    objective: dict[Key, Fraction] | None = None
    sense: str = "min"
    free: frozenset = frozenset()
    labels: dict = field(default_factory=dict)  # free-form metadata

    def __post_init__(self):
        self.ground = tuple(self.ground)
        self.extra = tuple(self.extra)
        if self.sense not in ("min", "max"):
            raise ValidationError("sense must be 'min' or 'max'")

    @property
    def n_subsets(self) -> int:
        return 2 ** len(self.ground) - 1 if self.ground else 0

    def variables(self) -> list[Key]:
        return list(range(1, self.n_subsets + 1)) + list(self.extra)

    def add(self, coeffs: Mapping[Key, Any], relation: str, rhs: Any = 0, tag: str = "") -> None:
        self.constraints.append(LinearConstraint(coeffs, relation, rhs, tag))

    def mask(self, subset: Iterable[Hashable]) -> int:
        pos = {g: i for i, g in enumerate(self.ground)}
        m = 0
        for g in subset:
            m |= 1 << pos[g]
        return m

    def var_name(self, key: Key) -> str:
        if isinstance(key, int):
            return "h(" + ",".join(str(g) for i, g in enumerate(self.ground) if key >> i & 1) + ")"
        return str(key)

    def validate(self) -> None:
        keys = set(self.variables())
        for c in self.constraints:
            bad = [k for k in c.coeffs if k not in keys]
            if bad:
                raise DimensionMismatch(f"constraint {c.tag!r} references unknown variables {bad}")
        if self.objective:
            bad = [k for k in self.objective if k not in keys]
            if bad:
                raise DimensionMismatch(f"objective references unknown variables {bad}")

    def count_by_tag(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for c in self.constraints:
            out[c.tag] = out.get(c.tag, 0) + 1
        return out

    # -- JSON dump / load ------------------------------------------------
    def to_json(self) -> dict:
        def key(k):
            return k if isinstance(k, int) else f"@{k}"

        def q(v):
            return f"{v.numerator}/{v.denominator}"

        return {
            "format": "netentropy-lp/1",
            "subset_encoding": "bit i of the mask is ground[i]; variable key = mask",
            "ground": [str(g) for g in self.ground],
            "extra": list(self.extra),
            "free": sorted(key(k) if isinstance(k, str) else k for k in self.free),
            "sense": self.sense,
            "objective": None if self.objective is None
            else [[key(k), q(v)] for k, v in self.objective.items()],
            "constraints": [
                {"coeffs": [[key(k), q(v)] for k, v in c.coeffs.items()],
                 "rel": c.relation, "rhs": q(c.rhs), "tag": c.tag}
                for c in self.constraints
            ],
            "labels": self.labels,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "LinearProgram":
        def key(k):
            return k[1:] if isinstance(k, str) and k.startswith("@") else int(k)

        obj = data.get("objective")
        lp = cls(
            ground=tuple(data["ground"]),
            extra=tuple(data.get("extra", ())),
            objective=None if obj is None else {key(k): to_fraction(v) for k, v in obj},
            sense=data.get("sense", "min"),
            free=frozenset(key(k) for k in data.get("free", ())),
            labels=dict(data.get("labels", {})),
        )
        for c in data["constraints"]:
            lp.add({key(k): to_fraction(v) for k, v in c["coeffs"]}, c["rel"],
                   to_fraction(c["rhs"]), c.get("tag", ""))
        lp.validate()
        return lp

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "LinearProgram":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@dataclass
class LpOutcome:
    status: str  # "Feasible" | "Infeasible" | "Unbounded"
    witness: dict[Key, Fraction] | None = None
    certificate: list[Fraction] | None = None
    optimum: Fraction | None = None
    duals: list[Fraction] | None = None
    method: str = ""
    pivots: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.status == "Feasible"

    def witness_set_function(self, program: LinearProgram) -> SetFunction:
        assert self.witness is not None
        return SetFunction(program.ground,
                           [self.witness.get(m, Fraction(0)) for m in range(1, program.n_subsets + 1)])

    def to_json(self, program: LinearProgram | None = None) -> dict:
        def q(v):
            return None if v is None else f"{v.numerator}/{v.denominator}"

        out: dict[str, Any] = {"status": self.status, "method": self.method}
        if self.optimum is not None:
            out["optimum"] = q(self.optimum)
        if self.witness is not None:
            name = program.var_name if program else str
            out["witness"] = {name(k): q(v) for k, v in self.witness.items()}
        if self.certificate is not None:
            rows = program.constraints if program else [None] * len(self.certificate)
            out["certificate"] = [
                {"row": i, "multiplier": q(y), **({"tag": r.tag} if r else {})}
                for i, (y, r) in enumerate(zip(self.certificate, rows)) if y
            ]
        return out


# ---------------------------------------------------------------------------
# elemental inequalities


def elemental_count(n: int) -> int:
    return n + math.comb(n, 2) * 2 ** max(n - 2, 0)


def elemental_inequalities(n: int, cap: int = LP_GROUND_CAP) -> list[LinearConstraint]:
    """Minimal generating set of Shannon inequalities over ``n`` variables.

    ``H(X_i | X_rest) >= 0`` for each ``i`` and ``I(X_i; X_j | X_K) >= 0`` for each
    pair ``i < j`` and ``K`` a subset of the remaining elements.
    """
    if n < 1:
        raise ValidationError("need at least one ground element")
    if n > cap:
        raise GroundSetTooLarge(f"{n} ground elements exceed the LP cap {cap}")
    full = (1 << n) - 1
    one = Fraction(1)
    out: list[LinearConstraint] = []
    for i in range(n):
        rest = full & ~(1 << i)
        coeffs = {full: one}
        if rest:
            coeffs[rest] = -one
        out.append(LinearConstraint(coeffs, ">=", 0, "elemental"))
    for i, j in itertools.combinations(range(n), 2):
        others = [k for k in range(n) if k not in (i, j)]
        for r in range(len(others) + 1):
            for ks in itertools.combinations(others, r):
                K = sum(1 << k for k in ks)
                coeffs: dict[int, Fraction] = {}
                for m, c in ((K | 1 << i, one), (K | 1 << j, one), (K | 1 << i | 1 << j, -one)):
                    coeffs[m] = coeffs.get(m, 0) + c
                if K:
                    coeffs[K] = coeffs.get(K, 0) - one
                out.append(LinearConstraint(coeffs, ">=", 0, "elemental"))
    return out


# ---------------------------------------------------------------------------
# verification


def _exact(v) -> bool:
    return isinstance(v, (int, Fraction))


def verify_witness(program: LinearProgram, witness, tol: float = 1e-9) -> bool:
    """Check every constraint of ``program`` at ``witness``.

    ``witness`` is a mapping key -> value or a :class:`SetFunction` over the same
    ground set. Exact when all values are rational, else within ``tol``.
    """
    if isinstance(witness, SetFunction):
        if tuple(witness.ground) != tuple(program.ground):
            raise DimensionMismatch(f"witness ground {witness.ground} != program ground {program.ground}")
        x = {m: witness.values[m - 1] for m in range(1, program.n_subsets + 1)}
        if program.extra:
            raise DimensionMismatch("program has extra variables a SetFunction cannot supply")
    else:
        x = dict(witness)
        unknown = set(x) - set(program.variables())
        if unknown:
            raise DimensionMismatch(f"witness has unknown variables {sorted(map(str, unknown))}")
    exact = all(_exact(v) for v in x.values())
    t = 0 if exact else tol
    for k in program.variables():
        if k not in program.free and x.get(k, 0) < -t:
            return False
    return all(c.holds(x, t) for c in program.constraints)


def verify_certificate(program: LinearProgram, certificate: Sequence[Fraction]) -> bool:
    """Exact Farkas check: the multiplied rows add up to ``0 >= positive``.

    Multipliers apply to rows in ``>=`` orientation (``<=`` rows negated) and must
    be nonnegative except on equalities. The combined coefficient must vanish on
    free variables and be nonpositive on nonnegative ones.
    """
    if len(certificate) != len(program.constraints):
        raise DimensionMismatch("certificate length differs from constraint count")
    combo: dict[Key, Fraction] = {}
    rhs = Fraction(0)
    for y, c in zip(certificate, program.constraints):
        if not y:
            continue
        coeffs, b, eq = c.normalized()
        if y < 0 and not eq:
            return False
        for k, a in coeffs.items():
            combo[k] = combo.get(k, 0) + y * a
        rhs += y * b
    for k, v in combo.items():
        if v > 0 or (v < 0 and k in program.free):
            return False
    return rhs > 0


def verify_duals(program: LinearProgram, duals: Sequence[Fraction], optimum: Fraction) -> bool:
    """Exact dual feasibility of ``duals`` with dual objective equal to ``optimum``."""
    cost = _min_cost(program)
    combo: dict[Key, Fraction] = {}
    rhs = Fraction(0)
    for y, c in zip(duals, program.constraints):
        if not y:
            continue
        coeffs, b, eq = c.normalized()
        if y < 0 and not eq:
            return False
        for k, a in coeffs.items():
            combo[k] = combo.get(k, 0) + y * a
        rhs += y * b
    for k in set(combo) | set(cost):
        slack = cost.get(k, 0) - combo.get(k, 0)
        if slack < 0 or (slack != 0 and k in program.free):
            return False
    sign = 1 if program.sense == "min" else -1
    return rhs == sign * optimum


def _min_cost(program: LinearProgram) -> dict[Key, Fraction]:
    if not program.objective:
        return {}
    s = 1 if program.sense == "min" else -1
    return {k: s * v for k, v in program.objective.items()}


# ---------------------------------------------------------------------------
# solving


def _normalized_rows(program: LinearProgram):
    keys = program.variables()
    col = {k: i for i, k in enumerate(keys)}
    rows, eqs, rhs = [], [], []
    for c in program.constraints:
        coeffs, b, eq = c.normalized()
        rows.append({col[k]: v for k, v in coeffs.items()})
        eqs.append(eq)
        rhs.append(b)
    nonneg = [k not in program.free for k in keys]
    return keys, col, rows, eqs, rhs, nonneg


def _solve_primal_tableau(program: LinearProgram, max_pivots: int) -> LpOutcome:
    keys, col, rows, eqs, rhs, nonneg = _normalized_rows(program)
    cost = {col[k]: v for k, v in _min_cost(program).items()}
    res = _simplex.solve_normalized(rows, eqs, rhs, nonneg, cost or None, max_pivots)
    if res.status == "infeasible":
        return LpOutcome("Infeasible", certificate=res.farkas, method="exact-primal", pivots=res.pivots)
    if res.status == "unbounded":
        return LpOutcome("Unbounded", method="exact-primal", pivots=res.pivots)
    witness = {k: res.x[i] for i, k in enumerate(keys)}
    out = LpOutcome("Feasible", witness=witness, method="exact-primal", pivots=res.pivots)
    if cost:
        sign = 1 if program.sense == "min" else -1
        out.optimum = sign * res.objective
        out.duals = res.duals
    return out


def _solve_dual_tableau(program: LinearProgram, max_pivots: int) -> LpOutcome:
    """Exact simplex on the dual program, whose tableau has one row per variable.

    For ``min c.x, A x >= b`` the dual is ``max b.y, A^T y <= c``. Pure
    feasibility uses ``c = 0`` plus the normalization ``b.y <= 1``: the dual
    optimum is 1 exactly when the primal is infeasible, and the optimal ``y`` is
    then a Farkas certificate. Primal values are the dual's row multipliers.
    """
    keys, col, rows, eqs, rhs, nonneg = _normalized_rows(program)
    n, m = len(keys), len(rows)
    columns: list[dict[int, Fraction]] = [{} for _ in range(n)]
    for i, r in enumerate(rows):
        for j, a in r.items():
            columns[j][i] = a
    y_nonneg = [not e for e in eqs]
    cost = {col[k]: v for k, v in _min_cost(program).items()}

    def dual_rows(c: Mapping[int, Fraction], normalize: bool):
        drows, deq, drhs = [], [], []
        for j in range(n):
            # same orientation for both kinds so the row multiplier is x_j itself
            drows.append({i: -a for i, a in columns[j].items()})
            deq.append(not nonneg[j])
            drhs.append(-c.get(j, Fraction(0)))
        if normalize:
            drows.append({i: -b for i, b in enumerate(rhs) if b})
            deq.append(False)
            drhs.append(Fraction(-1))
        return drows, deq, drhs

    dcost = {i: -b for i, b in enumerate(rhs) if b}
    pivots = 0
    drows, deq, drhs = dual_rows({}, True)
    if not drows[-1]:
        drows[-1] = {0: Fraction(0)} if m else {}
    if m == 0:
        witness = {k: Fraction(0) for k in keys}
        res = None
    else:
        res = _simplex.solve_normalized(drows, deq, drhs, y_nonneg, dcost or None, max_pivots)
        pivots += res.pivots
        if res.status != "optimal":  # y = 0 is always feasible and b.y <= 1 bounds it
            raise AssertionError(f"feasibility dual ended {res.status}")
        if res.objective is not None and res.objective < 0:
            return LpOutcome("Infeasible", certificate=res.x, method="exact-dual", pivots=pivots)
        if dcost:
            witness = {k: res.duals[j] for j, k in enumerate(keys)}
        else:  # b = 0: x = 0 is feasible
            witness = {k: Fraction(0) for k in keys}
    if not cost:
        return LpOutcome("Feasible", witness=witness, method="exact-dual", pivots=pivots)

    drows, deq, drhs = dual_rows(cost, False)
    res = _simplex.solve_normalized(drows, deq, drhs, y_nonneg, dcost or None, max_pivots)
    pivots += res.pivots
    if res.status == "infeasible":
        return LpOutcome("Unbounded", method="exact-dual", pivots=pivots)
    if res.status == "unbounded":
        raise AssertionError("dual unbounded although the primal is feasible")
    best = -(res.objective or Fraction(0))
    if dcost:
        witness = {k: res.duals[j] for j, k in enumerate(keys)}
    sign = 1 if program.sense == "min" else -1
    return LpOutcome("Feasible", witness=witness, optimum=sign * best, duals=res.x,
                     method="exact-dual", pivots=pivots)


def _solve_exact(program: LinearProgram, max_pivots: int) -> LpOutcome:
    return _solve_dual_tableau(program, max_pivots)


def lp_solve(program: LinearProgram, method: str = "auto", max_pivots: int = 10**7,
             exact_limit: int = 400_000) -> LpOutcome:
    """Decide feasibility (and optimize, if an objective is set) exactly.

    ``method="exact"`` runs the rational simplex on the whole program.
    ``method="guided"`` lets a floating-point solve propose an active set and
    then confirms it with small exact subproblems, falling back to the full
    exact simplex when confirmation fails. ``"auto"`` picks exact for programs
    whose dense tableau has at most ``exact_limit`` entries.
    """
    program.validate()
    if method not in ("auto", "exact", "guided"):
        raise ValidationError(f"unknown method {method!r}")
    if method == "auto":
        size = len(program.constraints) * (len(program.variables()) + 2 * len(program.constraints))
        method = "exact" if size <= exact_limit else "guided"
    out = None
    if method == "guided":
        from . import _guided

        out = _guided.solve(program, max_pivots)
        if out is None:
            log.info("guided confirmation failed; falling back to the full exact simplex")
    if out is None:
        out = _solve_exact(program, max_pivots)
    _check_outcome(program, out)
    return out


def _check_outcome(program: LinearProgram, out: LpOutcome) -> None:
    if out.status == "Feasible":
        if not verify_witness(program, out.witness):
            raise AssertionError("solver returned a witness that violates the program")
        if out.optimum is not None and program.objective:
            value = sum((Fraction(a) * out.witness.get(k, 0) for k, a in program.objective.items()), Fraction(0))
            if value != out.optimum:
                raise AssertionError("witness objective differs from the reported optimum")
        if out.optimum is not None and out.duals is not None and not verify_duals(program, out.duals, out.optimum):
            raise AssertionError("solver returned duals that do not certify the optimum")
    elif out.status == "Infeasible":
        if not verify_certificate(program, out.certificate):
            raise AssertionError("solver returned an invalid Farkas certificate")

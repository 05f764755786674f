"""Auxiliary random variables: linear sources over prime fields and common information.

``linearly_correlated`` draws ``K`` uniformly from ``F_q^m`` and sets
``Y_i = K A_i`` where the columns of ``A_i`` span source ``i``'s subspace.
``gk_common_information`` returns the largest variable that is a function of
both ``X`` and ``Y``. ``delta_star_search`` looks for a ``K`` making
``H(K|X)``, ``H(K|Y)`` and ``I(X;Y|K)`` simultaneously small; what it reports is
an upper bound on the best achievable maximum of the three.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Hashable, Mapping, Sequence

import numpy as np

from .errors import DependentBasisVectors, SearchSpaceTooLarge, SpanDeficient, ValidationError
from .probdist import JointDistribution, _jsonable

EXHAUSTIVE_LIMIT = 10**7
GRID = 64


# ---------------------------------------------------------------------------
# linear algebra over F_q


def _is_prime(q: int) -> bool:
    return q >= 2 and all(q % d for d in range(2, int(math.isqrt(q)) + 1))


def rank_mod(rows: Sequence[Sequence[int]], q: int) -> int:
    """Rank over ``F_q`` by Gaussian elimination (``q`` prime)."""
    mat = [[int(x) % q for x in r] for r in rows]
    if not mat:
        return 0
    rank, cols = 0, len(mat[0])
    for c in range(cols):
        piv = next((r for r in range(rank, len(mat)) if mat[r][c]), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        inv = pow(mat[rank][c], q - 2, q)
        mat[rank] = [x * inv % q for x in mat[rank]]
        for r in range(len(mat)):
            if r != rank and mat[r][c]:
                f = mat[r][c]
                mat[r] = [(x - f * y) % q for x, y in zip(mat[r], mat[rank])]
        rank += 1
    return rank


@dataclass
class SubspaceBasis:
    """Per-source bases (length-``m`` vectors over ``F_q``) of the source subspaces."""

    q: int
    m: int
    bases: list[list[tuple[int, ...]]]
    names: list[str] | None = None

    def __post_init__(self):
        if not _is_prime(self.q):
            raise ValidationError(f"field order {self.q} is not prime")
        if self.m < 1:
            raise ValidationError("ambient dimension must be positive")
        self.bases = [[tuple(int(x) for x in v) for v in b] for b in self.bases]
        if self.names is None:
            self.names = [f"Y{i + 1}" for i in range(len(self.bases))]
        if len(self.names) != len(self.bases):
            raise ValidationError("one name per source basis is required")
        for i, b in enumerate(self.bases):
            if not b:
                raise ValidationError(f"source {i + 1} has an empty basis")
            for v in b:
                if len(v) != self.m or any(not 0 <= x < self.q for x in v):
                    raise ValidationError(f"vector {v} is not in F_{self.q}^{self.m}")
            if rank_mod(b, self.q) != len(b):
                raise DependentBasisVectors(f"basis of source {i + 1} is linearly dependent")
        if rank_mod([v for b in self.bases for v in b], self.q) != self.m:
            raise SpanDeficient(f"the subspaces do not span F_{self.q}^{self.m}")

    def matrix(self, i: int) -> np.ndarray:
        """``A_i``: basis vectors of source ``i`` as columns."""
        return np.array(self.bases[i], dtype=np.int64).T

    def to_json(self) -> dict:
        return {"q": self.q, "m": self.m, "bases": [[list(v) for v in b] for b in self.bases],
                "names": list(self.names)}

    @classmethod
    def from_json(cls, data: Mapping) -> "SubspaceBasis":
        try:
            return cls(int(data["q"]), int(data["m"]), [list(b) for b in data["bases"]], data.get("names"))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed basis document: {exc}") from exc


def load_basis(path) -> SubspaceBasis:
    with open(path) as fh:
        return SubspaceBasis.from_json(json.load(fh))


def linearly_correlated(basis: SubspaceBasis, include_key: bool = False
                        ) -> tuple[JointDistribution, list[np.ndarray]]:
    """Joint pmf of ``Y_i = K A_i`` for ``K`` uniform on ``F_q^m``, and the matrices ``A_i``.

    Each ``Y_i`` is a tuple over ``F_q`` of length ``dim V_i``. With
    ``include_key`` the coordinates ``K1..Km`` are added as variables too.
    """
    q, m = basis.q, basis.m
    mats = [basis.matrix(i) for i in range(len(basis.bases))]
    names = list(basis.names)
    if include_key:
        names += [f"K{j + 1}" for j in range(m)]
    pmf: dict[tuple, Fraction] = {}
    weight = Fraction(1, q ** m)
    for key in product(range(q), repeat=m):
        k = np.array(key, dtype=np.int64)
        out = tuple(tuple(int(x) for x in (k @ A) % q) for A in mats)
        if include_key:
            out += key
        pmf[out] = pmf.get(out, 0) + weight
    alph = {}
    for idx, name in enumerate(names):
        if idx < len(mats):
            alph[name] = list(product(range(q), repeat=mats[idx].shape[1]))
        else:
            alph[name] = list(range(q))
    return JointDistribution(names, alph, pmf), mats


def is_uniform_subspace(dist: JointDistribution, variables: Sequence[str], q: int) -> bool:
    """Is the marginal of ``variables`` uniform on a set closed under F_q-linear maps?"""
    marg = dist.masses(variables)
    vals = list(marg.values())
    if any(v != vals[0] for v in vals):
        return False
    flat = {tuple(x for part in atom for x in (part if isinstance(part, tuple) else (part,))): None
            for atom in marg}
    pts = list(flat)
    zero = tuple(0 for _ in pts[0])
    if zero not in flat:
        return False
    for a in pts:
        for b in pts:
            for c in range(1, q):
                s = tuple((x + c * y) % q for x, y in zip(a, b))
                if s not in flat:
                    return False
    return True


# ---------------------------------------------------------------------------
# common information


@dataclass
class CommonInfoResult:
    """A common variable ``K`` given as a map from support atoms ``(x, y)`` to labels."""

    labels: dict[tuple, Hashable]
    entropy: float
    h_k_given_x: float = 0.0
    h_k_given_y: float = 0.0
    cmi: float = 0.0  # I(X;Y|K)
    conditional: dict[tuple, dict] | None = field(default=None, repr=False)  # P(k | x, y)

    @property
    def delta(self) -> float:
        return max(self.h_k_given_x, self.h_k_given_y, self.cmi)

    def to_json(self) -> dict:
        out = {"H(K)": self.entropy, "H(K|X)": self.h_k_given_x, "H(K|Y)": self.h_k_given_y,
               "I(X;Y|K)": self.cmi, "delta": self.delta}
        if self.conditional is None:
            out["K"] = [{"x": _jsonable(x), "y": _jsonable(y), "k": _jsonable(k)}
                        for (x, y), k in self.labels.items()]
        else:
            out["K"] = [{"x": _jsonable(x), "y": _jsonable(y),
                         "p": {str(k): float(p) for k, p in ks.items()}}
                        for (x, y), ks in self.conditional.items()]
        return out


def _pair(dist: JointDistribution, x: str | None, y: str | None) -> tuple[str, str, dict]:
    if x is None or y is None:
        if len(dist.variables) != 2:
            raise ValidationError("name the two variables of a joint with more than two")
        x, y = dist.variables
    return x, y, dist.masses([x, y])


def gk_common_information(dist: JointDistribution, x: str | None = None, y: str | None = None
                          ) -> CommonInfoResult:
    """Connected components of the bipartite support graph, labelled by their least X value."""
    x, y, joint = _pair(dist, x, y)
    parent: dict = {}

    def find(v):
        parent.setdefault(v, v)
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for a, b in joint:
        ra, rb = find(("x", a)), find(("y", b))
        if ra != rb:
            parent[rb] = ra
    x_order = {a: i for i, a in enumerate(dist.alphabets[x])}
    comp_label: dict = {}
    for a in sorted({a for a, _ in joint}, key=lambda v: x_order[v]):
        comp_label.setdefault(find(("x", a)), a)
    labels = {(a, b): comp_label[find(("x", a))] for a, b in joint}
    mass: dict = {}
    for (a, b), p in joint.items():
        mass[labels[(a, b)]] = mass.get(labels[(a, b)], 0) + p
    res = CommonInfoResult(labels, _H(float(p) for p in mass.values()))
    res.h_k_given_x, res.h_k_given_y, res.cmi = _triple(joint, {k: {v: 1.0} for k, v in labels.items()})
    return res


def _H(masses) -> float:
    h = -sum(p * math.log2(p) for p in masses if p > 1e-300)
    return h if h > 0 else 0.0


def _triple(joint: Mapping[tuple, Fraction], cond: Mapping[tuple, Mapping]) -> tuple[float, float, float]:
    """``(H(K|X), H(K|Y), I(X;Y|K))`` for ``K`` drawn from ``cond[(x, y)]``."""
    pxyk: dict = {}
    for (a, b), p in joint.items():
        for k, w in cond[(a, b)].items():
            if w > 0:
                pxyk[(a, b, k)] = pxyk.get((a, b, k), 0.0) + float(p) * w

    def marg(idx):
        out: dict = {}
        for key, p in pxyk.items():
            sub = tuple(key[i] for i in idx)
            out[sub] = out.get(sub, 0.0) + p
        return _H(out.values())

    hx, hy, hk = marg((0,)), marg((1,)), marg((2,))
    hxk, hyk, hxyk = marg((0, 2)), marg((1, 2)), marg((0, 1, 2))
    clip = lambda v: v if v > 1e-12 else 0.0  # noqa: E731
    return clip(hxk - hx), clip(hyk - hy), clip(hxk + hyk - hxyk - hk)


def delta_star_search(dist: JointDistribution, k: int = 2, mode: str = "exhaustive", seed: int = 0,
                      restarts: int = 20, steps: int = 2000, x: str | None = None, y: str | None = None,
                      limit: int = EXHAUSTIVE_LIMIT) -> CommonInfoResult:
    """Search for ``K`` with small ``max(H(K|X), H(K|Y), I(X;Y|K))``.

    ``mode="exhaustive"`` tries every deterministic map from the support to
    ``k`` labels and is exact over that class. ``mode="random"`` runs seeded
    local search over conditional pmfs whose entries are multiples of 1/64.
    """
    if k < 1:
        raise ValidationError("k must be at least 1")
    x, y, joint = _pair(dist, x, y)
    atoms = list(joint)
    if mode == "exhaustive":
        count = k ** len(atoms)
        if count > limit:
            raise SearchSpaceTooLarge(f"{k}^{len(atoms)} = {count} maps exceed the limit {limit}")
        best = None
        for assign in product(range(k), repeat=len(atoms)):
            if assign and assign[0] != 0:
                break  # label symmetry: atom 0 always gets label 0
            cond = {a: {v: 1.0} for a, v in zip(atoms, assign)}
            t = _triple(joint, cond)
            if best is None or max(t) < max(best[0]) - 1e-15:
                best = (t, assign)
        t, assign = best
        labels = dict(zip(atoms, assign))
        res = CommonInfoResult(labels, _H(_k_masses(joint, {a: {v: 1} for a, v in labels.items()})), *t)
        return res
    if mode != "random":
        raise ValidationError(f"unknown mode {mode!r}")
    rng = random.Random(seed)
    best_val, best_w = math.inf, None
    for _ in range(restarts):
        w = {a: _random_grid_pmf(rng, k) for a in atoms}
        val = max(_triple(joint, _as_cond(w)))
        for _ in range(steps):
            a = rng.choice(atoms)
            i, j = rng.sample(range(k), 2) if k > 1 else (0, 0)
            if i == j or w[a][i] == 0:
                continue
            w[a][i] -= 1
            w[a][j] += 1
            new = max(_triple(joint, _as_cond(w)))
            if new <= val:
                val = new
            else:
                w[a][i] += 1
                w[a][j] -= 1
            if val == 0:
                break
        if val < best_val:
            best_val, best_w = val, {a: list(v) for a, v in w.items()}
        if best_val == 0:
            break
    cond = _as_cond(best_w)
    t = _triple(joint, cond)
    labels = {a: max(range(k), key=lambda i: best_w[a][i]) for a in atoms}
    exact = {a: {i: Fraction(c, GRID) for i, c in enumerate(best_w[a]) if c} for a in atoms}
    return CommonInfoResult(labels, _H(_k_masses(joint, exact)), *t,
                            conditional={a: {i: Fraction(c, GRID) for i, c in enumerate(best_w[a]) if c}
                                         for a in atoms})


def _random_grid_pmf(rng: random.Random, k: int) -> list[int]:
    cuts = sorted(rng.randint(0, GRID) for _ in range(k - 1))
    edges = [0] + cuts + [GRID]
    return [edges[i + 1] - edges[i] for i in range(k)]


def _as_cond(w: Mapping[tuple, list[int]]) -> dict:
    return {a: {i: c / GRID for i, c in enumerate(v) if c} for a, v in w.items()}


def _k_masses(joint, cond) -> list[float]:
    # exact sums when the weights are rational, so a constant K gets mass exactly 1
    out: dict = {}
    for a, p in joint.items():
        for k, w in cond[a].items():
            out[k] = out.get(k, 0) + p * (w if isinstance(w, (int, Fraction)) else Fraction(w))
    return [float(v) for v in out.values()]


def triple_of(dist: JointDistribution, x: str, y: str, kname: str) -> tuple[float, float, float]:
    """The triple recomputed from a joint distribution that contains ``K`` as a variable."""
    from .probdist import conditional_entropy, entropy

    hk_x = conditional_entropy(dist, [kname], [x])
    hk_y = conditional_entropy(dist, [kname], [y])
    cmi = (entropy(dist, variables=[x, kname]) + entropy(dist, variables=[y, kname])
           - entropy(dist, variables=[x, y, kname]) - entropy(dist, variables=[kname]))
    return hk_x, hk_y, cmi


def with_common_variable(dist: JointDistribution, result: CommonInfoResult, x: str, y: str,
                         name: str = "K") -> JointDistribution:
    """Append ``K`` to ``dist`` (deterministic results only)."""
    if result.conditional is not None:
        pmf: dict = {}
        ix, iy = dist.index_of([x, y])
        for o, p in dist.pmf.items():
            for k, w in result.conditional[(o[ix], o[iy])].items():
                pmf[o + (k,)] = pmf.get(o + (k,), 0) + p * w
        alph = dict(dist.alphabets)
        alph[name] = sorted({key[-1] for key in pmf})
        return JointDistribution(dist.variables + (name,), alph, pmf)
    return dist.with_variable(name, lambda o: result.labels[(o[x], o[y])])

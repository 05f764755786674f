"""Finite joint distributions with exact probabilities, and entropy measures on them.

Probabilities are stored as :class:`fractions.Fraction`; entropies are floats in
bits. Only outcomes of positive probability are stored.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from numbers import Rational
from typing import Any, Hashable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    DuplicateOutcome,
    GroundSetTooLarge,
    NegativeProbability,
    NonUnitMass,
    OutOfRange,
    UnknownSymbol,
    ZeroProbability,
    UnknownVariable,
    ValidationError,
)

EPS_H = 1e-9
DEFAULT_GROUND_CAP = 20
RATIONAL_DENOMINATOR = 2**20

__all__ = [
    "EPS_H",
    "EntropyMeasure",
    "JointDistribution",
    "SHANNON",
    "SetFunction",
    "binary_entropy",
    "conditional_entropy",
    "entropy",
    "entropy_vector",
    "exact_entropy",
    "invert_binary_entropy",
    "is_function_of",
    "joint_from_table",
    "load_distribution",
    "marginalize",
    "to_fraction",
]


def to_fraction(value: Any) -> Fraction:
    """Parse an exact rational from a Fraction, int, ``"num/den"`` string or decimal."""
    if isinstance(value, bool):
        raise TypeError("booleans are not probabilities")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        # shortest decimal repr, so 0.1 means 1/10
        return Fraction(repr(value))
    raise TypeError(f"cannot interpret {value!r} as a rational number")


def _hashable(symbol: Any) -> Hashable:
    if isinstance(symbol, list):
        return tuple(_hashable(s) for s in symbol)
    return symbol


def _jsonable(symbol: Hashable) -> Any:
    if isinstance(symbol, tuple):
        return [_jsonable(s) for s in symbol]
    return symbol


class JointDistribution:
    """A pmf over full outcome tuples of named discrete variables.

    Instances are treated as immutable; every transformation returns a new one.
    """

    __slots__ = ("variables", "alphabets", "pmf", "_index")

    def __init__(
        self,
        variables: Sequence[str],
        alphabets: Mapping[str, Sequence[Hashable]],
        pmf: Mapping[tuple, Fraction],
    ):
        self.variables: tuple[str, ...] = tuple(variables)
        self.alphabets: dict[str, tuple] = {v: tuple(alphabets[v]) for v in self.variables}
        self.pmf: Mapping[tuple, Fraction] = MappingProxyType(dict(pmf))
        self._index = {v: i for i, v in enumerate(self.variables)}
        self._validate()

    def _validate(self) -> None:
        if len(self._index) != len(self.variables):
            raise ValidationError(f"duplicate variable names in {self.variables}")
        if not self.pmf:
            raise ValidationError("a distribution needs at least one outcome")
        alph_sets = [set(self.alphabets[v]) for v in self.variables]
        total = Fraction(0)
        for outcome, p in self.pmf.items():
            if len(outcome) != len(self.variables):
                raise ValidationError(
                    f"outcome {outcome!r} has {len(outcome)} symbols, expected {len(self.variables)}"
                )
            for sym, alph, var in zip(outcome, alph_sets, self.variables):
                if sym not in alph:
                    raise UnknownSymbol(f"symbol {sym!r} not in the alphabet of {var!r}")
            if p < 0:
                raise NegativeProbability(f"P{outcome!r} = {p} < 0")
            if p == 0:
                raise ZeroProbability(f"P{outcome!r} = 0; store the support only")
            total += p
        if total != 1:
            raise NonUnitMass(f"probabilities sum to {total}, not 1")

    # -- basic access -------------------------------------------------
    def __repr__(self) -> str:
        return f"JointDistribution(variables={self.variables!r}, support={len(self.pmf)})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, JointDistribution):
            return NotImplemented
        return self.variables == other.variables and self.pmf == other.pmf

    def __hash__(self) -> int:
        return hash((self.variables, frozenset(self.pmf.items())))

    def __len__(self) -> int:
        return len(self.pmf)

    def __iter__(self) -> Iterator[tuple[tuple, Fraction]]:
        return iter(self.pmf.items())

    def support(self) -> list[tuple]:
        return list(self.pmf)

    def probabilities(self) -> list[Fraction]:
        return list(self.pmf.values())

    def index_of(self, variables: Iterable[str] | str) -> tuple[int, ...]:
        if isinstance(variables, str):
            variables = [variables]
        out = []
        for v in variables:
            try:
                out.append(self._index[v])
            except KeyError:
                raise UnknownVariable(f"unknown variable {v!r}; have {self.variables}") from None
        return tuple(out)

    def project(self, outcome: tuple, variables: Iterable[str]) -> tuple:
        return tuple(outcome[i] for i in self.index_of(variables))

    def masses(self, variables: Iterable[str] | str | None = None) -> dict[tuple, Fraction]:
        """Marginal pmf of ``variables`` as a plain dict (no validation, fast)."""
        if variables is None:
            return dict(self.pmf)
        idx = self.index_of(variables)
        out: dict[tuple, Fraction] = defaultdict(Fraction)
        for outcome, p in self.pmf.items():
            out[tuple(outcome[i] for i in idx)] += p
        return dict(out)

    def with_variable(self, name: str, func, alphabet: Sequence[Hashable] | None = None
                      ) -> "JointDistribution":
        """Append a variable computed deterministically from each full outcome."""
        if name in self._index:
            raise ValidationError(f"variable {name!r} already exists")
        pmf = {}
        values = []
        for outcome, p in self.pmf.items():
            val = _hashable(func(dict(zip(self.variables, outcome))))
            values.append(val)
            pmf[outcome + (val,)] = p
        if alphabet is None:
            alphabet = list(dict.fromkeys(values))
        alphabets = dict(self.alphabets)
        alphabets[name] = tuple(alphabet)
        return JointDistribution(self.variables + (name,), alphabets, pmf)

    def rename(self, mapping: Mapping[str, str]) -> "JointDistribution":
        names = [mapping.get(v, v) for v in self.variables]
        alph = {mapping.get(v, v): a for v, a in self.alphabets.items()}
        return JointDistribution(names, alph, self.pmf)

    # -- JSON -----------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "variables": list(self.variables),
            "alphabets": {v: [_jsonable(s) for s in self.alphabets[v]] for v in self.variables},
            "pmf": [
                {"outcome": [_jsonable(s) for s in o], "p": f"{p.numerator}/{p.denominator}"}
                for o, p in self.pmf.items()
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "JointDistribution":
        try:
            names = list(data["variables"])
            alphabets = {v: [_hashable(s) for s in data["alphabets"][v]] for v in names}
            entries = [([_hashable(s) for s in e["outcome"]], e["p"]) for e in data["pmf"]]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed distribution document: {exc}") from exc
        return joint_from_table(names, alphabets, entries)


def joint_from_table(
    names: Sequence[str],
    alphabets: Mapping[str, Sequence[Hashable]] | None,
    entries: Iterable[tuple[Sequence[Hashable], Any]] | Mapping[tuple, Any],
) -> JointDistribution:
    """Build a validated distribution from ``(outcome, probability)`` entries.

    ``alphabets=None`` infers each alphabet from the outcomes in order of first
    appearance. Probabilities may be Fractions, ints or ``"num/den"`` strings.
    """
    if isinstance(entries, Mapping):
        entries = list(entries.items())
    entries = list(entries)
    if not entries:
        raise ValidationError("entries must be nonempty")
    names = list(names)
    pmf: dict[tuple, Fraction] = {}
    for outcome, p in entries:
        outcome = tuple(_hashable(s) for s in (outcome if isinstance(outcome, (list, tuple)) else [outcome]))
        if outcome in pmf:
            raise DuplicateOutcome(f"outcome {outcome!r} listed twice")
        pmf[outcome] = to_fraction(p)
    if alphabets is None:
        alphabets = {v: list(dict.fromkeys(o[i] for o in pmf if len(o) == len(names)))
                     for i, v in enumerate(names)}
    else:
        missing = [v for v in names if v not in alphabets]
        if missing:
            raise ValidationError(f"no alphabet given for {missing}")
    return JointDistribution(names, alphabets, pmf)


def load_distribution(path) -> JointDistribution:
    with open(path) as fh:
        return JointDistribution.from_json(json.load(fh))


def marginalize(dist: JointDistribution, variables: Iterable[str] | str) -> JointDistribution:
    if isinstance(variables, str):
        variables = [variables]
    variables = list(dict.fromkeys(variables))
    if not variables:
        raise ValidationError("cannot marginalize onto an empty set of variables")
    dist.index_of(variables)
    return JointDistribution(variables, {v: dist.alphabets[v] for v in variables},
                             dist.masses(variables))


# ---------------------------------------------------------------------------
# entropy measures


@dataclass(frozen=True)
class EntropyMeasure:
    """Shannon, Renyi-``alpha`` or Tsallis-``q`` entropy (logarithms base 2)."""

    kind: str = "shannon"
    param: float | None = None

    def __post_init__(self):
        if self.kind == "shannon":
            if self.param is not None:
                raise ValidationError("Shannon entropy takes no parameter")
        elif self.kind in ("renyi", "tsallis"):
            if self.param is None or not self.param > 0 or self.param == 1:
                raise ValidationError(f"{self.kind} parameter must be > 0 and != 1, got {self.param}")
        else:
            raise ValidationError(f"unknown entropy kind {self.kind!r}")

    @classmethod
    def shannon(cls) -> "EntropyMeasure":
        return cls("shannon")

    @classmethod
    def renyi(cls, alpha: float) -> "EntropyMeasure":
        return cls("renyi", float(alpha))

    @classmethod
    def tsallis(cls, q: float) -> "EntropyMeasure":
        return cls("tsallis", float(q))

    def __str__(self) -> str:
        return self.kind if self.param is None else f"{self.kind}({self.param:g})"

    def of(self, probs: Iterable[float]) -> float:
        """Entropy of a probability vector; zero entries are ignored."""
        p = np.asarray([float(x) for x in probs], dtype=float)
        p = p[p > 0]
        if self.kind == "shannon":
            h = float(-(p * np.log2(p)).sum())
        elif self.kind == "renyi":
            h = float(np.log2((p ** self.param).sum()) / (1.0 - self.param))
        else:
            h = float((1.0 - (p ** self.param).sum()) / (self.param - 1.0))
        # rounding can leave -0.0 or -1e-17 for point masses
        return h if h > 0 else 0.0

    def binary(self, p: float) -> float:
        if not 0.0 <= p <= 1.0:
            raise OutOfRange(f"binary probability {p} outside [0, 1]")
        return self.of((p, 1.0 - p))

    def binary_max(self) -> float:
        return self.binary(0.5)

    def invert_binary(self, value: float, tol: float = 1e-12) -> float:
        """The unique ``p`` in [0, 1/2] whose binary entropy is ``value`` (bisection)."""
        top = self.binary_max()
        if value < -tol or value > top + tol or math.isnan(value):
            raise OutOfRange(f"binary {self} entropy {value} outside [0, {top}]")
        if value <= 0:
            return 0.0
        if value >= top:
            return 0.5
        lo, hi = 0.0, 0.5
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if self.binary(mid) < value:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)


SHANNON = EntropyMeasure()


def binary_entropy(p: float) -> float:
    """h_b(p) in bits."""
    return SHANNON.binary(p)


def invert_binary_entropy(value: float) -> float:
    """Inverse of :func:`binary_entropy` on [0, 1/2], to absolute tolerance 1e-12."""
    if not -1e-12 <= value <= 1 + 1e-12:
        raise OutOfRange(f"binary entropy {value} outside [0, 1]")
    return SHANNON.invert_binary(value)


def entropy(dist: JointDistribution, measure: EntropyMeasure = SHANNON,
            variables: Iterable[str] | str | None = None) -> float:
    """Joint entropy (bits) of ``variables`` (all of them by default)."""
    return measure.of(dist.masses(variables).values())


def conditional_entropy(dist: JointDistribution, target: Iterable[str] | str,
                        given: Iterable[str] | str = (), measure: EntropyMeasure = SHANNON) -> float:
    """``H(target | given) = H(target, given) - H(given)``."""
    target = [target] if isinstance(target, str) else list(target)
    given = [given] if isinstance(given, str) else list(given)
    if not target:
        raise ValidationError("conditional entropy needs a nonempty target")
    both = list(dict.fromkeys(target + given))
    h_given = entropy(dist, measure, given) if given else 0.0
    return entropy(dist, measure, both) - h_given


def is_function_of(dist: JointDistribution, target: Iterable[str] | str,
                   given: Iterable[str] | str) -> bool:
    """Structural test: on the support, does ``given`` determine ``target``?"""
    t_idx = dist.index_of(target)
    g_idx = dist.index_of(given)
    seen: dict[tuple, tuple] = {}
    for outcome in dist.pmf:
        key = tuple(outcome[i] for i in g_idx)
        val = tuple(outcome[i] for i in t_idx)
        if seen.setdefault(key, val) != val:
            return False
    return True


def exact_entropy(probs: Iterable[Fraction]) -> Fraction | None:
    """Shannon entropy as an exact rational when every mass is a power of two, else None."""
    total = Fraction(0)
    for p in probs:
        if p <= 0:
            continue
        num, den = p.numerator, p.denominator
        if num & (num - 1) or den & (den - 1):
            return None
        total += p * (den.bit_length() - num.bit_length())
    return total


# ---------------------------------------------------------------------------
# set functions


class SetFunction:
    """Values on the nonempty subsets of an ordered ground set.

    Subset ``alpha`` is encoded as a bitmask with the first label in the least
    significant bit; ``values[mask - 1]`` holds ``h(alpha)``. ``h(empty) = 0``.
    """

    __slots__ = ("ground", "values", "_pos")

    def __init__(self, ground: Sequence[Hashable], values: Sequence):
        self.ground = tuple(ground)
        if len(values) != 2 ** len(self.ground) - 1:
            raise ValidationError(
                f"{len(values)} values for a ground set of {len(self.ground)} (need 2^n - 1)"
            )
        self.values = list(values)
        self._pos = {g: i for i, g in enumerate(self.ground)}

    def __repr__(self) -> str:
        return f"SetFunction(ground={self.ground!r})"

    def __len__(self) -> int:
        return len(self.values)

    def mask(self, subset: Iterable[Hashable] | int) -> int:
        if isinstance(subset, int):
            return subset
        m = 0
        for g in subset:
            try:
                m |= 1 << self._pos[g]
            except KeyError:
                raise UnknownVariable(f"{g!r} not in ground set {self.ground}") from None
        return m

    def subset(self, mask: int) -> tuple:
        return tuple(g for i, g in enumerate(self.ground) if mask >> i & 1)

    def __getitem__(self, subset) -> Any:
        m = self.mask(subset)
        if m == 0:
            return 0
        return self.values[m - 1]

    def items(self) -> Iterator[tuple[tuple, Any]]:
        for m in range(1, 2 ** len(self.ground)):
            yield self.subset(m), self.values[m - 1]

    def as_array(self) -> np.ndarray:
        return np.asarray([float(v) for v in self.values])

    def to_json(self) -> dict:
        def enc(v):
            if isinstance(v, Fraction):
                return f"{v.numerator}/{v.denominator}"
            return float(v)

        return {"ground": list(self.ground), "values": [enc(v) for v in self.values]}

    @classmethod
    def from_json(cls, data: Mapping) -> "SetFunction":
        vals = [to_fraction(v) if isinstance(v, str) else v for v in data["values"]]
        return cls(data["ground"], vals)


def entropy_vector(dist: JointDistribution, ground: Sequence[str] | None = None,
                   measure: EntropyMeasure = SHANNON, cap: int = DEFAULT_GROUND_CAP) -> SetFunction:
    """Entropy of every nonempty subset of ``ground`` (default: all variables)."""
    ground = list(dist.variables if ground is None else ground)
    if len(ground) > cap:
        raise GroundSetTooLarge(f"ground set of {len(ground)} exceeds cap {cap}")
    idx = dist.index_of(ground)
    # integer codes per ground variable, so each subset marginal is a group-by on ints
    codes = []
    for i in idx:
        lookup: dict = {}
        codes.append([lookup.setdefault(o[i], len(lookup)) for o in dist.pmf])
    probs = [float(p) for p in dist.pmf.values()]
    n = len(ground)
    values = [0.0] * (2 ** n - 1)
    for mask in range(1, 2 ** n):
        members = [codes[k] for k in range(n) if mask >> k & 1]
        acc: dict[tuple, float] = defaultdict(float)
        for j, p in enumerate(probs):
            acc[tuple(c[j] for c in members)] += p
        values[mask - 1] = measure.of(acc.values())
    return SetFunction(ground, values)

"""Binary partition variables of a finite distribution and recovery from entropies.

Support atoms are indexed by rank: mass descending, ties broken by first
appearance in the pmf. Index 0 is therefore a most probable atom. A two-block
partition of the atoms is stored by the block that avoids index 0, so every
partition has exactly one stored form. Labels print 1-based, e.g. ``<{2,3}>``.

Recovery treats oracle labels as opaque keys: it never looks inside them.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Hashable, Iterable, Mapping, Sequence

from .errors import (
    InconsistentOracle,
    NonDistribution,
    NonFactorizableCoordinates,
    PropertyViolation,
    SupportTooLarge,
    SupportTooSmall,
    ValidationError,
)
from .probdist import EPS_H, SHANNON, EntropyMeasure, JointDistribution, _hashable, _jsonable

COMPLETE_CAP = 20
RECOVERY_CAP = 12
MASS_TOL = 1e-6


# ---------------------------------------------------------------------------
# labels


@dataclass(frozen=True, order=True)
class PartitionLabel:
    """A two-block partition of ``range(n)``, stored by the block avoiding atom 0."""

    mask: int
    n: int

    def __post_init__(self):
        full = (1 << self.n) - 1
        if self.mask & 1:
            object.__setattr__(self, "mask", full ^ self.mask)
        if not 0 < self.mask < full or self.mask & 1:
            raise ValidationError(f"mask {self.mask:b} is not a proper nonempty block of {self.n} atoms")

    @classmethod
    def from_indices(cls, block: Iterable[int], n: int, one_based: bool = True) -> "PartitionLabel":
        mask = 0
        for i in block:
            k = i - 1 if one_based else i
            if not 0 <= k < n:
                raise ValidationError(f"atom index {i} outside the support")
            mask |= 1 << k
        return cls(mask, n)

    @property
    def block(self) -> frozenset:
        return frozenset(i for i in range(self.n) if self.mask >> i & 1)

    def side(self, atom: int) -> int:
        return self.mask >> atom & 1

    def __str__(self) -> str:
        return "<{" + ",".join(str(i + 1) for i in sorted(self.block)) + "}>"

    def to_json(self) -> list[int]:
        return [i + 1 for i in sorted(self.block)]


def _check_n(n: int, cap: int) -> None:
    if n < 2:
        raise SupportTooSmall(f"support size {n} < 2 has no binary partitions")
    if n > cap:
        raise SupportTooLarge(f"support size {n} exceeds cap {cap}")


def enumerate_partitions(n: int, cap: int = COMPLETE_CAP) -> list[PartitionLabel]:
    """All ``2^(n-1) - 1`` two-block partitions of ``n`` atoms, by block bitmask."""
    _check_n(n, cap)
    return [PartitionLabel(m << 1, n) for m in range(1, 1 << (n - 1))]


def support_size_from_labels(count: int) -> int:
    """Invert ``count = 2^(n-1) - 1``."""
    n = (count + 1).bit_length()
    if count < 0 or (1 << (n - 1)) - 1 != count:
        raise InconsistentOracle(f"{count} labels is not of the form 2^(n-1)-1")
    return n


# ---------------------------------------------------------------------------
# partition systems


def rank_atoms(dist: JointDistribution, variables: Sequence[str] | None = None):
    """Support atoms of ``variables`` sorted by mass (descending), ties by first appearance."""
    m = dist.masses(variables if variables is not None else dist.variables)
    atoms = sorted(m, key=lambda a: -m[a])  # stable sort keeps first-appearance ties
    return atoms, [m[a] for a in atoms]


@dataclass
class PartitionSystem:
    """Partition variables of the atoms of ``base`` over ``coordinates``."""

    base: JointDistribution
    coordinates: tuple[str, ...]
    atoms: list[tuple]
    masses: list[Fraction]
    labels: list[PartitionLabel]
    complete: bool
    measure: EntropyMeasure = SHANNON
    _fmass: list[float] = field(default_factory=list, repr=False)

    def __post_init__(self):
        self._fmass = [float(p) for p in self.masses]

    @property
    def n(self) -> int:
        return len(self.atoms)

    @property
    def M(self) -> int:
        return len(self.coordinates)

    def entropy(self, delta: Iterable[PartitionLabel] = (), tau: Iterable[int] = (),
                measure: EntropyMeasure | None = None) -> float:
        """Joint entropy of the partition variables in ``delta`` and coordinates ``tau``."""
        delta, tau = list(delta), sorted(set(tau))
        if not delta and not tau:
            return 0.0
        acc: dict[tuple, float] = {}
        for a, (atom, p) in enumerate(zip(self.atoms, self._fmass)):
            key = tuple(lab.mask >> a & 1 for lab in delta) + tuple(atom[j] for j in tau)
            acc[key] = acc.get(key, 0.0) + p
        return (measure or self.measure).of(acc.values())

    def determines(self, target: Iterable[PartitionLabel], given: Iterable[PartitionLabel] = (),
                   tau: Iterable[int] = ()) -> bool:
        """Structural test: do ``given`` and coordinates ``tau`` fix every ``target``?"""
        target, given, tau = list(target), list(given), sorted(set(tau))
        seen: dict[tuple, tuple] = {}
        for a, atom in enumerate(self.atoms):
            key = tuple(lab.mask >> a & 1 for lab in given) + tuple(atom[j] for j in tau)
            val = tuple(lab.mask >> a & 1 for lab in target)
            if seen.setdefault(key, val) != val:
                return False
        return True

    def indicator(self, atom: int) -> PartitionLabel:
        return PartitionLabel(1 << atom, self.n)

    def extended(self, labels: Sequence[PartitionLabel] | None = None) -> JointDistribution:
        """The base distribution with each selected partition variable appended as 0/1."""
        labels = self.labels if labels is None else labels
        rank = {atom: a for a, atom in enumerate(self.atoms)}
        out = self.base
        for lab in labels:
            out = out.with_variable(
                f"A{lab}", lambda o, lab=lab: lab.side(rank[tuple(o[v] for v in self.coordinates)]), (0, 1))
        return out


def build_partition_system(dist: JointDistribution, labels: Sequence | None = None,
                           coordinates: Sequence[str] | None = None,
                           measure: EntropyMeasure = SHANNON, cap: int = COMPLETE_CAP) -> PartitionSystem:
    """Partition variables of the (joint) variable ``coordinates`` of ``dist``.

    ``labels`` selects a subset of partitions (PartitionLabels or 1-based atom
    index lists); by default all of them are included.
    """
    coords = tuple(dist.variables if coordinates is None else coordinates)
    dist.index_of(coords)
    atoms, masses = rank_atoms(dist, coords)
    n = len(atoms)
    if labels is None:
        labs, complete = enumerate_partitions(n, cap), True
    else:
        _check_n(n, cap)
        labs = [lab if isinstance(lab, PartitionLabel) else PartitionLabel.from_indices(lab, n)
                for lab in labels]
        complete = len(set(labs)) == (1 << (n - 1)) - 1
    return PartitionSystem(dist, coords, atoms, masses, labs, complete, measure)


# ---------------------------------------------------------------------------
# oracles


class EntropyOracle:
    """Answers joint-entropy queries over opaque labels and coordinate indices."""

    labels: list
    n: int
    M: int
    measure: EntropyMeasure = SHANNON
    tol: float = EPS_H

    def query(self, delta: Iterable = (), tau: Iterable[int] = ()) -> float:
        raise NotImplementedError

    def conditional(self, target: Iterable, given: Iterable = (), tau: Iterable[int] = ()) -> float:
        target, given = list(target), list(given)
        both = list(dict.fromkeys(target + given))
        return self.query(both, tau) - self.query(given, tau)

    def is_determined(self, target: Iterable, given: Iterable = (), tau: Iterable[int] = ()) -> bool:
        """Zero conditional entropy, within ``tol`` unless answered structurally."""
        return self.conditional(target, given, tau) <= self.tol


class DistributionOracle(EntropyOracle):
    """Oracle backed by a partition system.

    ``seed`` hides label semantics behind a random relabelling with integer
    keys. ``structural`` lets zero tests use the support instead of a tolerance.
    """

    def __init__(self, system: PartitionSystem, seed: int | None = None, structural: bool = True,
                 measure: EntropyMeasure | None = None):
        self.system = system
        self.n, self.M = system.n, system.M
        self.measure = measure or system.measure
        self.structural = structural
        hidden = list(system.labels)
        if seed is None:
            self.labels = hidden
            self._lookup = {lab: lab for lab in hidden}
        else:
            random.Random(seed).shuffle(hidden)
            self.labels = list(range(len(hidden)))
            self._lookup = dict(zip(self.labels, hidden))
        self._cache: dict = {}

    def _hidden(self, keys) -> list[PartitionLabel]:
        try:
            return [self._lookup[k] for k in keys]
        except (KeyError, TypeError):
            raise InconsistentOracle(f"unknown label in query {list(keys)!r}") from None

    def query(self, delta=(), tau=()) -> float:
        key = (frozenset(delta), frozenset(tau))
        if key not in self._cache:
            for j in key[1]:
                if not 0 <= j < self.M:
                    raise InconsistentOracle(f"coordinate {j} out of range")
            self._cache[key] = self.system.entropy(self._hidden(key[0]), key[1], self.measure)
        return self._cache[key]

    def is_determined(self, target, given=(), tau=()) -> bool:
        if not self.structural:
            return super().is_determined(target, given, tau)
        return self.system.determines(self._hidden(list(target)), self._hidden(list(given)), tau)


def _measure_from_json(text: str | None) -> EntropyMeasure:
    if not text or text == "shannon":
        return SHANNON
    kind, _, param = text.partition(":")
    return EntropyMeasure(kind, float(param))


class TableOracle(EntropyOracle):
    """Oracle answering from a fixed table; absent entries are an inconsistency."""

    def __init__(self, n: int, M: int, labels: Sequence, entries: Mapping[tuple, float],
                 measure: EntropyMeasure = SHANNON):
        self.n, self.M = n, M
        self.labels = [_hashable(lab) for lab in labels]
        self.measure = measure
        self.entries = {(frozenset(_hashable(x) for x in d), frozenset(t)): float(h)
                        for (d, t), h in entries.items()}

    def query(self, delta=(), tau=()) -> float:
        key = (frozenset(delta), frozenset(tau))
        if not key[0] and not key[1]:
            return 0.0
        try:
            return self.entries[key]
        except KeyError:
            raise InconsistentOracle(
                f"no table entry for delta={sorted(map(str, key[0]))}, tau={sorted(key[1])}") from None

    def to_json(self) -> dict:
        return {
            "n": self.n, "M": self.M, "measure": str(self.measure).replace("(", ":").rstrip(")"),
            "labels": [_jsonable(lab) for lab in self.labels],
            "entries": [{"delta": sorted((_jsonable(x) for x in d), key=str), "tau": sorted(t), "H": h}
                        for (d, t), h in sorted(self.entries.items(),
                                                key=lambda kv: (len(kv[0][0]), sorted(map(str, kv[0][0])),
                                                                sorted(kv[0][1])))],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "TableOracle":
        try:
            entries = {(tuple(e["delta"]), tuple(e.get("tau", ()))): e["H"] for e in data["entries"]}
            return cls(int(data["n"]), int(data.get("M", 1)), data["labels"], entries,
                       _measure_from_json(data.get("measure")))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed oracle document: {exc}") from exc


def load_oracle(path) -> TableOracle:
    with open(path) as fh:
        return TableOracle.from_json(json.load(fh))


class RecordingOracle(EntropyOracle):
    """Wraps an oracle and remembers every query, e.g. to save an offline table."""

    def __init__(self, inner: EntropyOracle):
        self.inner = inner
        self.labels, self.n, self.M = inner.labels, inner.n, inner.M
        self.measure, self.tol = inner.measure, inner.tol
        self.log: dict[tuple, float] = {}

    def query(self, delta=(), tau=()) -> float:
        delta, tau = tuple(delta), tuple(tau)
        h = self.inner.query(delta, tau)
        self.log[(frozenset(delta), frozenset(tau))] = h
        return h

    def is_determined(self, target, given=(), tau=()) -> bool:
        self.conditional(target, given, tau)  # logged so a saved table can replay the test
        return self.inner.is_determined(target, given, tau)

    def to_table(self) -> TableOracle:
        labels = [lab.to_json() if isinstance(lab, PartitionLabel) else lab for lab in self.labels]
        conv = {lab: (lab.to_json() if isinstance(lab, PartitionLabel) else lab) for lab in self.labels}
        entries = {(tuple(conv[x] for x in d), tuple(t)): h for (d, t), h in self.log.items()}
        return TableOracle(self.n, self.M, labels, entries, self.measure)


# ---------------------------------------------------------------------------
# structural properties


@dataclass
class PropertyReport:
    distinctness: bool = True
    completeness: bool = True
    basis: bool = True
    indicator_minimality: bool = True
    checked_pairs: int = 0
    checked_functions: int = 0
    chains: dict = field(default_factory=dict)
    equality_cases: int = 0

    @property
    def ok(self) -> bool:
        return self.distinctness and self.completeness and self.basis and self.indicator_minimality


def _support_size(system: PartitionSystem, labels: Sequence[PartitionLabel]) -> int:
    return len({tuple(lab.side(a) for lab in labels) for a in range(system.n)})


def basis_chain(system: PartitionSystem, label: PartitionLabel) -> list[PartitionLabel]:
    """Indicators that, added one at a time to ``label``, each add new information.

    Keep one representative atom on each side of ``label`` (atom 0 and the
    largest atom of the block) and take the indicators of all other atoms.
    """
    rep = max(label.block)
    return [system.indicator(a) for a in range(1, system.n) if a != rep]


def check_lemma2_properties(system: PartitionSystem, eps: float = EPS_H) -> PropertyReport:
    """Verify distinctness, completeness and the basis chains; raise on any failure."""
    if not system.complete:
        raise ValidationError("the property checks need the complete partition family")
    rep = PropertyReport()
    labs = system.labels
    for a, b in combinations(labs, 2):
        for x, y in ((a, b), (b, a)):
            h = system.entropy([x, y]) - system.entropy([y])
            if not h > eps:
                raise PropertyViolation(f"H(A{x} | A{y}) = {h} is not positive")
        rep.checked_pairs += 1
    # every nonconstant binary function of the atoms induces the same split as some A
    ext = system.extended()
    idx = ext.index_of(system.coordinates)
    rank = {atom: a for a, atom in enumerate(system.atoms)}
    order = [rank[tuple(o[i] for i in idx)] for o in ext.support()]
    split_of = {}
    for lab in labs:
        col = ext.index_of(f"A{lab}")[0]
        values = [o[col] for o in ext.support()]
        split_of[_split_key(values, order, system.n)] = lab
    for f in range(1, (1 << system.n) - 1):
        values = [f >> a & 1 for a in order]
        if _split_key(values, order, system.n) not in split_of:
            raise PropertyViolation(f"binary function {f:b} matches no partition variable")
        rep.checked_functions += 1
    for lab in labs:
        chain = basis_chain(system, lab)
        if len(chain) != system.n - 2:
            raise PropertyViolation(f"chain for A{lab} has {len(chain)} members, not {system.n - 2}")
        prefix = [lab]
        for k, b in enumerate(chain, start=1):
            h = system.entropy(prefix + [b]) - system.entropy(prefix)
            prefix.append(b)
            size = _support_size(system, prefix)
            if not h > eps or size != k + 2:
                raise PropertyViolation(
                    f"chain for A{lab} stalls at step {k}: gain {h}, support {size} != {k + 2}")
        if _support_size(system, prefix) != system.n:
            raise PropertyViolation(f"chain for A{lab} does not determine the atom")
        rep.chains[lab] = chain
    return rep


def _split_key(values, order, n: int) -> frozenset:
    """The two-block split of atoms induced by per-outcome values, as the block holding atom 0."""
    by_atom = dict(zip(order, values))
    if len(by_atom) != n or any(by_atom[a] != v for a, v in zip(order, values)):
        raise PropertyViolation("partition variable is not a function of the atom")
    return frozenset(a for a in range(n) if by_atom[a] == by_atom[0])


def check_indicator_properties(system: PartitionSystem, eps: float = EPS_H,
                               tie_tol: float = 1e-12) -> PropertyReport:
    """Indicator minimality: the rank-``i`` indicator has the least entropy among
    labels not fixed by the indicators of higher ranks; ties only between
    indicators of equally likely atoms."""
    rep = PropertyReport()
    ent = {lab: system.entropy([lab]) for lab in system.labels}
    for i in range(1, system.n):
        ind = system.indicator(i)
        later = [system.indicator(j) for j in range(i + 1, system.n)]
        h_i = system.entropy([ind])
        for lab in system.labels:
            if system.entropy(later + [lab]) - system.entropy(later) <= eps:
                continue
            rep.checked_pairs += 1
            if ent[lab] < h_i - tie_tol:
                raise PropertyViolation(f"A{lab} has less entropy than the rank-{i + 1} indicator")
            if abs(ent[lab] - h_i) <= tie_tol and lab != ind:
                block = lab.block
                atom = next(iter(block)) if len(block) == 1 else (0 if len(block) == system.n - 1 else None)
                if atom is None or system.masses[atom] != system.masses[i]:
                    raise PropertyViolation(
                        f"A{lab} ties with the rank-{i + 1} indicator without being an equal-mass indicator")
                rep.equality_cases += 1
    return rep


# ---------------------------------------------------------------------------
# recovery


@dataclass
class RecoveredDistribution:
    """Atom masses by rank, the indicator label of each rank and, for vectors, a joint pmf."""

    probabilities: list[float]
    indicators: dict[int, Hashable]  # rank (1-based) -> oracle label
    distribution: JointDistribution | None = None
    classes: list[list[int]] | None = None  # per coordinate: class index of each atom
    bijections: list[dict] | None = None

    def multiset(self) -> list[float]:
        return sorted(self.probabilities, reverse=True)

    def to_json(self) -> dict:
        out = {"probabilities": self.probabilities,
               "indicators": {str(k): _label_json(v) for k, v in self.indicators.items()}}
        if self.distribution is not None:
            out["distribution"] = self.distribution.to_json()
        if self.bijections is not None:
            out["bijections"] = [[[_jsonable(a), _jsonable(b)] for a, b in m.items()] for m in self.bijections]
        return out


def _label_json(lab):
    return lab.to_json() if isinstance(lab, PartitionLabel) else _jsonable(lab)


def _support_size_of(oracle: EntropyOracle, cap: int) -> int:
    n = support_size_from_labels(len(oracle.labels)) if oracle.labels else 1
    if getattr(oracle, "n", n) != n:
        raise InconsistentOracle(f"oracle reports n={oracle.n} but has {len(oracle.labels)} labels")
    if n > cap:
        raise SupportTooLarge(f"support size {n} exceeds the recovery cap {cap}")
    return n


def find_indicators(oracle: EntropyOracle, cap: int = RECOVERY_CAP) -> dict[int, Hashable]:
    """Identify the indicator label of every rank from entropy answers alone.

    Ranks ``n`` down to 2: among labels not yet fixed by the indicators found
    so far, the one of least entropy is the next indicator. Rank 1: the label
    that no proper subset of those indicators fixes.
    """
    n = _support_size_of(oracle, cap)
    labels = list(oracle.labels)
    if n == 2:
        return {2: labels[0], 1: labels[0]}
    if n < 2:
        return {}
    ent = {lab: oracle.query([lab]) for lab in labels}
    found: dict[int, Hashable] = {}
    for i in range(n, 1, -1):
        given = list(found.values())
        best = None
        for lab in labels:
            if lab in given or oracle.is_determined([lab], given):
                continue
            if best is None or ent[lab] < ent[best]:
                best = lab
        if best is None:
            raise InconsistentOracle(f"no label is left to serve as the rank-{i} indicator")
        found[i] = best
    others = list(found.values())
    firsts = []
    for lab in labels:
        if lab in others:
            continue
        # fixed by a subset of the indicators implies fixed by a maximal proper one
        if all(not oracle.is_determined([lab], others[:k] + others[k + 1:]) for k in range(len(others))):
            firsts.append(lab)
    if len(firsts) != 1:
        raise InconsistentOracle(f"expected one rank-1 indicator, found {len(firsts)}")
    found[1] = firsts[0]
    return found


def recover_scalar(oracle: EntropyOracle, cap: int = RECOVERY_CAP) -> RecoveredDistribution:
    """Atom masses (rank order) of the hidden variable, from partition entropies."""
    n = _support_size_of(oracle, cap)
    measure = oracle.measure
    if n == 1:
        return RecoveredDistribution([1.0], {})
    ind = find_indicators(oracle, cap)
    try:
        probs = {i: measure.invert_binary(oracle.query([ind[i]])) for i in range(2, n + 1)}
    except Exception as exc:
        raise NonDistribution(f"indicator entropy outside the binary range: {exc}") from exc
    p1 = 1.0 - sum(probs.values())
    if p1 < -MASS_TOL:
        raise NonDistribution(f"recovered masses sum to {1 - p1} > 1")
    probs[1] = p1
    out = [probs[i] for i in range(1, n + 1)]
    if n > 2:
        h1 = oracle.query([ind[1]])
        if abs(measure.binary(min(max(p1, 0.0), 1.0)) - h1) > MASS_TOL:
            raise InconsistentOracle("the rank-1 indicator entropy disagrees with the recovered masses")
    return RecoveredDistribution(out, ind)


def decode_block(oracle: EntropyOracle, indicators: Mapping[int, Hashable], label) -> frozenset:
    """Ranks (0-based) on the far side of ``label`` from rank 0, via indicator queries.

    Rank ``y`` shares a side with rank 0 exactly when the label is fixed by the
    indicators of every other rank.
    """
    n = len(indicators) if indicators else 1
    block = set()
    for y in range(1, n):
        given = [indicators[r + 1] for r in range(1, n) if r != y]
        if not oracle.is_determined([label], given):
            block.add(y)
    return frozenset(block)


def recover_vector(oracle: EntropyOracle, cap: int = RECOVERY_CAP,
                   names: Sequence[str] | None = None) -> RecoveredDistribution:
    """Joint distribution of the hidden vector, up to relabelling each coordinate."""
    scalar = recover_scalar(oracle, cap)
    n, M = len(scalar.probabilities), oracle.M
    names = list(names) if names is not None else [f"X{m + 1}" for m in range(M)]
    classes: list[list[int]] = []
    blocks = {}
    for m in range(M):
        zero = [lab for lab in oracle.labels if oracle.is_determined([lab], [], [m])]
        for lab in zero:
            if lab not in blocks:
                blocks[lab] = decode_block(oracle, scalar.indicators, lab)
        cls = _classes_from_blocks(n, [blocks[lab] for lab in zero])
        k = max(cls) + 1
        if len(zero) != (1 << (k - 1)) - 1:
            raise NonFactorizableCoordinates(
                f"coordinate {m}: {len(zero)} determined partitions do not match {k} classes")
        for lab in zero:
            b = blocks[lab]
            if any((a in b) != (c in b) for a in range(n) for c in range(n) if cls[a] == cls[c]):
                raise NonFactorizableCoordinates(f"coordinate {m}: a determined partition splits a class")
        class_mass = [0.0] * k
        for a in range(n):
            class_mass[cls[a]] += scalar.probabilities[a]
        if abs(oracle.measure.of(class_mass) - oracle.query([], [m])) > MASS_TOL:
            raise NonFactorizableCoordinates(f"coordinate {m}: entropy disagrees with its class masses")
        classes.append(cls)
    tuples = [tuple(classes[m][a] for m in range(M)) for a in range(n)]
    if len(set(tuples)) != n:
        raise NonFactorizableCoordinates("two atoms agree on every coordinate")
    masses = _rationalize(scalar.probabilities)
    alph = {names[m]: sorted(set(classes[m])) for m in range(M)}
    dist = JointDistribution(names, alph, dict(zip(tuples, masses)))
    return RecoveredDistribution(scalar.probabilities, scalar.indicators, dist, classes)


def _classes_from_blocks(n: int, blocks: Sequence[frozenset]) -> list[int]:
    """Atoms are equivalent when no block separates them; classes numbered by first atom."""
    sig = [tuple(a in b for b in blocks) for a in range(n)]
    ids: dict[tuple, int] = {}
    return [ids.setdefault(s, len(ids)) for s in sig]


def _rationalize(probs: Sequence[float], limit: int = 10**9) -> list[Fraction]:
    rest = [Fraction(p).limit_denominator(limit) for p in probs[1:]]
    first = 1 - sum(rest, Fraction(0))
    out = [first] + rest
    if any(p <= 0 for p in out):
        raise NonDistribution(f"recovered masses {probs} are not all positive")
    return out


# ---------------------------------------------------------------------------
# isomorphism up to per-coordinate relabelling


def find_isomorphism(a: JointDistribution, b: JointDistribution, tol: float = MASS_TOL
                     ) -> list[dict] | None:
    """Per-coordinate bijections carrying ``a`` onto ``b`` (masses within ``tol``), or None."""
    M = len(a.variables)
    if len(b.variables) != M or len(a) != len(b):
        return None
    A = sorted(a.pmf.items(), key=lambda kv: -kv[1])
    B = list(b.pmf.items())
    maps: list[dict] = [{} for _ in range(M)]
    inv: list[dict] = [{} for _ in range(M)]
    used = [False] * len(B)

    def extend(k: int) -> bool:
        if k == len(A):
            return True
        xa, pa = A[k]
        for j, (xb, pb) in enumerate(B):
            if used[j] or abs(float(pa) - float(pb)) > tol:
                continue
            if any(maps[m].get(xa[m], xb[m]) != xb[m] or inv[m].get(xb[m], xa[m]) != xa[m] for m in range(M)):
                continue
            added = [m for m in range(M) if xa[m] not in maps[m]]
            for m in added:
                maps[m][xa[m]] = xb[m]
                inv[m][xb[m]] = xa[m]
            used[j] = True
            if extend(k + 1):
                return True
            used[j] = False
            for m in added:
                del maps[m][xa[m]]
                del inv[m][xb[m]]
        return False

    return maps if extend(0) else None


def coordinate_structure(dist: JointDistribution) -> list[int]:
    """Sizes of the connected components of the support, linking atoms that share a
    coordinate value; a relabelling-invariant summary of the coordinate classes."""
    atoms = list(dist.pmf)
    parent = list(range(len(atoms)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for m in range(len(dist.variables)):
        first: dict = {}
        for k, o in enumerate(atoms):
            r = first.setdefault(o[m], k)
            parent[find(k)] = find(r)
    sizes: dict[int, int] = {}
    for k in range(len(atoms)):
        sizes[find(k)] = sizes.get(find(k), 0) + 1
    return sorted(sizes.values())


# ---------------------------------------------------------------------------
# consistency between a system and an oracle


def check_oracle_consistency(system: PartitionSystem, oracle: EntropyOracle, coordinates: bool = True,
                             samples: int = 1000, seed: int = 0, tol: float = EPS_H) -> bool:
    """Do the system's entropies match the oracle's answers on a query sample?

    Exhaustive over all label and coordinate subsets for ``n <= 4``. Larger
    supports use every query with at most one label and one coordinate, plus
    ``samples`` random queries of up to three labels.
    """
    if system.n != oracle.n or (coordinates and system.M != oracle.M) or \
            len(system.labels) != len(oracle.labels):
        return False
    if set(oracle.labels) == set(system.labels):
        pair = {lab: lab for lab in system.labels}
    else:
        pair = dict(zip(system.labels, oracle.labels))
    taus = [()]
    if coordinates:
        taus = [t for r in range(system.M + 1) for t in combinations(range(system.M), r)]
    labs = system.labels

    def agree(delta, tau) -> bool:
        try:
            theirs = oracle.query([pair[x] for x in delta], tau)
        except InconsistentOracle:
            return False
        return abs(system.entropy(delta, tau) - theirs) <= tol

    if system.n <= 4:
        deltas = [d for r in range(len(labs) + 1) for d in combinations(labs, r)]
        return all(agree(d, t) for d in deltas for t in taus)
    low = [()] + [(x,) for x in labs]
    small_taus = [t for t in taus if len(t) <= 1]
    if not all(agree(d, t) for d in low for t in small_taus):
        return False
    rng = random.Random(seed)
    for _ in range(samples):
        d = rng.sample(labs, min(len(labs), rng.randint(0, 3)))
        t = rng.choice(taus)
        if not agree(d, t):
            return False
    return True


def scalar_twins() -> tuple[JointDistribution, JointDistribution]:
    """Two uniform 8-atom pairs with equal partition entropies but different coordinates.

    In the first, the support splits into two 2x2 blocks; in the second the
    atoms form a single cycle through the coordinate values.
    """
    x = ["a1", "a2", "b1", "b2", "c3", "c4", "d3", "d4"]
    xs = ["a1", "a2", "b2", "b3", "c3", "c4", "d1", "d4"]
    mass = Fraction(1, 8)

    def make(atoms):
        pmf = {(s[0], s[1]): mass for s in atoms}
        return JointDistribution(["X1", "X2"], {"X1": list("abcd"), "X2": list("1234")}, pmf)

    return make(x), make(xs)

"""Networks, compilation of entropy-based outer bounds into LPs, and code evaluation.

A network is a DAG whose edges carry capacities; sources sit at nodes and are
demanded at other nodes. ``compile_bound`` turns a network plus source
entropies into a :class:`LinearProgram` over the set function ``h`` on
sources, edges and (optionally) auxiliary variables: Shannon-cone rows,
source-entropy equalities, one encoding row per edge, one decoding row per
(sink, demanded source) pair and one capacity row per edge.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Any, Hashable, Iterable, Mapping, Sequence

from .errors import (
    AlphabetMismatch,
    CyclicGraph,
    DanglingReference,
    InvalidEntropyTable,
    MissingTableEntry,
    NonPositiveCapacity,
    SourceDemandOverlap,
    ValidationError,
)
from .polycone import (
    LP_GROUND_CAP,
    LinearProgram,
    LpOutcome,
    elemental_inequalities,
    lp_solve,
)
from .probdist import (
    RATIONAL_DENOMINATOR,
    JointDistribution,
    SetFunction,
    _hashable,
    _jsonable,
    exact_entropy,
    to_fraction,
)

BASIC = "basic"
AUXILIARY = "auxiliary"
PARTITION = "partition"
VARIANTS = (BASIC, AUXILIARY, PARTITION)


# ---------------------------------------------------------------------------
# network specification


@dataclass(frozen=True)
class Edge:
    tail: Hashable
    head: Hashable
    capacity: Fraction | None  # None: "sufficient", never the bottleneck
    label: str


@dataclass(frozen=True)
class Source:
    label: str
    at: tuple
    demanded_at: tuple


@dataclass
class NetworkSpec:
    nodes: list
    edges: list[Edge]
    sources: list[Source]
    order: list | None = field(default=None, repr=False)  # topological node order

    def edge(self, label: str) -> Edge:
        for e in self.edges:
            if e.label == label:
                return e
        raise DanglingReference(f"no edge labelled {label!r}")

    def in_edges(self, node) -> list[Edge]:
        return [e for e in self.edges if e.head == node]

    def sources_at(self, node) -> list[Source]:
        return [s for s in self.sources if node in s.at]

    def edge_order(self) -> list[Edge]:
        """Edges sorted so every edge comes after the edges entering its tail."""
        rank = {v: i for i, v in enumerate(self.order or validate(self).order)}
        return sorted(self.edges, key=lambda e: rank[e.tail])

    # -- JSON -----------------------------------------------------------
    def to_json(self) -> dict:
        def cap(c):
            return None if c is None else f"{c.numerator}/{c.denominator}"

        return {
            "nodes": list(self.nodes),
            "edges": [{"tail": e.tail, "head": e.head, "cap": cap(e.capacity), "label": e.label}
                      for e in self.edges],
            "sources": [{"label": s.label, "at": list(s.at), "demanded_at": list(s.demanded_at)}
                        for s in self.sources],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "NetworkSpec":
        try:
            edges = []
            for k, e in enumerate(data["edges"]):
                c = e.get("cap")
                cap = None if c is None or c == "sufficient" else to_fraction(c)
                edges.append(Edge(e["tail"], e["head"], cap, str(e.get("label", f"e{k + 1}"))))
            sources = [Source(str(s["label"]), tuple(s.get("at", ())), tuple(s.get("demanded_at", ())))
                       for s in data["sources"]]
            spec = cls(list(data["nodes"]), edges, sources)
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed network document: {exc}") from exc
        return validate(spec)


def load_network(path) -> NetworkSpec:
    with open(path) as fh:
        return NetworkSpec.from_json(json.load(fh))


def validate(spec: NetworkSpec) -> NetworkSpec:
    """Check the model assumptions and cache a topological node order."""
    nodes = list(spec.nodes)
    if len(set(nodes)) != len(nodes):
        raise ValidationError("duplicate node labels")
    node_set = set(nodes)
    labels = [e.label for e in spec.edges]
    if len(set(labels)) != len(labels):
        raise ValidationError("edge labels must be unique")
    src_labels = [s.label for s in spec.sources]
    if len(set(src_labels)) != len(src_labels):
        raise ValidationError("source labels must be unique")
    if set(labels) & set(src_labels):
        raise ValidationError("edge and source labels must be distinct")
    for e in spec.edges:
        for v in (e.tail, e.head):
            if v not in node_set:
                raise DanglingReference(f"edge {e.label!r} refers to unknown node {v!r}")
        if e.capacity is not None and e.capacity <= 0:
            raise NonPositiveCapacity(f"edge {e.label!r} has capacity {e.capacity}")
    for s in spec.sources:
        for v in s.at + s.demanded_at:
            if v not in node_set:
                raise DanglingReference(f"source {s.label!r} refers to unknown node {v!r}")
        if set(s.at) & set(s.demanded_at):
            raise SourceDemandOverlap(f"source {s.label!r} is demanded where it is available")
    # Kahn's algorithm, ties broken by declaration order for determinism
    indeg = {v: 0 for v in nodes}
    for e in spec.edges:
        indeg[e.head] += 1
    order, ready = [], [v for v in nodes if indeg[v] == 0]
    while ready:
        v = ready.pop(0)
        order.append(v)
        for e in spec.edges:
            if e.tail == v:
                indeg[e.head] -= 1
                if indeg[e.head] == 0:
                    ready.append(e.head)
    if len(order) != len(nodes):
        raise CyclicGraph("the network contains a directed cycle")
    spec.order = order
    return spec


def contract_relays(spec: NetworkSpec) -> tuple[NetworkSpec, dict[str, str]]:
    """Merge every sufficient-capacity relay edge into the single edge feeding it.

    An edge ``r`` qualifies when its capacity is unspecified, its tail holds no
    source and exactly one edge ``f`` enters the tail. Then ``r`` can carry a
    copy of ``f`` at no cost, so ``r`` is replaced by a copy of ``f`` ending at
    ``r``'s head. The copy shares ``f``'s label, hence the same LP variable.
    Returns the contracted network and the map from removed labels to the
    labels that replaced them. The result may hold several edges per label and
    is meant for compilation only.
    """
    return _contract(validate(spec))


def _contract(spec: NetworkSpec) -> tuple[NetworkSpec, dict[str, str]]:
    # query tuples may hold zero capacities, so this skips validation
    alias: dict[str, str] = {}
    edges = list(spec.edges)
    changed = True
    while changed:
        changed = False
        for k, r in enumerate(edges):
            if r.capacity is not None or spec.sources_at(r.tail):
                continue
            feeding = {e.label: e for e in edges if e.head == r.tail}
            if len(feeding) != 1:
                continue
            f = next(iter(feeding.values()))
            alias[r.label] = f.label
            edges[k] = Edge(f.tail, r.head, f.capacity, f.label)
            changed = True
            break
    for k, v in list(alias.items()):
        while v in alias:
            v = alias[v]
        alias[k] = v
    return NetworkSpec(list(spec.nodes), edges, list(spec.sources), list(spec.order)), alias


# ---------------------------------------------------------------------------
# source entropies


@dataclass
class SourceEntropies:
    """Rational joint entropies ``h(alpha)`` for subsets of named variables.

    ``approximate`` is set when some value was rounded (irrational entropy).
    """

    names: list[str]
    values: dict[frozenset, Fraction]
    approximate: bool = False

    def __getitem__(self, subset: Iterable[str]) -> Fraction:
        return self.values[frozenset(subset)]


def rational_entropy(probs: Iterable[Fraction]) -> tuple[Fraction, bool]:
    """Shannon entropy as a rational; rounded to ``1/2^20`` when not dyadic.

    Returns ``(value, exact)``.
    """
    probs = list(probs)
    ex = exact_entropy(probs)
    if ex is not None:
        return ex, True
    h = -sum(float(p) * math.log2(float(p)) for p in probs if p > 0)
    return Fraction(round(h * RATIONAL_DENOMINATOR), RATIONAL_DENOMINATOR), False


def source_entropies(dist: JointDistribution, names: Sequence[str] | None = None) -> SourceEntropies:
    names = list(dist.variables if names is None else names)
    dist.index_of(names)
    values, approx = {}, False
    for r in range(1, len(names) + 1):
        for sub in combinations(names, r):
            v, exact = rational_entropy(dist.masses(sub).values())
            values[frozenset(sub)] = v
            approx |= not exact
    return SourceEntropies(names, values, approx)


def entropy_table(table: SetFunction | Mapping) -> SourceEntropies:
    """Validate a direct entropy table (it must be a polymatroid) and wrap it."""
    if isinstance(table, Mapping):
        table = SetFunction.from_json(table)
    names = [str(g) for g in table.ground]
    values = {}
    for mask in range(1, 2 ** len(names)):
        v = table.values[mask - 1]
        v = to_fraction(v) if not isinstance(v, Fraction) else v
        values[frozenset(n for k, n in enumerate(names) if mask >> k & 1)] = v
    x = {mask: values[frozenset(n for k, n in enumerate(names) if mask >> k & 1)]
         for mask in range(1, 2 ** len(names))}
    for c in elemental_inequalities(len(names)):
        if not c.holds(x):
            raise InvalidEntropyTable(f"entropy table violates {c.describe()}")
    return SourceEntropies(names, values, False)


def load_entropy_table(path) -> SourceEntropies:
    with open(path) as fh:
        return entropy_table(json.load(fh))


# ---------------------------------------------------------------------------
# bound compilation


@dataclass
class CompiledBound:
    program: LinearProgram
    variant: str
    approximate: bool
    alias: dict[str, str]
    capacity_rows: dict[str, int]  # edge label -> constraint index


def _partition_auxiliaries(dist: JointDistribution, sources: Sequence[str],
                           labels: Sequence) -> tuple[JointDistribution, list[str]]:
    from .partitions import PartitionLabel, rank_atoms

    atoms, masses = rank_atoms(dist, sources)
    rank = {a: i for i, a in enumerate(atoms)}
    names = []
    out = dist
    for lab in labels:
        if not isinstance(lab, PartitionLabel):
            lab = PartitionLabel.from_indices(lab, len(atoms))
        name = f"A{lab}"
        out = out.with_variable(
            name, lambda o, lab=lab: int(rank[tuple(o[v] for v in sources)] in lab.block), (0, 1))
        names.append(name)
    return out, names


def compile_bound(
    spec: NetworkSpec,
    entropies: JointDistribution | SourceEntropies | SetFunction | Mapping,
    variant: str = BASIC,
    capacities: Mapping[str, Any] | Sequence[Any] | None = None,
    auxiliaries: Sequence[str] = (),
    partitions: Sequence = (),
    contract: bool = True,
    relay_capacity: Any = None,
    scale: bool = False,
    cap: int = LP_GROUND_CAP,
) -> CompiledBound:
    """Build the LP whose feasibility decides membership in the outer bound.

    ``capacities`` overrides edge capacities (a map by label, or a sequence
    over the edges with a declared capacity, in file order). ``auxiliaries``
    names extra variables of the source distribution (auxiliary variant);
    ``partitions`` selects binary partitions of the joint source support
    (partition variant). With ``scale=True`` each capacity row reads
    ``h(e) - C_e t <= 0`` for a free decision variable ``t``.
    """
    if variant not in VARIANTS:
        raise ValidationError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    spec = validate(spec)
    src_names = [s.label for s in spec.sources]
    if variant != BASIC and not isinstance(entropies, JointDistribution):
        raise ValidationError(f"the {variant} variant needs a source distribution")
    aux_names: list[str] = []
    dist = entropies if isinstance(entropies, JointDistribution) else None
    if variant == AUXILIARY:
        aux_names = list(auxiliaries)
        if not aux_names:
            raise ValidationError("the auxiliary variant needs at least one auxiliary variable")
    elif variant == PARTITION:
        if not partitions:
            raise ValidationError("the partition variant needs an explicit list of partitions")
        dist, aux_names = _partition_auxiliaries(dist, src_names, partitions)
    if dist is not None:
        ent = source_entropies(dist, src_names + aux_names)
    elif isinstance(entropies, SourceEntropies):
        ent = entropies
    else:
        ent = entropy_table(entropies)
    missing = set(src_names) - set(ent.names)
    if missing:
        raise DanglingReference(f"no entropy data for sources {sorted(missing)}")

    caps = _resolve_capacities(spec, capacities)
    total = ent[src_names] if src_names else Fraction(0)
    relay = to_fraction(relay_capacity) if relay_capacity is not None else total
    # contraction is exact only when an uncapacitated relay can carry h(S)
    alias: dict[str, str] = {}
    work = NetworkSpec(list(spec.nodes), [Edge(e.tail, e.head, caps[e.label], e.label) for e in spec.edges],
                       list(spec.sources), list(spec.order))
    if contract and relay >= total:
        work, alias = _contract(work)
    edge_labels = list(dict.fromkeys(e.label for e in work.edges))
    ground = src_names + edge_labels + aux_names
    program = LinearProgram(ground=ground)
    program.constraints.extend(elemental_inequalities(len(ground), cap))
    M = program.mask

    known = src_names + aux_names
    for r in range(1, len(known) + 1):
        for sub in combinations(known, r):
            program.add({M(sub): 1}, "=", ent[sub], "source")

    def cond(target: Sequence[str], given: Sequence[str]) -> dict:
        given = list(dict.fromkeys(given))
        row = {M(list(target) + given): Fraction(1)}
        if given:
            g = M(given)
            row[g] = row.get(g, 0) - 1
        return row

    by_label: dict[str, list[Edge]] = defaultdict(list)
    for e in work.edges:
        by_label[e.label].append(e)
    for lab in edge_labels:
        e = by_label[lab][0]
        inputs = [s.label for s in work.sources_at(e.tail)] + [f.label for f in work.in_edges(e.tail)]
        program.add(cond([lab], inputs), "=", 0, "encoding")
    for s in work.sources:
        for u in s.demanded_at:
            inputs = [t.label for t in work.sources_at(u)] + [f.label for f in work.in_edges(u)]
            program.add(cond([s.label], inputs), "=", 0, "decoding")

    if scale:
        program.extra = ["t"]
        program.free = set()
    capacity_rows = {}
    for lab in edge_labels:
        c = by_label[lab][0].capacity
        capacity_rows[lab] = len(program.constraints)
        if scale and c is not None:
            program.add({M([lab]): 1, "t": -c}, "<=", 0, "capacity")
        else:
            program.add({M([lab]): 1}, "<=", relay if c is None else c, "capacity")
    if scale:
        program.objective = {"t": Fraction(1)}
        program.sense = "min"
    return CompiledBound(program, variant, ent.approximate, alias, capacity_rows)


def _resolve_capacities(spec: NetworkSpec, capacities) -> dict[str, Fraction | None]:
    caps = {e.label: e.capacity for e in spec.edges}
    if capacities is None:
        return caps
    if isinstance(capacities, Mapping):
        for k, v in capacities.items():
            if k not in caps:
                raise DanglingReference(f"capacity given for unknown edge {k!r}")
            caps[k] = None if v is None else to_fraction(v)
    else:
        vals = list(capacities)
        targets = [e.label for e in spec.edges if e.capacity is not None]
        if len(vals) == len(spec.edges):
            targets = [e.label for e in spec.edges]
        if len(vals) != len(targets):
            raise ValidationError(
                f"tuple has {len(vals)} entries; expected {len(targets)} (edges {targets})")
        for k, v in zip(targets, vals):
            caps[k] = to_fraction(v)
    for k, v in caps.items():
        if v is not None and v < 0:
            raise NonPositiveCapacity(f"capacity of {k!r} is negative")
    return caps


def check_tuple(spec: NetworkSpec, entropies, variant: str = BASIC,
                capacities=None, method: str = "auto", **kw) -> LpOutcome:
    """Decide whether a capacity tuple lies in the chosen outer bound."""
    compiled = compile_bound(spec, entropies, variant, capacities, **kw)
    out = lp_solve(compiled.program, method=method)
    out.meta = {"approximate": compiled.approximate, "variant": variant}
    return out


def compile_scaling(spec: NetworkSpec, entropies, variant: str = BASIC, direction=None,
                    **kw) -> CompiledBound:
    """The LP of :func:`min_scaling`: capacity rows ``h(e) <= t C_e``, minimize ``t``."""
    caps = _resolve_capacities(validate(spec), direction)
    for k, v in caps.items():
        if v is not None and v <= 0:
            raise NonPositiveCapacity(f"direction entry for {k!r} must be positive")
    return compile_bound(spec, entropies, variant, caps, scale=True, **kw)


def min_scaling(spec: NetworkSpec, entropies, variant: str = BASIC, direction=None,
                method: str = "auto", return_outcome: bool = False, **kw):
    """Least ``t`` with ``t * direction`` inside the bound region.

    Edges without a capacity (sufficient) are not scaled. Returns the exact
    rational ``t``; with ``return_outcome=True`` returns ``(t, LpOutcome)``.
    """
    compiled = compile_scaling(spec, entropies, variant, direction, **kw)
    out = lp_solve(compiled.program, method=method)
    out.meta = {"approximate": compiled.approximate, "variant": variant}
    if out.status != "Feasible":
        raise AssertionError(f"scaling program ended {out.status}")
    return (out.optimum, out) if return_outcome else out.optimum


# ---------------------------------------------------------------------------
# network codes at block length one


@dataclass
class Table:
    inputs: list[str]
    mapping: dict[tuple, Hashable]
    alphabet: tuple | None = None

    def __call__(self, args: tuple, where: str):
        try:
            return self.mapping[args]
        except KeyError:
            raise MissingTableEntry(f"{where}: no entry for input {args!r}") from None

    def to_json(self) -> dict:
        d = {"inputs": list(self.inputs),
             "table": [{"in": [_jsonable(a) for a in k], "out": _jsonable(v)}
                       for k, v in self.mapping.items()]}
        if self.alphabet is not None:
            d["alphabet"] = [_jsonable(a) for a in self.alphabet]
        return d

    @classmethod
    def from_json(cls, data: Mapping) -> "Table":
        mapping = {}
        for row in data["table"]:
            mapping[tuple(_hashable(a) for a in row["in"])] = _hashable(row["out"])
        alph = data.get("alphabet")
        return cls(list(data["inputs"]), mapping,
                   None if alph is None else tuple(_hashable(a) for a in alph))

    @classmethod
    def from_function(cls, inputs: Sequence[str], domains: Sequence[Sequence], func,
                      alphabet: Sequence | None = None) -> "Table":
        from itertools import product

        mapping = {args: _hashable(func(*args)) for args in product(*domains)}
        return cls(list(inputs), mapping, None if alphabet is None else tuple(alphabet))


@dataclass
class NetworkCode:
    """Encoding table per edge and decoding table per (sink, source)."""

    encoders: dict[str, Table]
    decoders: dict[tuple, Table]  # (sink node, source label) -> table

    def to_json(self) -> dict:
        return {
            "edges": {k: t.to_json() for k, t in self.encoders.items()},
            "decoders": [dict(sink=u, source=s, **t.to_json()) for (u, s), t in self.decoders.items()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "NetworkCode":
        try:
            enc = {k: Table.from_json(v) for k, v in data["edges"].items()}
            dec = {(d["sink"], d["source"]): Table.from_json(d) for d in data.get("decoders", [])}
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed code document: {exc}") from exc
        return cls(enc, dec)


def load_code(path) -> NetworkCode:
    with open(path) as fh:
        return NetworkCode.from_json(json.load(fh))


@dataclass
class CodeReport:
    messages: dict[str, list]  # edge -> symbol per support atom
    decoded: dict[tuple, bool]  # (sink, source) -> decoder correct with probability one
    decodable: dict[tuple, bool]  # (sink, source) -> source is a function of the sink's inputs
    edge_entropy: dict[str, float]
    edge_rate: dict[str, float]
    within_capacity: dict[str, bool]
    distribution: JointDistribution

    @property
    def success(self) -> bool:
        return all(self.decoded.values())

    def to_json(self) -> dict:
        return {
            "success": self.success,
            "decoded": [{"sink": u, "source": s, "ok": ok} for (u, s), ok in self.decoded.items()],
            "decodable": [{"sink": u, "source": s, "ok": ok} for (u, s), ok in self.decodable.items()],
            "edges": [{"label": e, "entropy": self.edge_entropy[e], "rate": self.edge_rate[e],
                       "within_capacity": self.within_capacity[e]} for e in self.edge_entropy],
        }

    def text(self) -> str:
        lines = [f"decoding {'succeeds' if self.success else 'FAILS'}"]
        for (u, s), ok in self.decoded.items():
            extra = "" if ok else (" (no decoder can succeed)" if not self.decodable[(u, s)] else "")
            lines.append(f"  {s} at {u}: {'ok' if ok else 'wrong'}{extra}")
        for e in self.edge_entropy:
            flag = "" if self.within_capacity[e] else "  exceeds capacity"
            lines.append(f"  {e}: H = {self.edge_entropy[e]:.6g} bits, rate = {self.edge_rate[e]:.6g}{flag}")
        return "\n".join(lines)


def evaluate_code(spec: NetworkSpec, dist: JointDistribution, code: NetworkCode) -> CodeReport:
    """Run a block-length-one code on every support atom of the sources."""
    from .probdist import entropy, is_function_of

    spec = validate(spec)
    src = [s.label for s in spec.sources]
    dist.index_of(src)
    values = {s: [dist.project(o, [s])[0] for o in dist.pmf] for s in src}
    avail_at = {v: {s.label for s in spec.sources_at(v)} | {e.label for e in spec.in_edges(v)}
                for v in spec.nodes}
    for e in spec.edge_order():
        if e.label not in code.encoders:
            raise MissingTableEntry(f"no encoder for edge {e.label!r}")
        t = code.encoders[e.label]
        bad = [i for i in t.inputs if i not in avail_at[e.tail]]
        if bad:
            raise AlphabetMismatch(f"encoder of {e.label!r} reads {bad}, not available at node {e.tail!r}")
        out = [t(tuple(values[i][k] for i in t.inputs), f"edge {e.label}") for k in range(len(dist))]
        if t.alphabet is not None and any(v not in t.alphabet for v in out):
            raise AlphabetMismatch(f"edge {e.label!r} emits a symbol outside its alphabet")
        values[e.label] = out

    # with_variable visits outcomes in pmf order, the same order as the columns
    ext = dist
    for e in spec.edges:
        ext = ext.with_variable(f"U[{e.label}]", lambda o, it=iter(values[e.label]): next(it))
    decoded, decodable = {}, {}
    for s in spec.sources:
        for u in s.demanded_at:
            inputs = sorted(avail_at[u], key=lambda x: (x not in src, str(x)))
            cols = [x if x in src else f"U[{x}]" for x in inputs]
            if cols:
                decodable[(u, s.label)] = is_function_of(ext, [s.label], cols)
            else:
                decodable[(u, s.label)] = len(dist.masses([s.label])) == 1
            t = code.decoders.get((u, s.label))
            if t is None:
                decoded[(u, s.label)] = False
                continue
            bad = [i for i in t.inputs if i not in avail_at[u]]
            if bad:
                raise AlphabetMismatch(f"decoder of {s.label!r} at {u!r} reads {bad}, unavailable there")
            ok = True
            for k in range(len(dist)):
                guess = t(tuple(values[i][k] for i in t.inputs), f"decoder {s.label}@{u}")
                if guess != values[s.label][k]:
                    ok = False
                    break
            decoded[(u, s.label)] = ok
    h = {e.label: entropy(ext, variables=[f"U[{e.label}]"]) for e in spec.edges}
    rate = {}
    for e in spec.edges:
        t = code.encoders[e.label]
        size = len(t.alphabet) if t.alphabet is not None else len(set(t.mapping.values()))
        rate[e.label] = math.log2(size) if size > 0 else 0.0
    within = {e.label: e.capacity is None or rate[e.label] <= float(e.capacity) + 1e-12 for e in spec.edges}
    return CodeReport({e.label: values[e.label] for e in spec.edges}, decoded, decodable, h, rate,
                      within, ext)

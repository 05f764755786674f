"""Ready-made networks, sources and codes used by the tests, demos and docs."""

from __future__ import annotations

from fractions import Fraction

from .auxgen import SubspaceBasis, linearly_correlated
from .netmodel import NetworkCode, NetworkSpec, Table
from .partitions import scalar_twins
from .probdist import JointDistribution, joint_from_table, marginalize

__all__ = [
    "three_source_basis", "three_sources", "three_sources_with_keys", "relay_network",
    "relay_witness_distribution", "relay_forwarding_code", "butterfly_network", "butterfly_code",
    "two_bits", "scalar_twins",
]


def three_source_basis() -> SubspaceBasis:
    """Bits b0, b1, b2; s1 = (b0, b1), s2 = (b0, b2), s3 = (b1, b2)."""
    e0, e1, e2 = (1, 0, 0), (0, 1, 0), (0, 0, 1)
    return SubspaceBasis(2, 3, [[e0, e1], [e0, e2], [e1, e2]], ["s1", "s2", "s3"])


def three_sources_with_keys() -> JointDistribution:
    """The three sources together with the bits ``K1 = b0``, ``K2 = b1``, ``K3 = b2``."""
    dist, _ = linearly_correlated(three_source_basis(), include_key=True)
    return dist


def three_sources() -> JointDistribution:
    return marginalize(three_sources_with_keys(), ["s1", "s2", "s3"])


def relay_network(capacity=1) -> NetworkSpec:
    """All sources at node 1; unit edges 1->2..5; node 2 relays to 3, 4, 5 with ample capacity.

    Sink 3 wants s1, sink 4 wants s2, sink 5 wants s3.
    """
    cap = str(Fraction(capacity))
    edges = [{"tail": 1, "head": h, "cap": cap, "label": f"e{h - 1}"} for h in (2, 3, 4, 5)]
    edges += [{"tail": 2, "head": h, "cap": None, "label": f"r{h}"} for h in (3, 4, 5)]
    return NetworkSpec.from_json({
        "nodes": [1, 2, 3, 4, 5],
        "edges": edges,
        "sources": [{"label": f"s{i}", "at": [1], "demanded_at": [i + 2]} for i in (1, 2, 3)],
    })


def relay_witness_distribution() -> JointDistribution:
    """Edge messages b0, b1, b2, b1^b2 with the third source replaced by (b0, b1^b2).

    Its entropy vector satisfies the basic bound at unit capacities although no
    code for the original sources achieves them.
    """
    entries = []
    for b0 in (0, 1):
        for b1 in (0, 1):
            for b2 in (0, 1):
                x = b1 ^ b2
                entries.append((((b0, b1), (b0, b2), (b0, x), b0, b1, b2, x, b0, b1, b2), Fraction(1, 8)))
    names = ["s1", "s2", "s3", "e1", "e2", "e3", "e4", "K1", "K2", "K3"]
    return joint_from_table(names, None, entries)


def relay_forwarding_code() -> NetworkCode:
    """Edges carry b0, b1, b2, b1^b2 computed from the original sources; relays forward e1."""
    bits = [(a, b) for a in (0, 1) for b in (0, 1)]
    src = ["s1", "s2", "s3"]
    doms = [bits, bits, bits]
    enc = {
        "e1": Table.from_function(src, doms, lambda y1, y2, y3: y1[0], (0, 1)),
        "e2": Table.from_function(src, doms, lambda y1, y2, y3: y1[1], (0, 1)),
        "e3": Table.from_function(src, doms, lambda y1, y2, y3: y2[1], (0, 1)),
        "e4": Table.from_function(src, doms, lambda y1, y2, y3: y3[0] ^ y3[1], (0, 1)),
    }
    for h in (3, 4, 5):
        enc[f"r{h}"] = Table.from_function(["e1"], [(0, 1)], lambda u: u, (0, 1))
    dec = {
        (3, "s1"): Table.from_function(["r3", "e2"], [(0, 1)] * 2, lambda a, b: (a, b)),
        (4, "s2"): Table.from_function(["r4", "e3"], [(0, 1)] * 2, lambda a, b: (a, b)),
        # the best one can do at node 5 is (b0, b1^b2), which is not s3
        (5, "s3"): Table.from_function(["r5", "e4"], [(0, 1)] * 2, lambda a, b: (a, b)),
    }
    return NetworkCode(enc, dec)


def butterfly_network() -> NetworkSpec:
    """Sources a at node 1 and b at node 2, both wanted at sinks 5 and 6; 3->4 is the bottleneck."""
    spec = [("1", "5", "a5"), ("1", "3", "a3"), ("2", "3", "b3"), ("2", "6", "b6"),
            ("3", "4", "m"), ("4", "5", "m5"), ("4", "6", "m6")]
    return NetworkSpec.from_json({
        "nodes": ["1", "2", "3", "4", "5", "6"],
        "edges": [{"tail": t, "head": h, "cap": "1", "label": lab} for t, h, lab in spec],
        "sources": [{"label": "a", "at": ["1"], "demanded_at": ["5", "6"]},
                    {"label": "b", "at": ["2"], "demanded_at": ["5", "6"]}],
    })


def two_bits() -> JointDistribution:
    return joint_from_table(["a", "b"], None, [((x, y), Fraction(1, 4)) for x in (0, 1) for y in (0, 1)])


def butterfly_code() -> NetworkCode:
    bit = [(0, 1)]
    ident = lambda v: v  # noqa: E731
    enc = {
        "a5": Table.from_function(["a"], bit, ident, (0, 1)),
        "a3": Table.from_function(["a"], bit, ident, (0, 1)),
        "b3": Table.from_function(["b"], bit, ident, (0, 1)),
        "b6": Table.from_function(["b"], bit, ident, (0, 1)),
        "m": Table.from_function(["a3", "b3"], bit * 2, lambda x, y: x ^ y, (0, 1)),
        "m5": Table.from_function(["m"], bit, ident, (0, 1)),
        "m6": Table.from_function(["m"], bit, ident, (0, 1)),
    }
    dec = {
        ("5", "a"): Table.from_function(["a5"], bit, ident),
        ("5", "b"): Table.from_function(["a5", "m5"], bit * 2, lambda x, m: x ^ m),
        ("6", "a"): Table.from_function(["b6", "m6"], bit * 2, lambda y, m: y ^ m),
        ("6", "b"): Table.from_function(["b6"], bit, ident),
    }
    return NetworkCode(enc, dec)

"""Recovering a distribution from the entropies of its two-block partitions.

A scalar distribution comes back from label-shuffled entropy answers alone.
Two joint distributions with identical scalar views are told apart once the
oracle also answers queries that include individual coordinates.
"""

from __future__ import annotations

from fractions import Fraction

from netentropy import (
    DistributionOracle,
    build_partition_system,
    check_oracle_consistency,
    find_indicators,
    joint_from_table,
    recover_scalar,
    recover_vector,
)
from netentropy.partitions import coordinate_structure, scalar_twins


def main() -> None:
    masses = [Fraction(2, 5), Fraction(1, 4), Fraction(1, 5), Fraction(3, 20)]
    dist = joint_from_table(["X"], None, [((i,), p) for i, p in enumerate(masses)])
    system = build_partition_system(dist)
    oracle = DistributionOracle(system, seed=5)
    print(f"{len(system.labels)} partition variables for {system.n} atoms")
    print(f"indicators found among shuffled labels: {find_indicators(oracle)}")
    rec = recover_scalar(oracle)
    print(f"recovered masses {[round(p, 9) for p in rec.multiset()]}")

    x, xs = scalar_twins()
    sx, sxs = build_partition_system(x), build_partition_system(xs)
    print(f"\nscalar recovery of X:  {[round(p, 9) for p in recover_scalar(DistributionOracle(sx)).multiset()]}")
    print(f"scalar recovery of X*: {[round(p, 9) for p in recover_scalar(DistributionOracle(sxs)).multiset()]}")
    print(f"X* answers like X without coordinates: {check_oracle_consistency(sx, DistributionOracle(sxs), coordinates=False)}")
    print(f"X* answers like X with coordinates:    {check_oracle_consistency(sx, DistributionOracle(sxs), coordinates=True)}")
    rx = recover_vector(DistributionOracle(sx)).distribution
    rxs = recover_vector(DistributionOracle(sxs)).distribution
    print(f"atoms per coordinate class: X {coordinate_structure(rx)}, X* {coordinate_structure(rxs)}")


if __name__ == "__main__":
    main()

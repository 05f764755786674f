"""Common randomness between correlated variables.

Sources built as linear images of uniform keys share exact common parts.
A noisy copy of a bit shares none in the Gacs-Korner sense. A bounded search
over small auxiliary variables reports how close a common part can come.
"""

from __future__ import annotations

from fractions import Fraction

from netentropy import delta_star_search, entropy, gk_common_information, joint_from_table, linearly_correlated, marginalize
from netentropy.instances import three_source_basis


def noisy_copy(eps: Fraction):
    return joint_from_table(["X", "Y"], None, [((x, x ^ z), Fraction(1, 2) * (eps if z else 1 - eps))
                                               for x in (0, 1) for z in (0, 1)])


def main() -> None:
    dist, mats = linearly_correlated(three_source_basis())
    print(f"three sources over GF(2): {len(dist.pmf)} equally likely atoms")
    for a, b in (("s1", "s2"), ("s1", "s3"), ("s2", "s3")):
        pair = marginalize(dist, [a, b])
        print(f"  GK common information of {a}, {b}: {gk_common_information(pair).entropy} bits")

    for eps in (Fraction(1, 10), Fraction(3, 10)):
        d = noisy_copy(eps)
        mutual = 2 * entropy(d, variables=["X"]) - entropy(d)
        gk = gk_common_information(d)
        best = delta_star_search(d, k=2)
        print(f"\nnoisy copy, flip probability {eps}: I(X;Y) = {mutual:.4f}, GK = {gk.entropy}")
        print(f"  best deterministic binary K: H(K) = {best.entropy:.4f}, delta = {best.delta:.4f}")
        rnd = delta_star_search(d, k=2, mode="random", seed=1, restarts=4, steps=400)
        print(f"  seeded random search: delta = {rnd.delta:.4f}")


if __name__ == "__main__":
    main()

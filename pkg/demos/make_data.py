"""Write the JSON inputs used by the other demos and the README commands.

    python demos/make_data.py [outdir]
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction
from pathlib import Path

from netentropy import joint_from_table
from netentropy.instances import (
    butterfly_code,
    butterfly_network,
    relay_network,
    relay_forwarding_code,
    three_source_basis,
    three_sources,
    three_sources_with_keys,
    two_bits,
)
from netentropy.partitions import scalar_twins


def noisy_copy(eps: Fraction):
    return joint_from_table(["X", "Y"], None, [((x, x ^ z), Fraction(1, 2) * (eps if z else 1 - eps))
                                               for x in (0, 1) for z in (0, 1)])


def main(outdir: str = "demos/data") -> None:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    twin_x, twin_xs = scalar_twins()
    files = {
        "relay_network.json": relay_network().to_json(),
        "three_sources.json": three_sources().to_json(),
        "three_sources_keys.json": three_sources_with_keys().to_json(),
        "three_source_basis.json": three_source_basis().to_json(),
        "relay_code.json": relay_forwarding_code().to_json(),
        "butterfly_network.json": butterfly_network().to_json(),
        "two_bits.json": two_bits().to_json(),
        "butterfly_code.json": butterfly_code().to_json(),
        "twins_x.json": twin_x.to_json(),
        "twins_xstar.json": twin_xs.to_json(),
        "ternary.json": joint_from_table(["X"], None, [((1,), Fraction(1, 2)), ((2,), Fraction(3, 10)),
                                                      ((3,), Fraction(1, 5))]).to_json(),
        "noisy_copy_0.1.json": noisy_copy(Fraction(1, 10)).to_json(),
        "noisy_copy_0.3.json": noisy_copy(Fraction(3, 10)).to_json(),
    }
    for name, blob in files.items():
        (out / name).write_text(json.dumps(blob, indent=2) + "\n")
        print(out / name)


if __name__ == "__main__":
    main(*sys.argv[1:])

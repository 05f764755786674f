from __future__ import annotations

import random
from fractions import Fraction

import pytest

from netentropy import joint_from_table


def random_masses(rng: random.Random, n: int, denom: int = 64) -> list[Fraction]:
    """n distinct-ish positive rationals summing to one."""
    cuts = sorted(rng.sample(range(1, denom), n - 1))
    parts = [b - a for a, b in zip([0] + cuts, cuts + [denom])]
    return [Fraction(p, denom) for p in parts]


def scalar(masses, name: str = "X"):
    return joint_from_table([name], None, [((i,), p) for i, p in enumerate(masses)])


def random_joint(rng: random.Random, names, sizes, support: int, denom: int = 64):
    cells = [tuple(rng.randrange(s) for s in sizes) for _ in range(4 * support)]
    cells = list(dict.fromkeys(cells))[:support]
    masses = random_masses(rng, len(cells), max(denom, 2 * len(cells)))
    return joint_from_table(list(names), None, list(zip(cells, masses)))


@pytest.fixture
def rng():
    return random.Random(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

from __future__ import annotations

import itertools
import json
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netentropy import (
    EntropyMeasure,
    SetFunction,
    binary_entropy,
    conditional_entropy,
    entropy,
    entropy_vector,
    invert_binary_entropy,
    is_function_of,
    joint_from_table,
    load_distribution,
    marginalize,
)
from netentropy.errors import (
    DuplicateOutcome,
    GroundSetTooLarge,
    NegativeProbability,
    NonUnitMass,
    OutOfRange,
    UnknownSymbol,
    UnknownVariable,
    ValidationError,
    ZeroProbability,
)
from netentropy.instances import three_sources
from netentropy.probdist import JointDistribution, exact_entropy

from conftest import random_joint, random_masses, scalar


def plain_entropy(probs, base=2.0):
    return -sum(p * math.log(p, base) for p in probs if p > 0)


# -- construction ---------------------------------------------------------

def test_point_mass_is_valid():
    d = joint_from_table(["X"], None, [(("a",), 1)])
    assert d.support() == [("a",)]
    assert entropy(d) == 0.0


def test_non_unit_mass_rejected():
    with pytest.raises(NonUnitMass):
        joint_from_table(["X"], None, [((0,), "1/2"), ((1,), "2/5")])


def test_negative_probability_rejected():
    with pytest.raises(NegativeProbability):
        joint_from_table(["X"], None, [((0,), "3/2"), ((1,), "-1/2")])


def test_unknown_symbol_rejected():
    with pytest.raises(UnknownSymbol):
        joint_from_table(["X"], {"X": [0, 1]}, [((2,), 1)])


def test_duplicate_outcome_rejected():
    with pytest.raises(DuplicateOutcome):
        joint_from_table(["X"], None, [((0,), "1/2"), ((0,), "1/2")])


def test_zero_probability_atom_rejected():
    with pytest.raises(ZeroProbability):
        joint_from_table(["X"], None, [((0,), 1), ((1,), 0)])


def test_three_sources_shape():
    d = three_sources()
    assert len(d.support()) == 8
    assert set(d.probabilities()) == {Fraction(1, 8)}
    assert entropy(d, variables=["s1"]) == pytest.approx(2.0, abs=1e-12)


def test_json_round_trip(tmp_path):
    d = three_sources()
    path = tmp_path / "d.json"
    path.write_text(json.dumps(d.to_json()))
    e = load_distribution(path)
    assert e.variables == d.variables
    assert e.masses() == d.masses()


def test_json_uses_rational_strings():
    d = scalar([Fraction(1, 3), Fraction(2, 3)])
    ps = [row["p"] for row in d.to_json()["pmf"]]
    assert sorted(ps) == ["1/3", "2/3"]


# -- marginals ------------------------------------------------------------

def test_marginalize_identity():
    d = three_sources()
    assert marginalize(d, d.variables).masses() == d.masses()


def test_marginal_of_first_source_is_uniform():
    m = marginalize(three_sources(), ["s1"])
    assert len(m.support()) == 4
    assert set(m.probabilities()) == {Fraction(1, 4)}


def test_marginal_of_independent_pair():
    d = joint_from_table(["A", "B"], None, [((a, b), Fraction(pa) * Fraction(pb))
                                             for a, pa in ((0, "1/3"), (1, "2/3"))
                                             for b, pb in ((0, "1/2"), (1, "1/2"))])
    assert marginalize(d, ["A"]).masses() == {(0,): Fraction(1, 3), (1,): Fraction(2, 3)}


def test_marginalize_unknown_variable():
    with pytest.raises(UnknownVariable):
        marginalize(three_sources(), ["nope"])


# -- entropies ------------------------------------------------------------

def test_uniform_bit_is_one_bit():
    assert entropy(scalar(["1/2", "1/2"])) == pytest.approx(1.0, abs=1e-15)


def test_pair_of_sources_has_three_bits():
    assert entropy(three_sources(), variables=["s1", "s2"]) == pytest.approx(3.0, abs=1e-12)


def test_shannon_against_direct_sum():
    p = [0.5, 0.3, 0.2]
    d = scalar([Fraction(1, 2), Fraction(3, 10), Fraction(1, 5)])
    assert entropy(d) == pytest.approx(plain_entropy(p), abs=1e-12)


def test_renyi_and_tsallis_formulas():
    p = [0.5, 0.3, 0.2]
    d = scalar([Fraction(1, 2), Fraction(3, 10), Fraction(1, 5)])
    for a in (0.5, 2.0, 3.0):
        want = math.log2(sum(x ** a for x in p)) / (1 - a)
        assert entropy(d, EntropyMeasure.renyi(a)) == pytest.approx(want, abs=1e-12)
    for q in (0.5, 2.0):
        want = (1 - sum(x ** q for x in p)) / (q - 1)
        assert entropy(d, EntropyMeasure.tsallis(q)) == pytest.approx(want, abs=1e-12)


def test_invalid_measure_parameters():
    with pytest.raises(ValidationError):
        EntropyMeasure.renyi(1.0)
    with pytest.raises(ValidationError):
        EntropyMeasure.tsallis(-1.0)


def test_exact_entropy_dyadic():
    assert exact_entropy([Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)]) == Fraction(3, 2)
    assert exact_entropy([Fraction(1, 3), Fraction(2, 3)]) is None


def test_entropy_vector_of_sources():
    h = entropy_vector(three_sources(), ["s1", "s2", "s3"])
    for subset, value in h.items():
        want = 2.0 if len(subset) == 1 else 3.0
        assert value == pytest.approx(want, abs=1e-12)


def test_entropy_vector_of_constant():
    h = entropy_vector(scalar([1]), ["X"])
    assert list(h.as_array()) == [0.0]


def test_entropy_vector_of_independent_bits():
    d = joint_from_table(["a", "b", "c"], None,
                         [(t, Fraction(1, 8)) for t in itertools.product((0, 1), repeat=3)])
    h = entropy_vector(d)
    for subset, value in h.items():
        assert value == pytest.approx(len(subset), abs=1e-12)


def test_entropy_vector_cap():
    d = joint_from_table(["a", "b"], None, [((0, 0), 1)])
    with pytest.raises(GroundSetTooLarge):
        entropy_vector(d, cap=1)


def test_set_function_indexing():
    h = SetFunction(["a", "b", "c"], list(range(1, 8)))
    assert h.mask(["a"]) == 1 and h.mask(["c"]) == 4
    assert h[["a", "c"]] == 5
    assert h.subset(6) == ("b", "c")
    assert SetFunction.from_json(h.to_json()).values == h.values


def test_conditional_entropy_examples():
    d = three_sources()
    assert conditional_entropy(d, ["s1"], ["s1"]) == pytest.approx(0.0, abs=1e-12)
    assert conditional_entropy(d, ["s1"], ["s2", "s3"]) == pytest.approx(0.0, abs=1e-12)
    ind = joint_from_table(["A", "B"], None, [((a, b), Fraction(1, 4)) for a in (0, 1) for b in (0, 1)])
    assert conditional_entropy(ind, "A", "B") == pytest.approx(entropy(ind, variables="A"), abs=1e-12)


def test_is_function_of_examples():
    d = three_sources()
    assert is_function_of(d, ["s1"], ["s1"])
    assert is_function_of(d, ["s3"], ["s1", "s2"])
    ind = joint_from_table(["A", "B"], None, [((a, b), Fraction(1, 4)) for a in (0, 1) for b in (0, 1)])
    assert not is_function_of(ind, "A", "B")


# -- binary entropy -------------------------------------------------------

def test_binary_inversion_fixed_points():
    assert invert_binary_entropy(1.0) == pytest.approx(0.5, abs=1e-12)
    assert invert_binary_entropy(0.0) == 0.0
    assert invert_binary_entropy(binary_entropy(0.3)) == pytest.approx(0.3, abs=1e-9)


def test_binary_inversion_out_of_range():
    with pytest.raises(OutOfRange):
        invert_binary_entropy(1.5)
    with pytest.raises(OutOfRange):
        binary_entropy(-0.1)


@pytest.mark.parametrize("measure", [EntropyMeasure.renyi(0.5), EntropyMeasure.renyi(2),
                                     EntropyMeasure.tsallis(2)])
def test_binary_inversion_other_measures(measure):
    for p in (0.01, 0.1, 0.25, 0.4, 0.5):
        assert measure.invert_binary(measure.binary(p)) == pytest.approx(p, abs=1e-9)


# -- properties -----------------------------------------------------------

@st.composite
def small_joint(draw):
    seed = draw(st.integers(0, 10**6))
    k = draw(st.integers(1, 4))
    rng = random.Random(seed)
    sizes = [rng.randint(1, 3) for _ in range(k)]
    total = math.prod(sizes)
    support = rng.randint(1, total)
    return random_joint(rng, [f"v{i}" for i in range(k)], sizes, support)


@settings(max_examples=40, deadline=None)
@given(small_joint())
def test_shannon_vector_is_polymatroid(d):
    h = entropy_vector(d)
    n = len(d.variables)
    full = (1 << n) - 1
    val = lambda m: 0.0 if m == 0 else h.values[m - 1]  # noqa: E731
    for a in range(full + 1):
        for b in range(full + 1):
            if a & b == a:
                assert val(a) <= val(b) + 1e-9
            assert val(a) + val(b) + 1e-9 >= val(a & b) + val(a | b)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_entropy_permutation_invariant(seed):
    rng = random.Random(seed)
    masses = random_masses(rng, rng.randint(2, 6))
    shuffled = masses[:]
    rng.shuffle(shuffled)
    for m in (EntropyMeasure.shannon(), EntropyMeasure.renyi(2), EntropyMeasure.tsallis(0.5)):
        assert entropy(scalar(masses), m) == pytest.approx(entropy(scalar(shuffled), m), abs=1e-12)


@pytest.mark.parametrize("measure", [EntropyMeasure.renyi(0.5), EntropyMeasure.renyi(2),
                                     EntropyMeasure.tsallis(2), EntropyMeasure.tsallis(0.5)])
def test_binary_measures_increase_on_lower_half(measure):
    grid = [i / 200 for i in range(101)]
    vals = [measure.binary(p) for p in grid]
    assert all(a < b for a, b in zip(vals, vals[1:]))


@settings(max_examples=40, deadline=None)
@given(small_joint(), st.sampled_from(["shannon", "renyi", "tsallis"]))
def test_functional_dependency_axiom(d, kind):
    measure = {"shannon": EntropyMeasure.shannon(), "renyi": EntropyMeasure.renyi(2),
               "tsallis": EntropyMeasure.tsallis(2)}[kind]
    names = d.variables
    for a in names:
        for b in names:
            same = abs(entropy(d, measure, [a, b]) - entropy(d, measure, [b])) <= 1e-9
            assert same == is_function_of(d, [a], [b])


def test_renyi_tends_to_shannon():
    d = scalar([Fraction(1, 2), Fraction(3, 10), Fraction(1, 5)])
    for a in (1 - 1e-4, 1 + 1e-4):
        assert abs(entropy(d, EntropyMeasure.renyi(a)) - entropy(d)) < 1e-3


def test_distribution_is_immutable_view():
    d = three_sources()
    assert isinstance(d, JointDistribution)
    with pytest.raises(TypeError):
        d.pmf[("x",)] = Fraction(0)

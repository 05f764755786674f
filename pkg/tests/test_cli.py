from __future__ import annotations

import json
import random
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import pytest

from netentropy import entropy_vector, joint_from_table
from netentropy.cli import main
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

from conftest import random_joint


@pytest.fixture
def files(tmp_path):
    x, xs = scalar_twins()
    blobs = {
        "net": relay_network().to_json(),
        "src": three_sources().to_json(),
        "keys": three_sources_with_keys().to_json(),
        "basis": three_source_basis().to_json(),
        "code": relay_forwarding_code().to_json(),
        "bnet": butterfly_network().to_json(),
        "bits": two_bits().to_json(),
        "bcode": butterfly_code().to_json(),
        "x": x.to_json(),
        "xs": xs.to_json(),
        "tern": joint_from_table(["X"], None, [((0,), Fraction(1, 2)), ((1,), Fraction(3, 10)),
                                               ((2,), Fraction(1, 5))]).to_json(),
        "bit": joint_from_table(["X"], None, [((0,), Fraction(1, 2)), ((1,), Fraction(1, 2))]).to_json(),
        "same": joint_from_table(["X", "Y"], None, [((0, 0), Fraction(1, 2)), ((1, 1), Fraction(1, 2))]).to_json(),
        "point": joint_from_table(["A", "B"], None, [((0, 0), 1)]).to_json(),
    }
    out = {}
    for name, blob in blobs.items():
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(blob))
        out[name] = str(path)
    out["dir"] = tmp_path
    return out


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


# -- entropy --------------------------------------------------------------

def test_entropy_of_three_sources(capsys, files):
    out = run_json(capsys, "entropy", files["src"])
    assert out["exact"] == ["2/1", "2/1", "3/1", "2/1", "3/1", "3/1", "3/1"]


def test_entropy_of_point_mass(capsys, files):
    assert run_json(capsys, "entropy", files["point"])["values"] == [0.0, 0.0, 0.0]


def test_entropy_matches_library(capsys, tmp_path):
    rng = random.Random(1)
    d = random_joint(rng, ["a", "b", "c"], [2, 3, 2], 7, 60)
    path = tmp_path / "d.json"
    path.write_text(json.dumps(d.to_json()))
    out = run_json(capsys, "entropy", path, "--measure", "renyi:2")
    from netentropy import EntropyMeasure
    assert out["values"] == pytest.approx(entropy_vector(d, measure=EntropyMeasure.renyi(2)).values, abs=1e-15)


def test_entropy_invalid_input(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"variables": ["X"], "alphabets": {"X": [0, 1]},
                               "pmf": [{"outcome": [0], "p": "1/2"}, {"outcome": [1], "p": "1/3"}]}))
    code, _, err = run(capsys, "entropy", bad)
    assert code == 2 and "sum" in err


def test_entropy_ground_cap(capsys, files):
    code, _, _ = run(capsys, "entropy", files["src"], "--cap", "2")
    assert code == 3


def test_unreadable_file(capsys, tmp_path):
    code, _, err = run(capsys, "entropy", tmp_path / "missing.json")
    assert code == 2 and "cannot read" in err


# -- bound ----------------------------------------------------------------

def test_bound_basic_feasible(capsys, files):
    d = files["dir"]
    out = run_json(capsys, "bound", files["net"], "--dist", files["src"], "--tuple", "1,1,1,1",
                   "--emit-witness", d / "w.json", "--emit-lp", d / "lp.json")
    assert out["status"] == "FEASIBLE"
    assert out["lp"]["rows"] == 697
    witness = json.loads((d / "w.json").read_text())
    assert witness["ground"] == out["lp"]["ground"]
    from netentropy import LinearProgram, verify_witness
    program = LinearProgram.load(d / "lp.json")
    values = {program.mask(name.split(",")) if name != "" else 0: Fraction(v)
              for name, v in ((k.strip("h()").replace(" ", ""), v) for k, v in witness["values"].items())}
    assert verify_witness(program, values)


def test_bound_auxiliary_infeasible(capsys, files):
    d = files["dir"]
    code, out, _ = run(capsys, "bound", files["net"], "--dist", files["keys"], "--variant", "auxiliary",
                       "--aux", "K1,K2,K3", "--tuple", "1,1,1,1", "--emit-certificate", d / "cert.json",
                       "--emit-lp", d / "lp.json", "--strict")
    assert code == 4
    assert json.loads(out)["status"] == "INFEASIBLE"
    from netentropy import LinearProgram, verify_certificate
    program = LinearProgram.load(d / "lp.json")
    y = [Fraction(0)] * len(program.constraints)
    for row in json.loads((d / "cert.json").read_text())["rows"]:
        y[row["row"]] = Fraction(row["y"])
    assert verify_certificate(program, y)


def test_bound_zero_tuple(capsys, files):
    out = run_json(capsys, "bound", files["net"], "--dist", files["src"], "--tuple", "0,0,0,0")
    assert out["status"] == "INFEASIBLE"


def test_bound_named_tuple_and_entropy_table(capsys, files, tmp_path):
    table = tmp_path / "h.json"
    table.write_text(json.dumps({"ground": ["s1", "s2", "s3"], "values": ["2", "2", "3", "2", "3", "3", "3"]}))
    out = run_json(capsys, "bound", files["net"], "--entropy", table, "--tuple", "e1=1,e2=1,e3=1,e4=1/2")
    assert out["status"] == "INFEASIBLE"


def test_bound_min_scale(capsys, files):
    out = run_json(capsys, "bound", files["net"], "--dist", files["src"], "--min-scale")
    assert out["t"] == "1/1"


def test_bound_partition_variant(capsys, files):
    out = run_json(capsys, "bound", files["bnet"], "--dist", files["bits"], "--variant", "partition",
                   "--partitions", "2;3")
    assert out["status"] == "FEASIBLE"
    assert len(out["lp"]["ground"]) == 2 + 7 + 2


def test_bound_needs_one_source(capsys, files):
    code, _, err = run(capsys, "bound", files["net"], "--tuple", "1,1,1,1")
    assert code == 2 and "exactly one" in err


def test_bound_ground_too_large(capsys, files):
    code, _, _ = run(capsys, "bound", files["net"], "--dist", files["keys"], "--variant", "auxiliary",
                     "--aux", "K1,K2,K3", "--tuple", "1,1,1,1", "--no-contract")
    assert code == 3


def test_bound_cyclic_network(capsys, files, tmp_path):
    net = tmp_path / "cyc.json"
    net.write_text(json.dumps({"nodes": [1, 2], "edges": [
        {"tail": 1, "head": 2, "cap": "1", "label": "a"}, {"tail": 2, "head": 1, "cap": "1", "label": "b"}],
        "sources": [{"label": "X", "at": [1], "demanded_at": [2]}]}))
    code, _, err = run(capsys, "bound", net, "--dist", files["bit"])
    assert code == 2 and "cycle" in err


def test_bound_timings_only_on_request(capsys, files):
    plain = run_json(capsys, "bound", files["net"], "--dist", files["src"], "--tuple", "1,1,1,1")
    timed = run_json(capsys, "bound", files["net"], "--dist", files["src"], "--tuple", "1,1,1,1", "--timings")
    assert "seconds" not in plain and "seconds" in timed


# -- recover --------------------------------------------------------------

def test_recover_round_trip(capsys, files):
    out = run_json(capsys, "recover", "--dist", files["tern"], "--round-trip", "--seed", "3")
    assert sorted(out["recovered"]["probabilities"], reverse=True) == pytest.approx([0.5, 0.3, 0.2], abs=1e-6)
    assert out["max_mass_error"] < 1e-6


def test_recover_two_atoms(capsys, files):
    out = run_json(capsys, "recover", "--dist", files["bit"])
    assert out["recovered"]["probabilities"] == pytest.approx([0.5, 0.5], abs=1e-9)


def test_recover_scalar_twins(capsys, files):
    out = run_json(capsys, "recover", "--dist", files["x"], "--vector", "--against", files["xs"])
    assert out["coordinate_components"] == [4, 4]
    assert out["against"]["coordinate_components"] == [8]
    assert out["against"]["consistent_without_coordinates"] is True
    assert out["against"]["consistent_with_coordinates"] is False
    assert out["against"]["recovered_isomorphic"] is False
    assert out["isomorphic_to_input"] is True


def test_recover_from_saved_oracle(capsys, files):
    saved = files["dir"] / "oracle.json"
    first = run_json(capsys, "recover", "--dist", files["tern"], "--emit-oracle", saved)
    again = run_json(capsys, "recover", "--oracle", saved)
    assert again["recovered"]["probabilities"] == pytest.approx(first["recovered"]["probabilities"], abs=1e-12)


def test_recover_incomplete_oracle(capsys, tmp_path):
    path = tmp_path / "o.json"
    path.write_text(json.dumps({"n": 4, "M": 1, "labels": list(range(7)), "entries": []}))
    code, _, err = run(capsys, "recover", "--oracle", path)
    assert code == 2


def test_recover_other_measure(capsys, files):
    out = run_json(capsys, "recover", "--dist", files["tern"], "--measure", "tsallis:2")
    assert out["max_mass_error"] < 1e-6


# -- aux ------------------------------------------------------------------

def test_aux_gk(capsys, files):
    assert run_json(capsys, "aux", "gk", files["same"])["H(K)"] == pytest.approx(1.0, abs=1e-12)


def test_aux_lincorr(capsys, files):
    out = run_json(capsys, "aux", "lincorr", files["basis"])
    from netentropy.probdist import JointDistribution
    assert JointDistribution.from_json(out).masses() == three_sources().masses()


def test_aux_delta_star_reproducible(capsys, files):
    args = ("aux", "delta-star", files["x"], "--mode", "random", "--seed", "7", "--restarts", "2", "--steps", "100")
    code1, a, _ = run(capsys, *args)
    code2, b, _ = run(capsys, *args)
    assert code1 == code2 == 0 and a == b


def test_aux_bad_basis(capsys, tmp_path):
    path = tmp_path / "b.json"
    path.write_text(json.dumps({"q": 2, "m": 2, "bases": [[[1, 0]]]}))
    code, _, _ = run(capsys, "aux", "lincorr", path)
    assert code == 2


# -- code -----------------------------------------------------------------

def test_code_butterfly(capsys, files):
    out = run_json(capsys, "code", files["bnet"], files["bits"], files["bcode"])
    assert out["success"] is True


def test_code_relay_failure(capsys, files):
    code, out, _ = run(capsys, "code", files["net"], files["src"], files["code"], "--strict")
    assert code == 4
    assert json.loads(out)["success"] is False
    code, text, _ = run(capsys, "code", files["net"], files["src"], files["code"], "--text")
    assert code == 0 and "FAILS" in text


def test_code_identity(capsys, tmp_path):
    net = tmp_path / "n.json"
    net.write_text(json.dumps({"nodes": [1, 2], "edges": [{"tail": 1, "head": 2, "cap": "1", "label": "e"}],
                               "sources": [{"label": "s", "at": [1], "demanded_at": [2]}]}))
    dist = tmp_path / "d.json"
    dist.write_text(json.dumps(joint_from_table(["s"], None, [((0,), Fraction(1, 2)), ((1,), Fraction(1, 2))]).to_json()))
    from netentropy.netmodel import NetworkCode, Table
    code = NetworkCode({"e": Table(["s"], {(0,): 0, (1,): 1}, (0, 1))}, {(2, "s"): Table(["e"], {(0,): 0, (1,): 1})})
    cfile = tmp_path / "c.json"
    cfile.write_text(json.dumps(code.to_json()))
    assert run_json(capsys, "code", net, dist, cfile)["success"] is True


# -- process-level behaviour ----------------------------------------------

def test_byte_identical_runs(files):
    cmd = [sys.executable, "-m", "netentropy.cli", "bound", files["net"], "--dist", files["src"], "--tuple", "1,1,1,1"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a


def test_console_script_help():
    out = subprocess.run(["netentropy", "bound", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "--emit-certificate" in out.stdout

"""Command-line front end: ``netentropy {entropy,bound,recover,aux,code}``.

Exit codes: 0 success, 2 invalid input, 3 resource cap exceeded, 4 the
queried tuple is infeasible and ``--strict`` was given, 1 anything else.
JSON goes to stdout (or ``-o``); reports carry no timestamps, so identical
inputs and seeds give byte-identical output.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import auxgen, netmodel, partitions, probdist
from .errors import InconsistentOracle, NetEntropyError, ResourceLimitError, ValidationError

EXIT_OK, EXIT_ERROR, EXIT_INVALID, EXIT_RESOURCE, EXIT_INFEASIBLE = 0, 1, 2, 3, 4


def _frac(v: Fraction) -> str:
    return f"{v.numerator}/{v.denominator}"


def _digest(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc


def _write(obj, path: str | None) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _measure(text: str) -> probdist.EntropyMeasure:
    kind, _, param = text.partition(":")
    if kind == "shannon" and not param:
        return probdist.SHANNON
    if kind in ("renyi", "tsallis") and param:
        try:
            return probdist.EntropyMeasure(kind, float(param))
        except ValueError:
            pass
    raise ValidationError(f"measure must be shannon, renyi:A or tsallis:Q, not {text!r}")


def _csv(text: str | None) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()] if text else []


# ---------------------------------------------------------------------------
# subcommands


def cmd_entropy(args) -> int:
    dist = probdist.JointDistribution.from_json(_load_json(args.dist))
    measure = _measure(args.measure)
    ground = _csv(args.vars) or list(dist.variables)
    vec = probdist.entropy_vector(dist, ground, measure, cap=args.cap)
    out = {"ground": ground, "measure": str(measure), "values": vec.values}
    if measure.kind == "shannon":
        exact = [probdist.exact_entropy(dist.masses(vec.subset(m)).values()) for m in range(1, len(vec) + 1)]
        if all(v is not None for v in exact):
            out["exact"] = [_frac(v) for v in exact]
    _write(out, args.output)
    return EXIT_OK


def _entropy_source(args):
    if bool(args.dist) == bool(args.entropy):
        raise ValidationError("give exactly one of --dist and --entropy")
    if args.dist:
        return probdist.JointDistribution.from_json(_load_json(args.dist)), args.dist
    return netmodel.entropy_table(_load_json(args.entropy)), args.entropy


def _parse_tuple(text: str):
    if "=" in text:
        return {k.strip(): v.strip() for k, v in (p.split("=", 1) for p in _csv(text))}
    return _csv(text)


def cmd_bound(args) -> int:
    spec = netmodel.NetworkSpec.from_json(_load_json(args.network))
    source, source_path = _entropy_source(args)
    inputs = {args.network: _digest(args.network), source_path: _digest(source_path)}
    partitions_sel = [[int(i) for i in _csv(block)] for block in args.partitions.split(";")] \
        if args.partitions else []
    opts = dict(auxiliaries=_csv(args.aux), partitions=partitions_sel, contract=not args.no_contract,
                relay_capacity=args.relay_capacity)
    report = {"command": "bound", "variant": args.variant, "inputs": inputs, "warnings": []}
    start = time.perf_counter()
    if args.min_scale is not None:
        direction = _parse_tuple(args.min_scale) if args.min_scale else None
        compiled = netmodel.compile_scaling(spec, source, args.variant, direction, **opts)
        outcome = netmodel.lp_solve(compiled.program, method=args.method)
        t = outcome.optimum
        report.update(query="min-scale", status="OPTIMAL", t=_frac(t), t_float=float(t))
    else:
        caps = _parse_tuple(args.tuple) if args.tuple else None
        compiled = netmodel.compile_bound(spec, source, args.variant, caps, **opts)
        outcome = netmodel.lp_solve(compiled.program, method=args.method)
        report.update(query="tuple", status=outcome.status.upper())
    if compiled.approximate:
        report["warnings"].append("approximate: rationalized entropies")
    if compiled.alias:
        report["contracted"] = compiled.alias
    report["lp"] = {"ground": list(compiled.program.ground), "rows": len(compiled.program.constraints),
                    "by_tag": compiled.program.count_by_tag()}
    program = compiled.program
    if args.emit_lp:
        program.dump(args.emit_lp)
        report["lp_file"] = args.emit_lp
    if args.emit_witness and outcome.witness is not None:
        _write({"ground": list(program.ground),
                "values": {program.var_name(k): _frac(v) for k, v in outcome.witness.items()}},
               args.emit_witness)
        report["witness_file"] = args.emit_witness
    if args.emit_certificate and outcome.certificate is not None:
        _write({"rows": [{"row": i, "tag": c.tag, "y": _frac(y)}
                         for i, (c, y) in enumerate(zip(program.constraints, outcome.certificate)) if y]},
               args.emit_certificate)
        report["certificate_file"] = args.emit_certificate
    if args.timings:
        report["seconds"] = round(time.perf_counter() - start, 3)
    _write(report, args.output)
    if args.strict and outcome.status == "Infeasible":
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_recover(args) -> int:
    measure = _measure(args.measure)
    report: dict = {"command": "recover"}
    if args.oracle:
        oracle = partitions.TableOracle.from_json(_load_json(args.oracle))
        report["inputs"] = {args.oracle: _digest(args.oracle)}
        system = None
    elif args.dist:
        dist = probdist.JointDistribution.from_json(_load_json(args.dist))
        report["inputs"] = {args.dist: _digest(args.dist)}
        system = partitions.build_partition_system(dist, measure=measure, cap=args.cap)
        oracle = partitions.DistributionOracle(system, seed=args.seed, structural=not args.tolerance_only)
    else:
        raise ValidationError("give --oracle or --dist")
    recorder = partitions.RecordingOracle(oracle)
    if args.vector:
        rec = partitions.recover_vector(recorder, cap=args.cap)
        report["coordinate_components"] = partitions.coordinate_structure(rec.distribution)
    else:
        rec = partitions.recover_scalar(recorder, cap=args.cap)
    report["recovered"] = rec.to_json()
    report["queries"] = len(recorder.log)
    if system is not None:
        hidden = [float(p) for p in system.masses]
        report["max_mass_error"] = max(abs(a - b) for a, b in zip(hidden, rec.probabilities))
        if args.vector:
            maps = partitions.find_isomorphism(rec.distribution, system.base)
            report["isomorphic_to_input"] = maps is not None
    if args.against:
        other = probdist.JointDistribution.from_json(_load_json(args.against))
        other_sys = partitions.build_partition_system(other, measure=measure, cap=args.cap)
        other_oracle = partitions.DistributionOracle(other_sys)
        mine = system or _system_from_recovered(rec, measure)
        report["against"] = {
            "consistent_without_coordinates": partitions.check_oracle_consistency(
                mine, other_oracle, coordinates=False, seed=args.seed),
            "consistent_with_coordinates": partitions.check_oracle_consistency(
                mine, other_oracle, coordinates=True, seed=args.seed),
        }
        if args.vector:
            other_rec = partitions.recover_vector(other_oracle, cap=args.cap)
            report["against"]["recovered_isomorphic"] = partitions.find_isomorphism(
                rec.distribution, other_rec.distribution) is not None
            report["against"]["coordinate_components"] = partitions.coordinate_structure(other_rec.distribution)
    if args.emit_oracle:
        _write(recorder.to_table().to_json(), args.emit_oracle)
    _write(report, args.output)
    return EXIT_OK


def _system_from_recovered(rec, measure):
    if rec.distribution is None:
        raise ValidationError("--against with an oracle file needs --vector")
    return partitions.build_partition_system(rec.distribution, measure=measure)


def cmd_aux(args) -> int:
    if args.kind == "lincorr":
        basis = auxgen.SubspaceBasis.from_json(_load_json(args.file))
        dist, mats = auxgen.linearly_correlated(basis, include_key=args.with_key)
        out = dist.to_json()
        out["matrices"] = [m.tolist() for m in mats]
        _write(out, args.output)
        return EXIT_OK
    dist = probdist.JointDistribution.from_json(_load_json(args.file))
    x, y = (args.x, args.y) if args.x else (None, None)
    if args.kind == "gk":
        res = auxgen.gk_common_information(dist, x, y)
    else:
        res = auxgen.delta_star_search(dist, k=args.k, mode=args.mode, seed=args.seed,
                                       restarts=args.restarts, steps=args.steps, x=x, y=y)
    out = {"command": f"aux {args.kind}", "inputs": {args.file: _digest(args.file)}, "seed": args.seed}
    out.update(res.to_json())
    if args.kind == "delta-star":
        out["note"] = "delta is an upper bound on the optimum"
    _write(out, args.output)
    return EXIT_OK


def cmd_code(args) -> int:
    spec = netmodel.NetworkSpec.from_json(_load_json(args.network))
    dist = probdist.JointDistribution.from_json(_load_json(args.dist))
    code = netmodel.NetworkCode.from_json(_load_json(args.code))
    report = netmodel.evaluate_code(spec, dist, code)
    if args.text:
        sys.stdout.write(report.text() + "\n")
    else:
        out = {"command": "code",
               "inputs": {p: _digest(p) for p in (args.network, args.dist, args.code)}}
        out.update(report.to_json())
        _write(out, args.output)
    return EXIT_OK if report.success or not args.strict else EXIT_INFEASIBLE


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="netentropy", description="Entropy-based network coding bounds and distribution recovery.")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("entropy", help="entropy vector of a distribution file",
                       description="Print h(alpha) for every nonempty subset of the chosen variables.")
    e.add_argument("dist", help="distribution JSON")
    e.add_argument("--measure", default="shannon", help="shannon | renyi:A | tsallis:Q")
    e.add_argument("--vars", help="comma-separated ground variables (default: all)")
    e.add_argument("--cap", type=int, default=probdist.DEFAULT_GROUND_CAP)
    e.add_argument("-o", "--output")
    e.set_defaults(func=cmd_entropy)

    b = sub.add_parser("bound", help="test a capacity tuple against an outer bound",
                       description="Compile a network bound into an exact LP and decide a capacity "
                                   "tuple, or find the least scaling of a direction that is inside.")
    b.add_argument("network", help="network JSON")
    b.add_argument("--dist", help="source distribution JSON")
    b.add_argument("--entropy", help="source entropy table JSON (basic variant only)")
    b.add_argument("--variant", choices=netmodel.VARIANTS, default="basic")
    b.add_argument("--tuple", help="capacities: 'c1,c2,...' over capacitated edges, or 'e1=1,e2=1/2'")
    b.add_argument("--min-scale", nargs="?", const="", help="minimize t with t*direction inside")
    b.add_argument("--aux", help="auxiliary variable names in the distribution (auxiliary variant)")
    b.add_argument("--partitions", help="partition blocks as 1-based atom lists, e.g. '2;3;2,3'")
    b.add_argument("--relay-capacity", help="capacity of edges marked sufficient (default: h(S))")
    b.add_argument("--no-contract", action="store_true", help="keep sufficient relay edges as variables")
    b.add_argument("--method", choices=("auto", "exact", "guided"), default="auto")
    b.add_argument("--emit-lp")
    b.add_argument("--emit-witness")
    b.add_argument("--emit-certificate")
    b.add_argument("--strict", action="store_true", help="exit 4 when the tuple is infeasible")
    b.add_argument("--timings", action="store_true", help="include wall-clock seconds in the report")
    b.add_argument("-o", "--output")
    b.set_defaults(func=cmd_bound)

    r = sub.add_parser("recover", help="recover a distribution from partition entropies",
                       description="Recover atom masses (and, with --vector, the joint pmf up to "
                                   "relabelling) from an oracle table or a round trip through a "
                                   "distribution file.")
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--oracle", help="oracle table JSON")
    src.add_argument("--dist", help="distribution JSON for a round trip")
    r.add_argument("--round-trip", action="store_true", help="accepted for clarity with --dist")
    r.add_argument("--vector", action="store_true")
    r.add_argument("--against", help="second distribution to compare oracles and recoveries with")
    r.add_argument("--measure", default="shannon")
    r.add_argument("--seed", type=int, default=0, help="label shuffle seed")
    r.add_argument("--tolerance-only", action="store_true", help="zero tests by tolerance, not support")
    r.add_argument("--cap", type=int, default=partitions.RECOVERY_CAP)
    r.add_argument("--emit-oracle", help="save the queries used as an oracle table")
    r.add_argument("-o", "--output")
    r.set_defaults(func=cmd_recover)

    a = sub.add_parser("aux", help="auxiliary variable constructions",
                       description="gk: common information; lincorr: sources from subspace bases; "
                                   "delta-star: relaxed common information search.")
    a.add_argument("kind", choices=("gk", "lincorr", "delta-star"))
    a.add_argument("file", help="distribution JSON (gk, delta-star) or basis JSON (lincorr)")
    a.add_argument("--x")
    a.add_argument("--y")
    a.add_argument("--k", type=int, default=2)
    a.add_argument("--mode", choices=("exhaustive", "random"), default="exhaustive")
    a.add_argument("--restarts", type=int, default=20)
    a.add_argument("--steps", type=int, default=2000)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--with-key", action="store_true", help="lincorr: include K1..Km")
    a.add_argument("-o", "--output")
    a.set_defaults(func=cmd_aux)

    c = sub.add_parser("code", help="evaluate a block-length-one network code",
                       description="Run the code on every source atom and check each decoder.")
    c.add_argument("network")
    c.add_argument("dist")
    c.add_argument("code")
    c.add_argument("--text", action="store_true", help="human-readable report")
    c.add_argument("--strict", action="store_true", help="exit 4 when decoding fails")
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_code)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, InconsistentOracle) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except NetEntropyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

"""Command-line harness: generate streams, exact oracles, simulated estimates, protocol demo, verification."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import comm
from .estimator import SAMPLERS, EstimatorParams, full_estimate
from .graph import BRUTE_FORCE_CAP, StreamParseError, gen_bipartite_forward, gen_random, max_dicut_bruteforce, read_stream
from .hashing import HashOracle, derive_seed
from .pseudosnapshot import DegreeGrid, pseudosnapshot_exact
from .quantum import single_copy_run
from .snapshot import ConfigError, load_config, oblivious_value, snapshot


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eps", type=float, default=0.5, help="accuracy parameter in (0, 1] (default 0.5)")
    p.add_argument("--kappa", type=int, default=4, help="sampling parameter, at least 2 (default 4)")
    p.add_argument("--capacity-const", type=int, default=32, help="capacity constant C in M = C kappa^3 m (default 32)")
    p.add_argument("--copies", type=int, default=10 ** 4, help="copies per window pair (default 10000)")
    p.add_argument("--med-reps", type=int, default=5, help="repetitions for the median (default 5)")
    p.add_argument("--c-corr", type=float, default=0.0, help="correction constant, value -= c eps m (default 0)")
    p.add_argument("--sampler", choices=SAMPLERS, default="aggregate",
                   help="aggregate: exact multinomial counts; copies: per-copy replay (default aggregate)")
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--classes", default="production", help="class config file, or bundled name test2/production")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json", help="output format (default json)")


def _params(args) -> EstimatorParams:
    return EstimatorParams(eps=args.eps, kappa=args.kappa, capacity=args.capacity_const, copies=args.copies,
                           med_reps=args.med_reps, c_corr=args.c_corr, seed=args.seed, sampler=args.sampler)


def _emit(args, doc: dict, rows: list[list] | None = None) -> None:
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        for row in rows if rows is not None else [[k, v] for k, v in doc.items()]:
            writer.writerow(row)
        text = buf.getvalue()
    else:
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _matrix_rows(name: str, mat) -> list[list]:
    mat = np.asarray(mat)
    return [[name, i, j, mat[i, j]] for i in range(mat.shape[0]) for j in range(mat.shape[1]) if mat[i, j]]


def cmd_generate(args) -> int:
    if args.left is not None:
        stream = gen_bipartite_forward(args.left, args.n - args.left, args.p, args.seed)
    else:
        stream = gen_random(args.n, args.p, args.seed)
    text = stream.to_text()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_exact(args) -> int:
    stream = read_stream(args.stream)
    config = load_config(args.classes)
    snap = snapshot(stream, config)
    grid = DegreeGrid(max(stream.n, 1), args.eps, max_degree=max(stream.m, 1))
    oracle = HashOracle(args.seed, args.kappa, grid)
    pss = pseudosnapshot_exact(stream, config, oracle)
    opt = max_dicut_bruteforce(stream) if stream.n <= BRUTE_FORCE_CAP else None
    doc = {
        "n": stream.n, "m": stream.m, "opt": opt,
        "snapshot": snap.tolist(), "oblivious_value": float(oblivious_value(snap, config)),
        "pseudosnapshot": pss.tolist(), "pseudo_oblivious_value": float(oblivious_value(pss, config)),
        "config": config.to_dict(), "eps": args.eps, "kappa": args.kappa, "seed": args.seed,
    }
    rows = [["opt", "", "", opt], ["oblivious_value", "", "", doc["oblivious_value"]],
            ["pseudo_oblivious_value", "", "", doc["pseudo_oblivious_value"]]]
    rows += _matrix_rows("snapshot", snap) + _matrix_rows("pseudosnapshot", pss)
    _emit(args, doc, [["field", "i", "j", "value"]] + rows)
    return 0


def cmd_simulate(args) -> int:
    stream = read_stream(args.stream)
    config = load_config(args.classes)
    params = _params(args)
    opt = max_dicut_bruteforce(stream) if (args.opt and stream.n <= BRUTE_FORCE_CAP) else None
    report = full_estimate(stream, config, params, opt=opt, keep_pairs=args.pairs)
    if args.trace:
        a, b = args.trace_pair
        grid = DegreeGrid(max(stream.n, 1), params.eps, max_degree=max(stream.m, 1))
        oracle = HashOracle(derive_seed(params.seed, "oracle", 0), params.kappa, grid)
        run = single_copy_run(stream, oracle, config, a, b, params.capacity, seed=params.seed, trace=True)
        with open(args.trace, "w", encoding="utf-8") as fh:
            for rec in run.trace:
                fh.write(json.dumps({"k": rec.k, "op": rec.op, "weights": [[p, w] for p, w in rec.weights],
                                     "den": rec.den, "result": rec.result}) + "\n")
    doc = report.to_dict()
    rows = [["estimate", report.estimate], ["opt", report.opt], ["ratio", report.ratio]]
    rows += [[f"diagnostics.{k}", v] for k, v in report.diagnostics.items() if not isinstance(v, list)]
    rows += [[f"qubits.{k}", v] for k, v in report.qubits.items()]
    _emit(args, doc, [["field", "value"]] + rows)
    return 0


def cmd_comm(args) -> int:
    cmp = comm.compare_protocols(args.n, args.eps, args.trials, args.seed, labels=args.labels)
    doc = {**cmp.__dict__, "table": cmp.rows()}
    rows = [["protocol", "copies_or_samples", "message_size", "unit", "within_eps_n"]]
    rows += [[r[k] for k in rows[0]] for r in cmp.rows()]
    _emit(args, doc, rows)
    return 0


def cmd_verify(args) -> int:
    from .verify import quick_suites

    results = quick_suites(args.seed)
    doc = {"passed": all(r.passed for r in results),
           "suites": [{"name": r.name, "passed": r.passed, "details": r.details} for r in results]}
    rows = [["suite", "passed"]] + [[r.name, r.passed] for r in results]
    _emit(args, doc, rows)
    for r in results:
        print(r.line(), file=sys.stderr)
    return 0 if doc["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdicut", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a random edge stream")
    p.add_argument("--n", type=int, required=True, help="vertex count")
    p.add_argument("--p", type=float, default=0.3, help="edge probability per ordered pair (default 0.3)")
    p.add_argument("--left", type=int, help="make every edge go from the first LEFT vertices to the rest")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("exact", help="OPT, snapshot and pseudosnapshot of a stream")
    p.add_argument("stream")
    _add_common(p)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("simulate", help="simulated end-to-end estimate")
    p.add_argument("stream")
    _add_common(p)
    p.add_argument("--opt", action="store_true", help="include brute-force OPT in the report")
    p.add_argument("--pairs", action="store_true", help="include nonzero per-pair matrices")
    p.add_argument("--trace", help="write the measurement trace of one copy (JSON lines)")
    p.add_argument("--trace-pair", type=int, nargs=2, default=(0, 0), metavar=("ALPHA", "BETA"))
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("comm", help="quantum vs classical one-way protocol comparison")
    p.add_argument("--n", type=int, default=10 ** 4)
    p.add_argument("--labels", type=int, default=4)
    p.add_argument("--trials", type=int, default=1000)
    _add_common(p)
    p.set_defaults(func=cmd_comm, eps=0.2)

    p = sub.add_parser("verify", help="run the invariant suites on the bundled corpus")
    _add_common(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (StreamParseError, ConfigError, ValueError, OSError, IndexError) as exc:
        record = {"error": type(exc).__name__, "message": str(exc), "command": args.command}
        print(json.dumps(record), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: ``score-dag generate | discover | eval | bench``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from threadpoolctl import threadpool_limits

from .bench import run_bench, thread_cap
from .errors import ConfigError, DataError, NumericalError
from .graph import read_graph, write_graph
from .metrics import evaluate
from .order import read_order
from .prune import PruneConfig, discover
from .scm import NOISE_FAMILIES, SuiteConfig, make_run, read_csv, write_csv, write_model
from .stein import DEFAULT_ETA

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _check_writable(paths, force: bool) -> None:
    for p in paths:
        if p is not None and Path(p).exists() and not force:
            raise ConfigError(f"{p} exists; pass --force to overwrite")


def cmd_generate(args) -> int:
    out = Path(args.out_dir)
    paths = [out / "data.csv", out / "graph.json", out / "model.json"]
    cfg = SuiteConfig(d=args.d, graph=args.graph, noise=args.noise, n=args.n, runs=1,
                      seed=args.seed, links=args.links)
    _check_writable(paths, args.force)
    model, X, g = make_run(cfg, 0)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(X, paths[0])
    write_graph(g, paths[1])
    write_model(model, paths[2])
    print(f"wrote {X.shape[0]}x{X.shape[1]} data, {g.n_edges} edges to {out}")
    return 0


def cmd_discover(args) -> int:
    _check_writable([args.out, args.trace], args.force)
    X = read_csv(args.data)
    t0 = time.perf_counter()
    est, trace = discover(X, args.eta, PruneConfig(cutoff=args.cutoff))
    total = time.perf_counter() - t0
    write_graph(est, args.out)
    if args.trace:
        trace.write(args.trace)
    print("order:", " ".join(str(v) for v in trace.order))
    print(f"edges: {est.n_edges}  time: {total:.2f}s")
    return 0


def cmd_eval(args) -> int:
    true_g = read_graph(args.true)
    est_g = read_graph(args.est)
    order = read_order(args.order) if args.order else None
    report = evaluate(true_g, est_g, order)
    if args.out:
        _check_writable([args.out], args.force)
        report.write(args.out)
    print(json.dumps(report.to_dict()))
    return 0


def cmd_bench(args) -> int:
    cfg = SuiteConfig(d=args.d, graph=args.graph, noise=args.noise, n=args.n, runs=args.runs,
                      seed=args.seed, links=args.links)
    if args.out and not args.resume:
        _check_writable([args.out], args.force)
    result = run_bench(cfg, args.eta, args.cutoff, args.out, args.resume, args.jobs)
    print(result.table())
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--force", action="store_true", help="overwrite existing outputs")

    model = _Parser(add_help=False)
    model.add_argument("--d", type=int, required=True)
    model.add_argument("--graph", choices=["ER1", "ER4", "SF1", "SF4"], default="ER1")
    model.add_argument("--noise", choices=NOISE_FAMILIES, default="gaussian")
    model.add_argument("--n", type=int, default=1000)
    model.add_argument("--links", choices=["gp", "parametric"], default="gp")

    p = _Parser(prog="score-dag", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", parents=[common, model], help="sample a synthetic dataset")
    g.add_argument("--out-dir", required=True)
    g.set_defaults(func=cmd_generate)

    d = sub.add_parser("discover", parents=[common], help="estimate a DAG from a CSV")
    d.add_argument("data")
    d.add_argument("--eta", type=float, default=DEFAULT_ETA)
    d.add_argument("--cutoff", type=float, default=0.001)
    d.add_argument("--out", required=True, help="estimated graph JSON")
    d.add_argument("--trace", help="write the order trace JSON here")
    d.set_defaults(func=cmd_discover)

    e = sub.add_parser("eval", parents=[common], help="compare two graphs")
    e.add_argument("--true", required=True)
    e.add_argument("--est", required=True)
    e.add_argument("--order", help="order or trace JSON; adds d_top")
    e.add_argument("--out", help="write the report JSON here")
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("bench", parents=[common, model], help="repeated synthetic benchmark")
    b.add_argument("--runs", type=int, default=10)
    b.add_argument("--eta", type=float, default=DEFAULT_ETA)
    b.add_argument("--cutoff", type=float, default=0.001)
    b.add_argument("--out", help="BenchResult JSON")
    b.add_argument("--resume", action="store_true")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with threadpool_limits(thread_cap()):
            return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

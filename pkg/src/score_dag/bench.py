"""Repeated-run benchmark on synthetic additive noise models."""
from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from pathlib import Path

from threadpoolctl import threadpool_limits

from .errors import DataError
from .metrics import d_top, shd, sid
from .order import score_order, var_sort_order
from .prune import PruneConfig, prune
from .scm import SuiteConfig, make_run

METRICS = ("shd", "sid", "d_top", "varsort_d_top", "order_seconds", "total_seconds")


def thread_cap() -> int | None:
    raw = os.environ.get("SCORE_DAG_THREADS")
    return int(raw) if raw else None


def run_one(cfg: SuiteConfig, run: int, eta: float, cutoff: float) -> dict:
    """Generate run ``run`` of the suite, discover, and score the result."""
    model, X, g = make_run(cfg, run)
    t0 = time.perf_counter()
    trace = score_order(X, eta)
    t1 = time.perf_counter()
    est = prune(X, trace.order, PruneConfig(cutoff=cutoff))
    t2 = time.perf_counter()
    return {
        "run": run,
        "n_edges": g.n_edges,
        "shd": shd(g, est),
        "sid": sid(g, est),
        "d_top": d_top(trace.order, g),
        "varsort_d_top": d_top(var_sort_order(X), g),
        "order_seconds": t1 - t0,
        "total_seconds": t2 - t0,
    }


def aggregate(rows: list[dict]) -> dict:
    """Mean and sample standard deviation of every metric column."""
    out = {}
    for key in METRICS:
        vals = [float(r[key]) for r in rows]
        if not vals:
            out[key] = {"mean": None, "std": None}
            continue
        mean = math.fsum(vals) / len(vals)
        std = (math.sqrt(math.fsum((v - mean) ** 2 for v in vals) / (len(vals) - 1))
               if len(vals) > 1 else 0.0)
        out[key] = {"mean": mean, "std": std}
    return out


@dataclass
class BenchResult:
    config: dict
    runs: list[dict] = field(default_factory=list)
    aggregate: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path) -> BenchResult:
        obj = json.loads(Path(path).read_text())
        res = cls(obj["config"], obj["runs"], obj["aggregate"])
        expect = aggregate(res.runs)
        for key, stats in expect.items():
            got = res.aggregate.get(key, {})
            for name in ("mean", "std"):
                a, b = stats[name], got.get(name)
                if (a is None) != (b is None) or (a is not None and not math.isclose(
                        a, b, rel_tol=1e-9, abs_tol=1e-12)):
                    raise DataError(f"{path}: aggregate {key}.{name} does not match runs")
        return res

    def table(self) -> str:
        lines = [f"{'run':>4} {'edges':>5} {'SHD':>5} {'SID':>5} {'Dtop':>5} "
                 f"{'VarSort':>7} {'order s':>8} {'total s':>8}"]
        for r in self.runs:
            lines.append(
                f"{r['run']:>4} {r['n_edges']:>5} {r['shd']:>5} {r['sid']:>5} {r['d_top']:>5} "
                f"{r['varsort_d_top']:>7} {r['order_seconds']:>8.2f} {r['total_seconds']:>8.2f}")
        if self.runs:
            parts = []
            for key in METRICS:
                a = self.aggregate[key]
                parts.append(f"{key}={a['mean']:.2f}±{a['std']:.2f}")
            lines.append("mean ± sd: " + ", ".join(parts))
        return "\n".join(lines)


def _worker_init(cap):
    if cap:
        threadpool_limits(cap)


def _partial_path(out) -> Path:
    return Path(str(out) + ".partial.jsonl")


def run_bench(cfg: SuiteConfig, eta: float = 0.01, cutoff: float = 0.001, out=None,
              resume: bool = False, jobs: int = 1) -> BenchResult:
    """Run the whole suite. With ``out`` set, each finished run is appended to
    ``<out>.partial.jsonl`` so that ``resume=True`` skips completed runs."""
    config = {**asdict(cfg), "eta": eta, "cutoff": cutoff}
    done: dict[int, dict] = {}
    partial = _partial_path(out) if out is not None else None
    if partial is not None and resume and partial.exists():
        for line in partial.read_text().splitlines():
            if line.strip():
                row = json.loads(line)
                done[int(row["run"])] = row
    elif partial is not None and partial.exists():
        partial.unlink()
    todo = [r for r in range(cfg.runs) if r not in done]

    def record(row):
        done[row["run"]] = row
        if partial is not None:
            with open(partial, "a") as fh:
                fh.write(json.dumps(row) + "\n")

    cap = thread_cap()
    if jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(jobs, initializer=_worker_init, initargs=(cap,)) as pool:
            futures = [pool.submit(run_one, cfg, r, eta, cutoff) for r in todo]
            for fut in as_completed(futures):
                record(fut.result())
    else:
        with threadpool_limits(cap):
            for r in todo:
                record(run_one(cfg, r, eta, cutoff))
    rows = [done[r] for r in sorted(done)]
    result = BenchResult(config, rows, aggregate(rows))
    if out is not None:
        result.write(out)
        if partial.exists():
            partial.unlink()
    return result

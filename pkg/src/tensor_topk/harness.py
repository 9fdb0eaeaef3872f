"""Batch experiment drivers behind the bench/func/qft subcommands.

CSV layout (schema 1): a ``# schema=1`` comment line, a header row, one row
per (trial, method), and per-method ``summary`` rows.  Result columns are a
pure function of the master seed: trial streams are seeded by (seed, trial),
so adding or removing a method never changes the tensor draws.  Only the
wall_time column is environmental.

Set TENSOR_TOPK_THREADS to run trials in a process pool; rows are buffered
and written in trial order either way.
"""

from __future__ import annotations

import csv
import os
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import cp
from .baselines import ORACLE_CAP_DEFAULT, oracle_topk, power_iteration_max
from .errors import CapacityError
from .generators import (
    RandomSpec,
    gen_griewank,
    gen_random_cp,
    gen_schwefel,
    griewank_grids,
    schwefel_grids,
)
from .qft import (
    qft_reference,
    random_product_state,
    simulate_and_measure,
    square_layout,
    statevector,
)
from .solver import OrderingKey, SolverConfig, key_values, solve

BENCH_COLUMNS = [
    "trial", "dist", "trial_seed", "method", "k", "extra", "block", "d",
    "dims", "rank", "values", "indices", "oracle_match", "hit", "excluded",
    "wall_time",
]


def worker_count():
    raw = os.environ.get("TENSOR_TOPK_THREADS", "").strip()
    if not raw:
        return 1
    count = int(raw)
    if count < 1:
        raise ValueError(f"TENSOR_TOPK_THREADS must be >= 1, got {count}")
    return count


def trial_seed(master_seed, trial, tag=0):
    """Stable per-trial integer seed derived from the master seed."""
    ss = np.random.SeedSequence([int(master_seed), int(trial), int(tag)])
    return int(ss.generate_state(1)[0])


def is_topk_hit(A, found_indices, oracle_indices, key):
    """Whether ``found_indices`` is a valid top-k index set.

    Exact set equality counts, and so does any distinct index set whose
    re-evaluated key values match the oracle set's sorted key values exactly
    (value ties may swap members either way).
    """
    found = {tuple(int(v) for v in row) for row in np.atleast_2d(found_indices)}
    target = {tuple(int(v) for v in row) for row in np.atleast_2d(oracle_indices)}
    if found == target:
        return True
    if len(found) != len(target):
        return False
    ours = np.sort(key_values(cp.elements_at(A, np.array(sorted(found))), key))
    best = np.sort(key_values(cp.elements_at(A, np.array(sorted(target))), key))
    return bool(np.array_equal(ours, best))


def _fmt_values(values):
    vals = np.atleast_1d(values)
    out = []
    for v in vals:
        if np.iscomplexobj(vals):
            out.append(f"{v.real:.17g}{v.imag:+.17g}j")
        else:
            out.append(f"{float(v):.17g}")
    return ";".join(out)


def _fmt_indices(indices):
    rows = np.atleast_2d(indices)
    return ";".join(",".join(str(int(v) + 1) for v in row) for row in rows)


def _solver_methods(k):
    methods = []
    for s in (1, 2):
        for extra in (1, 5):
            methods.append((f"ours_s{s}_K{extra}", s, extra))
    return methods


def bench_trial(master_seed, trial, dist, k, key, oracle_cap, restarts,
                max_sweeps):
    """All method rows for one benchmark trial."""
    rng = np.random.default_rng(np.random.SeedSequence([int(master_seed), int(trial)]))
    A = gen_random_cp(RandomSpec(distribution=dist), rng)
    base = {
        "trial": trial, "dist": dist, "trial_seed": trial_seed(master_seed, trial),
        "k": k, "d": A.order,
        "dims": "x".join(str(n) for n in A.dims), "rank": A.rank,
    }
    try:
        t0 = time.perf_counter()
        reference = oracle_topk(A, k, key=key, max_elems=oracle_cap)
        oracle_time = time.perf_counter() - t0
        excluded = False
    except CapacityError:
        reference = None
        oracle_time = 0.0
        excluded = True
    rows = []

    def push(method, s, extra, values, indices, wall):
        row = dict(base, method=method, extra=extra, block=s,
                   values=_fmt_values(values), indices=_fmt_indices(indices),
                   excluded=str(excluded).lower(), wall_time=f"{wall:.6f}")
        if reference is None:
            row["oracle_match"] = ""
            row["hit"] = ""
        else:
            target = {tuple(int(v) for v in r) for r in reference.indices}
            per_pos = [tuple(int(v) for v in r) in target
                       for r in np.atleast_2d(indices)]
            row["oracle_match"] = ";".join(str(b).lower() for b in per_pos)
            row["hit"] = str(is_topk_hit(A, indices, reference.indices, key)).lower()
        rows.append(row)

    for method, s, extra in _solver_methods(k):
        cfg = SolverConfig(k=k, extra=extra, block_size=s, key=key,
                           restarts=restarts, max_sweeps=max_sweeps,
                           seed=trial_seed(master_seed, trial, tag=1))
        t0 = time.perf_counter()
        res = solve(A, cfg)
        push(method, s, extra, res.values, res.indices, time.perf_counter() - t0)
    if key is OrderingKey.MAX and k == 1:
        t0 = time.perf_counter()
        val, loc = power_iteration_max(A)
        push("power_iteration", 0, 0, np.array([val]),
             np.array([loc], dtype=np.int64), time.perf_counter() - t0)
    if reference is not None:
        push("oracle", 0, 0, reference.values, reference.indices, oracle_time)
    return rows


def _bench_trial_star(args):
    return bench_trial(*args)


def run_bench(out_path, trials, dists, k, key, seed, oracle_cap=ORACLE_CAP_DEFAULT,
              restarts=5, max_sweeps=50):
    """Run the benchmark grid and write the schema-1 CSV; returns summaries."""
    tasks = [(seed, t, dist, k, key, oracle_cap, restarts, max_sweeps)
             for dist in dists for t in range(trials)]
    workers = worker_count()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_trial = list(pool.map(_bench_trial_star, tasks, chunksize=1))
    else:
        per_trial = [bench_trial(*task) for task in tasks]
    rows = [row for chunk in per_trial for row in chunk]
    summaries = summarize_bench(rows)
    write_bench_csv(out_path, rows, summaries)
    return summaries


def summarize_bench(rows):
    """Per (dist, method) accuracy over the oracle-checkable trials."""
    tally = {}
    for row in rows:
        if row["method"] == "oracle":
            continue
        bucket = tally.setdefault((row["dist"], row["method"]),
                                  {"hits": 0, "counted": 0, "excluded": 0})
        if row["excluded"] == "true":
            bucket["excluded"] += 1
        else:
            bucket["counted"] += 1
            if row["hit"] == "true":
                bucket["hits"] += 1
    out = []
    for (dist, method), b in sorted(tally.items()):
        acc = b["hits"] / b["counted"] if b["counted"] else float("nan")
        out.append({"dist": dist, "method": method, "hits": b["hits"],
                    "counted": b["counted"], "excluded": b["excluded"],
                    "accuracy": acc})
    return out


def write_bench_csv(path, rows, summaries):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("# schema=1\n")
        writer = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
        for s in summaries:
            writer.writerow({
                "trial": "summary", "dist": s["dist"], "method": s["method"],
                "values": f"{s['accuracy']:.6f}", "oracle_match":
                    f"hits={s['hits']}/{s['counted']}",
                "excluded": str(s["excluded"]),
            })


def run_func(function, d, max_size, trials, seed, blocks=(1, 2), pin_optimum=False,
             oracle_cap=ORACLE_CAP_DEFAULT, restarts=5, max_sweeps=50):
    """Grid-tensor minimization trials; returns one record per trial."""
    if function not in ("griewank", "schwefel"):
        raise ValueError(f"unknown function {function!r}")
    records = []
    for trial in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(trial)]))
        sizes = [int(rng.integers(2, max_size + 1)) for _ in range(d)]
        if function == "griewank":
            grids = griewank_grids(d, sizes, include_zero=pin_optimum)
            A = gen_griewank(grids)
        else:
            grids = schwefel_grids(d, sizes, include_optimum=pin_optimum)
            A = gen_schwefel(grids)
        rec = {"trial": trial, "function": function,
               "dims": "x".join(str(n) for n in sizes), "entries": A.size()}
        try:
            reference = oracle_topk(A, 1, key=OrderingKey.MIN, max_elems=oracle_cap)
            rec["oracle_min"] = float(reference.values[0])
        except CapacityError:
            reference = None
            rec["oracle_min"] = None
        for s in blocks:
            cfg = SolverConfig(k=1, extra=5, block_size=s, key=OrderingKey.MIN,
                               restarts=restarts, max_sweeps=max_sweeps,
                               seed=trial_seed(seed, trial, tag=2))
            res = solve(A, cfg)
            rec[f"min_s{s}"] = float(res.values[0])
            if reference is not None:
                rec[f"hit_s{s}"] = is_topk_hit(A, res.indices, reference.indices,
                                               OrderingKey.MIN)
        records.append(rec)
    return records


def run_qft_trials(d, trials, seed, k=5, extra=5, block=2, rank_cap=None,
                   oracle_cap=ORACLE_CAP_DEFAULT, keep_states=False):
    """QFT measurement trials; dense-oracle columns where the size permits."""
    layout = square_layout(d)
    records = []
    for trial in range(trials):
        res = simulate_and_measure(d, layout.modes, layout.per_mode,
                                   init_seed=trial_seed(seed, trial, tag=3),
                                   k=k, extra=extra, block_size=block,
                                   rank_cap=rank_cap)
        rec = {
            "trial": trial, "d": d, "rank": res.state.rank,
            "bitstrings": ";".join(res.bitstrings),
            "magnitudes": ";".join(f"{v:.12g}" for v in res.magnitudes),
        }
        if keep_states:
            rec["state"] = res.state
        if (1 << d) <= oracle_cap and rank_cap is None:
            rng = np.random.default_rng(trial_seed(seed, trial, tag=3))
            psi0 = statevector(random_product_state(layout, rng), layout, oracle_cap)
            psi = qft_reference(psi0)
            dense = statevector(res.state, layout, oracle_cap)
            rec["max_amp_err"] = float(np.max(np.abs(dense - psi)))
            order = np.lexsort((np.arange(psi.shape[0]), -np.abs(psi)))[:k]
            target = {format(int(n), f"0{d}b") for n in order}
            rec["top1_match"] = res.bitstrings[0] == format(int(order[0]), f"0{d}b")
            rec["topk_set_match"] = set(res.bitstrings) == target
        records.append(rec)
    return records

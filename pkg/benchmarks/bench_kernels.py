"""Compare the numba kernels against their numpy fallbacks.

Usage: python benchmarks/bench_kernels.py [--repeat N] [--data data/car.csv]

The kernel section times both implementations in one process (numba must be
importable). The pipeline section runs a short experiment twice in
subprocesses, once with XADG_DISABLE_NUMBA=1, and checks the records agree.
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from xadg import kernels
from xadg._accel import USE_NUMBA


def best_of(fn, args, repeat):
    fn(*args)  # warm-up / compile
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t)
    return min(times)


def random_graph(rng, n_args, n_attacks):
    pairs = {(int(a), int(b)) for a, b in rng.integers(0, n_args, size=(n_attacks, 2)) if a != b}
    return kernels.to_csr(n_args, pairs)


def bench_kernels(repeat):
    rng = np.random.default_rng(0)
    cases = []

    x = rng.normal(size=20000)
    y = rng.integers(0, 3, size=20000)
    order = np.argsort(x, kind="stable")
    cases.append(("numeric_split n=20000", kernels.numeric_split_loop, kernels.numeric_split_numpy,
                  (x[order], y[order].astype(np.int64), 3)))

    codes = rng.integers(0, 12, size=20000).astype(np.int64)
    cases.append(("categorical_split n=20000", kernels.categorical_split_loop, kernels.categorical_split_numpy,
                  (codes, y.astype(np.int64), 12, 3)))

    indptr, targets = random_graph(rng, 40, 120)
    active = rng.random((5000, 40)) < 0.5
    cases.append(("grounded_batch 5000x40", kernels.grounded_batch_loop, kernels.grounded_batch_numpy,
                  (active, indptr, targets)))

    print(f"{'kernel':<28}{'numba ms':>10}{'numpy ms':>10}{'speedup':>9}")
    for name, fast, slow, args in cases:
        a, b = fast(*args), slow(*args)
        same = all(np.array_equal(np.asarray(p), np.asarray(q)) for p, q in zip(np.atleast_1d(a), np.atleast_1d(b))) \
            if isinstance(a, tuple) else np.array_equal(a, b)
        t_fast = best_of(fast, args, repeat)
        t_slow = best_of(slow, args, repeat)
        flag = "" if same else "  MISMATCH"
        print(f"{name:<28}{t_fast * 1e3:>10.2f}{t_slow * 1e3:>10.2f}{t_slow / t_fast:>8.1f}x{flag}")


PIPELINE = """
import json, sys, time
from xadg import dataset, experiment
from xadg._accel import backend
ds = dataset.load_dataset(sys.argv[1], recipe=dataset.Recipe.from_file(sys.argv[2]))
cfg = experiment.ExperimentConfig(max_depth=6, runs=int(sys.argv[3]))
experiment.run_experiment(ds, experiment.ExperimentConfig(max_depth=6, runs=2))  # warm-up
t = time.perf_counter()
res = experiment.run_experiment(ds, cfg)
el = time.perf_counter() - t
print(json.dumps({"backend": backend(), "seconds": el,
                  "records": [{k: v for k, v in r.metrics().items() if k != "wall_time"} for r in res.records]}))
"""


def bench_pipeline(data, recipe, runs):
    out = {}
    for flag in ("0", "1"):
        env = dict(os.environ, XADG_DISABLE_NUMBA=flag)
        proc = subprocess.run([sys.executable, "-c", PIPELINE, data, recipe, str(runs)],
                              env=env, capture_output=True, text=True, check=True)
        res = json.loads(proc.stdout.strip().splitlines()[-1])
        out[res["backend"]] = res
    for name, res in out.items():
        print(f"pipeline ({name}): {runs} runs in {res['seconds']:.2f}s")
    if len(out) == 2:
        same = out["numba"]["records"] == out["numpy"]["records"]
        print("pipeline records identical:", same)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--data", default="data/car.csv")
    ap.add_argument("--recipe", default="data/recipes/cars.json")
    ap.add_argument("--runs", type=int, default=5)
    ap.add_argument("--skip-pipeline", action="store_true")
    args = ap.parse_args()
    if not USE_NUMBA:
        print("numba disabled or missing; loop kernels run as plain python")
    bench_kernels(args.repeat)
    if not args.skip_pipeline:
        bench_pipeline(args.data, args.recipe, args.runs)


if __name__ == "__main__":
    main()

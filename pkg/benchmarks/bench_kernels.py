"""Time the numba kernels against the pure-numpy fallback.

Micro section calls the two implementations of each primitive directly
on CSR data from benchmark models; the end-to-end section runs full
brute-force verification in subprocesses with STRATCHECK_KERNELS set,
so each backend goes through its real selection path.

Usage: python3 benchmarks/bench_kernels.py [--sizes 4,5] [--repeat 5]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from stratcheck import kernels
from stratcheck.bench import generate_benchmark
from stratcheck.model import build_global_model
from stratcheck.spec_lang import parse_spec, validate


def _model(n):
    return build_global_model(validate(parse_spec(generate_benchmark("tgc", n))))


def _time(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def micro(sizes, repeat):
    print("primitive timings (best of %d, seconds)" % repeat)
    print("%-28s %12s %12s %8s" % ("case", "numba", "numpy", "ratio"))
    for n in sizes:
        model = _model(n)
        indptr, dst = kernels.build_csr(
            model.n_states(), model.edge_src, model.edge_dst)
        starts = np.zeros(model.n_states(), dtype=bool)
        starts[model.initial] = True
        everything = np.ones(model.n_states(), dtype=bool)

        pairs = []
        if kernels.HAS_NUMBA:
            # first call compiles; time cached executions only
            kernels._gated_reach_nb(indptr, dst, starts, everything, everything)
            kernels._has_cycle_in_nb(indptr, dst, everything)
            pairs.append(("gated_reach tgc(%d)" % n,
                          lambda: kernels._gated_reach_nb(
                              indptr, dst, starts, everything, everything),
                          lambda: kernels._gated_reach_np(
                              indptr, dst, starts, everything, everything)))
            pairs.append(("has_cycle_in tgc(%d)" % n,
                          lambda: kernels._has_cycle_in_nb(indptr, dst, everything),
                          lambda: kernels._has_cycle_in_np(indptr, dst, everything)))
        for label, nb, np_ in pairs:
            t_nb = _time(nb, repeat=repeat)
            t_np = _time(np_, repeat=repeat)
            print("%-28s %12.6f %12.6f %7.1fx"
                  % (label, t_nb, t_np, t_np / t_nb if t_nb else float("inf")))


_CHILD = """
import sys, time
sys.path.insert(0, %(src)r)
from stratcheck import kernels
from stratcheck.bench import generate_benchmark
from stratcheck.model import build_global_model
from stratcheck.spec_lang import parse_spec, validate
from stratcheck.verify import verify_bruteforce

model = build_global_model(validate(parse_spec(generate_benchmark("tgc", %(n)d))))
verify_bruteforce(model)  # warm caches and JIT before timing
t0 = time.perf_counter()
for _ in range(%(repeat)d):
    res = verify_bruteforce(model)
print("%%s %%.6f %%s" %% (kernels.backend(), (time.perf_counter() - t0) / %(repeat)d, res.result))
"""


def end_to_end(sizes, repeat):
    src = os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "src"))
    print()
    print("verify_bruteforce end to end (mean of %d, seconds)" % repeat)
    print("%-28s %12s %12s %8s" % ("case", "numba", "numpy", "ratio"))
    for n in sizes:
        results = {}
        for backend in ("numba", "numpy"):
            env = dict(os.environ, STRATCHECK_KERNELS=backend)
            out = subprocess.run(
                [sys.executable, "-c",
                 _CHILD % {"src": src, "n": n, "repeat": repeat}],
                capture_output=True, text=True, env=env, check=True)
            used, seconds, verdict = out.stdout.split()
            if used != backend:
                print("  (requested %s, got %s)" % (backend, used))
            results[backend] = float(seconds)
        ratio = results["numpy"] / results["numba"] if results["numba"] else 0
        print("%-28s %12.6f %12.6f %7.1fx"
              % ("bruteforce tgc(%d)" % n, results["numba"],
                 results["numpy"], ratio))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="4,5",
                    help="comma-separated tgc sizes (default 4,5)")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    sizes = [int(x) for x in args.sizes.split(",") if x.strip()]
    if not kernels.HAS_NUMBA:
        print("numba not importable; only the numpy path exists here")
    micro(sizes, args.repeat)
    end_to_end(sizes, args.repeat)


if __name__ == "__main__":
    main()

"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--sizes 16,64,256]

Prints one line per (kernel, size, backend) with the best-of-repeat time,
then an end-to-end solve timing on the bundled fixtures.
"""

import argparse
import os
import random
import sys
import timeit

from horn_abduce import kernels
from horn_abduce.grounder import SkolemPolicy, acyclic_subtheory, ground_potential_graph
from horn_abduce.ingest import parse_instance
from horn_abduce.solver import SolveOptions, solve

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, os.pardir, "data")


def synthetic(n_atoms, n_terms, arity, n_goals, rng):
    preds = kernels.int_array(rng.randrange(4) for _ in range(n_atoms))
    args = kernels.int_array(rng.randrange(n_terms) for _ in range(n_atoms * arity))
    pa = kernels.int_array(rng.randrange(n_terms) for _ in range(n_terms // 2))
    pb = kernels.int_array(rng.randrange(n_terms) for _ in range(n_terms // 2))
    costs = kernels.long_array(rng.randrange(1, 200) for _ in range(n_atoms))
    masks = kernels.long_array(1 << rng.randrange(n_goals) for _ in range(n_atoms))
    fixed = kernels.long_array()
    adj = bytearray(n_terms * n_terms)
    for _ in range(n_terms * 2):
        a, b = rng.randrange(n_terms), rng.randrange(n_terms)
        adj[a * n_terms + b] = adj[b * n_terms + a] = 1
    return preds, args, pa, pb, costs, masks, fixed, adj


def bench_kernels(sizes, repeat, rng):
    mods = kernels.backends()
    rows = []
    for n in sizes:
        preds, args, pa, pb, costs, masks, fixed, adj = synthetic(n, max(4, n // 2), 2, 8, rng)
        nt = max(4, n // 2)
        labels = kernels.int_array(kernels.union_labels(nt, pa, pb, mod=mods["python"]))
        signed_adj = memoryview(adj).cast("b")
        cases = {
            "union_labels": lambda m: kernels.union_labels(nt, pa, pb, mod=m),
            "evaluate_wa": lambda m: kernels.evaluate(kernels.OBJ_WA, 8, preds, args, 2, labels, costs, masks, fixed, mod=m),
            "evaluate_coh": lambda m: kernels.evaluate(kernels.OBJ_COH, 8, preds, args, 2, labels, costs, masks, fixed, mod=m),
            "transitivity": lambda m: kernels.transitivity_violations(nt, signed_adj, mod=m),
        }
        for name, fn in cases.items():
            results = {}
            for backend, mod in mods.items():
                number = 50
                t = min(timeit.repeat(lambda: fn(mod), number=number, repeat=repeat)) / number
                results[backend] = t
            rows.append((name, n, results))
    return rows


def bench_solve(repeat):
    mods = kernels.backends()
    rows = []
    for name in ("example1.kb", "accel/shop.kb", "accel/rob.kb", "accel/dine.kb"):
        with open(os.path.join(DATA, name)) as fh:
            inst = acyclic_subtheory(parse_instance(fh.read()))
        graph = ground_potential_graph(inst, SkolemPolicy.parse("inf"))
        for obj in ("card", "coh", "wa"):
            results = {}
            for backend, mod in mods.items():
                t = min(timeit.repeat(lambda: solve(inst, graph, obj, SolveOptions(), kernel_mod=mod),
                                      number=1, repeat=repeat))
                results[backend] = t
            rows.append(("solve %s %s" % (name, obj), len(graph.pot), results))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sizes", default="16,64,256")
    ap.add_argument("--seed", type=int, default=int(os.environ.get("HORN_ABDUCE_SEED", "0")))
    args = ap.parse_args(argv)
    rng = random.Random(args.seed)
    if "cython" not in kernels.backends():
        print("compiled backend not built; only the Python timings are shown", file=sys.stderr)
    rows = bench_kernels([int(s) for s in args.sizes.split(",")], args.repeat, rng) + bench_solve(args.repeat)
    print("%-34s %6s %12s %12s %8s" % ("case", "size", "python", "cython", "speedup"))
    for name, n, res in rows:
        py = res["python"]
        cy = res.get("cython")
        speed = "%.1fx" % (py / cy) if cy else "-"
        print("%-34s %6d %10.1fus %10sus %8s" % (name, n, py * 1e6, "%.1f" % (cy * 1e6) if cy else "-", speed))


if __name__ == "__main__":
    main()

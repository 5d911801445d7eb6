"""Compare the compiled and NumPy kernel backends.

    python benchmarks/bench_core.py [--repeat 3] [--quick]

Reports the best wall time per workload and the speedup of the compiled
core. Both backends consume the same random draws, so each workload also
checks that they return identical results.
"""
import argparse
import time

import numpy as np

from cmthermo import _backend
from cmthermo.bath import BathModel
from cmthermo.fisher import fi_rate_exact
from cmthermo.spectrum import EnergySpectrum, TwoLevelAnsatz
from cmthermo.trajectory import simulate_coarse_stats, simulate_gillespie, simulate_stats


def best_of(fn, repeat):
    out, best = None, float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def workloads(quick):
    scale = 0.1 if quick else 1.0
    fermi = BathModel.fermionic()
    ansatz = TwoLevelAnsatz(64, 12, 2.97)
    spec = EnergySpectrum(np.random.default_rng(0).uniform(0, 6, 32))
    disordered = EnergySpectrum(np.random.default_rng(1).normal(0, 2, int(2000 * scale ** 0.5)))
    return [
        ("gillespie N=32", lambda b: simulate_gillespie(spec, fermi, 1.0, 2e4 * scale, 1, backend=b),
         lambda a, c: np.array_equal(a.times, c.times) and np.array_equal(a.states, c.states)),
        ("streamed stats N=64", lambda b: simulate_stats(ansatz.to_spectrum(), fermi, 1.0, 2e5 * scale, 1,
                                                         backend=b), lambda a, c: a == c),
        ("two-state chain", lambda b: simulate_coarse_stats(ansatz, fermi, 1.0, 1e6 * scale, 1, backend=b),
         lambda a, c: a == c),
        (f"FI pair sum N={disordered.n}", lambda b: fi_rate_exact(disordered, fermi, backend=b),
         lambda a, c: abs(a - c) <= 1e-12 * abs(a)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="shrink the workloads tenfold")
    args = ap.parse_args()
    names = _backend.available()
    if "compiled" not in names:
        print("compiled core not built; only the python backend is available")
    print(f"{'workload':<24}{'python [s]':>12}{'compiled [s]':>14}{'speedup':>10}  same")
    for label, run, same in workloads(args.quick):
        tp, rp = best_of(lambda: run("python"), args.repeat)
        if "compiled" in names:
            tc, rc = best_of(lambda: run("compiled"), args.repeat)
            print(f"{label:<24}{tp:>12.4f}{tc:>14.4f}{tp / tc:>10.1f}  {same(rp, rc)}")
        else:
            print(f"{label:<24}{tp:>12.4f}{'-':>14}{'-':>10}  -")


if __name__ == "__main__":
    main()

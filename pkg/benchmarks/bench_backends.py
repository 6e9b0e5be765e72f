#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

First checks both backends produce identical outputs on a shared workload,
then measures per-backend throughput (the numpy fallback runs a smaller slot
count; rates are comparable).  Run:  python benchmarks/bench_backends.py
"""

import time

import numpy as np

from slotcsma import backends, cycle_graph, path_graph
from slotcsma.chain import build_protocol_chain, spectrum_reversibilization, stationary

SIM_GRAPH = path_graph(5)
SIM_LAM = np.array([0.25, 0.15, 0.1, 0.15, 0.25])
CHAIN_GRAPH = cycle_graph(5)
CHAIN_W = np.array([2.0, 3.0, 1.5, 2.5, 4.0])


def run_simulate(kern, slots):
    indptr, indices = SIM_GRAPH.adjacency_csr
    return kern.simulate(indptr, indices, SIM_LAM, 0, slots, 42, 0, 100)

def run_schedule_chain(kern, slots):
    indptr, indices = CHAIN_GRAPH.adjacency_csr
    return kern.schedule_chain(indptr, indices, CHAIN_W, slots, 42)


def conductance_problem():
    g = path_graph(4)  # 8 states, 254 subsets per scan
    w = np.linspace(1.5, 4.0, g.n)
    tm = build_protocol_chain(g, w)
    pi = stationary(tm)
    r = spectrum_reversibilization(tm, pi).reversibilization
    return pi[:, None] * r.p, pi


def check_outputs_match(numba_k, numpy_k):
    slots = 20_000
    for runner in (run_simulate, run_schedule_chain):
        for a, b in zip(runner(numba_k, slots), runner(numpy_k, slots)):
            a, b = np.asarray(a), np.asarray(b)
            assert np.array_equal(a, b), f"{runner.__name__}: outputs differ"
    flow, pi = conductance_problem()
    phi_a, mask_a = numba_k.conductance_scan(flow, pi)
    phi_b, mask_b = numpy_k.conductance_scan(flow, pi)
    assert mask_a == mask_b and abs(phi_a - phi_b) < 1e-12
    print("outputs identical across backends\n")


def rate(fn, work, repeats=3):
    best = min(
        (lambda t0: (fn(), time.perf_counter() - t0)[1])(time.perf_counter())
        for _ in range(repeats)
    )
    return work / best


def main():
    numba_k = backends.kernels("numba")
    numpy_k = backends.kernels("numpy")

    # warm the jit so compile time is not measured
    run_simulate(numba_k, 1000)
    run_schedule_chain(numba_k, 1000)
    flow, pi = conductance_problem()
    numba_k.conductance_scan(flow, pi)

    check_outputs_match(numba_k, numpy_k)

    rows = []
    for name, runner, unit in [
        ("simulate (5-path)", run_simulate, "slots/s"),
        ("schedule chain (5-cycle)", run_schedule_chain, "slots/s"),
    ]:
        r_nb = rate(lambda: runner(numba_k, 500_000), 500_000)
        r_np = rate(lambda: runner(numpy_k, 20_000), 20_000)
        rows.append((name, r_nb, r_np, unit))

    r_nb = rate(lambda: [numba_k.conductance_scan(flow, pi)
                         for _ in range(2000)], 2000)
    r_np = rate(lambda: [numpy_k.conductance_scan(flow, pi)
                         for _ in range(2000)], 2000)
    rows.append(("conductance scan (8 states)", r_nb, r_np, "scans/s"))

    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'numba':>16}  {'numpy':>16}  {'speedup':>8}")
    for name, r_nb, r_np, unit in rows:
        print(f"{name:<{width}}  {r_nb:>8.3g} {unit:>7}"
              f"  {r_np:>8.3g} {unit:>7}  {r_nb / r_np:>7.1f}x")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Compare the compiled kernel backend against the pure-Python fallback.

Times the hit-and-run chain, ball-sampling phase and batch PSD
classification on a few representative families, and verifies that both
backends take identical accept/reject decisions from the same stream.

Run:  python benchmarks/benchmark_backends.py [--steps N]
"""

import argparse
import time

import numpy as np

from qvolume import _backend, _pykernels
from qvolume.basis import make_family
from qvolume.rng import RngStream


def time_chain(kernel, family, steps, seed):
    stream = RngStream(seed)
    t0 = time.perf_counter()
    out, end, diag = kernel.run_chain(
        family.scaled_generators, family.pt_generators,
        family.outer_radius_coord, steps, 1, 1e-10, stream,
        np.zeros(family.d))
    dt = time.perf_counter() - t0
    return dt, int(np.asarray(out).sum()), diag


def time_muller(kernel, family, samples, seed):
    stream = RngStream(seed)
    t0 = time.perf_counter()
    n_states, n_ppt = kernel.muller_phase(
        family.scaled_generators, family.pt_generators,
        0.5 * family.outer_radius_coord, samples, 1, 1e-10, stream)
    dt = time.perf_counter() - t0
    return dt, n_states, n_ppt


def time_psd_bits(kernel, family, count, seed):
    rng = np.random.default_rng(seed)
    coords = 0.25 * rng.standard_normal((count, family.d))
    t0 = time.perf_counter()
    bits = np.asarray(kernel.psd_bits(family.scaled_generators, coords,
                                      1e-10))
    dt = time.perf_counter() - t0
    return dt, int(bits.sum())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=50_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if _backend.BACKEND == "python":
        print("note: compiled backend unavailable, timing the fallback twice")
    kernels = [(_backend.BACKEND, _backend), ("python", _pykernels)]

    for fam_name in ("bell_diagonal", "two_qubit", "qubit_qutrit"):
        family = make_family(fam_name)
        print(f"\n== {fam_name} (n={family.n}, d={family.d}) ==")

        results = {}
        for label, kernel in kernels:
            dt, hits, diag = time_chain(kernel, family, args.steps, args.seed)
            results[label] = (hits, diag)
            print(f"  chain      [{label:>6}]: {args.steps / dt:>12,.0f} "
                  f"steps/s   ({dt:.2f}s, {hits} PPT hits)")
        ref = list(results.values())
        assert ref[0] == ref[1], "backends disagree on chain decisions"

        for label, kernel in kernels:
            dt, n_states, n_ppt = time_muller(kernel, family, args.steps,
                                              args.seed)
            print(f"  ball       [{label:>6}]: {args.steps / dt:>12,.0f} "
                  f"samples/s ({n_states} states, {n_ppt} PPT)")

        for label, kernel in kernels:
            dt, hits = time_psd_bits(kernel, family, args.steps, args.seed)
            print(f"  psd batch  [{label:>6}]: {args.steps / dt:>12,.0f} "
                  f"matrices/s ({hits} PSD)")


if __name__ == "__main__":
    main()

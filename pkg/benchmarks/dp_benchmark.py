#!/usr/bin/env python3
"""Benchmark the compiled DP kernel against the numpy fallback.

Builds the paper-scale straightaway lattice, times repeated best-response
solves on both backends and verifies they return identical value tables
and identical paths.

Run: python3 benchmarks/dp_benchmark.py [repeats]
"""

import sys
import time

import numpy as np

from trackduel import dp
from trackduel.config import builtin_scenario
from trackduel.kinematics import KinematicsConfig, VehicleState
from trackduel.lattice import Lattice


def build_instance():
    sc = builtin_scenario("straightaway")
    kin = KinematicsConfig(v_max=12.0, **sc.kin_base)
    start = VehicleState(px=-2.5, py=1.0, theta=0.0, v=12.0)
    lat = Lattice(sc.track, kin, start, sc.lattice)
    T = sc.lattice.horizon
    # a rival cruising ahead on the other lane
    opp = np.stack(
        [np.linspace(0.0, 0.0 + 10.0 * kin.tau_s * T, T + 1), np.full(T + 1, -1.0)],
        axis=1,
    )
    estar = np.full(T, -1.0)  # forces a full lane change plus avoidance
    return lat, estar, opp


def time_backend(lat, estar, opp, backend, repeats):
    node_ok = lat.node_mask(opp)
    args = [
        lat.P, np.ascontiguousarray(lat.evals), np.asarray(estar, float),
        lat.umid, node_ok, lat.wk, lat.kin.tau_s, lat.kin.v_max,
        lat.params.w1, lat.cos_gamma, lat.dist_cap,
        lat.params.horizon, lat.K, lat.m_anchor,
    ]
    shape = (lat.params.horizon + 1, lat.S, lat.L)
    V = np.full(shape, np.inf)
    dp.value_table(*args, V, backend=backend)  # warm-up
    best = np.inf
    for _ in range(repeats):
        V[:] = np.inf
        t0 = time.perf_counter()
        dp.value_table(*args, V, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, V


def main():
    repeats = int(sys.argv[1]) if len(sys.argv) > 1 else 5
    lat, estar, opp = build_instance()
    print(f"lattice: {lat.S} stations x {lat.L} lateral levels, "
          f"T={lat.params.horizon}, K={lat.K}")

    results = {}
    for backend in ("python",) + (("cython",) if dp.HAVE_EXTENSION else ()):
        secs, V = time_backend(lat, estar, opp, backend, repeats)
        results[backend] = (secs, V)
        print(f"{backend:>7s}: {secs * 1e3:8.2f} ms per value table (best of {repeats})")

    if len(results) == 2:
        v_py, v_cy = results["python"][1], results["cython"][1]
        identical = np.array_equal(v_py, v_cy)
        print(f"tables identical: {identical}")
        p_py, _ = lat.best_response(estar, opp, backend="python")
        p_cy, _ = lat.best_response(estar, opp, backend="cython")
        print(f"paths identical:  {p_py.nodes == p_cy.nodes}")
        speedup = results["python"][0] / results["cython"][0]
        print(f"speedup: {speedup:.1f}x")
        if not identical:
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Benchmark the compiled integrator kernels against the pure-Python fallback.

Runs a fixed workload (long oscillator integrations plus a parameter-grid
scan) twice: once in the current process (compiled kernels, unless the
environment already disables them) and once in a subprocess with
LIENARD_LAB_DISABLE_JIT=1.

Usage: python3 benchmarks/bench_integrator.py [--repeat N]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def workload():
    from lienard_lab import models, sim, sweep

    t_report = {}

    # warm-up: trigger any compilation outside the timed region
    field, _, _ = models.build("vanderpol", epsilon=0.1, a=0.5)
    sim.integrate(field, 1.0, 0.0, sim.IntegratorConfig(t_end=1.0))

    t0 = time.perf_counter()
    for eps in (0.05, 0.1, 0.5):
        field, _, _ = models.build("vanderpol", epsilon=eps, a=0.5)
        sim.integrate(field, 1.0, 0.0, sim.IntegratorConfig(t_end=500.0))
    t_report["vanderpol_integrate_3x500"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    field, _, closed = models.build("brusselator", b=2.5)
    x, y = closed.fixed_point
    sim.detect_cycle(field, closed.fixed_point, [(x, y + 0.08), (x, y + 0.5)])
    t_report["brusselator_detect_cycle"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    sweep.grid_scan(
        "glycolytic", {}, sweep.Axis("a", 0.0, 0.3, 200),
        sweep.Axis("b", 0.2, 1.2, 200),
    )
    t_report["glycolytic_grid_200x200"] = time.perf_counter() - t0

    t_report["total"] = sum(t_report.values())
    return t_report


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3,
                        help="repetitions per mode; best time is reported")
    parser.add_argument("--emit-json", action="store_true",
                        help="print one JSON result line (used by subprocess)")
    args = parser.parse_args()

    best = None
    for _ in range(args.repeat):
        rep = workload()
        if best is None or rep["total"] < best["total"]:
            best = rep

    if args.emit_json:
        print(json.dumps(best))
        return

    mode = "fallback" if os.environ.get("LIENARD_LAB_DISABLE_JIT") else "compiled"
    print(f"mode: {mode}")
    for key, val in best.items():
        print(f"  {key:32s} {val:8.3f} s")

    if mode == "compiled":
        env = dict(os.environ, LIENARD_LAB_DISABLE_JIT="1")
        out = subprocess.run(
            [sys.executable, os.path.abspath(__file__),
             "--repeat", str(args.repeat), "--emit-json"],
            env=env, capture_output=True, text=True, check=True,
        )
        fallback = json.loads(out.stdout.strip().splitlines()[-1])
        print("mode: fallback (LIENARD_LAB_DISABLE_JIT=1)")
        for key, val in fallback.items():
            print(f"  {key:32s} {val:8.3f} s")
        print(f"speedup (total): {fallback['total'] / best['total']:.1f}x")


if __name__ == "__main__":
    main()

"""Benchmark the jitted kernels against the pure-numpy fallback.

The NVPOL_NUMBA flag is read at import time, so the two backends cannot
coexist in one interpreter.  This script therefore re-invokes itself as
a worker subprocess per backend, times each kernel on representative
inputs, and prints a comparison table.  It also cross-checks that both
backends agree to machine rounding on every output.

Usage:  python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def build_inputs():
    import numpy as np
    from numpy.polynomial.hermite import hermgauss
    from numpy.polynomial.legendre import leggauss

    from nvpol.model import (
        DissipationParams,
        NVSystemParams,
        build_collapse_ops,
        build_hamiltonian,
    )

    p = NVSystemParams(b_field=(5.0, 0.0, 499.6), e_es=30.0)
    d = DissipationParams(pump_leak_ratio=0.12)
    ham = build_hamiltonian(p).astype(np.complex128)
    pairs = build_collapse_ops(d, p.dims)
    cops = np.stack([np.asarray(op, dtype=np.complex128) for op, _r in pairs])
    rates = np.array([r for _op, r in pairs])

    freq = np.linspace(1300.0, 1500.0, 2001)
    lor_params = np.array(
        [0.005, 1385.0, 6.0, 0.036, 1400.0, 6.0, 0.002, 1415.0, 6.0, 0.002]
    )

    h_nodes, h_weights = hermgauss(201)
    e_nodes = np.sqrt(2.0) * 50.0 * h_nodes
    h_weights = h_weights / np.sqrt(np.pi)

    l_nodes, l_weights = leggauss(201)
    theta = 0.5 * np.pi * l_nodes
    t_weights = l_weights * 0.5

    return {
        "liouvillian_dense": (ham, cops, rates),
        "multi_lorentzian": (lor_params, freq),
        "multi_lorentzian_jac": (lor_params, freq),
        "esodmr_hermite": (freq, 1400.0, 2.5, e_nodes, h_weights),
        "esodmr_tan": (freq, 1400.0, 2.5, 0.0, 50.0, theta, t_weights),
    }


def run_worker(repeat):
    """Time every kernel with the backend selected by NVPOL_NUMBA."""
    import numpy as np

    from nvpol import NUMBA_ENABLED
    from nvpol import _kernels

    inputs = build_inputs()
    report = {"numba": NUMBA_ENABLED, "kernels": {}}
    for name, args in inputs.items():
        fn = getattr(_kernels, name)
        out = fn(*args)  # warm up: first jitted call compiles
        best = float("inf")
        for _ in range(repeat):
            n_calls = 0
            t0 = time.perf_counter()
            while True:
                fn(*args)
                n_calls += 1
                dt = time.perf_counter() - t0
                if dt > 0.2:
                    break
            best = min(best, dt / n_calls)
        out = np.ascontiguousarray(out)
        report["kernels"][name] = {
            "seconds": best,
            "shape": list(out.shape),
            # checksum of the flattened output for cross-backend comparison
            "sample": [float(abs(out).max()), float(out.real.sum())],
        }
    json.dump(report, sys.stdout)


def run_orchestrator(repeat):
    results = {}
    for flag in ("0", "1"):
        env = dict(os.environ, NVPOL_NUMBA=flag)
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--worker", "--repeat", str(repeat)],
            env=env,
            capture_output=True,
            text=True,
            check=True,
        )
        results[flag] = json.loads(proc.stdout)
    if results["1"]["numba"] is not True:
        print("warning: numba backend unavailable, comparing numpy to itself")

    print(f"{'kernel':<22} {'numpy':>12} {'numba':>12} {'speedup':>9}   agreement")
    print("-" * 72)
    for name in results["0"]["kernels"]:
        t_np = results["0"]["kernels"][name]["seconds"]
        t_nb = results["1"]["kernels"][name]["seconds"]
        s_np = results["0"]["kernels"][name]["sample"]
        s_nb = results["1"]["kernels"][name]["sample"]
        scale = max(abs(s_np[0]), 1e-300)
        rel = max(abs(a - b) / scale for a, b in zip(s_np, s_nb))
        ok = "ok" if rel < 1e-12 else f"DISAGREE ({rel:.1e})"
        print(
            f"{name:<22} {t_np * 1e6:>10.1f}us {t_nb * 1e6:>10.1f}us "
            f"{t_np / t_nb:>8.1f}x   {ok}"
        )
    return 0


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    parser.add_argument("--repeat", type=int, default=5, help="timing repeats per kernel")
    args = parser.parse_args()
    if args.worker:
        run_worker(args.repeat)
        return 0
    return run_orchestrator(args.repeat)


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Benchmark the compiled pointwise kernels against the numpy fallback.

Times the three hot kernels on a production-sized coefficient tensor, then a
full split-step evolution with each backend driving the solver (the backend
is selected at import, so the end-to-end comparison runs in subprocesses).

Usage: python benchmarks/bench_kernels.py [points_per_axis] [torus_modes]
"""

import os
import subprocess
import sys
import time

import numpy as np

from prodnls._kernels import _fallback

try:
    from prodnls._kernels import _accel
except ImportError:
    _accel = None


def time_call(fn, *args, repeat=20):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(n_pts, modes):
    shape = (n_pts, n_pts, modes)
    rng = np.random.default_rng(0)
    u = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)).astype(np.complex128)
    lam = rng.standard_normal(shape) ** 2
    chi = rng.standard_normal(shape) ** 2

    backends = [("python", _fallback)] + ([("c", _accel)] if _accel else [])
    rows = []
    for label, mod in backends:
        rows.append(
            (
                label,
                time_call(mod.abs2, u),
                time_call(mod.apply_phase, u, lam, 0.3),
                time_call(mod.rotate_by_intensity, u, chi, 0.02),
            )
        )
    print(f"\npointwise kernels on {shape} complex128 (best of 20, seconds)")
    print(f"{'backend':<8} {'abs2':>12} {'apply_phase':>12} {'rotate':>12}")
    for label, a, b, c in rows:
        print(f"{label:<8} {a:>12.6f} {b:>12.6f} {c:>12.6f}")
    if len(rows) == 2:
        print(
            f"{'speedup':<8} {rows[0][1] / rows[1][1]:>11.2f}x "
            f"{rows[0][2] / rows[1][2]:>11.2f}x {rows[0][3] / rows[1][3]:>11.2f}x"
        )


SOLVER_SNIPPET = """
import time
import numpy as np
import prodnls
from prodnls.grid import make_grid
from prodnls.sobolev import SobolevSpec, random_small_data
from prodnls.evolve import EvolutionConfig, evolve

grid = make_grid(2, 1, 32 * np.pi, {n_pts}, {modes})
f = random_small_data(grid, SobolevSpec(0, 0.6), 0.5, seed=1, band_limit=1.0)
cfg = EvolutionConfig(kappa=1, final_time=1.0, dt=1 / 64, stride=64)
evolve(f, cfg)  # warm caches
t0 = time.perf_counter()
evolve(f, cfg)
print(f"{{prodnls.kernel_backend}} {{time.perf_counter() - t0:.4f}}")
"""


def bench_solver(n_pts, modes):
    print(f"\nfull split-step run, 64 steps on {n_pts}x{n_pts}x{modes} (seconds)")
    for backend in ("python", "c"):
        env = dict(os.environ, PRODNLS_KERNELS=backend)
        out = subprocess.run(
            [sys.executable, "-c", SOLVER_SNIPPET.format(n_pts=n_pts, modes=modes)],
            capture_output=True,
            text=True,
            env=env,
        )
        if out.returncode:
            print(f"{backend:<8} unavailable ({out.stderr.strip().splitlines()[-1]})")
        else:
            label, seconds = out.stdout.split()
            print(f"{label:<8} {float(seconds):>12.4f}")


if __name__ == "__main__":
    n_pts = int(sys.argv[1]) if len(sys.argv) > 1 else 128
    modes = int(sys.argv[2]) if len(sys.argv) > 2 else 8
    bench_kernels(n_pts, modes)
    bench_solver(n_pts, modes)

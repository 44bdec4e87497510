"""Benchmark the steady-state scan kernel: compiled extension vs numpy.

Times a realistic workload (pump-probe scan grids times the 21-node
diffusion quadrature, each point a 16x16 complex linear solve) on both
backends and checks they agree.

Run:  python3 benchmarks/bench_steady_state.py [n_points]
"""

import sys
import time

import numpy as np

from tcspin.fitkit import build_system
from tcspin.lindblad import HAVE_KERNEL, set_backend
from tcspin.lindblad.model import build_generator_parts, LaserPair
from tcspin.lineshape import DriveField
from tcspin.lindblad import solver


def workload(n_points):
    system = build_system(
        {
            "b0": 0.0881,
            "g_h": 2.76,
            "gamma_sd": 400.0,
            "omega1": 10.0,
            "omega2": 14.0,
            "r": 1.2,
            "p": 2.9,
            "gamma": 127.5,
        }
    )
    det = system.transition_detunings()
    lasers = LaserPair(
        laser1=DriveField(rabi=10.0, detuning=det["A"]),
        laser2=DriveField(rabi=14.0, detuning=0.0),
        assignment=(2, 1),
    )
    g0, d1diag, d2diag = build_generator_parts(system, lasers)
    shifts, _ = system.diffusion.nodes_weights()
    probe = np.linspace(-3500.0, 3500.0, n_points)
    d1 = np.broadcast_to(det["A"] - shifts[None, :], (n_points, shifts.size)).copy()
    d2 = probe[:, None] - shifts[None, :]
    return g0, d1diag, d2diag, d1, d2


def run(backend, args, repeats=3):
    set_backend(backend)
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = solver.fluorescence_batch(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    n_points = int(sys.argv[1]) if len(sys.argv) > 1 else 400
    args = workload(n_points)
    n_solves = args[3].size
    print(f"{n_solves} steady-state solves (16x16 complex) per run")

    t_np, out_np = run("numpy", args)
    print(f"numpy backend   : {t_np:.4f} s  ({n_solves / t_np:,.0f} solves/s)")

    if HAVE_KERNEL:
        t_k, out_k = run("kernel", args)
        print(f"compiled kernel : {t_k:.4f} s  ({n_solves / t_k:,.0f} solves/s)")
        print(f"speedup         : {t_np / t_k:.1f}x")
        print(f"max |difference|: {np.max(np.abs(out_k - out_np)):.3g}")
    else:
        print("compiled kernel : not available (pure-python install)")
    set_backend(None)


if __name__ == "__main__":
    main()

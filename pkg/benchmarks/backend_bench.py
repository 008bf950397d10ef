"""Time the numba step-loop kernel against the pure-numpy fallback.

Runs the same protected ensemble on both backends (after a warmup pass
so JIT compilation is not billed to numba) and reports wall time,
throughput, and the largest deviation between the two mean-fidelity
curves.  Jump selections should agree exactly; the floating-point
curves agree to roughly 1e-10 because the reductions differ.
"""

import argparse
import time

import numpy as np

import jumpqec as jq
from jumpqec._kernels import NUMBA_AVAILABLE

SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)


def build_config(args):
    channels = tuple(
        jq.ErrorChannel(
            qubit=q, operator=SIGMA_MINUS, gamma=0.3, phi=0.0, label=f"relax{q}"
        )
        for q in range(args.qubits)
    )
    return jq.SimConfig(
        n=args.qubits,
        channels=channels,
        dt=args.dt,
        duration=args.duration,
        seed=args.seed,
        trajectories=args.trajectories,
    )


def time_backend(cfg, backend):
    started = time.perf_counter()
    result = jq.run_ensemble(cfg, backend=backend, collect_density=False)
    return time.perf_counter() - started, result.record


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--qubits", type=int, default=4)
    parser.add_argument("--trajectories", type=int, default=40)
    parser.add_argument("--dt", type=float, default=1e-3)
    parser.add_argument("--duration", type=float, default=3.0)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    cfg = build_config(args)
    total_steps = cfg.steps * cfg.trajectories
    print(
        f"config: n={cfg.n}, {len(cfg.channels)} channels, "
        f"{cfg.trajectories} trajectories x {cfg.steps} steps"
    )

    backends = ["numpy"]
    if NUMBA_AVAILABLE:
        warmup = jq.SimConfig(
            n=cfg.n, channels=cfg.channels, dt=cfg.dt, duration=cfg.dt,
            seed=cfg.seed,
        )
        jq.run_ensemble(warmup, backend="numba", collect_density=False)
        backends.append("numba")
    else:
        print("numba not importable; timing the numpy backend only")

    records = {}
    for backend in backends:
        elapsed, record = time_backend(cfg, backend)
        records[backend] = (elapsed, record)
        print(
            f"{backend:>6}: {elapsed:8.3f} s  "
            f"({total_steps / elapsed:,.0f} steps/s)"
        )

    if len(records) == 2:
        t_np, rec_np = records["numpy"]
        t_nb, rec_nb = records["numba"]
        deviation = np.max(np.abs(rec_np.mean_fidelity - rec_nb.mean_fidelity))
        same_jumps = np.array_equal(rec_np.jump_counts, rec_nb.jump_counts)
        print(f"speedup: {t_np / t_nb:.2f}x")
        print(f"max mean-fidelity deviation: {deviation:.3e}")
        print(f"identical jump counts: {same_jumps}")


if __name__ == "__main__":
    main()

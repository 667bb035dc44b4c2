"""Timing comparison of the compiled and numpy forward kernels.

Run as: python3 benchmarks/bench_forward.py
"""
import time

import numpy as np

from haplopop import kernels


def make_inputs(rng, n, L):
    A = np.ascontiguousarray(rng.integers(0, 2, (L, n)), dtype=np.uint8)
    h = np.ascontiguousarray(rng.integers(0, 2, L), dtype=np.uint8)
    rho = rng.uniform(0.0, 0.3, L - 1)
    w = np.full(n, 1.0 / n)
    return A, h, rho, w


def time_fn(fn, args, budget=2.0):
    fn(*args)
    reps, elapsed = 0, 0.0
    start = time.perf_counter()
    while elapsed < budget:
        fn(*args)
        reps += 1
        elapsed = time.perf_counter() - start
    return elapsed / reps


def main():
    rng = np.random.default_rng(0)
    print(f"compiled kernel available: {kernels.HAVE_COMPILED}")
    print(f"{'panel':>14} {'numpy':>12} {'compiled':>12} {'speedup':>8}")
    for n, L in [(20, 100), (60, 250), (120, 500), (240, 1000)]:
        A, h, rho, w = make_inputs(rng, n, L)
        args = (A, h, rho, w, 0.97, 0.03)
        t_py = time_fn(kernels.forward_loglik_py, args)
        if kernels.HAVE_COMPILED:
            t_c = time_fn(kernels.forward_loglik, args)
            ratio = f"{t_py / t_c:7.1f}x"
            t_c_text = f"{t_c * 1e6:9.1f} us"
        else:
            ratio, t_c_text = "      -", "          -"
        print(f"{n:>5} x {L:>6} {t_py * 1e6:9.1f} us {t_c_text} {ratio}")

    # one classifier-shaped leave-one-out evaluation
    n, L = 120, 500
    A, h, rho, w = make_inputs(rng, n, L)
    z = rng.integers(1, 4, n)
    scaled_delta = 4.0 * 15000.0 * np.diff(np.linspace(0, 1e-3, L))
    args = (A, 5, z, 2, 1 / 47.9, 0.1 / 47.9, scaled_delta, 1 / 47.9, 0.97, 0.03)
    t_py = time_fn(kernels.leave_one_out_loglik_py, args)
    line = f"leave-one-out {t_py * 1e6:9.1f} us"
    if kernels.HAVE_COMPILED:
        t_c = time_fn(kernels.leave_one_out_loglik, args)
        line += f" {t_c * 1e6:9.1f} us {t_py / t_c:7.1f}x"
    print(line)


if __name__ == "__main__":
    main()

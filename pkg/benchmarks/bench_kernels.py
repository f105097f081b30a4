"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--m 127] [--steps 2000] [--repeat 3]

Prints microseconds per step (or per solve) for each backend and the speedup.
"""

import argparse
import timeit

import numpy as np

from scsf import kernels
from scsf.noise import NoiseSpec
from scsf.spectral import basis_matrix, random_field


def cases(m, n, steps):
    rng = np.random.default_rng(0)
    basis = np.ascontiguousarray(basis_matrix(m, n))
    sigma = NoiseSpec.power_law(0.1, 2.0, n).sigma
    dt = 1e-5
    xi = np.ascontiguousarray(rng.standard_normal((steps, n)) * sigma * np.sqrt(dt))
    u0 = random_field(m, rng, 8)
    x = random_field(m, rng, 8, scale=3.0)
    h = 1.0 / (m + 1)
    dt_exp = h * h / np.sin(0.5 * np.pi * n * h) ** 2 * 0.5

    def be(mod):
        u = u0.copy()
        mod.advance_backward_euler(u, xi, basis, dt, 1e-12, 100)

    def ex(mod):
        u = u0.copy()
        mod.advance_explicit(u, xi, basis, dt_exp, n < m)

    def rs(mod):
        for _ in range(steps // 20):
            w = x.copy()
            mod.resolvent_solve(x, 0.01, w, 1e-12, 100)

    return {
        "backward_euler step": (be, steps),
        "explicit step": (ex, steps),
        "resolvent solve (alpha=0.01)": (rs, steps // 20),
    }


def main(argv=None):
    p = argparse.ArgumentParser()
    p.add_argument("--m", type=int, default=127)
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)
    backends = kernels.backends()
    if "compiled" not in backends:
        print("compiled extension not built; only the fallback is available")
    print(f"m={args.m} n_modes={args.n} steps={args.steps}")
    print(f"{'kernel':32s}" + "".join(f"{b:>14s}" for b in backends) + f"{'speedup':>10s}")
    for name, (fn, units) in cases(args.m, args.n, args.steps).items():
        per = {}
        for b, mod in backends.items():
            best = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
            per[b] = best / units * 1e6
        row = f"{name:32s}" + "".join(f"{per[b]:12.2f}us" for b in backends)
        if len(per) == 2:
            row += f"{per['python'] / per['compiled']:9.1f}x"
        print(row)


if __name__ == "__main__":
    main()

"""Time the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--n 200000] [--repeat 5]

Both paths are called directly, so the environment flag is not needed.
The first numba call (compilation, or loading the on-disk cache) is
excluded from the timings.
"""
import argparse
import timeit

import numpy as np

from almostosc import _kernels
from almostosc.equation import EquationSpec
from almostosc.seqlang import eval_seq_array


def simulate_args(n):
    # a float-stable instance: solutions decay, nothing overflows
    spec = EquationSpec("4 + 1/n", "1/2", "1/n^2", "1/4", 2, "1", "3")
    ns = np.arange(1, n + 3)
    r, q, e = (eval_seq_array(s, ns) for s in (spec.r, spec.q, spec.e))
    return (r, q, e, 0.25, 2, 1.0, 3.0, np.array([0.5, 0.4, 0.3, 0.2]))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    signs = rng.integers(-1, 2, size=args.n).astype(np.int64)
    terms = rng.standard_normal(args.n)
    sim = simulate_args(args.n)

    cases = [
        ("simulate", _kernels.simulate_numba, _kernels.simulate_numpy, sim),
        ("sign_changes", _kernels.sign_changes_numba, _kernels.sign_changes_numpy, (signs,)),
        ("double_prefix", _kernels.double_prefix_numba, _kernels.double_prefix_numpy, (terms,)),
    ]
    print(f"n = {args.n}, best of {args.repeat}")
    print(f"{'kernel':<15}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for name, fast, slow, fn_args in cases:
        fast(*fn_args)
        t_fast = min(timeit.repeat(lambda: fast(*fn_args), number=1, repeat=args.repeat))
        t_slow = min(timeit.repeat(lambda: slow(*fn_args), number=1, repeat=args.repeat))
        print(f"{name:<15}{t_fast * 1e3:>12.3f}{t_slow * 1e3:>12.3f}{t_slow / t_fast:>9.1f}x")


if __name__ == "__main__":
    main()

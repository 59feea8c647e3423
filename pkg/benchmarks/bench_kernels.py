"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--batch 4096] [--k 100] [--repeat 20]
"""

import argparse
import timeit

import numpy as np

from hyperkge import kernels


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--batch", type=int, default=4096)
    parser.add_argument("--k", type=int, default=100)
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    h, w, t = (np.ascontiguousarray(rng.normal(size=(4, args.batch, args.k))) for _ in range(3))
    coef = rng.normal(size=args.batch)
    rows = rng.integers(0, args.batch // 4, size=args.batch)
    backends = {"python": kernels.python_backend}
    if kernels.compiled_backend is not None:
        backends["cython"] = kernels.compiled_backend
    else:
        print("compiled extension not built; timing the fallback only")

    cases = {
        "rotate_score": lambda m: m.rotate_score(h, w, t, True, 1e-12),
        "rotate_grad": lambda m: m.rotate_grad(h, w, t, coef, True, 1e-12),
        "scatter_add": lambda m: m.scatter_add(np.zeros((4, args.batch // 4, args.k)), rows, h),
    }
    print(f"batch={args.batch} k={args.k} best of {args.repeat}")
    print(f"{'kernel':<14}" + "".join(f"{name:>12}" for name in backends) + ("   speedup" if len(backends) > 1 else ""))
    for case, fn in cases.items():
        times = {name: min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat)) for name, mod in backends.items()}
        line = f"{case:<14}" + "".join(f"{1e3 * v:>10.2f}ms" for v in times.values())
        if len(times) > 1:
            line += f"{times['python'] / times['cython']:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()

"""Timing comparison of the compiled kernels against the numpy fallbacks.

The package selects the compiled path at import time unless
TENSOR_TOPK_NO_NUMBA=1; both implementations stay importable, so this script
times them side by side in one process.  Compile cost is excluded by a warmup
call per kernel.
"""

import argparse
import time

import numpy as np

from tensor_topk import generators, kernels, solver


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def report(name, base, other=None):
    line = f"{name:<28s} numpy {base * 1e3:9.3f} ms"
    if other is not None:
        line += f"   compiled {other * 1e3:9.3f} ms   speedup {base / other:5.2f}x"
    print(line)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5, help="timed runs per kernel")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--rank", type=int, default=25)
    ap.add_argument("--m", type=int, default=4096, help="candidate batch size")
    ap.add_argument("--argmax-size", type=int, default=4096,
                    help="keyed vector length for masked_argmax")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"compiled path enabled: {kernels.NUMBA_ENABLED}"
          + ("" if kernels.NUMBA_ENABLED
             else "  (set TENSOR_TOPK_NO_NUMBA=0 or unset it to enable)"))

    dims = (12, 12, 12, 12, 12, 12)
    factors = [rng.standard_normal((n, args.rank)) for n in dims]
    stacked, offsets = kernels.stack_factors(factors)
    tuples = np.column_stack([rng.integers(0, n, args.m) for n in dims]).astype(np.int64)

    pairs = [
        ("eval_elements", kernels._eval_elements_np,
         lambda f: f(stacked, offsets, tuples)),
        ("block_expand (64x64)", kernels._block_expand_np,
         lambda f: f(stacked, offsets,
                     np.array([0, 1], dtype=np.int64),
                     np.array([12, 12], dtype=np.int64))),
    ]
    keyed = rng.standard_normal(args.argmax_size)
    forbidden = rng.choice(args.argmax_size, 16, replace=False).astype(np.int64)
    argmax_name = f"masked_argmax ({args.argmax_size})"
    pairs.append((argmax_name, kernels._masked_argmax_np,
                  lambda f: f(keyed, forbidden)))

    compiled = {
        "eval_elements": kernels.eval_elements,
        "block_expand (64x64)": kernels.block_expand,
        argmax_name: kernels.masked_argmax,
    }
    for name, np_fn, call in pairs:
        call(np_fn)
        base = best_of(lambda: call(np_fn), args.repeats)
        if kernels.NUMBA_ENABLED:
            call(compiled[name])  # warmup covers jit compilation
            other = best_of(lambda: call(compiled[name]), args.repeats)
            report(name, base, other)
        else:
            report(name, base)

    A = generators.gen_random_cp(generators.RandomSpec(distribution="u01"),
                                 np.random.default_rng(args.seed + 1))
    cfg = solver.SolverConfig(k=5, extra=5, block_size=2, restarts=5, seed=args.seed)
    solver.solve(A, cfg)
    t = best_of(lambda: solver.solve(A, cfg), args.repeats)
    print(f"{'solve (dims=' + 'x'.join(map(str, A.dims)) + ')':<28s} "
          f"selected path {t * 1e3:9.3f} ms")


if __name__ == "__main__":
    main()

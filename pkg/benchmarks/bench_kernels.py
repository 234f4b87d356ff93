"""Time the compiled and pure-Python grid kernels side by side.

Run ``python3 benchmarks/bench_kernels.py [--n N] [--repeat R]``. Each kernel
is fed the same inputs on both backends, the outputs are compared, and the
best-of-R wall time is reported together with the speedup.
"""

import argparse
import timeit

import numpy as np

from contdiag import _kernels
from contdiag.oracle import pointwise_frames
from contdiag.tracks import Grid, HermitianField


def _inputs(n):
    fld = HermitianField.from_exprs("sin(3*t)", "t^2", "cos(2*t)", "0.5*sin(t)", -1, 1)
    t = Grid(-1, 1, n).points
    comps = fld.components(t)
    frames = pointwise_frames(fld, t)[1]
    aligned, _ = _kernels.get_backend("python").greedy_align(frames)
    return {
        "closed_form": comps,
        "greedy_align": (frames,),
        "hermitian_metrics": (aligned, *comps),
        "step_jumps": (aligned,),
    }


def _max_diff(a, b):
    if isinstance(a, tuple):
        return max(_max_diff(x, y) for x, y in zip(a, b))
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)), initial=0.0))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100_000, help="grid points (default 100000)")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    backends = _kernels.available_backends()
    if "cython" not in backends:
        print("compiled kernels are not built; only the python backend is available")
    inputs = _inputs(args.n)
    print(f"n = {args.n}, best of {args.repeat}")
    print(f"{'kernel':<18}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}{'max diff':>11}")
    for name in _kernels.KERNEL_NAMES:
        times, outs = [], []
        for b in backends:
            fn = getattr(_kernels.get_backend(b), name)
            outs.append(fn(*inputs[name]))
            times.append(min(timeit.repeat(lambda: fn(*inputs[name]), number=1, repeat=args.repeat)))
        row = f"{name:<18}" + "".join(f"{1e3 * s:>10.2f}ms" for s in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:>9.1f}x{_max_diff(outs[0], outs[1]):>11.1e}"
        print(row)


if __name__ == "__main__":
    main()

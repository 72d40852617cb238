#!/usr/bin/env python3
"""Time the numba conv/pool kernels against the pure-numpy fallback.

    python benchmarks/bench_kernels.py [--batch 32] [--size 64] [--repeat 5]

Prints per-kernel timings for every SimpleNet stage plus one full
forward/backward step, and checks that both backends agree on each output.
"""

import argparse
import time

import numpy as np

from speckle_nlos.classifier import init_params, kernels, loss_and_gradients
from speckle_nlos.classifier.net import CONV_CHANNELS


def best_of(fn, repeat):
    fn()  # warm-up (JIT compile on first call)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def stage_inputs(batch, size, rng):
    c_in, s = 1, size
    for c_out in CONV_CHANNELS:
        x = rng.standard_normal((batch, c_in, s, s)).astype(np.float32)
        w = (rng.standard_normal((c_out, c_in, 3, 3)) * 0.1).astype(np.float32)
        b = np.zeros(c_out, np.float32)
        yield f"{c_in}->{c_out} @ {s}x{s}", x, w, b
        c_in, s = c_out, s // 2


def full_step(backend, batch, size, repeat):
    impl = kernels.BACKENDS[backend]
    saved = {k: getattr(kernels, k) for k in ("conv3x3_forward", "conv3x3_backward", "maxpool2_forward", "maxpool2_backward")}
    for k in saved:
        setattr(kernels, k, getattr(impl, k))
    try:
        rng = np.random.default_rng(0)
        params = init_params(size, seed=0)
        x = rng.random((batch, size, size), dtype=np.float32)
        y = rng.integers(0, 10, batch)
        return best_of(lambda: loss_and_gradients(params, x, y), repeat)
    finally:
        for k, v in saved.items():
            setattr(kernels, k, v)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--batch", type=int, default=32)
    ap.add_argument("--size", type=int, default=64)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    names = sorted(kernels.BACKENDS)
    print(f"backends: {', '.join(names)}   batch {args.batch}   input {args.size}x{args.size}")
    if "numba" not in names:
        print("numba is not installed; only the numpy path can be timed")
    rng = np.random.default_rng(1)
    header = f"{'stage':<22}{'kernel':<14}" + "".join(f"{n:>12}" for n in names)
    if len(names) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for label, x, w, b in stage_inputs(args.batch, args.size, rng):
        y = kernels.BACKENDS["numpy"].conv3x3_forward(x, w, b)
        dy = rng.standard_normal(y.shape).astype(np.float32)
        pooled, arg = kernels.BACKENDS["numpy"].maxpool2_forward(y)
        dp = rng.standard_normal(pooled.shape).astype(np.float32)
        jobs = {
            "conv fwd": lambda k: k.conv3x3_forward(x, w, b),
            "conv bwd": lambda k: k.conv3x3_backward(dy, x, w),
            "pool fwd": lambda k: k.maxpool2_forward(y),
            "pool bwd": lambda k: k.maxpool2_backward(dp, arg, y.shape),
        }
        for kname, job in jobs.items():
            t = {n: best_of(lambda n=n: job(kernels.BACKENDS[n]), args.repeat) for n in names}
            line = f"{label:<22}{kname:<14}" + "".join(f"{t[n] * 1e3:>10.2f}ms" for n in names)
            if len(names) == 2:
                outs = [job(kernels.BACKENDS[n]) for n in names]
                outs = [o if isinstance(o, tuple) else (o,) for o in outs]
                agree = all(np.allclose(u, v, atol=1e-3) for u, v in zip(*outs))
                line += f"{t['numpy'] / t['numba']:>9.1f}x" + ("" if agree else "  MISMATCH")
            print(line)

    step = {n: full_step(n, args.batch, args.size, args.repeat) for n in names}
    line = f"{'full step':<22}{'fwd+bwd':<14}" + "".join(f"{step[n] * 1e3:>10.1f}ms" for n in names)
    if len(names) == 2:
        line += f"{step['numpy'] / step['numba']:>9.1f}x"
    print(line)
    print(f"active backend for training: {kernels.BACKEND} (set SPECKLE_NLOS_BACKEND to change)")


if __name__ == "__main__":
    main()

"""Benchmark the packed convolution kernel: numba lane vs pure numpy lane.

The convolution of sections is the hot loop behind the regular
representation, the fuzz suites and the acceptance run.  Set
FELLBUND_NUMBA=0 to force the numpy lane at import time; this script always
times both code paths explicitly.

Usage: python benchmarks/bench_convolution.py [repeats]
"""

import sys
import time

import numpy as np

from fellbund import _kernels
from fellbund.bundle import MatrixModelBundle
from fellbund.groupoid import pair_groupoid
from fellbund.gallery import a4_bundle, trivial_line_bundle


def matrix_units(n, m):
    out = []
    for i in range(n):
        for j in range(m):
            e = np.zeros((n, m), dtype=complex)
            e[i, j] = 1.0
            out.append(e)
    return out


def instances():
    big_pair = pair_groupoid([f"x{i}" for i in range(5)])
    yield "line bundle over pair(5), 25 fibres", trivial_line_bundle(big_pair)
    fat = pair_groupoid(["a", "b", "c"])
    fibers = {g: matrix_units(3, 3) for g in fat.arrows}
    yield "M_3 fibres over pair(3), total dim 81", \
        MatrixModelBundle(fat, fibers).to_fell_bundle()
    yield "A4 instance", a4_bundle()


def bench(plan, repeats):
    rng = np.random.default_rng(0)
    xs = [rng.standard_normal(plan.total_dim) + 1j * rng.standard_normal(plan.total_dim)
          for _ in range(8)]
    # warm-up compiles the jitted kernel
    plan.convolve(xs[0], xs[1])
    plan.convolve_reference(xs[0], xs[1])

    t0 = time.perf_counter()
    for k in range(repeats):
        plan.convolve(xs[k % 8], xs[(k + 1) % 8])
    fast = time.perf_counter() - t0

    t0 = time.perf_counter()
    for k in range(repeats):
        plan.convolve_reference(xs[k % 8], xs[(k + 1) % 8])
    ref = time.perf_counter() - t0

    check = plan.convolve(xs[0], xs[1]) - plan.convolve_reference(xs[0], xs[1])
    assert np.linalg.norm(check) < 1e-10
    return fast, ref


def main():
    repeats = int(sys.argv[1]) if len(sys.argv) > 1 else 2000
    lane = "numba" if _kernels.HAVE_NUMBA else "numpy (numba unavailable or disabled)"
    print(f"active lane: {lane}; {repeats} convolutions per instance\n")
    print(f"{'instance':<45}{'active':>12}{'numpy ref':>12}{'speedup':>10}")
    for label, bundle in instances():
        fast, ref = bench(bundle.conv_plan(), repeats)
        ratio = ref / fast if fast > 0 else float("inf")
        print(f"{label:<45}{fast:>10.3f}s{ref:>11.3f}s{ratio:>9.1f}x")


if __name__ == "__main__":
    main()

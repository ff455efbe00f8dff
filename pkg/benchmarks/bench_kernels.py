"""Compare the JIT-compiled inner loops against the pure-Python fallbacks.

Run with ``python benchmarks/bench_kernels.py``.  The same module-level
kernels power the library; this script times both implementations directly
and checks that their outputs agree bit-for-bit on the benchmark inputs.
"""

import time

import numpy as np

from bansim import _kernels


def timeit(fn, *args, repeats=3):
    best = float("inf")
    out = None
    for _ in range(repeats):
        start = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, out


def bench_cma(iterations=50_000, nf=13, stride=3):
    rng = np.random.default_rng(0)
    n = iterations * stride + nf
    received = rng.normal(size=n) + 1j * rng.normal(size=n)
    taps = np.zeros(nf, dtype=np.complex128)
    taps[nf // 2] = 1.0
    args = (received, taps, 3e-4, 1.32, iterations, stride)
    if _kernels.USE_NUMBA:
        _kernels.cma_run(*args)  # warm the JIT cache before timing
    t_py, out_py = timeit(_kernels._cma_run_py, *args)
    t_active, out_active = timeit(_kernels.cma_run, *args)
    assert np.allclose(out_py[0], out_active[0], atol=1e-10)
    return "cma_run", t_py, t_active


def bench_dse_cma(iterations=50_000, nf=13, stride=3):
    rng = np.random.default_rng(1)
    n = iterations * stride + nf
    received = rng.normal(size=n) + 1j * rng.normal(size=n)
    taps = np.zeros(nf, dtype=np.complex128)
    taps[nf // 2] = 1.0
    dither = rng.uniform(size=2 * iterations)
    args = (received, taps, 3e-4, 1.32, 1.32, dither, iterations, stride)
    if _kernels.USE_NUMBA:
        _kernels.dse_cma_run(*args)
    t_py, out_py = timeit(_kernels._dse_cma_run_py, *args)
    t_active, out_active = timeit(_kernels.dse_cma_run, *args)
    assert np.allclose(out_py[0], out_active[0], atol=1e-10)
    return "dse_cma_run", t_py, t_active


def bench_dfe(n_sym=200_000, nf=6, nb=3, ns=2):
    rng = np.random.default_rng(2)
    n = n_sym * ns + nf
    received = rng.normal(size=n) + 1j * rng.normal(size=n)
    w_ff = rng.normal(size=nf) + 0j
    w_fb = rng.normal(size=nb) + 0j
    constellation = np.array([1.0 + 0j, -1.0 + 0j])
    history = np.zeros(nb, dtype=np.complex128)
    args = (received, w_ff, w_fb, constellation, history, ns, n_sym)
    if _kernels.USE_NUMBA:
        _kernels.dfe_detect_run(*args)
    t_py, out_py = timeit(_kernels._dfe_detect_py, *args)
    t_active, out_active = timeit(_kernels.dfe_detect_run, *args)
    assert np.allclose(out_py[0], out_active[0], atol=1e-10)
    return "dfe_detect_run", t_py, t_active


def main():
    mode = "numba" if _kernels.USE_NUMBA else "fallback (BANSIM_NO_NUMBA=1)"
    print(f"active kernel path: {mode}")
    print(f"{'kernel':<16}{'python (s)':>12}{'active (s)':>12}{'speedup':>9}")
    for bench in (bench_cma, bench_dse_cma, bench_dfe):
        name, t_py, t_active = bench()
        print(f"{name:<16}{t_py:>12.4f}{t_active:>12.4f}"
              f"{t_py / t_active:>8.1f}x")


if __name__ == "__main__":
    main()

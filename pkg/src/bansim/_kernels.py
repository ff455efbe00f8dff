"""Sequential inner loops for the adaptive receivers.

CMA/DSE-CMA adaptation and decision-feedback detection are step-by-step
recursions that numpy cannot vectorize, so they are JIT-compiled with
numba.  Set ``BANSIM_NO_NUMBA=1`` to force the pure-Python fallback
(identical arithmetic, same results); ``benchmarks/bench_kernels.py``
compares the two paths.
"""

from __future__ import annotations

import os

import numpy as np

USE_NUMBA = os.environ.get("BANSIM_NO_NUMBA", "0") != "1"

DIVERGENCE_LIMIT = 1.0e3


def _cma_run_py(received, taps, mu, r2, max_steps, stride):
    nf = taps.size
    y = np.empty(max_steps, dtype=np.complex128)
    for n in range(max_steps):
        # regressor: newest sample first; stride = samples per symbol
        reg = received[n * stride : n * stride + nf][::-1]
        yn = np.vdot(taps, reg)  # f^H r
        y[n] = yn
        if abs(yn) > DIVERGENCE_LIMIT:
            return y, taps, n
        err = yn * (r2 - abs(yn) ** 2)
        taps = taps + mu * np.conj(err) * reg
    return y, taps, -1


def _dse_cma_run_py(received, taps, mu, r2, alpha_d, dither_u, max_steps, stride):
    nf = taps.size
    y = np.empty(max_steps, dtype=np.complex128)
    for n in range(max_steps):
        reg = received[n * stride : n * stride + nf][::-1]
        yn = np.vdot(taps, reg)
        y[n] = yn
        if abs(yn) > DIVERGENCE_LIMIT:
            return y, taps, n
        err = yn * (r2 - abs(yn) ** 2)
        d_r = alpha_d * np.sin(2.0 * np.pi * dither_u[2 * n])
        d_i = alpha_d * np.sin(2.0 * np.pi * dither_u[2 * n + 1])
        psi = alpha_d * (np.sign(err.real + d_r) + 1j * np.sign(err.imag + d_i))
        taps = taps + mu * np.conj(psi) * reg
    return y, taps, -1


def _dfe_detect_py(received, w_ff, w_fb, constellation, history, stride, n_sym):
    nf = w_ff.size
    nb = w_fb.size
    decisions = np.empty(n_sym, dtype=np.complex128)
    soft = np.empty(n_sym, dtype=np.complex128)
    hist = history.copy()
    for k in range(n_sym):
        # feedforward window advances by stride samples per symbol and may
        # span several symbol periods; missing tail samples count as zero
        xk = 0.0 + 0.0j
        for i in range(nf):
            idx = k * stride + i
            if idx < received.size:
                xk += w_ff[i] * received[idx]
        for b in range(nb):
            xk += w_fb[b] * hist[b]
        soft[k] = xk
        best = 0
        best_d = abs(xk - constellation[0])
        for m in range(1, constellation.size):
            d = abs(xk - constellation[m])
            if d < best_d:
                best_d = d
                best = m
        decisions[k] = constellation[best]
        if nb > 0:
            for b in range(nb - 1, 0, -1):
                hist[b] = hist[b - 1]
            hist[0] = decisions[k]
    return soft, decisions, hist


if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        USE_NUMBA = False

if USE_NUMBA:

    @njit(cache=True)
    def _cma_run_jit(received, taps, mu, r2, max_steps, stride):
        nf = taps.size
        y = np.empty(max_steps, dtype=np.complex128)
        f = taps.copy()
        for n in range(max_steps):
            base = n * stride
            yn = 0.0 + 0.0j
            for i in range(nf):
                yn += np.conj(f[i]) * received[base + nf - 1 - i]
            y[n] = yn
            if abs(yn) > DIVERGENCE_LIMIT:
                return y, f, n
            err = yn * (r2 - abs(yn) ** 2)
            ce = np.conj(err)
            for i in range(nf):
                f[i] += mu * ce * received[base + nf - 1 - i]
        return y, f, -1

    @njit(cache=True)
    def _dse_cma_run_jit(received, taps, mu, r2, alpha_d, dither_u, max_steps,
                         stride):
        nf = taps.size
        y = np.empty(max_steps, dtype=np.complex128)
        f = taps.copy()
        for n in range(max_steps):
            base = n * stride
            yn = 0.0 + 0.0j
            for i in range(nf):
                yn += np.conj(f[i]) * received[base + nf - 1 - i]
            y[n] = yn
            if abs(yn) > DIVERGENCE_LIMIT:
                return y, f, n
            err = yn * (r2 - abs(yn) ** 2)
            d_r = alpha_d * np.sin(2.0 * np.pi * dither_u[2 * n])
            d_i = alpha_d * np.sin(2.0 * np.pi * dither_u[2 * n + 1])
            psi = alpha_d * (np.sign(err.real + d_r) + 1j * np.sign(err.imag + d_i))
            cp = np.conj(psi)
            for i in range(nf):
                f[i] += mu * cp * received[base + nf - 1 - i]
        return y, f, -1

    @njit(cache=True)
    def _dfe_detect_jit(received, w_ff, w_fb, constellation, history, stride,
                        n_sym):
        nf = w_ff.size
        nb = w_fb.size
        decisions = np.empty(n_sym, dtype=np.complex128)
        soft = np.empty(n_sym, dtype=np.complex128)
        hist = history.copy()
        for k in range(n_sym):
            xk = 0.0 + 0.0j
            for i in range(nf):
                idx = k * stride + i
                if idx < received.size:
                    xk += w_ff[i] * received[idx]
            for b in range(nb):
                xk += w_fb[b] * hist[b]
            soft[k] = xk
            best = 0
            best_d = abs(xk - constellation[0])
            for m in range(1, constellation.size):
                d = abs(xk - constellation[m])
                if d < best_d:
                    best_d = d
                    best = m
            decisions[k] = constellation[best]
            if nb > 0:
                for b in range(nb - 1, 0, -1):
                    hist[b] = hist[b - 1]
                hist[0] = decisions[k]
        return soft, decisions, hist

    cma_run = _cma_run_jit
    dse_cma_run = _dse_cma_run_jit
    dfe_detect_run = _dfe_detect_jit
else:
    cma_run = _cma_run_py
    dse_cma_run = _dse_cma_run_py
    dfe_detect_run = _dfe_detect_py

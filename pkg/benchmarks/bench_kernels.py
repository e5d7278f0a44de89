#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

The two hot paths of sampled certification are timed head to head: the
batched gap-eigenvalue sweep and the projected-gradient falsification
search.  The compiled variant is warmed up first so compilation time is
excluded; agreement between the paths is asserted before timing.

Run:  python benchmarks/bench_kernels.py [--samples N] [--repeat R]
"""

import argparse
import time

import numpy as np

from modframes._kernels import (
    _gap_eigs_impl,
    _minimize_gap_impl,
    backend,
    gap_eigs,
    minimize_gap,
)


def _inputs(samples: int, d: int, n: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    nd = n * d

    def cplx(*shape):
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)

    def psd(k):
        a = cplx(k, k)
        return a @ np.conj(a.T)

    xs = np.ascontiguousarray(cplx(samples, d, nd))
    s_hat = psd(nd)
    m_hat = psd(nd)
    # bound element small enough that the lower gap stays PSD: the descent
    # then runs its full budget, which is the realistic certified-instance
    # cost profile.
    from modframes.operators import pencil_alpha_flat

    alpha = 0.9 * np.sqrt(pencil_alpha_flat(m_hat, s_hat))
    a = np.ascontiguousarray(alpha * np.eye(d, dtype=np.complex128))
    return xs, s_hat, m_hat, a, np.ascontiguousarray(cplx(d, d))


def _time(fn, *args, repeat: int) -> float:
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=2000)
    parser.add_argument("--dim", type=int, default=2)
    parser.add_argument("--rank", type=int, default=3)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    if backend() != "numba":
        print("active backend is numpy (numba missing or disabled); nothing to compare")
        return

    xs, s_hat, m_hat, a, b = _inputs(args.samples, args.dim, args.rank)
    x0 = np.ascontiguousarray(xs[0])
    eye_d = np.eye(args.dim, dtype=np.complex128)

    # warm-up compiles and checks agreement
    lo_j, up_j = gap_eigs(xs, s_hat, m_hat, a, b)
    lo_p, up_p = _gap_eigs_impl(xs, s_hat, m_hat, a, b)
    np.testing.assert_allclose(lo_j, lo_p, atol=1e-10)
    np.testing.assert_allclose(up_j, up_p, atol=1e-10)
    val_j, _ = minimize_gap(x0, s_hat, m_hat, eye_d, a, 200, 1e-2, 1e-9)
    val_p, _ = _minimize_gap_impl(x0, s_hat, m_hat, eye_d, a, 200, 1e-2, 1e-9)
    assert abs(val_j - val_p) <= 1e-8 * (1 + abs(val_p)), (val_j, val_p)

    rows = []
    t_j = _time(gap_eigs, xs, s_hat, m_hat, a, b, repeat=args.repeat)
    t_p = _time(_gap_eigs_impl, xs, s_hat, m_hat, a, b, repeat=args.repeat)
    rows.append(("gap_eigs", args.samples, t_j, t_p))
    t_j = _time(minimize_gap, x0, s_hat, m_hat, eye_d, a, 200, 1e-2, 1e-9, repeat=args.repeat)
    t_p = _time(
        _minimize_gap_impl, x0, s_hat, m_hat, eye_d, a, 200, 1e-2, 1e-9, repeat=args.repeat
    )
    rows.append(("minimize_gap", 200, t_j, t_p))

    print(f"d={args.dim} n={args.rank} (flattened vectors {args.dim}x{args.dim * args.rank})")
    print(f"{'kernel':<14}{'work':>8}{'numba [ms]':>14}{'numpy [ms]':>14}{'speedup':>10}")
    for name, work, tj, tp in rows:
        print(f"{name:<14}{work:>8}{tj * 1e3:>14.3f}{tp * 1e3:>14.3f}{tp / tj:>10.1f}x")


if __name__ == "__main__":
    main()

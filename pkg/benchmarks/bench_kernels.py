#!/usr/bin/env python3
"""
Numba vs pure-numpy timings for the two hot kernels.

Usage:
    python3 benchmarks/bench_kernels.py [--n-poly 18] [--n-sc 10] [--decodes 2000] [--repeat 3]
"""

import argparse
import time

import numpy as np

from polarforge import construct
from polarforge.polarization import db_to_xi, polarize_uniform
from polarforge.sim import awgn_llrs, encode, sc_decode


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_polarization(n, repeat):
    xi0 = db_to_xi(0.0)
    out = {}
    for use_numba in (True, False):
        polarize_uniform(n, xi0, use_numba=use_numba)  # compile / warm up
        out[use_numba] = best_of(lambda: polarize_uniform(n, xi0, use_numba=use_numba), repeat)
    a = polarize_uniform(n, xi0, use_numba=True)
    b = polarize_uniform(n, xi0, use_numba=False)
    return out, float(np.max(np.abs(a - b)))


def bench_sc(n, decodes, repeat):
    cons = construct(n, 1 << (n - 1), 0.0)
    rng = np.random.default_rng(7)
    u = np.zeros((decodes, cons.block_length), dtype=np.uint8)
    u[:, cons.info_mask] = rng.integers(0, 2, (decodes, cons.k), dtype=np.uint8)
    llrs = awgn_llrs(encode(u), 10 ** (0.0 / 10), rng)
    out = {}
    for use_numba in (True, False):
        sc_decode(llrs[:2], cons, use_numba=use_numba)
        out[use_numba] = best_of(lambda: sc_decode(llrs, cons, use_numba=use_numba), repeat)
    same = np.array_equal(
        sc_decode(llrs, cons, use_numba=True)[0], sc_decode(llrs, cons, use_numba=False)[0]
    )
    return out, same


def main():
    ap = argparse.ArgumentParser(description=__doc__.strip().splitlines()[0])
    ap.add_argument("--n-poly", type=int, default=18)
    ap.add_argument("--n-sc", type=int, default=10)
    ap.add_argument("--decodes", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    t, diff = bench_polarization(args.n_poly, args.repeat)
    print(f"polarize_uniform n={args.n_poly}:  numba {t[True] * 1e3:9.2f} ms"
          f"   numpy {t[False] * 1e3:9.2f} ms   x{t[False] / t[True]:.1f}   max|diff| {diff:.1e}")

    t, same = bench_sc(args.n_sc, args.decodes, args.repeat)
    per = {k: v / args.decodes * 1e6 for k, v in t.items()}
    print(f"sc_decode N={1 << args.n_sc} x{args.decodes}:  numba {per[True]:9.1f} us/cw"
          f"   numpy {per[False]:9.1f} us/cw   x{t[False] / t[True]:.1f}   identical {same}")


if __name__ == "__main__":
    main()

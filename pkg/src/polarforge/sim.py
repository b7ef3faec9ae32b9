"""Monte Carlo validation: polar encoder, BPSK/AWGN channel, SC decoder.

The encoder is ``x = u F^{(x)n}`` computed in place with the same butterfly
layout as the polarization recursion.  In that layout the first butterfly
stage (on the channel side) is recorded in the least significant bit of the
input-bit index, so successive cancellation over it decides the input bits
in bit-reversed index order.  The kernel below is the usual natural-order SC
recursion; the public functions run it on bit-reversed LLRs and map the
decisions back, which makes profile index ``k`` the synthetic channel of
``u[k]``.
"""

import csv
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from ._jit import USE_NUMBA, njit
from .polarization import CodeConstruction

Z95 = 1.959963984540054
NOISELESS_LLR = 1e9


def bit_reversal(n):
    """Bit-reversal permutation of ``range(2**n)`` (an involution)."""
    idx = np.arange(1 << n)
    rev = np.zeros_like(idx)
    for b in range(n):
        rev |= ((idx >> b) & 1) << (n - 1 - b)
    return rev


# --- encoder ---------------------------------------------------------------


@njit
def _encode_kernel(x):
    rows, size = x.shape
    for r in range(rows):
        half = 1
        while half < size:
            for base in range(0, size, 2 * half):
                for j in range(base, base + half):
                    x[r, j] ^= x[r, j + half]
            half *= 2
    return x


def _encode_numpy(x):
    rows, size = x.shape
    half = 1
    while half < size:
        v = x.reshape(rows, size // (2 * half), 2, half)
        v[:, :, 0, :] ^= v[:, :, 1, :]
        half *= 2
    return x


def encode(u, construction=None, use_numba=None):
    """Polar transform of one message (1-D) or a batch of messages (2-D).

    With a ``construction`` the length is checked and frozen positions must
    hold zeros.
    """
    u = np.asarray(u)
    single = u.ndim == 1
    x = np.array(np.atleast_2d(u), dtype=np.uint8)
    size = x.shape[1]
    if size == 0 or size & (size - 1):
        raise ValueError(f"length must be a power of two, got {size}")
    if construction is not None:
        if size != construction.block_length:
            raise ValueError(f"expected {construction.block_length} bits, got {size}")
        if np.any(x[:, construction.frozen_mask]):
            raise ValueError("frozen positions of u must be zero")
    if USE_NUMBA if use_numba is None else use_numba:
        _encode_kernel(x)
    else:
        _encode_numpy(x)
    return x[0] if single else x


# --- channel ---------------------------------------------------------------


def awgn_llrs(x, gamma0, rng):
    """BPSK over AWGN at linear Es/N0 ``gamma0``; returns channel LLRs.

    Bit ``b`` is sent as ``1 - 2b`` with noise variance ``1 / (2 gamma0)``,
    so a transmitted 0 has LLR mean ``4 gamma0`` and variance ``8 gamma0``.
    """
    gamma0 = float(gamma0)
    if not gamma0 > 0:
        raise ValueError("gamma0 must be positive")
    s = 1.0 - 2.0 * np.asarray(x, dtype=np.float64)
    y = s + rng.standard_normal(s.shape) * math.sqrt(0.5 / gamma0)
    return 4.0 * gamma0 * y


# --- SC decoder ------------------------------------------------------------


@njit
def _softplus_neg(x):
    # log(1 + exp(-x)) for x >= 0; below 1e-16 past the cutoff.
    if x > 37.0:
        return 0.0
    return math.log1p(math.exp(-x))


@njit
def _boxplus(a, b):
    aa = abs(a)
    ab = abs(b)
    r = min(aa, ab) + _softplus_neg(aa + ab) - _softplus_neg(abs(aa - ab))
    if (a < 0.0) != (b < 0.0):
        return -r
    return r


@njit
def _sc_one(llr, frozen, u, dec, alpha, beta_l, beta_r):
    # Natural-order SC.  Level s of the tree lives at offset 2**s (size 2**s)
    # in alpha / beta_l / beta_r; the channel LLRs are level n.
    size = llr.shape[0]
    n = 0
    while (1 << n) < size:
        n += 1
    for j in range(size):
        alpha[size + j] = llr[j]
    for i in range(size):
        if i == 0:
            s = n
        else:
            s = 1
            while ((i >> (s - 1)) & 1) == 0:
                s += 1
            h = 1 << (s - 1)
            off = 2 * h
            for j in range(h):
                alpha[h + j] = alpha[off + j + h] + (1.0 - 2.0 * beta_l[h + j]) * alpha[off + j]
            s -= 1
        for lev in range(s, 0, -1):
            h = 1 << (lev - 1)
            off = 2 * h
            for j in range(h):
                alpha[h + j] = _boxplus(alpha[off + j], alpha[off + j + h])
        lam = alpha[1]
        dec[i] = lam
        bit = 0
        if not frozen[i] and lam < 0.0:
            bit = 1
        u[i] = bit
        if (i & 1) == 0:
            beta_l[1] = bit
            continue
        beta_r[1] = bit
        lev = 0
        while (i >> lev) & 1:
            h = 1 << lev
            off = 2 * h
            right_parent = (i >> (lev + 1)) & 1
            for j in range(h):
                l = beta_l[h + j]
                r = beta_r[h + j]
                if right_parent:
                    beta_r[off + j] = l ^ r
                    beta_r[off + h + j] = r
                else:
                    beta_l[off + j] = l ^ r
                    beta_l[off + h + j] = r
            lev += 1


@njit
def _sc_batch_kernel(llrs, frozen, u, dec):
    rows, size = llrs.shape
    alpha = np.empty(2 * size)
    beta_l = np.zeros(2 * size, dtype=np.uint8)
    beta_r = np.zeros(2 * size, dtype=np.uint8)
    for r in range(rows):
        _sc_one(llrs[r], frozen, u[r], dec[r], alpha, beta_l, beta_r)


def _boxplus_numpy(a, b):
    aa = np.abs(a)
    ab = np.abs(b)
    r = np.minimum(aa, ab) + np.log1p(np.exp(-(aa + ab))) - np.log1p(np.exp(-np.abs(aa - ab)))
    return np.where((a < 0) != (b < 0), -r, r)


def _sc_batch_numpy(llrs, frozen, u, dec):
    rows, size = llrs.shape
    n = size.bit_length() - 1
    alpha = np.empty((rows, 2 * size))
    beta_l = np.zeros((rows, 2 * size), dtype=np.uint8)
    beta_r = np.zeros((rows, 2 * size), dtype=np.uint8)
    alpha[:, size:] = llrs
    for i in range(size):
        if i == 0:
            s = n
        else:
            s = ((i & -i).bit_length() - 1) + 1
            h = 1 << (s - 1)
            a = alpha[:, 2 * h : 3 * h]
            b = alpha[:, 3 * h : 4 * h]
            alpha[:, h : 2 * h] = b + (1.0 - 2.0 * beta_l[:, h : 2 * h]) * a
            s -= 1
        for lev in range(s, 0, -1):
            h = 1 << (lev - 1)
            alpha[:, h : 2 * h] = _boxplus_numpy(alpha[:, 2 * h : 3 * h], alpha[:, 3 * h : 4 * h])
        lam = alpha[:, 1]
        dec[:, i] = lam
        bit = np.zeros(rows, dtype=np.uint8) if frozen[i] else (lam < 0).astype(np.uint8)
        u[:, i] = bit
        if (i & 1) == 0:
            beta_l[:, 1] = bit
            continue
        beta_r[:, 1] = bit
        lev = 0
        while (i >> lev) & 1:
            h = 1 << lev
            target = beta_r if (i >> (lev + 1)) & 1 else beta_l
            left = beta_l[:, h : 2 * h]
            right = beta_r[:, h : 2 * h].copy()
            target[:, 2 * h : 3 * h] = left ^ right
            target[:, 3 * h : 4 * h] = right
            lev += 1


def _decode_batch(llrs, frozen_mask, use_numba=None):
    """Decode a 2-D batch; returns ``(u_hat, decision_llrs)`` in index order."""
    rows, size = llrs.shape
    n = size.bit_length() - 1
    rev = bit_reversal(n)
    llrs_rev = np.ascontiguousarray(llrs[:, rev], dtype=np.float64)
    frozen_rev = np.ascontiguousarray(frozen_mask[rev])
    u = np.empty((rows, size), dtype=np.uint8)
    dec = np.empty((rows, size))
    if USE_NUMBA if use_numba is None else use_numba:
        _sc_batch_kernel(llrs_rev, frozen_rev, u, dec)
    else:
        _sc_batch_numpy(llrs_rev, frozen_rev, u, dec)
    return u[:, rev], dec[:, rev]


def sc_decode(llrs, construction, return_llrs=False, use_numba=None):
    """Successive-cancellation decoding.

    Parameters
    ----------
    llrs : array_like
        Channel LLRs, shape ``(N,)`` or ``(batch, N)``; positive favours 0.
    construction : CodeConstruction
        Frozen positions are decided as 0 regardless of their LLR.
    return_llrs : bool
        Also return the LLR each bit decision was taken from.

    Returns
    -------
    u_hat, info_bits[, decision_llrs]
    """
    llrs = np.asarray(llrs, dtype=np.float64)
    single = llrs.ndim == 1
    llrs2 = np.atleast_2d(llrs)
    if llrs2.shape[1] != construction.block_length:
        raise ValueError(
            f"expected {construction.block_length} LLRs, got {llrs2.shape[1]}"
        )
    u, dec = _decode_batch(llrs2, construction.frozen_mask, use_numba)
    info = u[:, construction.info_mask]
    out = (u[0], info[0], dec[0]) if single else (u, info, dec)
    return out if return_llrs else out[:2]


# --- Monte Carlo harness ---------------------------------------------------


@dataclass
class SimConfig:
    construction: CodeConstruction
    channel_snr_db: float
    max_trials: int = 1_000_000
    target_block_errors: int = 100
    seed: int = 0
    worker_count: int = 1
    batch_size: int = 2000
    all_zero: bool = False
    use_numba: bool = None

    def __post_init__(self):
        if self.max_trials < 1:
            raise ValueError("max_trials must be >= 1")
        if self.target_block_errors < 1:
            raise ValueError("target_block_errors must be >= 1")
        if self.worker_count < 1:
            raise ValueError("worker_count must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


@dataclass
class SimResult:
    trials_run: int
    block_errors: int
    bler_point: float
    ci95_halfwidth: float
    ci_low: float
    ci_high: float
    elapsed_seconds: float
    seed: int
    worker_count: int
    bit_errors: np.ndarray = field(default=None, repr=False)

    def to_dict(self):
        d = asdict(self)
        d.pop("bit_errors")
        return d

    def to_json(self):
        return json.dumps(self.to_dict())


def confidence_interval(errors, trials, z=Z95):
    """Binomial 95% interval: normal approximation, Wilson below 10 errors.

    Returns ``(halfwidth, low, high)``.
    """
    p = errors / trials
    if errors >= 10:
        h = z * math.sqrt(p * (1.0 - p) / trials)
        return h, max(p - h, 0.0), min(p + h, 1.0)
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2.0 * trials)) / denom
    h = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom
    low = 0.0 if errors == 0 else max(centre - h, 0.0)
    return h, low, min(centre + h, 1.0)


def _run_chunk(rng, trials, construction, gamma0, all_zero, use_numba):
    size = construction.block_length
    info = construction.info_mask
    u = np.zeros((trials, size), dtype=np.uint8)
    if not all_zero:
        u[:, info] = rng.integers(0, 2, size=(trials, construction.k), dtype=np.uint8)
    x = encode(u, use_numba=use_numba)
    llrs = awgn_llrs(x, gamma0, rng)
    u_hat, dec = _decode_batch(llrs, construction.frozen_mask, use_numba)
    block_errors = int(np.count_nonzero(np.any(u_hat[:, info] != u[:, info], axis=1)))
    bit_errors = np.count_nonzero((dec < 0) != (u == 1), axis=0)
    return block_errors, bit_errors


def run_monte_carlo(config):
    """Simulate SC decoding until ``max_trials`` or ``target_block_errors``.

    Trials run in rounds of ``batch_size`` per worker; worker ``w`` draws
    from its own stream ``SeedSequence(seed).spawn(W)[w]``.  The stopping
    rule is checked between rounds, so a fixed ``(seed, worker_count,
    batch_size)`` always reproduces the same counts.
    """
    cons = config.construction
    gamma0 = 10.0 ** (config.channel_snr_db / 10.0)
    workers = config.worker_count
    rngs = [
        np.random.Generator(np.random.PCG64(s))
        for s in np.random.SeedSequence(config.seed).spawn(workers)
    ]
    trials = 0
    errors = 0
    bit_errors = np.zeros(cons.block_length, dtype=np.int64)
    t0 = time.perf_counter()
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        while trials < config.max_trials and errors < config.target_block_errors:
            total = min(config.batch_size * workers, config.max_trials - trials)
            sizes = [total // workers + (w < total % workers) for w in range(workers)]
            jobs = [
                (rngs[w], sizes[w], cons, gamma0, config.all_zero, config.use_numba)
                for w in range(workers)
                if sizes[w]
            ]
            if pool is None:
                results = [_run_chunk(*job) for job in jobs]
            else:
                results = list(pool.map(lambda job: _run_chunk(*job), jobs))
            for blk, bits in results:
                errors += blk
                bit_errors += bits
            trials += total
    finally:
        if pool is not None:
            pool.shutdown()
    h, lo, hi = confidence_interval(errors, trials)
    return SimResult(
        trials_run=trials,
        block_errors=errors,
        bler_point=errors / trials,
        ci95_halfwidth=h,
        ci_low=lo,
        ci_high=hi,
        elapsed_seconds=time.perf_counter() - t0,
        seed=config.seed,
        worker_count=workers,
        bit_errors=bit_errors,
    )


SIM_CSV_FIELDS = (
    "n",
    "k",
    "method",
    "design_snr_db",
    "channel_snr_db",
    "trials",
    "block_errors",
    "bler",
    "ci95",
    "seed",
)


def sim_csv_row(construction, channel_snr_db, result):
    snr = construction.design_snr_db
    return {
        "n": construction.block_length,
        "k": construction.k,
        "method": construction.method,
        "design_snr_db": "" if snr is None else f"{snr:.6g}",
        "channel_snr_db": f"{channel_snr_db:.6g}",
        "trials": result.trials_run,
        "block_errors": result.block_errors,
        "bler": f"{result.bler_point:.6g}",
        "ci95": f"{result.ci95_halfwidth:.6g}",
        "seed": result.seed,
    }


def append_sim_csv(path, rows):
    """Append rows to a sim CSV, writing the header if the file is new."""
    fresh = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=SIM_CSV_FIELDS, lineterminator="\n")
        if fresh:
            w.writeheader()
        w.writerows(rows)

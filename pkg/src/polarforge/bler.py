"""Analytical block error rate of SC decoding from a polarization profile.

Each input bit's LLR is taken as Gaussian with SNR ``gamma_hat = exp(xi_hat)``,
i.e. mean ``4 gamma_hat`` and variance ``8 gamma_hat``.  With all earlier bits
assumed correct, bit ``k`` errs with probability ``Q(sqrt(2 gamma_hat))`` and
the block estimate is ``1 - prod(1 - P_k)`` over the information set.
"""

import csv
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, log_ndtr

from .polarization import db_to_xi, polarize_uniform, rank_bits


def q_function(x):
    """Standard normal tail probability."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


def bit_error_prob(xi_hat):
    """Error probability of a bit whose LLR has log-SNR ``xi_hat``.

    ``-inf`` (an erased bit) gives 0.5.
    """
    xi = np.asarray(xi_hat, dtype=float)
    with np.errstate(over="ignore"):
        gamma = np.exp(np.minimum(xi, 709.0))
    p = 0.5 * erfc(np.sqrt(gamma))
    return float(p) if p.ndim == 0 else p


def _log1m_bit_error(xi):
    # log(1 - Q(sqrt(2g))) = log Phi(sqrt(2g)), accurate when Q is tiny.
    gamma = np.exp(np.minimum(xi, 709.0))
    return log_ndtr(np.sqrt(2.0 * gamma))


@dataclass
class BlerEstimate:
    """Minimum estimated BLER and the per-bit terms it was built from."""

    bler: float
    info_set: np.ndarray
    per_bit: np.ndarray
    xi_hat: np.ndarray

    def to_dict(self):
        return {"bler": float(f"{self.bler:.6g}"), "k": int(self.info_set.size)}

    def to_json(self):
        return json.dumps(self.to_dict())

    def write_per_bit_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["index", "xi_hat", "p_bit"])
            for i, x, p in zip(self.info_set, self.xi_hat, self.per_bit):
                w.writerow([int(i), f"{x:.12g}", f"{p:.12g}"])


def estimate_bler(profile, k=None, info_set=None):
    """Minimum estimated BLER of a code on a polarized channel.

    Parameters
    ----------
    profile : array_like
        Polarized log-SNRs at the channel SNR of interest.
    k : int, optional
        Use the ``k`` most reliable bits of ``profile`` as information set.
    info_set : array_like, optional
        Use a fixed information set instead (e.g. one designed at another
        SNR).  Exactly one of ``k`` and ``info_set`` must be given.
    """
    profile = np.asarray(profile, dtype=float)
    size = profile.size
    if (k is None) == (info_set is None):
        raise ValueError("give exactly one of k and info_set")
    if info_set is None:
        if int(k) != k or not 0 < k <= size:
            raise ValueError(f"k must be an integer in (0, {size}], got {k!r}")
        idx = rank_bits(profile)[: int(k)]
    else:
        idx = np.asarray(info_set, dtype=np.int64)
        if idx.size == 0 or idx.min() < 0 or idx.max() >= size:
            raise ValueError("info_set must be non-empty with indices in range")
    xi = profile[idx]
    total = float(np.sum(_log1m_bit_error(xi)))
    return BlerEstimate(
        bler=float(-math.expm1(total)),
        info_set=idx,
        per_bit=bit_error_prob(xi),
        xi_hat=xi,
    )


def estimate_bler_at(n, k, snr_db):
    """Estimate for a code designed at, and used at, ``snr_db``."""
    return estimate_bler(polarize_uniform(n, db_to_xi(snr_db)), k).bler


def find_design_snr(n, k, target_bler, lo_db, hi_db, bler_tol=1e-6, db_tol=0.01):
    """Design SNR (dB) at which the estimated BLER reaches ``target_bler``.

    Bisection on ``[lo_db, hi_db]``; the code is redesigned at every trial
    SNR.  Stops when the estimate is within ``bler_tol`` of the target or
    the bracket is narrower than ``db_tol``.
    """
    if not 0.0 < target_bler < 1.0:
        raise ValueError("target_bler must lie in (0, 1)")
    lo, hi = float(lo_db), float(hi_db)
    if not lo < hi:
        raise ValueError("need lo_db < hi_db")
    f_lo = estimate_bler_at(n, k, lo) - target_bler
    f_hi = estimate_bler_at(n, k, hi) - target_bler
    if f_lo < 0 or f_hi > 0:
        raise ValueError(
            f"bracket [{lo}, {hi}] dB does not straddle target {target_bler}"
        )
    while hi - lo > db_tol:
        mid = 0.5 * (lo + hi)
        f = estimate_bler_at(n, k, mid) - target_bler
        if abs(f) <= bler_tol:
            return mid
        if f > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


__all__ = [
    "BlerEstimate",
    "bit_error_prob",
    "estimate_bler",
    "estimate_bler_at",
    "find_design_snr",
    "q_function",
]

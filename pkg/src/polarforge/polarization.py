"""Channel polarization under RCA and information-set selection.

Profiles are arrays of log-SNRs indexed by input bit ``k``.  The butterfly
layout is the in-place one: stage ``i`` pairs positions ``j`` and
``j + 2**(i-1)`` inside blocks of ``2**i``, writing the check-node output to
the lower position and the variable-node output to the upper one.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import rca
from ._jit import USE_NUMBA, njit
from .rca import _check_kernel, _lambda_kernel, _variable_kernel

MAX_N = 24
_LN2 = math.log(2.0)


_DB_TO_XI = math.log(10.0) / 10.0


def db_to_xi(snr_db):
    """Es/N0 in dB to natural-log linear SNR (scalar or array)."""
    if np.ndim(snr_db):
        return np.asarray(snr_db, dtype=float) * _DB_TO_XI
    return float(snr_db) * _DB_TO_XI


def xi_to_db(xi):
    if np.ndim(xi):
        return np.asarray(xi, dtype=float) / _DB_TO_XI
    return float(xi) / _DB_TO_XI


@njit
def _uniform_kernel(xs, n):
    for i in range(1, n + 1):
        half = 1 << (i - 1)
        for j in range(half):
            x = xs[j]
            xs[j] = _lambda_kernel(_lambda_kernel(x) + _LN2)
            xs[j + half] = x + _LN2
    return xs


@njit
def _distinct_kernel(xs, n):
    size = xs.shape[0]
    for i in range(1, n + 1):
        span = 1 << i
        half = span >> 1
        for k in range(size // span):
            base = k * span
            for j in range(half):
                x0 = xs[base + j]
                x1 = xs[base + j + half]
                xs[base + j] = _check_kernel(x0, x1)
                xs[base + j + half] = _variable_kernel(x0, x1)
    return xs


def _uniform_numpy(xs, n):
    for i in range(1, n + 1):
        half = 1 << (i - 1)
        x = xs[:half].copy()
        xs[:half] = rca.lambda_log_array(rca.lambda_log_array(x) + _LN2)
        xs[half : 2 * half] = x + _LN2
    return xs


def _distinct_numpy(xs, n):
    size = xs.shape[0]
    for i in range(1, n + 1):
        span = 1 << i
        half = span >> 1
        v = xs.reshape(size // span, span)
        x0 = v[:, :half].copy()
        x1 = v[:, half:].copy()
        v[:, :half] = rca.check_node_combine_array(x0, x1)
        v[:, half:] = rca.variable_node_combine_array(x0, x1)
    return xs


def polarize_uniform(n, xi0, use_numba=None):
    """Polarized log-SNRs of all ``2**n`` input bits for a uniform channel.

    Parameters
    ----------
    n : int
        ``log2`` of the block length, ``0 <= n <= 24``.
    xi0 : float
        Channel log-SNR ``ln(Es/N0)``.
    use_numba : bool, optional
        Override the package-wide kernel selection.
    """
    n = _check_n(n)
    xi0 = float(xi0)
    if math.isnan(xi0):
        raise ValueError("xi0 must not be NaN")
    xs = np.empty(1 << n)
    xs[0] = xi0
    if USE_NUMBA if use_numba is None else use_numba:
        return _uniform_kernel(xs, n)
    return _uniform_numpy(xs, n)


def polarize_distinct(xs, use_numba=None):
    """Polarized log-SNRs when every coded bit has its own channel log-SNR."""
    xs = np.array(xs, dtype=float)
    if xs.ndim != 1 or xs.size == 0 or xs.size & (xs.size - 1):
        raise ValueError(f"length must be a power of two, got {xs.size}")
    if np.any(np.isnan(xs)):
        raise ValueError("log-SNRs must not be NaN")
    n = _check_n(xs.size.bit_length() - 1)
    if USE_NUMBA if use_numba is None else use_numba:
        return _distinct_kernel(xs, n)
    return _distinct_numpy(xs, n)


def _check_n(n):
    if int(n) != n or not 0 <= n <= MAX_N:
        raise ValueError(f"n must be an integer in [0, {MAX_N}], got {n!r}")
    return int(n)


def rank_bits(profile):
    """Input-bit indices sorted from most to least reliable.

    Ties go to the smaller index.
    """
    profile = np.asarray(profile, dtype=float)
    return np.lexsort((np.arange(profile.size), -profile))


@dataclass(frozen=True)
class CodeConstruction:
    """A polar code: block length ``2**n`` and its information set."""

    n: int
    k: int
    info_set: tuple
    design_snr_db: float = None
    method: str = "rca"
    profile: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        _check_n(self.n)
        info = tuple(sorted(int(i) for i in self.info_set))
        if len(set(info)) != len(info):
            raise ValueError("duplicate indices in info_set")
        if len(info) != self.k:
            raise ValueError(f"info_set has {len(info)} entries, expected k={self.k}")
        if info and (info[0] < 0 or info[-1] >= self.block_length):
            raise ValueError("info_set index out of range")
        object.__setattr__(self, "info_set", info)

    @property
    def block_length(self):
        return 1 << self.n

    @property
    def rate(self):
        return self.k / self.block_length

    @property
    def info_mask(self):
        mask = np.zeros(self.block_length, dtype=bool)
        mask[list(self.info_set)] = True
        return mask

    @property
    def frozen_mask(self):
        return ~self.info_mask

    def to_dict(self):
        return {
            "n": self.block_length,
            "k": self.k,
            "design_snr_db": self.design_snr_db,
            "method": self.method,
            "info_set": list(self.info_set),
        }

    @classmethod
    def from_dict(cls, d):
        length = int(d["n"])
        if length <= 0 or length & (length - 1):
            raise ValueError(f"block length must be a power of two, got {length}")
        snr = d.get("design_snr_db")
        return cls(
            n=length.bit_length() - 1,
            k=int(d["k"]),
            info_set=tuple(d["info_set"]),
            design_snr_db=None if snr is None else float(snr),
            method=d.get("method", "rca"),
        )

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def mask_text(self):
        """One line per input bit: ``1`` information, ``0`` frozen."""
        return "".join("1\n" if b else "0\n" for b in self.info_mask)

    @classmethod
    def from_mask_text(cls, text, design_snr_db=None, method="rca"):
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if any(ln not in ("0", "1") for ln in lines):
            raise ValueError("frozen mask lines must be 0 or 1")
        n = len(lines).bit_length() - 1
        if not lines or len(lines) != 1 << n:
            raise ValueError("frozen mask length must be a power of two")
        info = tuple(i for i, ln in enumerate(lines) if ln == "1")
        return cls(n, len(info), info, design_snr_db, method)

    def save(self, json_path, mask_path=None):
        with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_json() + "\n")
        if mask_path is not None:
            with open(mask_path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(self.mask_text())

    @classmethod
    def load(cls, json_path):
        with open(json_path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def select_information_set(profile, k, design_snr_db=None, method="rca"):
    """Pick the ``k`` input bits with the largest polarized log-SNR."""
    profile = np.asarray(profile, dtype=float)
    size = profile.size
    if size == 0 or size & (size - 1):
        raise ValueError("profile length must be a power of two")
    if int(k) != k or not 0 <= k <= size:
        raise ValueError(f"k must be an integer in [0, {size}], got {k!r}")
    info = rank_bits(profile)[: int(k)]
    return CodeConstruction(
        n=size.bit_length() - 1,
        k=int(k),
        info_set=tuple(info.tolist()),
        design_snr_db=design_snr_db,
        method=method,
        profile=profile,
    )


# Constructors map (n, design log-SNR) to a profile.  Only RCA ships here;
# GA-style baselines can register under their own tag.
CONSTRUCTORS = {"rca": polarize_uniform}


def construct(n, k, design_snr_db, method="rca"):
    """Design a length-``2**n`` code with ``k`` information bits."""
    try:
        polarize = CONSTRUCTORS[method]
    except KeyError:
        raise ValueError(f"unknown construction method {method!r}") from None
    profile = polarize(n, db_to_xi(design_snr_db))
    return select_information_set(profile, k, float(design_snr_db), method)

"""Reciprocal channel mapping in the log-SNR domain.

``lambda_log(xi)`` is ``ln Psi(exp(xi))`` where ``Psi(gamma)`` is the SNR
whose capacity is ``1 - C(gamma)``.  Under the reciprocal channel
approximation, check nodes add reciprocal SNRs the way variable nodes add
SNRs, which gives the two combiners below.

``NEG_INF`` stands for a fully erased channel (``gamma = 0``): it absorbs at
check nodes and is the identity at variable nodes.
"""

import math

import numpy as np

from . import capacity as cap
from ._jit import USE_NUMBA, njit

NEG_INF = -math.inf

_LN2 = math.log(2.0)
_LN_LN2 = math.log(_LN2)
_LN_ALPHA = math.log(cap.ALPHA)
_LN_H21 = math.log(cap.H21)
_LN_H31 = math.log(cap.H31)
_B_CONST = _LN2 + 2.0 * (_LN_ALPHA + _LN_LN2)
# exp(xi) is capped here so that the large-SNR branch cannot overflow.
_XI_CAP = math.log(1e300)

_XI0 = cap.XI0
_G1, _G2, _G3 = cap.GAMMA1, cap.GAMMA2, cap.GAMMA3
_C1, _C2 = cap.C1, cap.C2
_H21, _H22, _H23 = cap.H21, cap.H22, cap.H23
_H31, _H32, _H33 = cap.H31, cap.H32, cap.H33


@njit
def _lambda_kernel(xi):
    if xi == -math.inf:
        return math.inf
    if xi < _XI0:
        b = _B_CONST - 2.0 * xi
        return math.log(b + (1.0 / b - 1.0) * math.log(b)) - _LN2
    g = math.exp(min(xi, _XI_CAP))
    if g > _G3:
        return _LN_LN2 + _LN_ALPHA - g - 0.5 * xi
    if g < _G1:
        u = 1.0 - (g - g * g + (4.0 / 3.0) * g * g * g) / _LN2
    elif g < _G2:
        u = 1.0 - (-math.expm1(-_H21 * g**_H22)) ** _H23
    else:
        u = 1.0 - (-math.expm1(-_H31 * g**_H32)) ** _H33
    if u < _C1:
        lu = _LN2 * u
        a = (-5.0 + 24.0 * lu + 2.0 * math.sqrt(13.0 + 12.0 * lu * (12.0 * lu - 5.0))) ** (1.0 / 3.0)
        return math.log(1.0 - 3.0 / a + a) - 2.0 * _LN2
    if u < _C2:
        return (math.log(-math.log1p(-(u ** (1.0 / _H23)))) - _LN_H21) / _H22
    return (math.log(-math.log1p(-(u ** (1.0 / _H33)))) - _LN_H31) / _H32


@njit
def _check_kernel(xi0, xi1):
    if xi0 == -math.inf or xi1 == -math.inf:
        return -math.inf
    l0 = _lambda_kernel(xi0)
    l1 = _lambda_kernel(xi1)
    if l0 == l1:
        return _lambda_kernel(l0 + _LN2)
    return _lambda_kernel(max(l0, l1) + math.log1p(math.exp(-abs(l0 - l1))))


@njit
def _variable_kernel(xi0, xi1):
    if xi0 == -math.inf:
        return xi1
    if xi1 == -math.inf:
        return xi0
    return max(xi0, xi1) + math.log1p(math.exp(-abs(xi0 - xi1)))


def _finite_or_neg_inf(xi):
    xi = float(xi)
    if math.isnan(xi):
        raise ValueError("log-SNR must not be NaN")
    return xi


def lambda_log(xi):
    """Reciprocal log-SNR ``Lambda(xi)`` of a single channel.

    Follows the closed-form evaluation order exactly: a Lambert-W asymptote
    for ``xi < XI0``, a large-SNR asymptote for ``exp(xi) > 10``, and
    otherwise ``U`` from the matching approximation branch inverted through
    the matching capacity-inverse branch.
    """
    return _lambda_kernel(_finite_or_neg_inf(xi))


def lambda_log_array(xi):
    """Vectorised :func:`lambda_log` in plain numpy."""
    xi = np.asarray(xi, dtype=float)
    if np.any(np.isnan(xi)):
        raise ValueError("log-SNR must not be NaN")
    with np.errstate(all="ignore"):
        b = _B_CONST - 2.0 * xi
        low = np.log(b + (1.0 / b - 1.0) * np.log(b)) - _LN2

        g = np.exp(np.minimum(xi, _XI_CAP))
        high = _LN_LN2 + _LN_ALPHA - g - 0.5 * xi

        u = np.select(
            [g < _G1, g < _G2],
            [
                1.0 - (g - g * g + (4.0 / 3.0) * g**3) / _LN2,
                1.0 - (-np.expm1(-_H21 * g**_H22)) ** _H23,
            ],
            default=1.0 - (-np.expm1(-_H31 * g**_H32)) ** _H33,
        )
        lu = _LN2 * u
        a = np.cbrt(-5.0 + 24.0 * lu + 2.0 * np.sqrt(13.0 + 12.0 * lu * (12.0 * lu - 5.0)))
        inv1 = np.log(1.0 - 3.0 / a + a) - 2.0 * _LN2
        inv2 = (np.log(-np.log1p(-(u ** (1.0 / _H23)))) - _LN_H21) / _H22
        inv3 = (np.log(-np.log1p(-(u ** (1.0 / _H33)))) - _LN_H31) / _H32
        mid = np.select([u < _C1, u < _C2], [inv1, inv2], default=inv3)

        out = np.select([xi < _XI0, g > _G3], [low, high], default=mid)
    out = np.where(xi == -np.inf, np.inf, out)
    return out


def check_node_combine(xi0, xi1):
    """Output log-SNR of the check-node (first decoded) bit of a kernel."""
    return _check_kernel(_finite_or_neg_inf(xi0), _finite_or_neg_inf(xi1))


def variable_node_combine(xi0, xi1):
    """Output log-SNR of the variable-node bit: ``ln(exp(xi0) + exp(xi1))``."""
    return _variable_kernel(_finite_or_neg_inf(xi0), _finite_or_neg_inf(xi1))


def check_node_combine_array(xi0, xi1):
    """Vectorised :func:`check_node_combine` in plain numpy."""
    xi0 = np.asarray(xi0, dtype=float)
    xi1 = np.asarray(xi1, dtype=float)
    l0 = lambda_log_array(xi0)
    l1 = lambda_log_array(xi1)
    with np.errstate(invalid="ignore"):
        s = np.where(l0 == l1, l0 + _LN2, np.logaddexp(l0, l1))
    out = lambda_log_array(s)
    return np.where((xi0 == -np.inf) | (xi1 == -np.inf), -np.inf, out)


def variable_node_combine_array(xi0, xi1):
    """Vectorised :func:`variable_node_combine` in plain numpy."""
    return np.logaddexp(np.asarray(xi0, dtype=float), np.asarray(xi1, dtype=float))


__all__ = [
    "NEG_INF",
    "USE_NUMBA",
    "lambda_log",
    "lambda_log_array",
    "check_node_combine",
    "variable_node_combine",
    "check_node_combine_array",
    "variable_node_combine_array",
]

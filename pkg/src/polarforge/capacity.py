"""Closed-form BI-AWGN mutual information for BPSK and its inverse.

All SNRs here are linear Es/N0 values ``gamma``.  ``U(gamma) = 1 - C(gamma)``
is carried alongside the capacity itself because the interesting regimes of
polar code construction live where one of the two is tiny.

The approximation is split into four regions::

    R1 = (0, 0.04)    cubic Maclaurin polynomial
    R2 = [0.04, 1)    1 - (1 - exp(-h1 g**h2))**h3
    R3 = [1, 10)      same form, second coefficient set
    R4 = [10, inf)    alpha * exp(-g) / sqrt(g)
"""

import csv
import math
from functools import lru_cache

import numpy as np
from scipy.special import roots_hermite

LN2 = math.log(2.0)

# Region boundaries (linear SNR).
GAMMA1 = 0.04
GAMMA2 = 1.0
GAMMA3 = 10.0

# High-SNR coefficient of the U4 branch.
ALPHA = 1.16125142

H21, H22, H23 = 1.396634, 0.872764, 1.148562
H31, H32, H33 = 1.266967, 0.938175, 0.986830

# Values of U and C at the region boundaries, as published.
U1C = 0.9444774
U2C = 0.2785484
U3C = 1.667e-5
C1 = 0.055523
C2 = 0.721452
C3 = 0.999983

# Below GAMMA0 (log: XI0) the Lambert-W branch of the inverse is active for
# the reciprocal map and its asymptotic form takes over.
GAMMA0 = 1.21974e-5
XI0 = -11.3143

# ten Brink J(x) coefficients, used only in error_report.
_TB_A1, _TB_B1, _TB_C1 = -0.0421061, 0.209252, -0.00640081
_TB_A2, _TB_B2, _TB_C2, _TB_D = 0.00181491, -0.142675, -0.0822054, 0.0549608
_TB_X1, _TB_X2 = 1.6363, 10.0

# Brannstrom J(x) coefficients, used only in error_report.
_BR_H1, _BR_H2, _BR_H3 = 0.3073, 0.8935, 1.1064


class ConvergenceError(RuntimeError):
    """Raised when the quadrature oracle cannot reach its accuracy target."""


def _check_gamma(gamma):
    g = np.asarray(gamma, dtype=float)
    if not np.all(np.isfinite(g)) or np.any(g <= 0):
        raise ValueError("gamma must be positive and finite")
    return g


def _out(g, scalar):
    return float(g) if scalar else g


def u_hat(gamma):
    """Approximate ``U(gamma) = 1 - C(gamma)``.

    Accepts a scalar or array; region intervals are half-open on the right,
    so ``u_hat(1.0)`` is evaluated on the R3 branch.
    """
    scalar = np.ndim(gamma) == 0
    g = _check_gamma(gamma)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        u1 = 1.0 - (g - g * g + (4.0 / 3.0) * g**3) / LN2
        u2 = 1.0 - (-np.expm1(-H21 * g**H22)) ** H23
        u3 = 1.0 - (-np.expm1(-H31 * g**H32)) ** H33
        u4 = ALPHA * np.exp(-g) / np.sqrt(g)
    u = np.select(
        [g < GAMMA1, g < GAMMA2, g < GAMMA3],
        [u1, u2, u3],
        default=u4,
    )
    return _out(u, scalar)


def c_hat(gamma):
    """Approximate BI-AWGN capacity in bits per channel use.

    Each branch is evaluated in the form that keeps its small quantity exact
    (``C`` itself in R1, ``1 - U`` where ``U`` is small), which is the same
    function as ``1 - u_hat`` up to rounding.
    """
    scalar = np.ndim(gamma) == 0
    g = _check_gamma(gamma)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        c1 = (g - g * g + (4.0 / 3.0) * g**3) / LN2
        c2 = (-np.expm1(-H21 * g**H22)) ** H23
        c3 = (-np.expm1(-H31 * g**H32)) ** H33
        c4 = 1.0 - ALPHA * np.exp(-g) / np.sqrt(g)
    c = np.select(
        [g < GAMMA1, g < GAMMA2, g < GAMMA3],
        [c1, c2, c3],
        default=c4,
    )
    return _out(c, scalar)


def cubic_inverse(c):
    """Inverse of the R1 polynomial: solve ``(g - g^2 + 4g^3/3)/ln2 = c``."""
    c = np.asarray(c, dtype=float)
    lc = LN2 * c
    a = np.cbrt(-5.0 + 24.0 * lc + 2.0 * np.sqrt(13.0 + 12.0 * lc * (12.0 * lc - 5.0)))
    return 0.25 * (1.0 - 3.0 / a + a)


def lambert_w0(x, tol=1e-15, maxiter=100):
    """Principal branch of the Lambert W function for ``x > 0``.

    Halley iteration seeded with ``ln x - ln ln x`` above ``e`` and with
    ``x`` itself below.
    """
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise ValueError("lambert_w0 requires finite x > 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        lx = np.log(x)
        w = np.where(x > math.e, lx - np.log(np.maximum(lx, 1e-300)), x)
    for _ in range(maxiter):
        ew = np.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w = w - step
        if np.all(np.abs(step) <= tol * np.maximum(np.abs(w), 1e-300)):
            break
    return _out(w, scalar)


def c_hat_inverse(c):
    """Inverse of :func:`c_hat`, branching on the published ``C1, C2, C3``."""
    scalar = np.ndim(c) == 0
    c = np.asarray(c, dtype=float)
    if not np.all(np.isfinite(c)) or np.any(c <= 0) or np.any(c >= 1):
        raise ValueError("capacity must lie in the open interval (0, 1)")
    out = np.empty_like(c)
    r1 = c < C1
    r2 = (c >= C1) & (c < C2)
    r3 = (c >= C2) & (c < C3)
    r4 = c >= C3
    out[r1] = cubic_inverse(c[r1])
    out[r2] = (-np.log1p(-c[r2] ** (1.0 / H23)) / H21) ** (1.0 / H22)
    out[r3] = (-np.log1p(-c[r3] ** (1.0 / H33)) / H31) ** (1.0 / H32)
    out[r4] = 0.5 * lambert_w0(2.0 * (ALPHA / (1.0 - c[r4])) ** 2)
    return _out(out, scalar)


@lru_cache(maxsize=None)
def _hermite_rule(order):
    z, w = roots_hermite(order)
    return z, w / math.sqrt(math.pi)


_ORACLE_ORDERS = (64, 128, 256, 512, 1024, 2048, 4096)


def u_oracle(gamma, tol=1e-10):
    """``U(gamma)`` by Gauss-Hermite quadrature of the defining integral.

    With ``t = 4 gamma + 4 sqrt(gamma) z`` the integral becomes
    ``E[log2(1 + exp(-t))]`` for standard-normal-weighted ``z``.  The order
    is doubled until two successive estimates agree to ``tol``.
    Slow; intended for tests and the error report.
    """
    g = float(_check_gamma(gamma))
    prev = None
    for order in _ORACLE_ORDERS:
        z, w = _hermite_rule(order)
        t = 4.0 * g + 4.0 * math.sqrt(g) * z
        val = float(np.dot(w, np.logaddexp(0.0, -t))) / LN2
        if prev is not None and abs(val - prev) <= tol:
            return val
        prev = val
    raise ConvergenceError(
        f"Gauss-Hermite quadrature did not converge at gamma={g!r} "
        f"(last orders differ by {abs(val - prev):.3e})"
    )


def capacity_oracle(gamma, tol=1e-10):
    """BI-AWGN capacity by numerical integration (see :func:`u_oracle`)."""
    return 1.0 - u_oracle(gamma, tol)


def j_tenbrink(x):
    """ten Brink et al. piecewise fit of J(x); returns ``(J, 1 - J)``."""
    x = float(x)
    if x <= _TB_X1:
        j = _TB_A1 * x**3 + _TB_B1 * x**2 + _TB_C1 * x
        return j, 1.0 - j
    if x <= _TB_X2:
        one_minus = math.exp(_TB_A2 * x**3 + _TB_B2 * x**2 + _TB_C2 * x + _TB_D)
        return 1.0 - one_minus, one_minus
    return 1.0, 0.0


def j_brannstrom(x):
    """Brannstrom et al. fit of J(x); returns ``(J, 1 - J)``."""
    x = float(x)
    j = (-math.expm1(-LN2 * _BR_H1 * x ** (2.0 * _BR_H2))) ** _BR_H3
    return j, 1.0 - j


def error_report(grid):
    """Approximation error ``eps = C_approx - C`` over a grid of linear SNRs.

    Returns a list of dicts with keys ``gamma_db``, ``eps_proposed``,
    ``eps_tenbrink`` and ``eps_brannstrom``.  The comparison fits take
    ``x = sqrt(8 gamma)``.  Errors are formed from the ``U`` side so that
    they stay accurate where ``C`` is close to one.
    """
    grid = [float(g) for g in grid]
    if not grid:
        raise ValueError("grid must be non-empty")
    _check_gamma(grid)
    rows = []
    for g in grid:
        u = u_oracle(g)
        x = math.sqrt(8.0 * g)
        rows.append(
            {
                "gamma_db": 10.0 * math.log10(g),
                "eps_proposed": u - u_hat(g),
                "eps_tenbrink": u - j_tenbrink(x)[1],
                "eps_brannstrom": u - j_brannstrom(x)[1],
            }
        )
    return rows


REPORT_FIELDS = ("gamma_db", "eps_proposed", "eps_tenbrink", "eps_brannstrom")


def write_error_report(rows, path):
    """Write :func:`error_report` rows as CSV with 12 significant digits."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_FIELDS)
        for row in rows:
            writer.writerow([f"{row[k]:.12g}" for k in REPORT_FIELDS])

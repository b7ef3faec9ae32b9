"""The numba kernels and their numpy twins must agree."""

import os
import subprocess
import sys

import numpy as np
import pytest

from polarforge.polarization import construct, db_to_xi, polarize_distinct, polarize_uniform
from polarforge.sim import awgn_llrs, encode, sc_decode


@pytest.mark.parametrize("n", [0, 1, 5, 12])
def test_uniform(n):
    xi = db_to_xi(-0.5)
    np.testing.assert_allclose(
        polarize_uniform(n, xi, use_numba=True),
        polarize_uniform(n, xi, use_numba=False),
        rtol=1e-10,
        atol=1e-10,
    )


def test_distinct():
    rng = np.random.default_rng(0)
    xs = rng.uniform(-12, 4, 1024)
    xs[::97] = -np.inf
    a = polarize_distinct(xs, use_numba=True)
    b = polarize_distinct(xs, use_numba=False)
    assert np.array_equal(np.isneginf(a), np.isneginf(b))
    fin = np.isfinite(a)
    np.testing.assert_allclose(a[fin], b[fin], rtol=1e-10, atol=1e-10)


def test_encode():
    rng = np.random.default_rng(1)
    u = rng.integers(0, 2, (50, 256), dtype=np.uint8)
    assert np.array_equal(encode(u, use_numba=True), encode(u, use_numba=False))


def test_decode():
    rng = np.random.default_rng(2)
    cons = construct(8, 128, 0.0)
    u = np.zeros((200, 256), dtype=np.uint8)
    u[:, cons.info_mask] = rng.integers(0, 2, (200, 128), dtype=np.uint8)
    llr = awgn_llrs(encode(u), 1.0, rng)
    ua, _, da = sc_decode(llr, cons, return_llrs=True, use_numba=True)
    ub, _, db = sc_decode(llr, cons, return_llrs=True, use_numba=False)
    assert np.array_equal(ua, ub)
    np.testing.assert_allclose(da, db, rtol=1e-9, atol=1e-9)


@pytest.mark.parametrize("value, expected", [("0", "False"), ("off", "False"), ("1", "True")])
def test_env_flag(value, expected):
    env = dict(os.environ, POLARFORGE_NUMBA=value)
    out = subprocess.run(
        [sys.executable, "-c", "from polarforge._jit import USE_NUMBA; print(USE_NUMBA)"],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == expected

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erfc, logsumexp

from polarforge.bler import estimate_bler_at
from polarforge.polarization import CodeConstruction, construct
from polarforge.sim import (
    NOISELESS_LLR,
    SIM_CSV_FIELDS,
    SimConfig,
    append_sim_csv,
    awgn_llrs,
    bit_reversal,
    confidence_interval,
    encode,
    run_monte_carlo,
    sc_decode,
    sim_csv_row,
)

F = np.array([[1, 0], [1, 1]], dtype=np.int64)


def kron_power(n):
    g = np.ones((1, 1), dtype=np.int64)
    for _ in range(n):
        g = np.kron(g, F)
    return g


def encode_matrix(u):
    u = np.asarray(u, dtype=np.int64)
    n = u.size.bit_length() - 1
    return (u @ kron_power(n)) % 2


def sc_oracle(llr, frozen):
    """Brute-force SC: decide bits in bit-reversed index order, each by the
    exact marginal LLR given the earlier decisions (later bits uniform)."""
    size = llr.size
    n = size.bit_length() - 1
    order = bit_reversal(n)
    g = kron_power(n)
    u = np.zeros(size, dtype=np.int64)
    dec = np.zeros(size)
    for t, k in enumerate(order):
        later = order[t + 1 :]
        logp = [[], []]
        for bit in (0, 1):
            for rest in itertools.product((0, 1), repeat=len(later)):
                v = u.copy()
                v[k] = bit
                v[later] = rest
                x = (v @ g) % 2
                logp[bit].append(np.sum(0.5 * llr * (1 - 2 * x)))
        dec[k] = logsumexp(logp[0]) - logsumexp(logp[1])
        u[k] = 0 if frozen[k] else int(dec[k] < 0)
    return u, dec


def random_messages(cons, count, rng):
    u = np.zeros((count, cons.block_length), dtype=np.uint8)
    u[:, cons.info_mask] = rng.integers(0, 2, (count, cons.k), dtype=np.uint8)
    return u


# --- encoder -------------------------------------------------------------------


def test_bit_reversal():
    assert bit_reversal(3).tolist() == [0, 4, 2, 6, 1, 5, 3, 7]
    r = bit_reversal(6)
    assert np.array_equal(r[r], np.arange(64))


def test_encode_n2():
    assert encode([1, 1]).tolist() == [0, 1]


def test_encode_n4_hand():
    u = [1, 0, 1, 0]
    # stage 1 on pairs, then stage 2 across halves
    v = [u[0] ^ u[1], u[1], u[2] ^ u[3], u[3]]
    x = [v[0] ^ v[2], v[1] ^ v[3], v[2], v[3]]
    assert encode(u).tolist() == x
    assert encode(u).tolist() == encode_matrix(u).tolist()


def test_encode_matches_matrix():
    rng = np.random.default_rng(0)
    u = rng.integers(0, 2, (20, 32), dtype=np.uint8)
    got = encode(u)
    for row, x in zip(u, got):
        assert np.array_equal(x, encode_matrix(row))


def test_encode_zero():
    assert not encode(np.zeros(64, dtype=np.uint8)).any()


@given(st.lists(st.integers(0, 1), min_size=16, max_size=16), st.lists(st.integers(0, 1), min_size=16, max_size=16))
@settings(max_examples=50, deadline=None)
def test_encode_linear(a, b):
    a = np.array(a, dtype=np.uint8)
    b = np.array(b, dtype=np.uint8)
    assert np.array_equal(encode(a ^ b), encode(a) ^ encode(b))


def test_encode_validation():
    cons = construct(3, 4, 0.0)
    with pytest.raises(ValueError):
        encode(np.zeros(6, dtype=np.uint8))
    with pytest.raises(ValueError):
        encode(np.zeros(16, dtype=np.uint8), cons)
    u = np.zeros(8, dtype=np.uint8)
    u[np.flatnonzero(cons.frozen_mask)[0]] = 1
    with pytest.raises(ValueError):
        encode(u, cons)


# --- channel -------------------------------------------------------------------


def test_llr_moments():
    rng = np.random.default_rng(1)
    llr = awgn_llrs(np.zeros(1_000_000, dtype=np.uint8), 1.0, rng)
    assert abs(llr.mean() - 4.0) < 0.01
    assert abs(llr.var() - 8.0) < 0.05


def test_noiseless_signs():
    rng = np.random.default_rng(2)
    x = rng.integers(0, 2, 1000)
    llr = awgn_llrs(x, 1e12, rng)
    assert np.array_equal(llr < 0, x == 1)


def test_awgn_rejects_bad_snr():
    with pytest.raises(ValueError):
        awgn_llrs([0, 1], 0.0, np.random.default_rng())


# --- decoder -------------------------------------------------------------------


def test_n2_single_kernel():
    cons = CodeConstruction(1, 2, (0, 1))
    for a, b in [(1.3, -0.4), (-2.0, -0.7), (0.2, 3.0), (-0.1, 0.05)]:
        f = 2 * math.atanh(math.tanh(a / 2) * math.tanh(b / 2))
        u0 = int(f < 0)
        u1 = int(b + (1 - 2 * u0) * a < 0)
        u, info, dec = sc_decode([a, b], cons, return_llrs=True)
        assert u.tolist() == [u0, u1]
        assert dec[0] == pytest.approx(f, rel=1e-12)


@pytest.mark.parametrize("n, k", [(2, 2), (3, 4), (3, 8), (4, 9)])
def test_against_brute_force_sc(n, k):
    rng = np.random.default_rng(n * 10 + k)
    cons = construct(n, k, 0.0)
    for _ in range(5):
        llr = rng.normal(1.0, 2.0, cons.block_length)
        u_ref, dec_ref = sc_oracle(llr, cons.frozen_mask)
        u, _, dec = sc_decode(llr, cons, return_llrs=True)
        assert np.array_equal(u, u_ref)
        np.testing.assert_allclose(dec, dec_ref, rtol=1e-9, atol=1e-9)


@pytest.mark.parametrize("n", [1, 3, 6])
def test_noiseless_round_trip(n):
    rng = np.random.default_rng(n)
    cons = construct(n, (1 << n) // 2, 0.0)
    u = random_messages(cons, 100, rng)
    llr = NOISELESS_LLR * (1.0 - 2.0 * encode(u))
    u_hat, info = sc_decode(llr, cons)
    assert np.array_equal(u_hat, u)
    assert np.array_equal(info, u[:, cons.info_mask])


def test_frozen_forced_to_zero():
    cons = construct(3, 2, 0.0)
    u_hat, _ = sc_decode(np.full(8, -5.0), cons)
    assert not u_hat[cons.frozen_mask].any()


def test_decode_shape_error():
    with pytest.raises(ValueError):
        sc_decode(np.zeros(4), construct(3, 4, 0.0))


def test_rate_one_is_hard_decision():
    # with every bit free, SC reduces to bitwise hard decisions on x
    cons = CodeConstruction(1, 2, (0, 1))
    rng = np.random.default_rng(3)
    trials = 100_000
    u = rng.integers(0, 2, (trials, 2), dtype=np.uint8)
    x = encode(u)
    u_hat, _ = sc_decode(awgn_llrs(x, 1.0, rng), cons)
    ber = np.mean(encode(u_hat) != x)
    want = 0.5 * erfc(1.0)  # Q(sqrt(2))
    assert want == pytest.approx(0.0786, abs=1e-4)
    assert abs(ber - want) < 3 * math.sqrt(want * (1 - want) / (2 * trials))


# --- harness -------------------------------------------------------------------


def test_confidence_interval():
    h, lo, hi = confidence_interval(100, 10_000)
    assert h == pytest.approx(1.959964 * math.sqrt(0.01 * 0.99 / 10_000), rel=1e-6)
    assert lo == pytest.approx(0.01 - h) and hi == pytest.approx(0.01 + h)
    h, lo, hi = confidence_interval(0, 100)  # Wilson
    assert lo == 0.0 and 0.03 < hi < 0.04
    h, lo, hi = confidence_interval(1, 1)
    assert hi == 1.0 and lo > 0.0


def test_config_validation():
    cons = construct(3, 4, 0.0)
    for bad in (dict(max_trials=0), dict(target_block_errors=0), dict(worker_count=0)):
        with pytest.raises(ValueError):
            SimConfig(cons, 0.0, **bad)


def test_single_trial():
    res = run_monte_carlo(SimConfig(construct(4, 8, 0.0), 0.0, max_trials=1, seed=3))
    assert res.trials_run == 1
    assert res.bler_point in (0.0, 1.0)


def test_reproducible():
    cons = construct(6, 32, 0.0)
    cfg = SimConfig(cons, -1.0, max_trials=3000, seed=11, worker_count=2, batch_size=500)
    a, b = run_monte_carlo(cfg), run_monte_carlo(cfg)
    assert (a.trials_run, a.block_errors) == (b.trials_run, b.block_errors)
    assert np.array_equal(a.bit_errors, b.bit_errors)
    c = run_monte_carlo(SimConfig(cons, -1.0, max_trials=3000, seed=12, worker_count=2, batch_size=500))
    assert not np.array_equal(a.bit_errors, c.bit_errors)


def test_early_stop():
    cons = construct(6, 32, 0.0)
    res = run_monte_carlo(
        SimConfig(cons, -3.0, max_trials=100_000, target_block_errors=20, seed=1, batch_size=200)
    )
    assert res.block_errors >= 20
    assert res.trials_run < 100_000
    assert res.trials_run % 200 == 0


def test_all_zero_mode_agrees():
    cons = construct(6, 32, 0.65)
    kw = dict(max_trials=20_000, target_block_errors=10**9, seed=5)
    a = run_monte_carlo(SimConfig(cons, 0.65, **kw))
    b = run_monte_carlo(SimConfig(cons, 0.65, all_zero=True, **kw))
    sigma = math.sqrt(a.bler_point * (1 - a.bler_point) / a.trials_run)
    assert abs(a.bler_point - b.bler_point) < 4 * math.sqrt(2) * sigma


def test_table_point_n64():
    est = estimate_bler_at(6, 32, 0.65)
    cons = construct(6, 32, 0.65)
    res = run_monte_carlo(SimConfig(cons, 0.65, max_trials=40_000, target_block_errors=10**9, seed=7))
    sigma = math.sqrt(0.0096 * (1 - 0.0096) / res.trials_run)
    assert abs(res.bler_point - 0.0096) < 3 * sigma
    assert res.bler_point >= est - 3 * sigma


def test_result_json():
    res = run_monte_carlo(SimConfig(construct(3, 4, 0.0), 0.0, max_trials=10, seed=0))
    d = res.to_dict()
    assert "bit_errors" not in d
    assert d["trials_run"] == 10


def test_sim_csv(tmp_path):
    cons = construct(3, 4, 0.0)
    res = run_monte_carlo(SimConfig(cons, 0.0, max_trials=10, seed=0))
    path = tmp_path / "s.csv"
    append_sim_csv(path, [sim_csv_row(cons, 0.0, res)])
    append_sim_csv(path, [sim_csv_row(cons, 1.0, res)])
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(SIM_CSV_FIELDS)
    assert len(lines) == 3

import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from airlink.channel import frequency_response, make_profile, draw_fading_params
from airlink.coding import (DecodeError, alamouti_stack, candidate_pairs, equivalent_channel,
                            sfbc_decode, sfbc_encode, stbc_decode, stbc_decode_grid, stbc_encode,
                            whtsfbc_decode, whtsfbc_encode, zero_forcing)
from airlink.modem import Modulation, map_bits
from airlink.transform import wht2

from conftest import crandn

S2 = np.sqrt(2.0)
BPSK_PAIRS = [np.array(p, dtype=complex) for p in itertools.product([1, -1], repeat=2)]


def received(h, streams):
    """Noiseless per-subcarrier reception: h (..., tx, rx, N), streams (..., tx, N)."""
    return np.einsum("...svk,...sk->...vk", h, streams)


# encoders

def test_stbc_encode_example():
    g = stbc_encode(np.array([1.0 + 0j]), np.array([-1.0 + 0j]))
    np.testing.assert_array_equal(g[:, :, 0], [[1, 1], [-1, 1]])   # [antenna, slot]


def test_stbc_encode_qpsk_conjugates():
    a1 = np.array([(1 + 1j) / S2])
    g = stbc_encode(a1, np.array([(1 - 1j) / S2]))
    assert g[1, 1, 0] == pytest.approx((1 - 1j) / S2)
    assert g[0, 1, 0] == pytest.approx(-(1 + 1j) / S2)


def test_stbc_encode_real_blocks(rng):
    a1, a2 = (1.0 - 2 * rng.integers(0, 2, (2, 8))).astype(complex)
    g = stbc_encode(a1, a2)
    np.testing.assert_array_equal(g[0, 1], -a2)
    np.testing.assert_array_equal(g[1, 1], a1)


def test_stbc_encode_length_mismatch():
    with pytest.raises(ValueError):
        stbc_encode(np.ones(4), np.ones(2))


def test_sfbc_encode_symbolic(rng):
    a = crandn(rng, 4)
    b = sfbc_encode(a)
    c = np.conj
    np.testing.assert_array_equal(b[0], [a[0], -c(a[1]), a[2], -c(a[3])])
    np.testing.assert_array_equal(b[1], [a[1], c(a[0]), a[3], c(a[2])])


def test_sfbc_encode_bpsk_example():
    b = sfbc_encode(np.array([1, 1, -1, -1], dtype=complex))
    np.testing.assert_array_equal(b, [[1, -1, -1, 1], [1, 1, -1, -1]])


@pytest.mark.parametrize("enc", [sfbc_encode, whtsfbc_encode])
def test_odd_length_rejected(enc):
    with pytest.raises(ValueError):
        enc(np.ones(3, dtype=complex))


@pytest.mark.parametrize("a, d1, d2", [
    ([1, 1], [0, S2], [S2, 0]),
    ([-1, 1], [-S2, 0], [0, S2]),
])
def test_whtsfbc_encode_bpsk_examples(a, d1, d2):
    d = whtsfbc_encode(np.array(a, dtype=complex))
    np.testing.assert_allclose(d[0], d1, atol=1e-15)
    np.testing.assert_allclose(d[1], d2, atol=1e-15)


def test_whtsfbc_qpsk_conjugate_pair_nulls_antenna_one():
    a = np.array([(1 + 1j) / S2, (1 - 1j) / S2])
    d = whtsfbc_encode(a)
    np.testing.assert_allclose(d[0], [0, 1 + 1j], atol=1e-15)


@given(st.lists(st.sampled_from([1.0, -1.0]), min_size=2, max_size=64).map(lambda v: v[: len(v) // 2 * 2]))
def test_bpsk_nulling_one_zero_per_pair(values):
    d = whtsfbc_encode(np.array(values, dtype=complex)).reshape(2, -1, 2)
    zeros = np.abs(d) < 1e-12
    assert np.all(zeros.sum(axis=-1) == 1)
    np.testing.assert_allclose(np.abs(d[~zeros]), S2, atol=1e-14)


@given(arrays(np.float64, 16, elements=st.floats(-10, 10)), arrays(np.float64, 16, elements=st.floats(-10, 10)))
def test_encoders_preserve_energy(re, im):
    a = re + 1j * im
    e = np.sum(np.abs(a) ** 2)
    assert np.sum(np.abs(sfbc_encode(a)) ** 2) == pytest.approx(2 * e, rel=1e-12, abs=1e-12)
    assert np.sum(np.abs(whtsfbc_encode(a)) ** 2) == pytest.approx(2 * e, rel=1e-12, abs=1e-12)
    np.testing.assert_allclose(wht2(sfbc_encode(a)), whtsfbc_encode(a))


# Alamouti stack and zero forcing

def test_stack_orthogonal_when_equal(rng):
    h = crandn(rng, 50, 2, 2)
    stack, _ = alamouti_stack(h, np.zeros((50, 2)), np.zeros((50, 2)))
    gram = np.conj(np.swapaxes(stack, -1, -2)) @ stack
    power = np.sum(np.abs(h) ** 2, axis=(-1, -2))
    np.testing.assert_allclose(gram, power[:, None, None] * np.eye(2), atol=1e-12)


def _stack_obs(h, a1, a2):
    # slot 1 sends (a1, a2), slot 2 sends (-conj a2, conj a1)
    a1, a2 = np.asarray(a1)[..., None], np.asarray(a2)[..., None]
    r1 = h[..., 0, :] * a1 + h[..., 1, :] * a2
    r2 = -h[..., 0, :] * np.conj(a2) + h[..., 1, :] * np.conj(a1)
    return alamouti_stack(h, r1, r2)


@pytest.mark.parametrize("h", [np.ones((2, 2)), np.array([[1, 0], [0, 0]], dtype=complex)])
def test_stbc_decode_exact(h):
    a1, a2 = (1 + 1j) / S2, (-1 + 1j) / S2
    est = stbc_decode(*_stack_obs(h.astype(complex), a1, a2))
    np.testing.assert_allclose(est, [a1, a2], atol=1e-15)


def test_stbc_decode_random_channels(rng):
    h = crandn(rng, 200, 2, 2)
    a = crandn(rng, 200, 2)
    est = stbc_decode(*_stack_obs(h, a[:, 0], a[:, 1]))
    assert np.max(np.abs(est - a)) < 1e-10


def test_singular_stack_raises_and_flags():
    stack, r = alamouti_stack(np.zeros((2, 2), dtype=complex), np.zeros(2), np.zeros(2))
    with pytest.raises(DecodeError):
        stbc_decode(stack, r)
    est, failed = zero_forcing(stack, r)
    assert failed and np.all(est == 0)


def test_stbc_grid_decode_static(rng):
    n = 16
    h = crandn(rng, 2, 2, n)
    a1, a2 = map_bits(rng.integers(0, 2, (2, 2 * n)).ravel(), Modulation.QPSK).reshape(2, n)
    grid = stbc_encode(a1, a2)                                  # (ant, slot, N)
    r = np.stack([received(h, grid[:, t]) for t in range(2)])   # (slot, rx, N)
    est, failed = stbc_decode_grid(r, h)
    assert not failed.any()
    np.testing.assert_allclose(est, [a1, a2], atol=1e-12)


# SFBC

def test_sfbc_flat_channel_exact(rng):
    h = np.repeat(crandn(rng, 2, 2, 1), 64, axis=-1)
    a = map_bits(rng.integers(0, 2, 128), Modulation.QPSK)
    est, failed = sfbc_decode(received(h, sfbc_encode(a)), h)
    assert not failed.any()
    np.testing.assert_allclose(est, a, atol=1e-12)


def test_sfbc_deep_mismatch_leaves_residual():
    h = np.zeros((2, 2, 2), dtype=complex)
    h[0, :, 0], h[0, :, 1] = 1, -1
    h[1, :, :] = 0.5
    a = np.array([1, 1], dtype=complex)
    est, _ = sfbc_decode(received(h, sfbc_encode(a)), h)
    assert np.max(np.abs(est - a)) > 0.1


def _static_responses(rng, name, n_draws, n=64):
    pdp = make_profile(name)
    taps = np.stack([draw_fading_params(pdp, rng).weights.sum(axis=-1) for _ in range(n_draws)])
    return frequency_response(taps, pdp.delays, n)


def _noiseless_ser(rng, name, n_draws=200):
    h = _static_responses(rng, name, n_draws)
    a = (1.0 - 2 * rng.integers(0, 2, (n_draws, 64))).astype(complex)
    est, _ = sfbc_decode(received(h, sfbc_encode(a)), h)
    return np.mean(np.sign(est.real) != a.real)


def test_sfbc_noiseless_ser_grows_with_selectivity(rng):
    ser1, ser3 = _noiseless_ser(rng, "ch1", 2000), _noiseless_ser(rng, "ch3", 2000)
    assert ser3 > 0
    assert ser1 < ser3


# WHT-SFBC

def test_candidate_order():
    c = candidate_pairs(Modulation.BPSK)
    np.testing.assert_array_equal(c, [[1, 1], [1, -1], [-1, 1], [-1, -1]])
    assert candidate_pairs(Modulation.QPSK).shape == (16, 2)


@pytest.mark.parametrize("m", list(Modulation))
def test_whtsfbc_flat_exact(rng, m):
    h = np.repeat(crandn(rng, 2, 2, 1), 64, axis=-1)
    a = map_bits(rng.integers(0, 2, 64 * m.bits_per_symbol), m)
    np.testing.assert_allclose(whtsfbc_decode(received(h, whtsfbc_encode(a)), h, m), a, atol=1e-12)


@pytest.mark.parametrize("name", ["ch1", "ch2", "ch3"])
def test_whtsfbc_noiseless_selective_exact(rng, name):
    h = _static_responses(rng, name, 300)
    a = (1.0 - 2 * rng.integers(0, 2, (300, 64))).astype(complex)
    dec = whtsfbc_decode(received(h, whtsfbc_encode(a)), h, Modulation.BPSK)
    np.testing.assert_array_equal(dec, a)


def test_whtsfbc_noiseless_qpsk_selective(rng):
    h = _static_responses(rng, "ch3", 200)
    a = map_bits(rng.integers(0, 2, 200 * 128), Modulation.QPSK).reshape(200, 64)
    dec = whtsfbc_decode(received(h, whtsfbc_encode(a)), h, Modulation.QPSK)
    np.testing.assert_allclose(dec, a, atol=1e-12)


def test_post_wht_observation_for_all_ones_pair(rng):
    h = crandn(rng, 2, 2, 2)
    w = wht2(received(h, whtsfbc_encode(np.array([1, 1], dtype=complex))))
    for v in range(2):
        expected = [h[0, v, 1] + h[1, v, 0], -h[0, v, 1] + h[1, v, 0]]
        np.testing.assert_allclose(w[v], expected, atol=1e-14)


@pytest.mark.parametrize("a", BPSK_PAIRS, ids=lambda p: f"{p.real[0]:+.0f}{p.real[1]:+.0f}")
def test_equivalent_channel_model(rng, a):
    h = crandn(rng, 1000, 2, 2, 2)
    w = wht2(received(h, whtsfbc_encode(a)))
    lam = equivalent_channel(h, np.broadcast_to(a, (1000, 2)))
    assert np.max(np.abs(w - received(lam, sfbc_encode(a)))) < 1e-12
    np.testing.assert_array_equal(lam[..., 0], lam[..., 1])


def test_equivalent_channel_rejects_qpsk():
    with pytest.raises(ValueError):
        equivalent_channel(np.ones((2, 2, 2)), np.array([(1 + 1j) / S2] * 2))


def test_ml_tie_breaks_to_lowest_index():
    # zero channel: every candidate has equal distance
    dec = whtsfbc_decode(np.zeros((2, 2), dtype=complex), np.zeros((2, 2, 2), dtype=complex), Modulation.BPSK)
    np.testing.assert_array_equal(dec, [1, 1])

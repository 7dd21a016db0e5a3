"""Channel layer: calibration, fading statistics, combining, interference."""

import math

import numpy as np
import pytest
from scipy import stats

from svcsim import (
    NOISE_VAR,
    ChannelModel,
    InterferenceSpec,
    ModulationScheme,
    ReceivedPacket,
    apply_channel,
    bits_capacity,
    derotate,
    encode,
    gen_bernoulli,
    mrc_combine,
)

M, N = 42, 96
QPSK = ModulationScheme.QPSK


def make_x(seed=5, payload=None):
    cb = gen_bernoulli(M, N, QPSK.alpha, seed=1)
    if payload is None:
        payload = int(np.random.default_rng(seed).integers(
            0, 1 << bits_capacity(N, QPSK.sparsity)))
    return encode(payload, cb, QPSK)


def test_awgn_channel_is_unfaded():
    x = make_x()
    model = ChannelModel(kind="awgn", snr_db=3.0, repetitions=4)
    pkt = apply_channel(x, model, np.random.default_rng(0))
    assert pkt.y.shape == (4, M)
    np.testing.assert_array_equal(pkt.h, np.ones((4, M)))
    assert pkt.sigma_v2 == NOISE_VAR


def test_snr_calibration_is_exact_per_packet():
    # the 2-value pattern gives ||x||^2 = m exactly, so the transmitted
    # signal power over the noise variance must equal the configured SNR
    # with no Monte Carlo slack at all
    x = make_x()
    for snr_db in (-7.0, 0.0, 4.5, 13.0):
        model = ChannelModel(kind="awgn", snr_db=snr_db)
        pkt = apply_channel(x, model, np.random.default_rng(0))
        signal = pkt.gamma * pkt.h[0] * x
        measured = np.linalg.norm(signal) ** 2 / (M * pkt.sigma_v2)
        assert measured == pytest.approx(10 ** (snr_db / 10), rel=1e-12)


def test_noise_variance_is_unit():
    x = np.zeros(M, dtype=np.complex128)
    model = ChannelModel(kind="awgn", snr_db=0.0)
    rng = np.random.default_rng(7)
    samples = np.concatenate(
        [apply_channel(x, model, rng).y.ravel() for _ in range(400)])
    assert np.mean(np.abs(samples) ** 2) == pytest.approx(1.0, rel=0.02)
    # circular symmetry: real and imag parts each carry half the power
    assert np.mean(samples.real**2) == pytest.approx(0.5, rel=0.03)
    assert np.mean(samples.imag**2) == pytest.approx(0.5, rel=0.03)
    assert abs(np.mean(samples.real * samples.imag)) < 0.01


def test_rayleigh_gain_statistics():
    x = make_x()
    model = ChannelModel(kind="rayleigh", snr_db=0.0)
    rng = np.random.default_rng(11)
    hs = np.concatenate(
        [apply_channel(x, model, rng).h.ravel() for _ in range(300)])
    assert np.mean(np.abs(hs) ** 2) == pytest.approx(1.0, rel=0.03)
    # 2|h|^2 is chi-squared with 2 degrees of freedom
    ks = stats.kstest(2 * np.abs(hs) ** 2, "chi2", args=(2,))
    assert ks.pvalue > 0.01


def test_repetition_fading_switch():
    x = make_x()
    rng = np.random.default_rng(3)
    ident = apply_channel(
        x, ChannelModel(kind="rayleigh", repetitions=4,
                        repetition_fading="identical"), rng)
    for l in range(1, 4):
        np.testing.assert_array_equal(ident.h[l], ident.h[0])
    indep = apply_channel(
        x, ChannelModel(kind="rayleigh", repetitions=4,
                        repetition_fading="independent"), rng)
    assert not np.array_equal(indep.h[1], indep.h[0])


def test_rand_const_channel_is_a_single_scalar():
    x = make_x()
    model = ChannelModel(kind="rand_const", repetitions=3)
    pkt = apply_channel(x, model, np.random.default_rng(9))
    assert np.all(pkt.h == pkt.h[0, 0])
    assert pkt.h[0, 0] != 1.0  # actually random, not the unfaded value
    other = apply_channel(x, model, np.random.default_rng(10))
    assert other.h[0, 0] != pkt.h[0, 0]


def test_pilotless_strips_channel_knowledge():
    x = make_x()
    model = ChannelModel(kind="rand_const", pilotless=True)
    pkt = apply_channel(x, model, np.random.default_rng(2))
    assert pkt.h is None
    with pytest.raises(ValueError):
        mrc_combine(pkt)
    with pytest.raises(ValueError):
        ChannelModel(kind="rand_const", pilotless=True, repetitions=2)


def test_channel_model_validation():
    with pytest.raises(ValueError):
        ChannelModel(kind="rician")
    with pytest.raises(ValueError):
        ChannelModel(repetitions=0)
    with pytest.raises(ValueError):
        ChannelModel(repetition_fading="correlated")
    with pytest.raises(ValueError):
        InterferenceSpec(gen_bernoulli(M, N, QPSK.alpha, seed=2), -0.5, QPSK)


def test_mrc_combine_hand_example():
    # one resource element, two repetitions, h = (1, j):
    # combined = conj(1) y0 + conj(j) y1, gain = 2
    y = np.array([[2.0 + 1.0j], [1.0 - 1.0j]])
    h = np.array([[1.0 + 0.0j], [0.0 + 1.0j]])
    pkt = ReceivedPacket(y, h, gamma=1.0)
    combined, gain = mrc_combine(pkt)
    assert combined[0] == pytest.approx(1.0 + 0.0j, abs=1e-15)
    assert gain[0] == pytest.approx(2.0, abs=1e-15)


def test_mrc_combine_aligns_matched_signal():
    # noiseless y = h * s combines to gain * s exactly
    rng = np.random.default_rng(21)
    s = rng.standard_normal(M) + 1j * rng.standard_normal(M)
    h = rng.standard_normal((8, M)) + 1j * rng.standard_normal((8, M))
    pkt = ReceivedPacket(h * s[None, :], h, gamma=1.0)
    combined, gain = mrc_combine(pkt)
    np.testing.assert_allclose(gain, np.sum(np.abs(h) ** 2, axis=0), rtol=1e-12)
    np.testing.assert_allclose(combined, gain * s, rtol=1e-12)
    assert np.all(gain >= 0)
    assert gain.dtype == np.float64


def test_derotate_properties():
    rng = np.random.default_rng(4)
    y = rng.standard_normal(10) + 1j * rng.standard_normal(10)
    h = rng.standard_normal(10) + 1j * rng.standard_normal(10)
    rotated, mag = derotate(y, h)
    np.testing.assert_allclose(np.abs(rotated), np.abs(y), rtol=1e-12)
    np.testing.assert_allclose(mag, np.abs(h), rtol=1e-12)
    # rotating the channel by itself lands on the positive real axis
    h_rot, _ = derotate(h, h)
    np.testing.assert_allclose(h_rot.imag, 0.0, atol=1e-12)
    assert np.all(h_rot.real > 0)
    # zero gain entries pass through untouched
    y0, m0 = derotate(np.array([1.0 + 2.0j]), np.array([0.0 + 0.0j]))
    assert y0[0] == 1.0 + 2.0j
    assert m0[0] == 0.0


def interference_spec(ratio):
    return InterferenceSpec(
        gen_bernoulli(M, N, QPSK.alpha, seed=77), ratio, QPSK)


def test_zero_power_interference_is_bit_exact_with_none():
    x = make_x()
    base = ChannelModel(kind="rayleigh", snr_db=2.0, repetitions=2)
    withzero = ChannelModel(kind="rayleigh", snr_db=2.0, repetitions=2,
                            interference=interference_spec(0.0))
    a = apply_channel(x, base, np.random.default_rng(6))
    b = apply_channel(x, withzero, np.random.default_rng(6))
    np.testing.assert_array_equal(a.y, b.y)
    np.testing.assert_array_equal(a.h, b.h)


def test_interference_power_scales_with_ratio():
    # fixed seed means the interfering payload and fading repeat, so the
    # added term scales exactly like sqrt(power_ratio)
    x = make_x()
    clean = apply_channel(
        x, ChannelModel(kind="awgn", snr_db=2.0, repetitions=2),
        np.random.default_rng(8))
    deltas = []
    for ratio in (0.5, 2.0):
        model = ChannelModel(kind="awgn", snr_db=2.0, repetitions=2,
                             interference=interference_spec(ratio))
        pkt = apply_channel(x, model, np.random.default_rng(8))
        deltas.append(pkt.y - clean.y)
    np.testing.assert_allclose(deltas[1], deltas[0] * 2.0, rtol=1e-12)
    # redrawn per repetition: the two rows carry different interference
    assert not np.allclose(deltas[0][0], deltas[0][1])


def test_apply_channel_is_deterministic_per_seed():
    x = make_x()
    model = ChannelModel(kind="rayleigh", snr_db=1.0, repetitions=2,
                         interference=interference_spec(0.5))
    a = apply_channel(x, model, np.random.default_rng(123))
    b = apply_channel(x, model, np.random.default_rng(123))
    np.testing.assert_array_equal(a.y, b.y)
    np.testing.assert_array_equal(a.h, b.h)
    c = apply_channel(x, model, np.random.default_rng(124))
    assert not np.array_equal(a.y, c.y)


def test_gamma_tracks_snr():
    x = make_x()
    p0 = apply_channel(x, ChannelModel(kind="awgn", snr_db=0.0),
                       np.random.default_rng(0))
    p10 = apply_channel(x, ChannelModel(kind="awgn", snr_db=10.0),
                        np.random.default_rng(0))
    assert p0.gamma == pytest.approx(1.0, rel=1e-15)
    assert p10.gamma / p0.gamma == pytest.approx(math.sqrt(10), rel=1e-12)
    # identical noise realization: the signal part alone explains the gap
    np.testing.assert_allclose(
        p10.y - p0.y, (p10.gamma - p0.gamma) * x[None, :], rtol=1e-12)

"""Codebook families: scaling, orthogonality, serialization, coherence."""

import json
import math

import mpmath
import numpy as np
import pytest

from svcsim import (
    Codebook,
    ModulationScheme,
    bernoulli_mu_bound,
    effective_mu_star,
    gen_bernoulli,
    gen_gaussian,
    gen_sorm,
    max_correlation,
)

ALPHA = ModulationScheme.QPSK.alpha


def block_pattern(d, pairs):
    """Symmetric 0/1 matrix with 1s at the given (i, j) index pairs."""
    p = np.zeros((d, d), dtype=int)
    for i, j in pairs:
        p[i, j] = p[j, i] = 1
    return p


def test_bernoulli_entries_and_column_norm():
    cb = gen_bernoulli(42, 96, ALPHA, seed=0)
    assert cb.entries.shape == (42, 96)
    assert cb.entries.dtype == np.complex128
    mags = np.unique(cb.entries.real * ALPHA)
    np.testing.assert_array_equal(mags, [-1.0, 1.0])
    assert np.all(cb.entries.imag == 0)
    norms = np.linalg.norm(cb.entries, axis=0)
    np.testing.assert_allclose(norms, math.sqrt(42) / ALPHA, rtol=1e-15)
    assert cb.column_norm == pytest.approx(math.sqrt(42) / ALPHA, abs=0)


def test_bernoulli_seed_determinism():
    a = gen_bernoulli(16, 24, ALPHA, seed=5)
    b = gen_bernoulli(16, 24, ALPHA, seed=5)
    c = gen_bernoulli(16, 24, ALPHA, seed=6)
    np.testing.assert_array_equal(a.entries, b.entries)
    assert not np.array_equal(a.entries, c.entries)


def test_entries_are_read_only():
    cb = gen_bernoulli(8, 12, ALPHA, seed=0)
    with pytest.raises(ValueError):
        cb.entries[0, 0] = 0


def test_gaussian_interface():
    cb = gen_gaussian(42, 96, ALPHA, seed=3)
    assert cb.kind == "gaussian"
    assert cb.entries.shape == (42, 96)
    # column norms concentrate at sqrt(m)/alpha but are not exact
    norms = np.linalg.norm(cb.entries, axis=0)
    assert abs(norms.mean() - cb.column_norm) < 0.2
    assert norms.std() > 0


def test_serialization_round_trip_bit_exact():
    for cb in (gen_bernoulli(42, 96, ALPHA, seed=11),
               gen_gaussian(16, 24, ALPHA, seed=2),
               gen_sorm(4, [np.zeros((4, 4), int),
                            block_pattern(4, [(0, 1), (2, 3)])], ALPHA)):
        blob = json.dumps(cb.to_dict())  # must be JSON-serializable
        back = Codebook.from_dict(json.loads(blob))
        assert back.kind == cb.kind
        np.testing.assert_array_equal(back.entries, cb.entries)
        assert back.alpha == cb.alpha


def test_sorm_dimensions_and_unit_modulus():
    d = 6
    p1 = np.zeros((d, d), dtype=int)
    p2 = block_pattern(d, [(0, 1), (2, 3), (4, 5)])
    cb = gen_sorm(d, [p1, p2], ALPHA)
    assert cb.m == 64
    assert cb.n_columns == 128
    np.testing.assert_allclose(np.abs(cb.entries), 1.0 / ALPHA, atol=1e-15)
    norms = np.linalg.norm(cb.entries, axis=0)
    np.testing.assert_allclose(norms, cb.column_norm, rtol=1e-14)


def test_sorm_within_block_orthogonality():
    d = 6
    cb = gen_sorm(d, [np.zeros((d, d), int),
                      block_pattern(d, [(0, 1), (2, 3), (4, 5)])], ALPHA)
    m = cb.m
    for blk in range(2):
        cols = cb.entries[:, blk * m:(blk + 1) * m]
        gram = cols.conj().T @ cols
        np.testing.assert_allclose(gram, np.eye(m) * (m / ALPHA**2),
                                   atol=1e-12)


def test_sorm_cross_block_correlation_powers_of_two():
    # |<phi_i, phi_j>| between blocks is 2^(-l/2) with l the GF(2) rank of
    # the XOR of the block patterns; full rank realizes it for every pair,
    # deficient rank for a 2^(l-d) fraction of pairs (the rest are exactly
    # orthogonal, quadratic-form character sums being 0-or-full)
    d = 6
    zero = np.zeros((d, d), dtype=int)
    full = block_pattern(d, [(0, 1), (2, 3), (4, 5)])   # rank 6
    half = block_pattern(d, [(0, 1), (2, 3)])           # rank 4
    small = block_pattern(d, [(0, 1)])                  # rank 2
    for other, l in ((full, 6), (half, 4), (small, 2)):
        cb = gen_sorm(d, [zero, other], ALPHA)
        a = cb.entries[:, :64]
        b = cb.entries[:, 64:]
        cross = np.abs(a.conj().T @ b) / cb.column_norm**2
        peak = 2.0 ** (-l / 2)
        assert abs(cross.max() - peak) < 1e-10
        hit = cross > peak - 1e-10
        np.testing.assert_allclose(cross[hit], peak, atol=1e-10)
        np.testing.assert_allclose(cross[~hit], 0.0, atol=1e-10)
        assert hit.mean() == pytest.approx(2.0 ** (l - d), abs=1e-12)
    # the full-rank pair used everywhere else: flat 0.125 exactly
    cb = gen_sorm(d, [zero, full], ALPHA)
    cross = np.abs(cb.entries[:, :64].conj().T @ cb.entries[:, 64:])
    np.testing.assert_allclose(cross / cb.column_norm**2, 0.125, atol=1e-10)


def test_sorm_pattern_validation():
    with pytest.raises(ValueError):
        gen_sorm(4, [np.zeros((3, 4), int)], ALPHA)
    with pytest.raises(ValueError):
        gen_sorm(4, [np.triu(np.ones((4, 4), int))], ALPHA)  # not symmetric
    with pytest.raises(ValueError):
        gen_sorm(4, [2 * np.eye(4, dtype=int)], ALPHA)  # not 0/1
    with pytest.raises(ValueError):
        gen_sorm(4, [], ALPHA)


def test_max_correlation_extremes():
    # orthogonal columns -> 0
    eye = np.eye(4, dtype=np.complex128)
    cb = Codebook("bernoulli", eye, 1.0, None)
    assert max_correlation(cb) == pytest.approx(0.0, abs=1e-15)
    # duplicated column -> 1
    dup = np.ones((4, 1)) * np.array([[1.0, 1.0, -1.0]])
    cb = Codebook("bernoulli", dup.astype(np.complex128), 1.0, None)
    assert max_correlation(cb) == pytest.approx(1.0, abs=1e-15)


def test_max_correlation_is_rational_for_sign_matrices():
    # +-1 columns have integer inner products, so mu* is integer/m
    cb = gen_bernoulli(42, 96, ALPHA, seed=1)
    mu = max_correlation(cb)
    assert mu * 42 == pytest.approx(round(mu * 42), abs=1e-9)
    assert mu == pytest.approx(24 / 42, abs=1e-12)  # pinned: used by bounds


def test_effective_mu_star_reproducible_and_bounded():
    cb = gen_bernoulli(42, 96, ALPHA, seed=1)
    a = effective_mu_star(cb, np.random.default_rng(0))
    b = effective_mu_star(cb, np.random.default_rng(0))
    assert a == b
    assert 0.0 < a <= 1.0
    # weighting never lowers the worst pair far below the plain value
    assert a > 0.3


def test_bernoulli_mu_bound_against_high_precision_reference():
    for m, n, delta in [(42, 96, 0.01), (16, 64, 0.001), (100, 500, 0.05)]:
        got = bernoulli_mu_bound(m, n, delta)
        with mpmath.workdps(50):
            want = mpmath.sqrt(4 * mpmath.log(mpmath.mpf(n) / mpmath.mpf(str(delta))) / m)
        assert got == pytest.approx(float(want), rel=1e-10)
    with pytest.raises(ValueError):
        bernoulli_mu_bound(42, 96, 0.0)

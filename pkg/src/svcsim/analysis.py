"""Closed-form analysis: error-probability bounds, rates, latency, chi-squared.

The bound family is driven by two per-comparison factors evaluated at noise
variance 1/SNR_linear:

    A = (1 + (1 - mu*)^2 / sigma_v^2)^(-m)   wrong column beats a true one
    B = (1 + 1/sigma_v^2)^(-m)               sign/phase test fails outright

Success over all k*N ordered comparisons lower-bounds as (1 - A - B)^(k*N);
the plotted block-error upper bound keeps only the dominant factor,
1 - (1 - A)^(k*N).  Everything is computed in log space so tail values keep
full relative precision.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

__all__ = [
    "bler_upper_bound",
    "chi2_cdf",
    "chi2_inv_cdf",
    "crossing_snr_db",
    "latency_distribution",
    "pdcch_code_rate",
    "success_lower_bound",
    "success_lower_bound_approx",
    "svc_code_rate",
]


def chi2_cdf(dof: int, x) -> np.ndarray | float:
    """CDF of the chi-squared distribution with ``dof`` degrees of freedom."""
    if dof <= 0:
        raise ValueError("dof must be positive")
    x = np.asarray(x, dtype=np.float64)
    out = np.where(x > 0, special.gammainc(dof / 2.0, np.maximum(x, 0.0) / 2.0), 0.0)
    return float(out) if out.ndim == 0 else out


def chi2_inv_cdf(dof: int, p) -> np.ndarray | float:
    """Quantile function inverse to :func:`chi2_cdf`; p = 1 maps to +inf."""
    if dof <= 0:
        raise ValueError("dof must be positive")
    p = np.asarray(p, dtype=np.float64)
    if np.any((p < 0) | (p > 1)):
        raise ValueError("p must lie in [0, 1]")
    out = 2.0 * special.gammaincinv(dof / 2.0, p)
    return float(out) if out.ndim == 0 else out


def _log_factors(m: int, snr_db: float, mu_star: float) -> tuple[float, float]:
    # log A and log B; sigma_v^2 = 1/SNR_linear
    if not 0.0 <= mu_star <= 1.0:
        raise ValueError("mu_star must lie in [0, 1]")
    snr_lin = 10.0 ** (snr_db / 10.0)
    log_a = -m * math.log1p((1.0 - mu_star) ** 2 * snr_lin)
    log_b = -m * math.log1p(snr_lin)
    return log_a, log_b


def success_lower_bound(m: int, n: int, k: int, snr_db: float, mu_star: float) -> float:
    """Lower bound on P(correct support): max(0, 1 - A - B)^(k*n)."""
    log_a, log_b = _log_factors(m, snr_db, mu_star)
    loss = math.exp(log_a) + math.exp(log_b)
    if loss >= 1.0:
        return 0.0
    return math.exp(k * n * math.log1p(-loss))


def success_lower_bound_approx(m: int, n: int, k: int, snr_db: float, mu_star: float) -> float:
    """Variant dropping the outright-failure factor: (1 - A)^(k*n)."""
    log_a, _ = _log_factors(m, snr_db, mu_star)
    return math.exp(k * n * math.log1p(-math.exp(log_a)))


def bler_upper_bound(m: int, n: int, k: int, snr_db: float, mu_star: float) -> float:
    """Upper bound on block error probability: 1 - (1 - A)^(k*n).

    Stable for tiny A: evaluates as -expm1(k*n*log1p(-A)).
    """
    log_a, _ = _log_factors(m, snr_db, mu_star)
    a = math.exp(log_a)
    if a >= 1.0:
        return 1.0
    return -math.expm1(k * n * math.log1p(-a))


def svc_code_rate(payload_bits: int, m: int) -> float:
    """Information bits per real channel dimension, b / (2m)."""
    if payload_bits <= 0 or m <= 0:
        raise ValueError("payload_bits and m must be positive")
    return payload_bits / (2.0 * m)


def pdcch_code_rate(payload_bits: int, crc_bits: int = 24) -> float:
    """Control-channel baseline: payload over 3x-coded payload+CRC.

    Equals 1/(3(1+beta)) with beta = crc_bits/payload_bits.
    """
    if payload_bits <= 0 or crc_bits < 0:
        raise ValueError("invalid bit counts")
    return payload_bits / (3.0 * (payload_bits + crc_bits))


def latency_distribution(
    per_attempt_bler, n_max: int, slot_ms: float = 0.21
) -> list[tuple[float, float]]:
    """Distribution of delivery latency under stop-on-success retransmission.

    ``per_attempt_bler`` is either one failure probability applied to every
    attempt or a sequence giving attempt n its own failure probability (e.g.
    when retransmissions are combined before decoding).  Returns
    [(n * slot_ms, P(delivered on attempt n))] for n = 1..n_max; the leftover
    mass is P(not delivered within n_max attempts).
    """
    if n_max <= 0:
        raise ValueError("n_max must be positive")
    if np.isscalar(per_attempt_bler):
        p = [float(per_attempt_bler)] * n_max
    else:
        p = [float(x) for x in per_attempt_bler]
        if len(p) < n_max:
            raise ValueError("need a failure probability for each attempt")
    if any(not 0.0 <= x <= 1.0 for x in p):
        raise ValueError("failure probabilities must lie in [0, 1]")
    out = []
    alive = 1.0
    for n in range(1, n_max + 1):
        out.append((n * slot_ms, alive * (1.0 - p[n - 1])))
        alive *= p[n - 1]
    return out


def crossing_snr_db(snr_db, bler, level: float) -> float:
    """SNR (dB) where a monotone-decreasing curve crosses ``level``.

    Interpolates linearly in (dB, log10 BLER).  Returns nan when the curve
    never brackets the level; zero BLER points are treated as below any
    positive level.
    """
    if level <= 0:
        raise ValueError("level must be positive")
    s = np.asarray(snr_db, dtype=np.float64)
    b = np.asarray(bler, dtype=np.float64)
    if s.shape != b.shape or s.ndim != 1 or s.size < 2:
        raise ValueError("need matching 1-d arrays with at least two points")
    if np.any(np.diff(s) <= 0):
        raise ValueError("snr grid must be strictly increasing")
    logl = math.log10(level)
    with np.errstate(divide="ignore"):
        lb = np.where(b > 0, np.log10(np.maximum(b, 1e-300)), -np.inf)
    for i in range(s.size - 1):
        hi, lo = lb[i], lb[i + 1]
        if hi >= logl > lo:
            if not np.isfinite(lo):
                # zero-count tail point: place the crossing at the last
                # positive observation's segment end
                return float(s[i + 1])
            if hi == lo:
                return float(s[i])
            return float(s[i] + (s[i + 1] - s[i]) * (hi - logl) / (hi - lo))
    return float("nan")

"""Channel simulation: fading, additive noise, repetitions, combining.

Model per repetition l and resource element i:

    y[l, i] = gamma * h[l, i] * x[i] + v[l, i]

with v circularly symmetric complex normal of variance 1 (fixed convention)
and gamma = sqrt(SNR_linear), so E|gamma x|^2 / sigma_v^2 equals the
configured SNR when the spread vector is unit mean power.  Draw order per
trial is fixed (fading, then noise, then any interference) so a seeded
generator reproduces packets bit exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .codec import ModulationScheme, bits_capacity, encode
from .codebook import Codebook

__all__ = [
    "NOISE_VAR",
    "ChannelModel",
    "InterferenceSpec",
    "ReceivedPacket",
    "apply_channel",
    "derotate",
    "mrc_combine",
]

NOISE_VAR = 1.0

_KINDS = ("awgn", "rayleigh", "rand_const")
_REP_FADING = ("independent", "identical")


@dataclass(frozen=True)
class InterferenceSpec:
    """A co-channel packet from another codebook.

    ``power_ratio`` scales its receive power relative to the packet of
    interest; the interfering payload (and its fading) is redrawn for every
    repetition, so it never combines coherently across the repetition window.
    """

    codebook: Codebook
    power_ratio: float
    modulation: ModulationScheme

    def __post_init__(self) -> None:
        if self.power_ratio < 0:
            raise ValueError("power_ratio must be nonnegative")


@dataclass(frozen=True)
class ChannelModel:
    kind: str = "rayleigh"
    snr_db: float = 0.0
    repetitions: int = 1
    repetition_fading: str = "independent"
    interference: InterferenceSpec | None = None
    pilotless: bool = False

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.repetition_fading not in _REP_FADING:
            raise ValueError(f"repetition_fading must be one of {_REP_FADING}")
        if self.pilotless and self.repetitions != 1:
            raise ValueError("pilotless reception does not support repetitions")


@dataclass(frozen=True)
class ReceivedPacket:
    """Observations for one packet: (L, m) samples plus channel knowledge."""

    y: np.ndarray
    h: np.ndarray | None  # None when the receiver has no channel estimate
    gamma: float
    sigma_v2: float = NOISE_VAR


def _cn(rng: np.random.Generator, shape) -> np.ndarray:
    # circularly symmetric complex normal, unit variance per element
    flat = math.prod(shape)
    z = rng.standard_normal(2 * flat)
    return (z[:flat] + 1j * z[flat:]).reshape(shape) / math.sqrt(2.0)


def _draw_fading(kind: str, rng: np.random.Generator, reps: int, m: int,
                 identical: bool) -> np.ndarray:
    if kind == "awgn":
        return np.ones((reps, m), dtype=np.complex128)
    if kind == "rand_const":
        return np.broadcast_to(_cn(rng, (1,))[0], (reps, m)).copy()
    if identical:
        return np.broadcast_to(_cn(rng, (1, m)), (reps, m)).copy()
    return _cn(rng, (reps, m))


def apply_channel(x: np.ndarray, model: ChannelModel,
                  rng: np.random.Generator) -> ReceivedPacket:
    """Transmit one spread vector through the configured channel."""
    m = x.shape[0]
    reps = model.repetitions
    gamma = math.sqrt(10.0 ** (model.snr_db / 10.0))
    h = _draw_fading(model.kind, rng, reps, m,
                     model.repetition_fading == "identical")
    v = _cn(rng, (reps, m)) * math.sqrt(NOISE_VAR)
    y = gamma * h * x[None, :] + v
    spec = model.interference
    if spec is not None and spec.power_ratio > 0.0:
        amp = gamma * math.sqrt(spec.power_ratio)
        b = bits_capacity(spec.codebook.n_columns, spec.modulation.sparsity)
        for l in range(reps):
            payload = int(rng.integers(0, (1 << b) - 1, endpoint=True,
                                       dtype=np.uint64))
            xi = encode(payload, spec.codebook, spec.modulation)
            hi = _draw_fading(model.kind, rng, 1, m, False)[0]
            y[l] += amp * hi * xi
    return ReceivedPacket(y, None if model.pilotless else h, gamma, NOISE_VAR)


def mrc_combine(pkt: ReceivedPacket) -> tuple[np.ndarray, np.ndarray]:
    """Maximum-ratio combine repetitions.

    Returns (combined, gain) with combined_i = sum_l conj(h_li) y_li and
    gain_i = sum_l |h_li|^2; the combined noise variance is sigma_v2 * gain_i.
    """
    if pkt.h is None:
        raise ValueError("combining requires channel knowledge")
    combined = np.einsum("li,li->i", pkt.h.conj(), pkt.y)
    gain = np.einsum("li,li->i", pkt.h.conj(), pkt.h).real
    return combined, gain


def derotate(y: np.ndarray, h_eff: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Remove the effective channel phase: y * exp(-j angle(h_eff)).

    Returns the rotated observations and the nonnegative real gains |h_eff|.
    After this step the effective channel seen by the support search is
    diag(|h_eff|) applied to the codebook.
    """
    mag = np.abs(h_eff)
    phase = np.where(mag > 0, h_eff / np.where(mag > 0, mag, 1.0), 1.0)
    return y * phase.conj(), mag

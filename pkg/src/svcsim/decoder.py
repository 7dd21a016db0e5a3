"""Support identification from the combined observation.

The search works on the effective sensing matrix diag(g) * C, where g holds
the nonnegative per-element channel gains after combining and de-rotation
(g = None means no channel knowledge and the plain codebook is used).  Two
operating modes share all machinery:

* known-values mode: the nonzero values are the modulation's fixed pattern,
  so each accepted column is subtracted at its known value scaled by gamma.
  With the two-valued pattern (1, j) the per-layer ranking statistic splits
  into the real part squared on odd layers and the imaginary part squared on
  even layers; other patterns rank by squared magnitude.
* least-squares mode (no known values): each layer re-projects the
  observation onto the selected columns, so the residual trajectory is
  monotone nonincreasing.

The multipath search keeps a small tree of per-layer ranked alternatives;
the greedy decoder is exactly the tree restricted to its first branch.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .analysis import chi2_inv_cdf
from .channel import ReceivedPacket, mrc_combine
from .codebook import Codebook
from .codec import (
    ModulationScheme,
    RankOutOfRangeError,
    Support,
    unmap_support_to_bits,
)

__all__ = [
    "DecodeOutcome",
    "DecodeStatus",
    "DecoderParams",
    "EffectiveSensingMatrix",
    "MlResult",
    "MmpResult",
    "OmpResult",
    "RejectReason",
    "compute_p_k",
    "decode",
    "false_alarm_check",
    "ml_decode",
    "mmp_decode",
    "omp_decode",
]

_SPLIT_VALUES = (1 + 0j, 1j)  # the only pattern with the Re/Im layer split


class EffectiveSensingMatrix:
    """Gain-weighted view of a codebook, kept implicit for speed.

    ``gains`` is a nonnegative real vector applied to the rows, or None for
    the no-channel-knowledge case where the matrix is the codebook itself.
    """

    def __init__(self, codebook: Codebook, gains: np.ndarray | None):
        self.codebook = codebook
        if gains is not None:
            gains = np.asarray(gains, dtype=np.float64)
            if gains.shape != (codebook.m,):
                raise ValueError("gains must have one entry per row")
        self.gains = gains
        self._norms: np.ndarray | None = None
        self._matrix: np.ndarray | None = None

    @property
    def m(self) -> int:
        return self.codebook.m

    @property
    def n_columns(self) -> int:
        return self.codebook.n_columns

    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            c = self.codebook.entries
            self._matrix = c if self.gains is None else self.gains[:, None] * c
        return self._matrix

    def column(self, i: int) -> np.ndarray:
        c = self.codebook.entries[:, i]
        return c if self.gains is None else self.gains * c

    def correlate(self, r: np.ndarray) -> np.ndarray:
        """All column inner products <phi_i, r> without materializing the matrix."""
        w = r if self.gains is None else self.gains * r
        return w @ self.codebook.conj_entries()

    def column_norms(self) -> np.ndarray:
        if self._norms is None:
            c2 = self.codebook.abs_squared()
            if self.gains is None:
                self._norms = np.sqrt(c2.sum(axis=0))
            else:
                self._norms = np.sqrt((self.gains**2) @ c2)
        return self._norms


@dataclass(frozen=True)
class DecoderParams:
    """Knobs for the multipath search.

    stop_eps:  stop expanding once some candidate's residual energy falls
               strictly below this; None picks m * sigma_v2 (the residual's
               mean when only noise is left).
    p_th:      target probability of discarding a genuine packet in the
               residual confidence check; 0 disables the check.
    fa_eps:    absolute residual-energy acceptance threshold overriding the
               chi-squared quantile when set.
    """

    k: int
    l_expand: int = 2
    l_max: int = 4
    stop_eps: float | None = None
    p_th: float = 0.0
    fa_eps: float | None = None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.l_expand < 1 or self.l_max < 1:
            raise ValueError("l_expand and l_max must be >= 1")
        if not 0.0 <= self.p_th < 1.0:
            raise ValueError("p_th must lie in [0, 1)")


class DecodeStatus(enum.Enum):
    DECODED = "decoded"
    REJECTED = "rejected"
    FAILED = "failed"


class RejectReason(enum.Enum):
    NOISE_ONLY = "noise_only"
    WRONG_CODEBOOK = "wrong_codebook"
    RANK_OUT_OF_RANGE = "rank_out_of_range"


@dataclass(frozen=True)
class DecodeOutcome:
    status: DecodeStatus
    payload: int | None = None
    support: Support | None = None
    residual_norm2: float | None = None
    reason: RejectReason | None = None
    check_accepted: bool = False
    candidates_examined: int = 0


@dataclass(frozen=True)
class OmpResult:
    support: Support
    order: tuple[int, ...]
    residual_norm2: float
    residual_trajectory: tuple[float, ...]


@dataclass(frozen=True)
class MmpResult:
    accepted: bool
    support: Support | None
    order: tuple[int, ...] | None
    residual_norm2: float
    residual_trajectory: tuple[float, ...]
    candidates_examined: int


@dataclass(frozen=True)
class MlResult:
    support: Support
    order: tuple[int, ...]
    values: tuple[complex, ...]
    residual_norm2: float


def compute_p_k(l: int, k: int, l_expand: int) -> int:
    """Branch choice (1-based) of candidate l at layer k.

    Candidates enumerate the rank tree in mixed radix l_expand with the
    first layer's digit moving fastest, so candidate 1 is the all-best path
    and candidate 2 differs only in layer 1.
    """
    if l < 1 or k < 1:
        raise ValueError("l and k are 1-based")
    t = l - 1
    for _ in range(k - 1):
        t //= l_expand
    return t % l_expand + 1


def false_alarm_check(residual_norm2: float, m: int, sigma_v2: float,
                      p_th: float) -> bool:
    """Accept iff 2*residual/sigma_v2 is within the chi-squared(2m) quantile.

    The quantile is taken at 1 - p_th, so a packet whose residual is pure
    noise is discarded with probability p_th; p_th = 0 accepts everything.
    """
    if p_th <= 0.0:
        return True
    thr = chi2_inv_cdf(2 * m, 1.0 - p_th)
    return 2.0 * residual_norm2 / sigma_v2 <= thr


class _Path:
    __slots__ = ("selected", "r", "traj")

    def __init__(self, selected: tuple[int, ...], r: np.ndarray,
                 traj: tuple[float, ...]):
        self.selected = selected
        self.r = r
        self.traj = traj


def _layer_stat(phi: EffectiveSensingMatrix, r: np.ndarray, layer: int,
                split: bool) -> np.ndarray:
    corr = phi.correlate(r) / phi.column_norms()
    if split:
        part = corr.real if layer % 2 == 1 else corr.imag
        return part**2
    return corr.real**2 + corr.imag**2


def _extend(path: _Path, branch: int, layer: int, y: np.ndarray,
            phi: EffectiveSensingMatrix, known_values, gamma: float,
            split: bool) -> _Path | None:
    stat = _layer_stat(phi, path.r, layer, split)
    if path.selected:
        stat[list(path.selected)] = -1.0
    if branch > phi.n_columns - len(path.selected):
        return None
    if branch == 1:
        idx = int(np.argmax(stat))  # first occurrence: lowest index on ties
    else:
        # stable sort so ties resolve to the lowest column index
        order = np.argsort(-stat, kind="stable")
        idx = int(order[branch - 1])
    selected = path.selected + (idx,)
    if known_values is not None:
        r = path.r - gamma * known_values[layer - 1] * phi.column(idx)
    else:
        a = phi.matrix()[:, list(selected)]
        coef, *_ = np.linalg.lstsq(a, y, rcond=None)
        r = y - a @ coef
    res2 = float(r.real @ r.real + r.imag @ r.imag)
    return _Path(selected, r, path.traj + (res2,))


def omp_decode(y: np.ndarray, phi: EffectiveSensingMatrix, k: int,
               known_values=None, gamma: float = 1.0) -> OmpResult:
    """Greedy search: take the top-ranked column at every layer."""
    split = known_values is not None and tuple(known_values) == _SPLIT_VALUES
    path = _Path((), y, ())
    for layer in range(1, k + 1):
        path = _extend(path, 1, layer, y, phi, known_values, gamma, split)
        if path is None:
            raise ValueError("not enough columns to select k")
    return OmpResult(Support(tuple(sorted(path.selected))), path.selected,
                     path.traj[-1], path.traj)


def mmp_decode(y: np.ndarray, phi: EffectiveSensingMatrix,
               params: DecoderParams, known_values=None, gamma: float = 1.0,
               sigma_v2: float = 1.0) -> MmpResult:
    """Multipath search over per-layer ranked alternatives.

    Explores up to l_max candidate paths of the depth-k, width-l_expand rank
    tree (shared prefixes evaluated once), keeps the candidate with the
    smallest residual energy, stops early when that energy falls below
    stop_eps, and finally applies the residual confidence check.
    """
    k = params.k
    split = known_values is not None and tuple(known_values) == _SPLIT_VALUES
    stop_eps = params.stop_eps
    if stop_eps is None:
        stop_eps = phi.m * sigma_v2
    l_cap = params.l_expand**k
    l_max = min(params.l_max, l_cap)

    cache: dict[tuple[int, ...], _Path | None] = {(): _Path((), y, ())}
    seen: set[tuple[int, ...]] = set()
    best: _Path | None = None
    examined = 0
    for l in range(1, l_max + 1):
        digits = tuple(compute_p_k(l, kk, params.l_expand)
                       for kk in range(1, k + 1))
        path = cache[()]
        for j in range(1, k + 1):
            key = digits[:j]
            hit = cache.get(key, False)
            if hit is not False:
                path = hit
            else:
                path = None if path is None else _extend(
                    path, digits[j - 1], j, y, phi, known_values, gamma, split)
                cache[key] = path
            if path is None:
                break
        if path is None:
            continue
        dedup = path.selected if known_values is not None \
            else tuple(sorted(path.selected))
        if dedup in seen:
            continue
        seen.add(dedup)
        examined += 1
        if best is None or path.traj[-1] < best.traj[-1]:
            best = path
        if best.traj[-1] < stop_eps:
            break

    if best is None or not math.isfinite(best.traj[-1]):
        return MmpResult(False, None, None, float("nan"), (), examined)
    res2 = best.traj[-1]
    if params.fa_eps is not None:
        accepted = res2 <= params.fa_eps
    else:
        accepted = false_alarm_check(res2, phi.m, sigma_v2, params.p_th)
    support = Support(tuple(sorted(best.selected)))
    return MmpResult(accepted, support, best.selected, res2, best.traj,
                     examined)


def ml_decode(y: np.ndarray, phi: EffectiveSensingMatrix, k: int,
              known_values, gamma: float = 1.0,
              cap: int = 1_000_000) -> MlResult:
    """Exhaustive minimum-residual search over supports and value placements.

    Enumerates every k-subset and every distinct ordering of the known value
    pattern over it; ties resolve to the lexicographically smallest
    (support, ordering).  Refuses instances with more than ``cap`` candidates.
    """
    n = phi.n_columns
    perms = sorted(set(itertools.permutations(known_values)),
                   key=lambda v: tuple((z.real, z.imag) for z in v))
    total = math.comb(n, k) * len(perms)
    if total > cap:
        raise ValueError(f"{total} candidates exceed cap {cap}")
    mat = phi.matrix()
    cy = mat.conj().T @ y
    gram = mat.conj().T @ mat
    y2 = float(y.real @ y.real + y.imag @ y.imag)
    best = None
    for combo in itertools.combinations(range(n), k):
        for vals in perms:
            v = np.asarray(vals)
            cross = complex(np.vdot(v, cy[list(combo)]))
            sub = gram[np.ix_(combo, combo)]
            quad = float((v.conj() @ sub @ v).real)
            res2 = y2 - 2.0 * gamma * cross.real + gamma * gamma * quad
            if best is None or res2 < best[0]:
                best = (res2, combo, vals)
    res2, combo, vals = best
    return MlResult(Support(combo), combo, tuple(vals), max(res2, 0.0))


def _classify_rejection(y: np.ndarray, m: int, sigma_v2: float,
                        p_th: float) -> RejectReason:
    # Energy consistent with noise alone -> the packet slot was empty;
    # excess energy means something was transmitted, just not ours.
    thr = chi2_inv_cdf(2 * m, 1.0 - p_th) if p_th > 0 else float("inf")
    energy = 2.0 * float(np.vdot(y, y).real) / sigma_v2
    return RejectReason.WRONG_CODEBOOK if energy > thr else RejectReason.NOISE_ONLY


def decode(pkt: ReceivedPacket, codebook: Codebook, params: DecoderParams,
           mod: ModulationScheme) -> DecodeOutcome:
    """Full receive chain: combine, whiten, de-rotate, search, unrank.

    With channel knowledge the repetitions are maximum-ratio combined and the
    result divided by the root combined gain, which both whitens the noise
    back to sigma_v2 per element and leaves nonnegative real effective gains
    (no separate phase removal needed).  Without channel knowledge the raw
    observation is searched in least-squares mode.
    """
    if pkt.h is None:
        y_eff = pkt.y[0]
        phi = EffectiveSensingMatrix(codebook, None)
        known = None
    else:
        combined, gain = mrc_combine(pkt)
        root = np.sqrt(gain)
        with np.errstate(invalid="ignore", divide="ignore"):
            y_eff = combined / root
        phi = EffectiveSensingMatrix(codebook, root)
        known = mod.values
    if not np.isfinite(y_eff).all():
        return DecodeOutcome(DecodeStatus.FAILED)

    res = mmp_decode(y_eff, phi, params, known_values=known, gamma=pkt.gamma,
                     sigma_v2=pkt.sigma_v2)
    if res.support is None:
        return DecodeOutcome(DecodeStatus.FAILED,
                             candidates_examined=res.candidates_examined)
    if not res.accepted:
        reason = _classify_rejection(y_eff, phi.m, pkt.sigma_v2, params.p_th)
        return DecodeOutcome(DecodeStatus.REJECTED, support=res.support,
                             residual_norm2=res.residual_norm2, reason=reason,
                             candidates_examined=res.candidates_examined)
    try:
        payload = unmap_support_to_bits(res.support, codebook.n_columns,
                                        params.k)
    except RankOutOfRangeError:
        return DecodeOutcome(DecodeStatus.REJECTED, support=res.support,
                             residual_norm2=res.residual_norm2,
                             reason=RejectReason.RANK_OUT_OF_RANGE,
                             check_accepted=True,
                             candidates_examined=res.candidates_examined)
    return DecodeOutcome(DecodeStatus.DECODED, payload=payload,
                         support=res.support,
                         residual_norm2=res.residual_norm2,
                         check_accepted=True,
                         candidates_examined=res.candidates_examined)

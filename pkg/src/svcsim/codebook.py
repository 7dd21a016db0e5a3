"""Spreading codebooks.

All generators produce an m x N matrix whose columns are scaled to norm
sqrt(m)/alpha, so the per-element transmit energy convention is shared across
families and the modulation normalization lives in one place.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Codebook",
    "bernoulli_mu_bound",
    "effective_mu_star",
    "gen_bernoulli",
    "gen_gaussian",
    "gen_sorm",
    "max_correlation",
]


@dataclass(frozen=True, eq=False)
class Codebook:
    """An m x N spreading matrix plus enough metadata to regenerate it.

    ``entries`` is complex128 and marked read-only.  Serialization goes
    through :meth:`to_dict` / :meth:`from_dict`, which carry only the recipe
    (kind, dimensions, seed or binary patterns) and rebuild the matrix, so a
    round trip is bit exact without shipping floats.
    """

    kind: str
    entries: np.ndarray
    alpha: float
    seed: int | None = None
    p_matrices: tuple[tuple[tuple[int, ...], ...], ...] | None = field(
        default=None, repr=False
    )

    def __post_init__(self) -> None:
        ent = np.ascontiguousarray(self.entries, dtype=np.complex128)
        ent.setflags(write=False)
        object.__setattr__(self, "entries", ent)

    def conj_entries(self) -> np.ndarray:
        """Cached conjugate of the matrix (hot path of the column correlator)."""
        cached = self.__dict__.get("_conj")
        if cached is None:
            cached = self.entries.conj()
            cached.setflags(write=False)
            object.__setattr__(self, "_conj", cached)
        return cached

    def abs_squared(self) -> np.ndarray:
        """Cached elementwise |entry|^2 (used for effective column norms)."""
        cached = self.__dict__.get("_abs2")
        if cached is None:
            cached = np.abs(self.entries) ** 2
            cached.setflags(write=False)
            object.__setattr__(self, "_abs2", cached)
        return cached

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def n_columns(self) -> int:
        return self.entries.shape[1]

    @property
    def column_norm(self) -> float:
        """Common column norm sqrt(m)/alpha (exact for the +-1 and block kinds)."""
        return math.sqrt(self.m) / self.alpha

    def to_dict(self) -> dict:
        d: dict = {
            "kind": self.kind,
            "m": self.m,
            "n": self.n_columns,
            "alpha": self.alpha,
        }
        if self.kind in ("bernoulli", "gaussian"):
            d["seed"] = self.seed
        elif self.kind == "sorm":
            d["p_matrices"] = [
                [list(row) for row in pm] for pm in self.p_matrices
            ]
        else:
            raise ValueError(f"unknown codebook kind {self.kind!r}")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Codebook":
        kind = d["kind"]
        if kind == "bernoulli":
            return gen_bernoulli(d["m"], d["n"], d["alpha"], d["seed"])
        if kind == "gaussian":
            return gen_gaussian(d["m"], d["n"], d["alpha"], d["seed"])
        if kind == "sorm":
            pms = [np.asarray(pm, dtype=np.int64) for pm in d["p_matrices"]]
            cb = gen_sorm(int(round(math.log2(d["m"]))), pms, d["alpha"])
            if cb.m != d["m"] or cb.n_columns != d["n"]:
                raise ValueError("sorm dimensions inconsistent with patterns")
            return cb
        raise ValueError(f"unknown codebook kind {kind!r}")


def gen_bernoulli(m: int, n: int, alpha: float, seed: int | None) -> Codebook:
    """Entries +-1/alpha equiprobable iid; column norms exactly sqrt(m)/alpha."""
    rng = np.random.default_rng(seed)
    signs = rng.integers(0, 2, size=(m, n)) * 2 - 1
    entries = signs.astype(np.complex128) / alpha
    return Codebook("bernoulli", entries, float(alpha), seed)


def gen_gaussian(m: int, n: int, alpha: float, seed: int | None) -> Codebook:
    """Entries iid real N(0, 1/alpha^2); column norms concentrate at sqrt(m)/alpha."""
    rng = np.random.default_rng(seed)
    entries = (rng.standard_normal((m, n)) / alpha).astype(np.complex128)
    return Codebook("gaussian", entries, float(alpha), seed)


def _validate_pattern(p: np.ndarray, d: int) -> None:
    if p.shape != (d, d):
        raise ValueError(f"pattern must be {d}x{d}")
    if not np.isin(p, (0, 1)).all():
        raise ValueError("pattern entries must be 0/1")
    if not np.array_equal(p, p.T):
        raise ValueError("pattern must be symmetric")


def gen_sorm(d: int, p_matrices, alpha: float) -> Codebook:
    """Blocks of 2**d mutually orthogonal columns from quadratic phase patterns.

    Block t, column b (b ranging over binary d-vectors) has entries

        phi[a] = (-1)^weight(b) / sqrt(2**d) * i^((2b + P_t a) . a)

    indexed by binary d-vectors a.  Columns within a block are orthonormal;
    the correlation between columns of blocks s and t is 2**(-l/2) with l the
    GF(2) rank of P_s xor P_t.  Columns are rescaled to sqrt(m)/alpha like the
    random families, i.e. unit-modulus entries of magnitude 1/alpha.
    """
    m = 1 << d
    pms = [np.asarray(p, dtype=np.int64) for p in p_matrices]
    if not pms:
        raise ValueError("at least one pattern required")
    for p in pms:
        _validate_pattern(p, d)
    # all binary d-vectors, row per index, least significant bit first
    a = ((np.arange(m)[:, None] >> np.arange(d)[None, :]) & 1).astype(np.int64)
    i_pow = np.array([1, 1j, -1, -1j], dtype=np.complex128)
    blocks = []
    scale = 1.0 / alpha  # (1/sqrt(m)) * sqrt(m)/alpha
    for p in pms:
        # exponent[a_idx, b_idx] = (2 b + P a) . a  mod 4
        quad = np.einsum("ri,ij,rj->r", a, p, a) % 4  # a^T P a per row
        cross = 2 * (a @ a.T) % 4  # 2 b . a
        expo = (quad[:, None] + cross) % 4
        sign = np.where(a.sum(axis=1) % 2 == 1, -1.0, 1.0)  # (-1)^weight(b)
        blocks.append(i_pow[expo] * sign[None, :] * scale)
    entries = np.concatenate(blocks, axis=1)
    pm_key = tuple(tuple(tuple(int(x) for x in row) for row in p) for p in pms)
    return Codebook("sorm", entries, float(alpha), None, pm_key)


def max_correlation(codebook: Codebook) -> float:
    """Largest normalized column cross-correlation max_{i != j} |<c_i, c_j>|/(|c_i||c_j|)."""
    c = codebook.entries
    norms = np.linalg.norm(c, axis=0)
    g = np.abs(c.conj().T @ c) / np.outer(norms, norms)
    np.fill_diagonal(g, 0.0)
    return float(g.max())


def effective_mu_star(codebook: Codebook, rng: np.random.Generator) -> float:
    """Coherence of the gain-weighted matrix the decoder actually correlates.

    Draws one unit-power Rayleigh gain vector (
    |h| with h circularly symmetric complex normal), weights the rows, and
    returns the largest normalized column cross-correlation.  This is the
    operating-condition counterpart of :func:`max_correlation`; under fading
    it sits noticeably above the plain codebook value.
    """
    m = codebook.m
    h = (rng.standard_normal(m) + 1j * rng.standard_normal(m)) / math.sqrt(2.0)
    w = np.abs(h)
    c = w[:, None] * codebook.entries
    norms = np.linalg.norm(c, axis=0)
    g = np.abs(c.conj().T @ c) / np.outer(norms, norms)
    np.fill_diagonal(g, 0.0)
    return float(g.max())


def bernoulli_mu_bound(m: int, n: int, delta: float) -> float:
    """High-probability coherence bound sqrt(4 ln(n/delta) / m) for the +-1 family."""
    if not 0 < delta < n:
        raise ValueError("need 0 < delta < n")
    return math.sqrt(4.0 * math.log(n / delta) / m)

"""Support-set payload coding.

The payload is carried by *which* K columns of the spreading codebook are
active, not by the values placed on them.  Payload integers are mapped to
K-subsets of [0, N) through the combinatorial number system (colexicographic
order), so the map is exact integer arithmetic end to end.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MAX_PAYLOAD_BITS",
    "ModulationScheme",
    "RankOutOfRangeError",
    "SparseSymbolVector",
    "Support",
    "assign_values",
    "bits_capacity",
    "encode",
    "map_bits_to_support",
    "support_bit_pattern",
    "unmap_support_to_bits",
]

# Payloads are handled as plain Python ints but the harness packs them into
# unsigned 64-bit draws, so configurations past this are refused outright.
MAX_PAYLOAD_BITS = 64


class RankOutOfRangeError(ValueError):
    """A structurally valid support unranks to a payload >= 2**bits_capacity.

    Distinct from malformed-support errors: the support is a legal K-subset,
    it just lands in the unused tail of the combinatorial code.
    """


class ModulationScheme(enum.Enum):
    """Fixed value pattern drawn on the selected columns.

    The nonzero values are not data dependent; they are assigned to the
    selected columns in ascending index order.  ``alpha`` is the conventional
    normalization sqrt(2(M - 1)/3) of the order-M square constellation and is
    folded into the codebook scaling.
    """

    QPSK = "qpsk"
    QAM16 = "qam16"
    QAM64 = "qam64"

    @property
    def sparsity(self) -> int:
        return _MOD_TABLE[self][0]

    @property
    def values(self) -> tuple[complex, ...]:
        return _MOD_TABLE[self][1]

    @property
    def alpha(self) -> float:
        return _MOD_TABLE[self][2]

    @property
    def order(self) -> int:
        return _MOD_TABLE[self][3]


_MOD_TABLE = {
    ModulationScheme.QPSK: (2, (1 + 0j, 1j), math.sqrt(2.0), 4),
    ModulationScheme.QAM16: (4, (1 + 0j, 2 + 0j, 1j, 2j), math.sqrt(10.0), 16),
    ModulationScheme.QAM64: (
        6,
        (1 + 0j, 2 + 0j, 3 + 0j, 1j, 2j, 3j),
        math.sqrt(42.0),
        64,
    ),
}


@dataclass(frozen=True)
class Support:
    """Strictly increasing tuple of selected column indices."""

    positions: tuple[int, ...]

    def __post_init__(self) -> None:
        pos = tuple(int(p) for p in self.positions)
        object.__setattr__(self, "positions", pos)
        if not pos:
            raise ValueError("support must select at least one column")
        if pos[0] < 0:
            raise ValueError("support positions must be nonnegative")
        if any(a >= b for a, b in zip(pos, pos[1:])):
            raise ValueError("support positions must be strictly increasing")

    @property
    def k(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class SparseSymbolVector:
    """A support together with the values assigned to its positions."""

    support: Support
    values: tuple[complex, ...]

    def __post_init__(self) -> None:
        if len(self.values) != self.support.k:
            raise ValueError("one value per selected position required")

    def dense(self, n: int) -> np.ndarray:
        """Length-n dense vector with the values at the support positions."""
        if self.support.positions[-1] >= n:
            raise ValueError("support does not fit in a length-%d vector" % n)
        s = np.zeros(n, dtype=np.complex128)
        s[list(self.support.positions)] = self.values
        return s


def bits_capacity(n: int, k: int) -> int:
    """Payload bits carried by a K-of-N column selection: floor(log2 C(n, k))."""
    if k <= 0 or k > n:
        raise ValueError(f"need 0 < k <= n, got k={k}, n={n}")
    return math.comb(n, k).bit_length() - 1


def _check_capacity(n: int, k: int) -> int:
    b = bits_capacity(n, k)
    if b > MAX_PAYLOAD_BITS:
        raise ValueError(
            f"payload capacity {b} bits exceeds the {MAX_PAYLOAD_BITS}-bit limit"
        )
    return b


def _unrank_pair(rank: int) -> tuple[int, int]:
    # Closed form for k=2: rank = C(q,2) + p with p < q, so q is the largest
    # integer with q(q-1)/2 <= rank.
    q = (math.isqrt(8 * rank + 1) + 1) // 2
    while q * (q - 1) // 2 > rank:
        q -= 1
    while (q + 1) * q // 2 <= rank:
        q += 1
    p = rank - q * (q - 1) // 2
    return p, q


def map_bits_to_support(payload: int, n: int, k: int) -> Support:
    """Unrank a payload integer to its K-subset (colexicographic order).

    Accepts every valid rank below C(n, k); the encoder only ever feeds
    ranks below 2**bits_capacity, but the map itself is total on subsets so
    enumeration and the inverse direction stay symmetric.
    """
    _check_capacity(n, k)
    if payload < 0 or payload >= math.comb(n, k):
        raise ValueError(f"payload {payload} outside [0, C({n},{k}))")
    if k == 2:
        return Support(_unrank_pair(payload))
    rem = payload
    positions = []
    c = n - 1
    for kk in range(k, 0, -1):
        while math.comb(c, kk) > rem:
            c -= 1
        positions.append(c)
        rem -= math.comb(c, kk)
        c -= 1
    positions.reverse()
    return Support(tuple(positions))


def unmap_support_to_bits(support: Support, n: int, k: int) -> int:
    """Rank a K-subset back to its payload integer.

    Raises RankOutOfRangeError when the subset ranks at or above
    2**bits_capacity(n, k); such subsets are never produced by the encoder
    but can be selected by a decoder.
    """
    b = _check_capacity(n, k)
    if support.k != k:
        raise ValueError(f"support has {support.k} positions, expected {k}")
    if support.positions[-1] >= n:
        raise ValueError("support position outside [0, n)")
    rank = sum(math.comb(p, i + 1) for i, p in enumerate(support.positions))
    if rank >= 1 << b:
        raise RankOutOfRangeError(
            f"support ranks to {rank}, beyond the {b}-bit payload range"
        )
    return rank


def support_bit_pattern(support: Support, n: int) -> str:
    """Length-n binary string, most significant position first.

    Character j represents column index n-1-j, so e.g. positions (0, 1) of
    n=6 render as '000011'.
    """
    if support.positions[-1] >= n:
        raise ValueError("support position outside [0, n)")
    chosen = set(support.positions)
    return "".join("1" if (n - 1 - j) in chosen else "0" for j in range(n))


def assign_values(support: Support, mod: ModulationScheme) -> SparseSymbolVector:
    """Attach the scheme's fixed values to the support, ascending index order."""
    if support.k != mod.sparsity:
        raise ValueError(
            f"{mod.value} places {mod.sparsity} values, support has {support.k}"
        )
    return SparseSymbolVector(support, mod.values)


def encode(payload: int, codebook, mod: ModulationScheme) -> np.ndarray:
    """Spread a payload: select columns by rank, weight them by the fixed values."""
    support = map_bits_to_support(payload, codebook.n_columns, mod.sparsity)
    cols = codebook.entries[:, list(support.positions)]
    return cols @ np.asarray(mod.values, dtype=np.complex128)

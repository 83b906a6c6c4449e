"""Block-to-variable coder tuned to the empirical k-block distribution.

This is the finite-state encoder used to relate block-empirical entropy to
compressibility: every complete k-block ``a`` is written with
``ceil(log2(1/P(a))) + 1`` bits, P being the empirical block distribution.
"""

from __future__ import annotations

import math
from collections import Counter

from ..core import SymbolSeq


class BlockEmpiricalCoder:
    def __init__(self, z: SymbolSeq, k: int):
        if k < 1:
            raise ValueError(f"block length must be >= 1, got {k}")
        if len(z) < k:
            raise ValueError(f"sequence of length {len(z)} is shorter than one block (k={k})")
        self.k = k
        self.blocks = len(z) // k
        data = z.data[: self.blocks * k].reshape(self.blocks, k)
        self.counts = Counter(row.tobytes() for row in data)
        self._sequence = [row.tobytes() for row in data]

    def codeword_lengths(self) -> dict[bytes, int]:
        b = self.blocks
        # ceil(log2(b / count)) computed exactly on integers
        return {a: _ceil_log2_ratio(b, c) + 1 for a, c in self.counts.items()}

    def kraft_sum(self) -> float:
        return sum(2.0 ** -ell for ell in self.codeword_lengths().values())

    def total_bits(self) -> int:
        lengths = self.codeword_lengths()
        return sum(lengths[a] for a in self._sequence)


def _ceil_log2_ratio(num: int, den: int) -> int:
    """ceil(log2(num/den)) for num >= den >= 1, without floating point."""
    e = 0
    while den << e < num:
        e += 1
    return e


def block_empirical_compress(z: SymbolSeq, k: int) -> int:
    return BlockEmpiricalCoder(z, k).total_bits()


def empirical_block_entropy(z: SymbolSeq, k: int) -> float:
    """Entropy (bits) of the empirical distribution of the floor(n/k) complete k-blocks."""
    coder = BlockEmpiricalCoder(z, k)
    b = coder.blocks
    return -sum(c / b * math.log2(c / b) for c in coder.counts.values())

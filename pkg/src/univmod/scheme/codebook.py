"""Random codebook derived from common randomness.

Symbol ``x_t(m)`` of block ``b`` is a keyed hash of ``(seed, b, t, m)``
reduced to ``[0, q)``. The hash chains the splitmix64 finaliser:

    kb  = mix(seed + G * (b + 1))
    kbt = mix(kb ^ (t * C1))
    x   = mix(kbt ^ (m * C2))  -> top 32 bits scaled by q

so the per-hypothesis cost is a single ``mix``. The reduction
``(h >> 32) * q >> 32`` is exact for power-of-two q and has bias below
q / 2**32 otherwise. The pure Python and numba versions must agree bit for
bit; tests compare them.
"""

from __future__ import annotations

import numba as nb
import numpy as np

MASK = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
C1 = 0xD1B54A32D192ED03
C2 = 0xAEF17502108EF2D9


def mix(x: int) -> int:
    x &= MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK
    return x ^ (x >> 31)


def block_key(seed: int, b: int) -> int:
    return mix((seed & MASK) + GOLDEN * (b + 1))


def position_key(kb: int, t: int) -> int:
    return mix(kb ^ ((t * C1) & MASK))


def symbol_from_key(kbt: int, m: int, q: int) -> int:
    h = mix(kbt ^ ((m * C2) & MASK))
    return ((h >> 32) * q) >> 32


def codebook_symbol(seed: int, b: int, m: int, t: int, q: int) -> int:
    """Symbol at absolute position ``t`` (0-based) of codeword ``m`` in block ``b``."""
    return symbol_from_key(position_key(block_key(seed, b), t), m, q)


class Codebook:
    """Shared by encoder and decoder; nothing is stored, every symbol is recomputed."""

    def __init__(self, seed: int, q: int, K: int):
        self.seed = int(seed) & MASK
        self.q = int(q)
        self.K = int(K)

    @property
    def size(self) -> int:
        return 1 << self.K

    def symbol(self, b: int, m: int, t: int) -> int:
        return codebook_symbol(self.seed, b, m, t, self.q)

    def column(self, b: int, t: int) -> np.ndarray:
        """Symbols of every codeword of block ``b`` at position ``t``."""
        out = np.empty(self.size, dtype=np.uint8)
        _column(np.uint64(block_key(self.seed, b)), np.uint64(t), self.q, out)
        return out

    def codeword(self, b: int, m: int, start: int, stop: int) -> list[int]:
        kb = block_key(self.seed, b)
        return [symbol_from_key(position_key(kb, t), m, self.q) for t in range(start, stop)]


# numba twins; uint64 arithmetic wraps, matching the masked Python ints.

_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_U32 = np.uint64(32)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(GOLDEN)
_C1 = np.uint64(C1)
_C2 = np.uint64(C2)


@nb.njit(cache=True, inline="always")
def nb_mix(x):
    x = (x ^ (x >> _U30)) * _M1
    x = (x ^ (x >> _U27)) * _M2
    return x ^ (x >> _U31)


@nb.njit(cache=True)
def nb_block_key(seed, b):
    return nb_mix(seed + _GOLDEN * np.uint64(b + 1))


@nb.njit(cache=True, inline="always")
def nb_position_key(kb, t):
    return nb_mix(kb ^ (np.uint64(t) * _C1))


@nb.njit(cache=True, inline="always")
def nb_symbol(kbt, m, q):
    h = nb_mix(kbt ^ (np.uint64(m) * _C2))
    return np.int64(((h >> _U32) * np.uint64(q)) >> _U32)


@nb.njit(cache=True)
def _column(kb, t, q, out):
    kbt = nb_position_key(kb, t)
    for m in range(out.shape[0]):
        out[m] = nb_symbol(kbt, m, q)

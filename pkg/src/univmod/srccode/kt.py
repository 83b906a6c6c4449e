"""Mixture over block lengths of Krichevsky-Trofimov block distributions.

For each block length k the symbols are grouped into super-symbols of
length k (alphabet size m = q**k) and assigned the KT (Dirichlet(1/2))
sequential probability; an unfinished block gets the exact marginal

    (n_S + |S|/2) / (t + m/2),

where S is the set of super-symbols extending the partial block, n_S the
number of completed blocks in S and t the number of completed blocks. The
mixture is ``P_Z = sum_{k=1}^{k_max} 2^-k P_k``; the weights are not
renormalised, so P_Z is a sub-probability.

Everything is kept in log2 so that very small probabilities stay finite.
"""

from __future__ import annotations

import math

from ..core import Alphabet, SymbolSeq
from .base import CoderState

K_MAX_CAP = 12


def default_k_max(n: int, q: int) -> int:
    """min(floor(log_q n), 12), but at least 1."""
    k, size = 0, q
    while size <= n and k < K_MAX_CAP:
        k += 1
        size *= q
    return max(k, 1)


def _logaddexp2(values) -> float:
    top = max(values)
    if top == -math.inf:
        return -math.inf
    return top + math.log2(sum(2.0 ** (v - top) for v in values))


class _BlockKT:
    """KT probability of the i.i.d. extension for one block length."""

    __slots__ = ("k", "q", "half", "own", "layers", "code", "depth", "log2p", "prev_num")

    def __init__(self, k: int, q: int):
        self.k = k
        self.q = q
        # half[r] = |S|/2 for a partial block of r symbols
        self.half = [q ** (k - r) / 2.0 for r in range(k + 1)]
        self.own: dict[int, int] = {}
        self.layers: tuple = ()
        self.code = 0
        self.depth = 0
        self.log2p = 0.0
        self.prev_num = None

    def _key(self, r: int, code: int) -> int:
        return code * (self.k + 1) + r

    def count(self, r: int, code: int) -> int:
        key = self._key(r, code)
        total = self.own.get(key, 0)
        for layer in self.layers:
            total += layer.get(key, 0)
        return total

    def feed(self, s: int) -> None:
        r = self.depth
        den = self.prev_num if r else self.count(0, 0) + self.half[0]
        code = self.code * self.q + s
        num = self.count(r + 1, code) + self.half[r + 1]
        self.log2p += math.log2(num / den)
        if r + 1 == self.k:
            own = self.own
            c = code
            for depth in range(self.k, -1, -1):
                key = self._key(depth, c)
                own[key] = own.get(key, 0) + 1
                c //= self.q
            self.code = 0
            self.depth = 0
            self.prev_num = None
        else:
            self.code = code
            self.depth = r + 1
            self.prev_num = num

    def clone(self, deep: bool) -> "_BlockKT":
        other = _BlockKT.__new__(_BlockKT)
        other.k, other.q, other.half = self.k, self.q, self.half
        other.code, other.depth = self.code, self.depth
        other.log2p, other.prev_num = self.log2p, self.prev_num
        if deep:
            merged: dict[int, int] = {}
            for layer in (self.own,) + self.layers:
                for key, v in layer.items():
                    merged[key] = merged.get(key, 0) + v
            other.own, other.layers = merged, ()
        else:
            other.own, other.layers = {}, (self.own,) + self.layers
        return other


class KTMixtureState(CoderState):
    """Sequential probability ``P_Z`` with idealised real-valued code lengths.

    ``L_S == L_T == -log2 P_Z(z^i)``; there is no termination overhead.
    """

    def __init__(self, q: int, k_max: int | None = None, horizon: int | None = None):
        self.q = Alphabet(q).q
        if k_max is None:
            if horizon is None:
                raise ValueError("give k_max or a horizon to derive it from")
            k_max = default_k_max(horizon, self.q)
        if k_max < 1:
            raise ValueError(f"k_max must be >= 1, got {k_max}")
        self.k_max = int(k_max)
        self.fed = 0
        self._blocks = [_BlockKT(k, self.q) for k in range(1, self.k_max + 1)]

    def feed(self, s: int) -> "KTMixtureState":
        if not 0 <= s < self.q:
            raise ValueError(f"symbol {s} out of range for q={self.q}")
        for blk in self._blocks:
            blk.feed(s)
        self.fed += 1
        return self

    def log2_prob_k(self, k: int) -> float:
        """log2 P_k of the symbols fed so far."""
        return self._blocks[k - 1].log2p

    def log2_prob(self) -> float:
        """log2 of the mixture P_Z."""
        return _logaddexp2([-k + blk.log2p for k, blk in enumerate(self._blocks, start=1)])

    def lengths(self) -> tuple[float, float]:
        length = -self.log2_prob()
        return length, length

    def _clone(self, deep: bool) -> "KTMixtureState":
        other = KTMixtureState.__new__(KTMixtureState)
        other.q, other.k_max, other.fed = self.q, self.k_max, self.fed
        other._blocks = [blk.clone(deep) for blk in self._blocks]
        return other

    def copy(self) -> "KTMixtureState":
        return self._clone(True)

    def fork(self) -> "KTMixtureState":
        return self._clone(False)

    @classmethod
    def max_gap(cls, n: int, q: int) -> float:
        return 0.0


def kt_feed(state: KTMixtureState, s: int) -> KTMixtureState:
    return state.feed(s)


def kt_lengths(state: KTMixtureState) -> tuple[float, float]:
    return state.lengths()


def kt_code_length(z: SymbolSeq, k_max: int | None = None) -> float:
    """-log2 P_Z(z) with the default mixture depth for len(z)."""
    state = KTMixtureState(z.q, k_max=k_max, horizon=max(len(z), 1))
    state.feed_many(z.data.tolist())
    return state.lengths()[1]

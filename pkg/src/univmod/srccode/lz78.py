"""LZ78 incremental parsing with length-only bookkeeping.

Bit accounting (normative for this package):

* each completed phrase costs ``ceil(log2(c+1)) + ceil(log2 q)`` bits, where
  ``c`` is the number of phrases completed before it (the tuple points to
  the root or one of the ``c`` phrases, then names the new symbol);
* termination adds ``ceil(log2(c+1))`` bits for the pending phrase's node
  and the Elias gamma length of ``fed + 1``.

So ``L_T - L_S = ceil(log2(c+1)) + gamma(fed+1)``, which grows like
``3 log2 n`` and never shrinks when a symbol is appended.
"""

from __future__ import annotations

import math

from ..core import Alphabet, SymbolSeq
from .base import CoderState, ceil_log2, elias_gamma_length


class LZ78State(CoderState):
    """Phrase trie plus running unterminated length.

    Child links are kept in dicts keyed by ``node * q + symbol``. A fork
    shares the parent's link tables read-only and records its own links in a
    private dict.
    """

    __slots__ = ("q", "symbol_bits", "fed", "phrases", "node", "L_S", "_layers", "_own", "_next_id")

    def __init__(self, q: int):
        alphabet = Alphabet(q)
        self.q = alphabet.q
        self.symbol_bits = alphabet.symbol_bits
        self.fed = 0
        self.phrases = 0
        self.node = 0
        self.L_S = 0
        self._own: dict[int, int] = {}
        self._layers: tuple = ()
        self._next_id = 1

    @property
    def node_count(self) -> int:
        return self.phrases + 1

    def _child(self, key: int):
        hit = self._own.get(key)
        if hit is not None:
            return hit
        for layer in self._layers:
            hit = layer.get(key)
            if hit is not None:
                return hit
        return None

    def feed(self, s: int) -> "LZ78State":
        if not 0 <= s < self.q:
            raise ValueError(f"symbol {s} out of range for q={self.q}")
        key = self.node * self.q + s
        nxt = self._child(key)
        if nxt is None:
            self.L_S += self.phrases.bit_length() + self.symbol_bits
            self._own[key] = self._next_id
            self._next_id += 1
            self.phrases += 1
            self.node = 0
        else:
            self.node = nxt
        self.fed += 1
        return self

    def lengths(self) -> tuple[int, int]:
        return self.L_S, self.L_S + self.phrases.bit_length() + elias_gamma_length(self.fed + 1)

    def copy(self) -> "LZ78State":
        other = self._clone()
        merged = {}
        for layer in reversed(self._layers):
            merged.update(layer)
        merged.update(self._own)
        other._own = merged
        other._layers = ()
        return other

    def fork(self) -> "LZ78State":
        other = self._clone()
        other._own = {}
        other._layers = (self._own,) + self._layers
        return other

    def _clone(self) -> "LZ78State":
        other = LZ78State.__new__(LZ78State)
        other.q = self.q
        other.symbol_bits = self.symbol_bits
        other.fed = self.fed
        other.phrases = self.phrases
        other.node = self.node
        other.L_S = self.L_S
        other._next_id = self._next_id
        return other

    @classmethod
    def max_gap(cls, n: int, q: int) -> int:
        # c <= fed <= n, so both terms are maximised at fed = n.
        return ceil_log2(n + 1) + elias_gamma_length(n + 1)


def lz78_feed(state: LZ78State, s: int) -> LZ78State:
    return state.feed(s)


def lz78_lengths(state: LZ78State) -> tuple[int, int]:
    return state.lengths()


def lz78_delta_max(n: int, q: int = 2) -> int:
    """Largest terminated-minus-unterminated gap over prefixes of length <= n."""
    return LZ78State.max_gap(n, q)


def lz78_compress(z: SymbolSeq) -> tuple[int, float]:
    """Terminated LZ78 length of ``z`` and its ratio ``L_T / (n log2 q)``."""
    if len(z) == 0:
        raise ValueError("cannot compress an empty sequence")
    state = LZ78State(z.q).feed_many(z.data.tolist())
    L_T = state.lengths()[1]
    return L_T, L_T / (len(z) * math.log2(z.q))


def lz78_parse(z) -> list[tuple[int, ...]]:
    """Completed LZ78 phrases of ``z`` (the pending tail is dropped)."""
    seen = set()
    phrases = []
    cur: tuple[int, ...] = ()
    for s in z:
        cur = cur + (int(s),)
        if cur not in seen:
            seen.add(cur)
            phrases.append(cur)
            cur = ()
    return phrases

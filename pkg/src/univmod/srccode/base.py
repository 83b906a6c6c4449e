"""Sequential coder contract shared by the decoding metrics."""

from __future__ import annotations

import abc


def ceil_log2(x: int) -> int:
    """ceil(log2 x) for integer x >= 1."""
    if x < 1:
        raise ValueError(f"ceil_log2 needs x >= 1, got {x}")
    return (x - 1).bit_length()


def elias_gamma_length(m: int) -> int:
    """Length in bits of the Elias gamma codeword of m >= 1: 2*floor(log2 m) + 1."""
    if m < 1:
        raise ValueError(f"Elias gamma is defined for m >= 1, got {m}")
    return 2 * (m.bit_length() - 1) + 1


class CoderState(abc.ABC):
    """A sequential source coder fed one symbol at a time.

    ``lengths()`` returns ``(L_S, L_T)``: the bits emitted so far while the
    coder still expects input, and the bits of the terminated encoding of
    everything fed. Implementations keep ``L_T`` nondecreasing under
    extension and ``L_T - L_S`` bounded by :meth:`max_gap`.
    """

    q: int
    fed: int

    @abc.abstractmethod
    def feed(self, s: int) -> "CoderState":
        """Append one symbol; returns ``self``."""

    @abc.abstractmethod
    def lengths(self) -> tuple[float, float]:
        ...

    @abc.abstractmethod
    def copy(self) -> "CoderState":
        """Independent deep copy, O(state size)."""

    @abc.abstractmethod
    def fork(self) -> "CoderState":
        """Cheap child state layered over this one.

        The parent must not be fed while any fork is alive.
        """

    @classmethod
    @abc.abstractmethod
    def max_gap(cls, n: int, q: int) -> float:
        """Upper bound on ``L_T - L_S`` over all sequences of length <= n."""

    def feed_many(self, symbols) -> "CoderState":
        for s in symbols:
            self.feed(int(s))
        return self

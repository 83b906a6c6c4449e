"""Alphabets, symbol sequences and the modulo-additive channel."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

MAX_Q = 256


class AlphabetError(ValueError):
    """Raised when sequences over different or invalid alphabets are combined."""


@dataclass(frozen=True)
class Alphabet:
    """The symbol set {0, ..., q-1}."""

    q: int

    def __post_init__(self):
        if not isinstance(self.q, (int, np.integer)) or isinstance(self.q, bool):
            raise AlphabetError(f"alphabet size must be an integer, got {self.q!r}")
        if self.q < 2:
            raise AlphabetError(f"alphabet size must be >= 2, got {self.q}")
        if self.q > MAX_Q:
            raise AlphabetError(f"alphabet size {self.q} exceeds {MAX_Q} (one byte per symbol)")
        object.__setattr__(self, "q", int(self.q))

    @property
    def log_size(self) -> float:
        """log2(q), in bits per symbol."""
        return math.log2(self.q)

    @property
    def symbol_bits(self) -> int:
        """Bits needed to write one raw symbol, ceil(log2 q)."""
        return (self.q - 1).bit_length()


def _as_alphabet(q) -> Alphabet:
    return q if isinstance(q, Alphabet) else Alphabet(q)


@dataclass(frozen=True, eq=False)
class SymbolSeq:
    """An immutable sequence of symbols over an alphabet.

    Symbols live in a read-only ``uint8`` array.
    """

    alphabet: Alphabet
    data: np.ndarray = field(repr=False)

    def __init__(self, alphabet, data: Iterable[int] | np.ndarray = ()):
        alphabet = _as_alphabet(alphabet)
        arr = np.asarray(data if not isinstance(data, np.ndarray) else data)
        if arr.size == 0:
            arr = np.zeros(0, dtype=np.uint8)
        if arr.ndim != 1:
            raise AlphabetError("symbol data must be one-dimensional")
        if arr.dtype.kind not in "iu":
            raise AlphabetError(f"symbol data must be integer, got dtype {arr.dtype}")
        if arr.size and (int(arr.min()) < 0 or int(arr.max()) >= alphabet.q):
            raise AlphabetError(f"symbol out of range for q={alphabet.q}")
        arr = np.array(arr, dtype=np.uint8, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "data", arr)

    @property
    def q(self) -> int:
        return self.alphabet.q

    def __len__(self) -> int:
        return int(self.data.shape[0])

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return SymbolSeq(self.alphabet, self.data[idx])
        return int(self.data[idx])

    def __iter__(self):
        return (int(v) for v in self.data)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymbolSeq):
            return NotImplemented
        return self.alphabet == other.alphabet and np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash((self.q, self.data.tobytes()))

    def __repr__(self) -> str:
        body = self.data[:16].tolist()
        more = ", ..." if len(self) > 16 else ""
        return f"SymbolSeq(q={self.q}, n={len(self)}, {body}{more})"

    def tolist(self) -> list[int]:
        return self.data.tolist()

    def concat(self, other: "SymbolSeq") -> "SymbolSeq":
        if self.alphabet != other.alphabet:
            raise AlphabetError(f"alphabet mismatch: q={self.q} vs q={other.q}")
        return SymbolSeq(self.alphabet, np.concatenate([self.data, other.data]))


def _check_pair(a: SymbolSeq, b: SymbolSeq) -> None:
    if a.alphabet != b.alphabet:
        raise AlphabetError(f"alphabet mismatch: q={a.q} vs q={b.q}")
    if len(a) != len(b):
        raise AlphabetError(f"length mismatch: {len(a)} vs {len(b)}")


def mod_add(x: SymbolSeq, z: SymbolSeq) -> SymbolSeq:
    """Channel output ``(x_i + z_i) mod q``."""
    _check_pair(x, z)
    out = (x.data.astype(np.int32) + z.data) % x.q
    return SymbolSeq(x.alphabet, out)


def mod_sub(y: SymbolSeq, x: SymbolSeq) -> SymbolSeq:
    """Noise recovered from an output and a (hypothetical) input: ``(y_i - x_i) mod q``."""
    _check_pair(y, x)
    out = (y.data.astype(np.int32) - x.data) % y.q
    return SymbolSeq(y.alphabet, out)


class ChannelSession:
    """A causal modulo-additive channel driven by a fixed noise sequence.

    Each call to :meth:`send` consumes the next noise symbols; the output at
    position i depends only on the inputs sent up to i.
    """

    def __init__(self, noise: SymbolSeq):
        self.alphabet = noise.alphabet
        self.noise = noise
        self.cursor = 0

    @property
    def n(self) -> int:
        return len(self.noise)

    @property
    def remaining(self) -> int:
        return self.n - self.cursor

    def send(self, x: int | Sequence[int]) -> int | list[int]:
        scalar = isinstance(x, (int, np.integer))
        xs = [int(x)] if scalar else [int(v) for v in x]
        if len(xs) > self.remaining:
            raise AlphabetError(f"channel exhausted: {len(xs)} symbols sent, {self.remaining} left")
        q = self.alphabet.q
        out = []
        for s in xs:
            if not 0 <= s < q:
                raise AlphabetError(f"input symbol {s} out of range for q={q}")
            out.append((s + int(self.noise.data[self.cursor])) % q)
            self.cursor += 1
        return out[0] if scalar else out

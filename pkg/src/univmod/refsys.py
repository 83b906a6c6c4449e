"""Iterated finite-block reference systems.

A :class:`BlockCode` is applied to consecutive k-blocks of the noise with
the same encoder and decoder each time. The helpers here measure its
average error, build the prefix/suffix reference code for the test
channel, and compute the statistics the converse argument uses.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np

from .bounds import effective_rate
from .core import Alphabet, SymbolSeq
from .noise import TestChannel, noise_generate

Block = tuple[int, ...]


class RefsysError(ValueError):
    """Invalid reference-system parameters."""


def _blocks(z: SymbolSeq, k: int, b: int) -> list[Block]:
    if k < 1 or b < 1:
        raise RefsysError(f"need k >= 1 and b >= 1, got k={k}, b={b}")
    if b * k > len(z):
        raise RefsysError(f"b*k = {b * k} exceeds the noise length {len(z)}")
    data = z.data[: b * k].reshape(b, k)
    return [tuple(int(v) for v in row) for row in data]


def _add(x: Block, z: Block, q: int) -> Block:
    return tuple((a + c) % q for a, c in zip(x, z))


# ---------------------------------------------------------------------------
# block codes


@dataclass(frozen=True)
class BlockCode:
    """Encoder table plus a decoder mapping k output symbols to a message."""

    q: int
    k: int
    encode_table: tuple[Block, ...]
    decode: Callable[[Block], int]

    def __post_init__(self):
        Alphabet(self.q)
        if len(self.encode_table) < 1:
            raise RefsysError("a block code needs at least one message")
        for word in self.encode_table:
            if len(word) != self.k or any(not 0 <= s < self.q for s in word):
                raise RefsysError(f"codeword {word} is not a length-{self.k} word over q={self.q}")
        if len(set(self.encode_table)) != len(self.encode_table):
            raise RefsysError("encoder is not injective")

    @property
    def M(self) -> int:
        return len(self.encode_table)

    @property
    def rate(self) -> float:
        return math.log2(self.M) / self.k

    def encode(self, m: int) -> Block:
        return self.encode_table[m]

    @classmethod
    def from_tables(cls, q: int, k: int, encode, decode: Mapping[Block, int], default: int = 0):
        """Decoder given as a lookup table; unlisted outputs decode to ``default``."""
        table = {tuple(key): int(v) for key, v in decode.items()}
        return cls(q, k, tuple(tuple(int(s) for s in w) for w in encode),
                   lambda y: table.get(tuple(y), default))

    @classmethod
    def from_json(cls, obj: dict) -> "BlockCode":
        """``{"q": 2, "k": 2, "encode": [[0,0],[1,1]], "decode": {"00": 0, ...}, "default": 0}``.

        Decode keys are the output symbols written as a string: one digit per
        symbol, or '-'-separated numbers when q > 10.
        """
        q, k = int(obj["q"]), int(obj["k"])

        def parse(key: str) -> Block:
            parts = key.split("-") if q > 10 else list(key)
            word = tuple(int(p) for p in parts)
            if len(word) != k or any(not 0 <= s < q for s in word):
                raise RefsysError(f"decode key {key!r} is not a length-{k} word over q={q}")
            return word

        return cls.from_tables(q, k, obj["encode"],
                               {parse(key): v for key, v in obj.get("decode", {}).items()},
                               int(obj.get("default", 0)))


def identity_code(q: int, k: int) -> BlockCode:
    """All q**k words in lexicographic order, decoded by inverse lookup."""
    words = tuple(itertools.product(range(q), repeat=k))
    index = {w: m for m, w in enumerate(words)}
    return BlockCode(q, k, words, lambda y: index[tuple(y)])


# ---------------------------------------------------------------------------
# collapsed noise


@dataclass(frozen=True)
class CollapsedDist:
    k: int
    b: int
    counts: Mapping[Block, int]

    def probabilities(self) -> dict[Block, float]:
        return {a: c / self.b for a, c in self.counts.items()}

    def entropy(self) -> float:
        return -sum(c / self.b * math.log2(c / self.b) for c in self.counts.values()) + 0.0


def collapsed_dist(z: SymbolSeq, k: int, b: int) -> CollapsedDist:
    return CollapsedDist(k, b, dict(Counter(_blocks(z, k, b))))


def collapsed_entropy(z: SymbolSeq, k: int, b: int) -> float:
    """Entropy in bits of the empirical distribution of the first b k-blocks."""
    return collapsed_dist(z, k, b).entropy()


# ---------------------------------------------------------------------------
# iterated mapping


def block_errors(code: BlockCode, z: SymbolSeq, b: int) -> np.ndarray:
    """err[i, m] = 1 iff message m sent in block i is decoded wrongly."""
    if code.q != z.q:
        raise RefsysError(f"code alphabet q={code.q} differs from noise q={z.q}")
    blocks = _blocks(z, code.k, b)
    err = np.zeros((b, code.M), dtype=bool)
    for i, zb in enumerate(blocks):
        for m in range(code.M):
            err[i, m] = code.decode(_add(code.encode(m), zb, code.q)) != m
    return err


def iterated_mapping_eval(code: BlockCode, z: SymbolSeq, b: int, trials: int = 1000,
                          seed: int = 0, exhaustive: bool = False) -> float:
    """Average over blocks of the message error probability.

    Monte Carlo draws ``trials`` independent uniform message tuples.
    ``exhaustive=True`` averages over every one of the M**b tuples instead.
    """
    err = block_errors(code, z, b)
    if exhaustive:
        if code.M ** b > 1 << 20:
            raise RefsysError(f"M**b = {code.M ** b} tuples is beyond the enumeration budget")
        total = 0
        for msgs in itertools.product(range(code.M), repeat=b):
            total += sum(int(err[i, m]) for i, m in enumerate(msgs))
        return total / (b * code.M ** b)
    if trials < 1:
        raise RefsysError(f"trials must be >= 1, got {trials}")
    rng = np.random.Generator(np.random.Philox(seed))
    msgs = rng.integers(0, code.M, size=(trials, b))
    return float(err[np.arange(b)[None, :], msgs].mean())


# ---------------------------------------------------------------------------
# prefix/suffix code for the test channel


@dataclass(frozen=True)
class PrefixSuffixCode:
    k: int
    d: int
    q: int
    registry: Mapping[Block, Block]  # noise prefix -> noise suffix

    @property
    def M(self) -> int:
        return self.q ** self.d

    def encode(self, m: int) -> Block:
        digits = []
        for _ in range(self.d):
            m, r = divmod(m, self.q)
            digits.append(r)
        return (0,) * (self.k - self.d) + tuple(reversed(digits))

    def decode(self, y: Block) -> int:
        cut = self.k - self.d
        suffix = self.registry.get(tuple(y[:cut]))
        if suffix is None:
            return 0
        m = 0
        for ys, zs in zip(y[cut:], suffix):
            m = m * self.q + (ys - zs) % self.q
        return m

    def block_code(self) -> BlockCode:
        return BlockCode(self.q, self.k, tuple(self.encode(m) for m in range(self.M)), self.decode)


def prefix_suffix_build(k: int, d: int, z: SymbolSeq) -> tuple[BlockCode, dict[Block, Block]]:
    """Zero-error code for a noise sequence with the unique-prefix property.

    The first k-d input symbols are 0, so the receiver reads the noise
    prefix directly and looks up the suffix noise recorded for it.
    """
    if not 1 <= d < k:
        raise RefsysError(f"need 1 <= d < k, got k={k}, d={d}")
    registry: dict[Block, Block] = {}
    for blk in _blocks(z, k, len(z) // k) if len(z) >= k else []:
        prefix, suffix = blk[: k - d], blk[k - d:]
        seen = registry.setdefault(prefix, suffix)
        if seen != suffix:
            raise RefsysError(f"prefix {prefix} carries suffixes {seen} and {suffix}")
    return PrefixSuffixCode(k, d, z.q, registry).block_code(), registry


# ---------------------------------------------------------------------------
# test-channel entropy


ENUM_BUDGET = 1 << 16


def testchannel_entropy_exact(k: int, d: int, i_blocks: int, q: int = 2) -> float:
    """H(Z^{i k}) of the test-channel process, by enumerating every history.

    The sequence determines its registry, so each history is a distinct
    sequence and the entropy is that of the history distribution.
    """
    if not 1 <= d < k or i_blocks < 1:
        raise RefsysError(f"need 1 <= d < k and i >= 1, got k={k}, d={d}, i={i_blocks}")
    if q ** (k * i_blocks) > ENUM_BUDGET:
        raise RefsysError(f"q^(k i) = {q ** (k * i_blocks)} exceeds the enumeration budget")
    prefixes = list(itertools.product(range(q), repeat=k - d))
    suffixes = list(itertools.product(range(q), repeat=d))
    p_prefix = Fraction(1, len(prefixes))
    p_suffix = Fraction(1, len(suffixes))

    def walk(depth: int, registry: dict, prob: Fraction):
        if depth == i_blocks:
            yield prob
            return
        for pre in prefixes:
            known = registry.get(pre)
            if known is not None:
                yield from walk(depth + 1, registry, prob * p_prefix)
                continue
            for suf in suffixes:
                registry[pre] = suf
                yield from walk(depth + 1, registry, prob * p_prefix * p_suffix)
                del registry[pre]

    probs = list(walk(0, {}, Fraction(1)))
    if sum(probs) != 1:
        raise AssertionError("history probabilities do not sum to 1")
    return -sum(float(p) * math.log2(p.numerator / p.denominator) for p in probs)


def testchannel_entropy_bound(k: int, d: int, i_blocks: int, q: int = 2) -> float:
    """i k H1 + min(i, q^(k-d)) k (H0 - H1), H1 = (k-d)/k log2 q, H0 - H1 = d/(2k) log2 q."""
    lq = math.log2(q)
    H1 = (k - d) / k * lq
    gap = d / (2 * k) * lq
    return i_blocks * k * H1 + min(i_blocks, q ** (k - d)) * k * gap


# ---------------------------------------------------------------------------
# exhaustive search over small block codes


def exhaustive_block_codes(z: SymbolSeq, k: int, b: int):
    """Yield (M, rate, avg_error) for every encoder/decoder pair with M >= 2.

    Encoders are injective ordered codeword tables, decoders every map from
    the q**k outputs to messages. Only feasible for tiny q**k.
    """
    q = z.q
    words = list(itertools.product(range(q), repeat=k))
    if len(words) > 4:
        raise RefsysError("exhaustive search is limited to q**k <= 4")
    blocks = _blocks(z, k, b)
    out_index = {w: u for u, w in enumerate(words)}
    for M in range(2, len(words) + 1):
        rate = math.log2(M) / k
        for enc in itertools.permutations(words, M):
            # received word index for (block i, message m)
            rx = [[out_index[_add(enc[m], zb, q)] for m in range(M)] for zb in blocks]
            for dec in itertools.product(range(M), repeat=len(words)):
                wrong = sum(dec[r] != m for row in rx for m, r in enumerate(row))
                yield M, rate, wrong / (b * M)


def best_effective_rate(z: SymbolSeq, k: int, b: int) -> float:
    """Largest (1 - eps) R - h_b(eps)/k over all small codes (0 for the trivial code)."""
    best = 0.0
    for _, rate, eps in exhaustive_block_codes(z, k, b):
        best = max(best, effective_rate(rate, eps, k))
    return best


# ---------------------------------------------------------------------------
# redundancy against the zero-error reference


def redundancy_experiment(k: int, d: int, n: int, config, seed: int = 0, q: int | None = None) -> dict:
    """Reference rate (d/k) log2 q against a universal session on the same test-channel noise."""
    from .scheme import run_session

    q = config.q if q is None else q
    if config.n != n or config.q != q:
        raise RefsysError("scheme config must match n and q")
    z = noise_generate(TestChannel(k, d, q), n, seed)
    log = run_session(config, z)
    r_ifb = d / k * math.log2(q)
    r_u = effective_rate(log.R_act, config.epsilon, n)
    return {"R_star_ifb": r_ifb, "R_star_universal": r_u, "gap": r_ifb - r_u, "R_act": log.R_act,
            "error": log.error}

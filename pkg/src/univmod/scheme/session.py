"""Rateless feedback sessions over y = x + z (mod q).

Two engines produce identical :class:`SessionLog` values for the LZ78
metric: a generic one written against the :class:`CoderState` contract
(encoder, channel and decoder exchange one feedback bit per symbol), and a
compiled one in :mod:`univmod.scheme.fastlz`. The KT metric runs on the
generic engine only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ..core import Alphabet, ChannelSession, SymbolSeq
from ..srccode import KTMixtureState, LZ78State, lz78_delta_max
from ..srccode.kt import default_k_max
from . import fastlz
from .codebook import MASK, Codebook, block_key, position_key, symbol_from_key
from .rate import K_CAP, r_emp, rate_floor, threshold_offset

METRICS = ("lz78", "kt")
DEFAULT_WORK_BUDGET = 1 << 36
_MESSAGE_TAG = 0x6D657373


class ConfigError(ValueError):
    """Invalid scheme configuration."""


@dataclass(frozen=True)
class SchemeConfig:
    n: int
    q: int
    K: int
    epsilon: float
    seed: int = 0
    metric: str = "lz78"
    kt_k_max: int | None = None
    K_cap: int = K_CAP
    work_budget: int = DEFAULT_WORK_BUDGET

    def __post_init__(self):
        Alphabet(self.q)
        if self.n < 1:
            raise ConfigError(f"horizon n must be >= 1, got {self.n}")
        if not 1 <= self.K <= self.K_cap:
            raise ConfigError(f"K must lie in [1, {self.K_cap}], got {self.K}")
        if not 0 < self.epsilon < 1:
            raise ConfigError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.metric not in METRICS:
            raise ConfigError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if (1 << self.K) * self.n > self.work_budget:
            raise ConfigError(
                f"2^K * n = {(1 << self.K) * self.n} exceeds the work budget {self.work_budget}"
            )
        if (self.n + 1) * self.q >= 1 << 31:
            raise ConfigError("n * q too large for the trie index width")
        if self.kt_k_max is not None and self.kt_k_max < 1:
            raise ConfigError(f"kt_k_max must be >= 1, got {self.kt_k_max}")

    @property
    def integer_lengths(self) -> bool:
        return self.metric == "lz78"

    @property
    def delta_L_max(self) -> float:
        return float(lz78_delta_max(self.n, self.q)) if self.metric == "lz78" else 0.0

    @property
    def k_max(self) -> int:
        return self.kt_k_max if self.kt_k_max is not None else default_k_max(self.n, self.q)

    def new_coder(self):
        if self.metric == "lz78":
            return LZ78State(self.q)
        return KTMixtureState(self.q, k_max=self.k_max)


@dataclass(frozen=True)
class BlockRecord:
    start: int  # 1-based first symbol of the block (j + 1)
    end: int  # 1-based symbol at which the decoder terminated (i)
    m_hat: int
    m_true: int
    L_S_prefix: float  # L_S of the decoded noise prefix at the block start
    L_T_end: float  # winner's L_T at termination


@dataclass(frozen=True)
class SessionLog:
    n: int
    q: int
    K: int
    epsilon: float
    metric: str
    seed: int
    blocks: tuple[BlockRecord, ...]
    final_start: int | None  # start of the undecoded last block, if any
    L_T_true: float  # coder length of the true noise sequence
    delta_L_max: float
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def B(self) -> int:
        return len(self.blocks)

    @property
    def bits(self) -> int:
        return self.B * self.K

    @property
    def R_act(self) -> float:
        return self.B * self.K / self.n

    @property
    def error(self) -> bool:
        return any(blk.m_hat != blk.m_true for blk in self.blocks)

    @property
    def r_emp(self) -> float:
        return r_emp(self.L_T_true, self.n, self.q)

    @property
    def rate_floor(self) -> float:
        return rate_floor(self.L_T_true, self.n, self.q, self.K, self.epsilon, self.delta_L_max)

    @property
    def floor_ok(self) -> bool:
        """R_act >= rate_floor; only meaningful for error-free sessions."""
        return self.R_act >= self.rate_floor

    def summary(self) -> dict:
        return {
            "B": self.B,
            "bits": self.bits,
            "R_act": self.R_act,
            "r_emp": self.r_emp,
            "rate_floor": self.rate_floor,
            "error": self.error,
        }


def session_messages(config: SchemeConfig, message_bits: Iterable[int] | None = None) -> np.ndarray:
    """Per-block messages; n + 1 covers every block a session can open.

    Explicit bits are packed K at a time, most significant first; leftover
    bits that do not fill a message are ignored.
    """
    K = config.K
    if message_bits is None:
        ss = np.random.SeedSequence([config.seed & MASK, _MESSAGE_TAG])
        rng = np.random.Generator(np.random.Philox(ss))
        return rng.integers(0, 1 << K, size=config.n + 1, dtype=np.int64)
    bits = np.asarray(list(message_bits), dtype=np.int64)
    if bits.size and not np.isin(bits, (0, 1)).all():
        raise ConfigError("message bits must be 0 or 1")
    count = bits.size // K
    weights = 1 << np.arange(K - 1, -1, -1, dtype=np.int64)
    return bits[: count * K].reshape(count, K) @ weights if count else np.zeros(0, dtype=np.int64)


def true_noise_length(config: SchemeConfig, noise: SymbolSeq) -> float:
    if config.metric == "lz78":
        _, lt, _ = fastlz.lz78_lengths_nb(noise.data, config.q, Alphabet(config.q).symbol_bits)
        return float(lt)
    coder = config.new_coder()
    coder.feed_many(noise.data.tolist())
    return coder.lengths()[1]


class Encoder:
    """Sends codeword symbols; moves to the next message on a feedback 1.

    Its output at time i is a function of (messages, seed, feedback_1..i-1) only.
    """

    def __init__(self, codebook: Codebook, messages: Sequence[int]):
        self.codebook = codebook
        self.messages = messages
        self.block = 0
        self.t = 0

    def current_message(self) -> int:
        if self.block >= len(self.messages):
            raise ConfigError(f"message source exhausted after {self.block} blocks")
        return int(self.messages[self.block])

    def next_symbol(self) -> int:
        x = self.codebook.symbol(self.block, self.current_message(), self.t)
        self.t += 1
        return x

    def feedback(self, bit: int) -> None:
        if bit:
            self.block += 1


class Decoder:
    """Keeps one forked coder per message hypothesis for the open block."""

    def __init__(self, config: SchemeConfig, codebook: Codebook):
        self.config = config
        self.codebook = codebook
        self.q = config.q
        self.lq = math.log2(config.q)
        self.offset = threshold_offset(config.n, config.K, config.epsilon)
        self.shared = config.new_coder()
        self.i = 0
        self.j = 0
        self.block = 0
        self.decoded: list[tuple[int, int, int, float, float]] = []
        self._open_block()

    def _open_block(self) -> None:
        self.L_S_prefix = self.shared.lengths()[0]
        self.hyps = [self.shared.fork() for _ in range(self.codebook.size)]
        self._kb = block_key(self.codebook.seed, self.block)

    def threshold(self, i: int) -> float:
        raw = (i - self.j) * self.lq - self.offset
        return math.floor(raw) if self.config.integer_lengths else raw

    def receive(self, y: int) -> int:
        """Consume one channel output; returns the feedback bit."""
        t = self.i
        self.i += 1
        thr = self.threshold(self.i)
        kbt = position_key(self._kb, t)
        q = self.q
        for m, hyp in enumerate(self.hyps):
            hyp.feed((y - symbol_from_key(kbt, m, q)) % q)
            L_T = hyp.lengths()[1]
            if L_T - self.L_S_prefix <= thr:
                self.decoded.append((self.j + 1, self.i, m, self.L_S_prefix, L_T))
                self.shared = hyp.copy()
                self.j = self.i
                self.block += 1
                self._open_block()
                return 1
        return 0


def run_session_generic(config: SchemeConfig, noise: SymbolSeq, messages: np.ndarray) -> SessionLog:
    codebook = Codebook(config.seed, config.q, config.K)
    encoder = Encoder(codebook, messages)
    decoder = Decoder(config, codebook)
    channel = ChannelSession(noise)
    for _ in range(config.n):
        bit = decoder.receive(channel.send(encoder.next_symbol()))
        encoder.feedback(bit)
    blocks = []
    for idx, (start, end, m, lp, lt) in enumerate(decoder.decoded):
        blocks.append(BlockRecord(start, end, m, int(messages[idx]), _num(lp, config), _num(lt, config)))
    final_start = decoder.j + 1 if decoder.j < config.n else None
    return _finish(config, noise, blocks, final_start)


def _num(v, config: SchemeConfig):
    return int(v) if config.integer_lengths else float(v)


def _finish(config, noise, blocks, final_start) -> SessionLog:
    return SessionLog(
        n=config.n,
        q=config.q,
        K=config.K,
        epsilon=config.epsilon,
        metric=config.metric,
        seed=config.seed,
        blocks=tuple(blocks),
        final_start=final_start,
        L_T_true=_num(true_noise_length(config, noise), config),
        delta_L_max=config.delta_L_max,
    )


def run_session_fast(config: SchemeConfig, noise: SymbolSeq, messages: np.ndarray) -> SessionLog:
    if config.metric != "lz78":
        raise ConfigError("the compiled engine supports the lz78 metric only")
    status, B, starts, ends, m_hat, m_true, lp, lt, final_start = fastlz.run_lz78_session(
        noise.data,
        config.q,
        config.K,
        np.uint64(config.seed & MASK),
        np.ascontiguousarray(messages, dtype=np.int64),
        math.log2(config.q),
        threshold_offset(config.n, config.K, config.epsilon),
        Alphabet(config.q).symbol_bits,
    )
    if status == fastlz.STATUS_OUT_OF_MESSAGES:
        raise ConfigError(f"message source exhausted after {B} blocks")
    blocks = [
        BlockRecord(int(starts[b]), int(ends[b]), int(m_hat[b]), int(m_true[b]), int(lp[b]), int(lt[b]))
        for b in range(B)
    ]
    return _finish(config, noise, blocks, int(final_start) or None)


def run_session(config: SchemeConfig, noise: SymbolSeq, message_bits: Iterable[int] | None = None,
                engine: str = "auto") -> SessionLog:
    """Simulate encoder, channel, decoder and feedback over the whole horizon.

    ``engine`` is ``"auto"`` (compiled for LZ78), ``"fast"`` or ``"generic"``.
    """
    if len(noise) != config.n:
        raise ConfigError(f"noise has {len(noise)} symbols, config expects n={config.n}")
    if noise.q != config.q:
        raise ConfigError(f"noise alphabet q={noise.q} differs from config q={config.q}")
    messages = session_messages(config, message_bits)
    if engine == "auto":
        engine = "fast" if config.metric == "lz78" else "generic"
    if engine == "fast":
        return run_session_fast(config, noise, messages)
    if engine == "generic":
        return run_session_generic(config, noise, messages)
    raise ConfigError(f"unknown engine {engine!r}")

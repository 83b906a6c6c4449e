"""Individual noise sequences: generators, spec strings and the MODZ file format.

A noise spec string has the form ``kind:key=value,key=value``::

    zero                      all-zero noise
    const:s=1                 constant symbol
    bern:p=0.11,seed=42       P(z != 0) = p, nonzero symbols uniform
    iid:dist=0.7/0.2/0.1      i.i.d. over q = len(dist) symbols
    periodic:pattern=0110     repeated pattern (use '-' separators when q > 10)
    markov:rows=0.9/0.1|0.3/0.7,seed=1
    test:k=3,d=1,seed=7       unique-prefix test channel
    file:path/to/noise.modz   (a bare existing path works too)

Whenever a spec carries its own seed it overrides the seed passed to
:func:`noise_generate`.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .core import Alphabet, AlphabetError, SymbolSeq

MODZ_MAGIC = b"MODZ"
MODZ_VERSION = 1
_HEADER = struct.Struct("<4sHHQ")


class NoiseSpecError(ValueError):
    """Invalid noise specification."""


def _check_dist(dist, what="distribution"):
    dist = tuple(float(p) for p in dist)
    if any(p < 0 for p in dist):
        raise NoiseSpecError(f"{what} has negative entries: {dist}")
    if abs(sum(dist) - 1.0) > 1e-12:
        raise NoiseSpecError(f"{what} sums to {sum(dist)!r}, not 1")
    return dist


@dataclass(frozen=True)
class FixedFile:
    path: str

    @property
    def seed(self):
        return None


@dataclass(frozen=True)
class AllConstant:
    symbol: int = 0
    q: int = 2
    seed: int | None = None

    def __post_init__(self):
        Alphabet(self.q)
        if not 0 <= self.symbol < self.q:
            raise NoiseSpecError(f"constant symbol {self.symbol} out of range for q={self.q}")


@dataclass(frozen=True)
class BernoulliLike:
    """I.i.d. noise with the given symbol distribution (q = len(dist))."""

    dist: tuple
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "dist", _check_dist(self.dist))
        Alphabet(len(self.dist))

    @property
    def q(self) -> int:
        return len(self.dist)

    @classmethod
    def bernoulli(cls, p: float, q: int = 2, seed=None) -> "BernoulliLike":
        """P(z != 0) = p with the nonzero mass spread evenly."""
        if not 0 <= p <= 1:
            raise NoiseSpecError(f"p must lie in [0, 1], got {p}")
        rest = p / (q - 1)
        return cls((1.0 - p,) + (rest,) * (q - 1), seed)


@dataclass(frozen=True)
class Periodic:
    pattern: tuple
    q: int = 2
    seed: int | None = None

    def __post_init__(self):
        Alphabet(self.q)
        pattern = tuple(int(s) for s in self.pattern)
        if not pattern:
            raise NoiseSpecError("periodic pattern is empty")
        if any(not 0 <= s < self.q for s in pattern):
            raise NoiseSpecError(f"pattern symbol out of range for q={self.q}")
        object.__setattr__(self, "pattern", pattern)


@dataclass(frozen=True)
class MarkovChain:
    """First-order Markov noise; ``transition[a][b] = P(next=b | current=a)``.

    The initial symbol is drawn from the first row.
    """

    transition: tuple
    seed: int | None = None

    def __post_init__(self):
        rows = tuple(_check_dist(r, "transition row") for r in self.transition)
        if any(len(r) != len(rows) for r in rows):
            raise NoiseSpecError("transition table must be square")
        Alphabet(len(rows))
        object.__setattr__(self, "transition", rows)

    @property
    def q(self) -> int:
        return len(self.transition)


@dataclass(frozen=True)
class TestChannel:
    """Random noise whose (k-d)-prefix determines the d-suffix in every k-block."""

    __test__ = False  # not a pytest class

    k: int
    d: int
    q: int = 2
    seed: int | None = None

    def __post_init__(self):
        Alphabet(self.q)
        if not 1 <= self.d < self.k:
            raise NoiseSpecError(f"test channel needs 1 <= d < k, got k={self.k}, d={self.d}")


NoiseSpec = Union[FixedFile, AllConstant, BernoulliLike, Periodic, MarkovChain, TestChannel]


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed) & 0xFFFFFFFFFFFFFFFF))


def _test_channel(spec: TestChannel, n: int, rng: np.random.Generator) -> np.ndarray:
    q, k, d = spec.q, spec.k, spec.d
    out = np.empty(n, dtype=np.uint8)
    registry: dict[bytes, np.ndarray] = {}
    pos = 0
    while pos < n:
        prefix = rng.integers(0, q, size=k - d, dtype=np.uint8)
        key = prefix.tobytes()
        suffix = registry.get(key)
        if suffix is None:
            suffix = rng.integers(0, q, size=d, dtype=np.uint8)
            registry[key] = suffix
        block = np.concatenate([prefix, suffix])
        take = min(k, n - pos)
        out[pos:pos + take] = block[:take]
        pos += take
    return out


def noise_generate(spec: NoiseSpec, n: int, seed: int = 0) -> SymbolSeq:
    """Produce ``n`` noise symbols; a pure function of ``(spec, n, seed)``."""
    if n < 1:
        raise NoiseSpecError(f"noise length must be >= 1, got {n}")
    if spec.seed is not None:
        seed = spec.seed
    if isinstance(spec, FixedFile):
        z = read_modz(spec.path)
        if len(z) < n:
            raise NoiseSpecError(f"{spec.path} holds {len(z)} symbols, {n} requested")
        return z[:n]
    if isinstance(spec, AllConstant):
        return SymbolSeq(spec.q, np.full(n, spec.symbol, dtype=np.uint8))
    if isinstance(spec, Periodic):
        reps = -(-n // len(spec.pattern))
        return SymbolSeq(spec.q, np.tile(np.asarray(spec.pattern, dtype=np.uint8), reps)[:n])
    rng = _rng(seed)
    if isinstance(spec, BernoulliLike):
        data = rng.choice(spec.q, size=n, p=np.asarray(spec.dist))
        return SymbolSeq(spec.q, data.astype(np.uint8))
    if isinstance(spec, MarkovChain):
        table = np.cumsum(np.asarray(spec.transition), axis=1)
        u = rng.random(n)
        data = np.empty(n, dtype=np.uint8)
        state = 0
        for i in range(n):
            state = min(int(np.searchsorted(table[state], u[i], side="right")), spec.q - 1)
            data[i] = state
        return SymbolSeq(spec.q, data)
    if isinstance(spec, TestChannel):
        return SymbolSeq(spec.q, _test_channel(spec, n, rng))
    raise NoiseSpecError(f"unknown noise spec {spec!r}")


def has_unique_prefix(z: SymbolSeq, k: int, d: int) -> bool:
    """True iff, across complete k-blocks of z, equal (k-d)-prefixes carry equal suffixes."""
    seen = {}
    for b in range(len(z) // k):
        block = z.data[b * k:(b + 1) * k]
        key, suffix = block[:k - d].tobytes(), block[k - d:].tobytes()
        if seen.setdefault(key, suffix) != suffix:
            return False
    return True


# -- spec strings ------------------------------------------------------------

def _kv(body: str) -> dict:
    out = {}
    for part in filter(None, body.split(",")):
        if "=" not in part:
            raise NoiseSpecError(f"expected key=value, got {part!r}")
        key, value = part.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _symbols(text: str) -> tuple:
    parts = text.split("-") if "-" in text else list(text)
    return tuple(int(p) for p in parts)


def parse_noise(text: str, q: int = 2) -> NoiseSpec:
    """Parse a noise spec string (or a path to a MODZ file)."""
    text = text.strip()
    kind, _, body = text.partition(":")
    kind = kind.lower()
    if kind == "file":
        return FixedFile(body)
    if kind not in {"zero", "const", "bern", "iid", "periodic", "markov", "test"}:
        if os.path.exists(text):
            return FixedFile(text)
        raise NoiseSpecError(f"unknown noise spec {text!r}")
    kv = _kv(body)
    seed = int(kv.pop("seed")) if "seed" in kv else None
    try:
        if kind == "zero":
            spec = AllConstant(0, q, seed)
        elif kind == "const":
            spec = AllConstant(int(kv.pop("s", 0)), q, seed)
        elif kind == "bern":
            spec = BernoulliLike.bernoulli(float(kv.pop("p")), q, seed)
        elif kind == "iid":
            spec = BernoulliLike(tuple(float(p) for p in kv.pop("dist").split("/")), seed)
        elif kind == "periodic":
            spec = Periodic(_symbols(kv.pop("pattern")), q, seed)
        elif kind == "markov":
            rows = kv.pop("rows").split("|")
            spec = MarkovChain(tuple(tuple(float(p) for p in r.split("/")) for r in rows), seed)
        else:
            spec = TestChannel(int(kv.pop("k")), int(kv.pop("d")), q, seed)
    except KeyError as exc:
        raise NoiseSpecError(f"noise spec {text!r} is missing {exc.args[0]!r}") from None
    if kv:
        raise NoiseSpecError(f"unexpected keys in {text!r}: {sorted(kv)}")
    return spec


def format_noise(spec: NoiseSpec) -> str:
    """Inverse of :func:`parse_noise` (up to q, which the caller tracks)."""
    seed = "" if spec.seed is None else f",seed={spec.seed}"
    if isinstance(spec, FixedFile):
        return f"file:{spec.path}"
    if isinstance(spec, AllConstant):
        return "zero" if spec.symbol == 0 and not seed else f"const:s={spec.symbol}{seed}"
    if isinstance(spec, BernoulliLike):
        return f"iid:dist={'/'.join(repr(p) for p in spec.dist)}{seed}"
    if isinstance(spec, Periodic):
        sep = "-" if spec.q > 10 else ""
        return f"periodic:pattern={sep.join(str(s) for s in spec.pattern)}{seed}"
    if isinstance(spec, MarkovChain):
        rows = "|".join("/".join(repr(p) for p in r) for r in spec.transition)
        return f"markov:rows={rows}{seed}"
    return f"test:k={spec.k},d={spec.d}{seed}"


def noise_q(spec: NoiseSpec) -> int:
    if isinstance(spec, FixedFile):
        with open(spec.path, "rb") as fh:
            return _read_header(fh.read(_HEADER.size), spec.path)[0]
    return spec.q


# -- MODZ files ----------------------------------------------------------------

def _read_header(raw: bytes, path) -> tuple[int, int]:
    if len(raw) < _HEADER.size:
        raise NoiseSpecError(f"{path}: truncated MODZ header")
    magic, version, q, n = _HEADER.unpack(raw[:_HEADER.size])
    if magic != MODZ_MAGIC:
        raise NoiseSpecError(f"{path}: bad magic {magic!r}")
    if version != MODZ_VERSION:
        raise NoiseSpecError(f"{path}: unsupported MODZ version {version}")
    return q, n


def write_modz(path, z: SymbolSeq) -> None:
    """Write ``z`` atomically in MODZ format."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(_HEADER.pack(MODZ_MAGIC, MODZ_VERSION, z.q, len(z)))
        fh.write(z.data.tobytes())
    os.replace(tmp, path)


def read_modz(path) -> SymbolSeq:
    raw = Path(path).read_bytes()
    q, n = _read_header(raw, path)
    body = raw[_HEADER.size:]
    if len(body) != n:
        raise NoiseSpecError(f"{path}: header says {n} symbols, file holds {len(body)}")
    try:
        return SymbolSeq(q, np.frombuffer(body, dtype=np.uint8))
    except AlphabetError as exc:
        raise NoiseSpecError(f"{path}: {exc}") from None

"""Universal feedback communication over modulo-additive channels."""

from .core import Alphabet, AlphabetError, ChannelSession, SymbolSeq, mod_add, mod_sub
from .noise import noise_generate, parse_noise

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "AlphabetError",
    "ChannelSession",
    "SymbolSeq",
    "mod_add",
    "mod_sub",
    "noise_generate",
    "parse_noise",
]

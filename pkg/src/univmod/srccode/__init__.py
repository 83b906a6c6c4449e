from .base import CoderState, ceil_log2, elias_gamma_length
from .block import BlockEmpiricalCoder, block_empirical_compress, empirical_block_entropy
from .kt import KTMixtureState, default_k_max, kt_code_length, kt_feed, kt_lengths
from .lz78 import LZ78State, lz78_compress, lz78_delta_max, lz78_feed, lz78_lengths, lz78_parse

__all__ = [
    "BlockEmpiricalCoder",
    "CoderState",
    "KTMixtureState",
    "LZ78State",
    "block_empirical_compress",
    "ceil_log2",
    "default_k_max",
    "elias_gamma_length",
    "empirical_block_entropy",
    "kt_code_length",
    "kt_feed",
    "kt_lengths",
    "lz78_compress",
    "lz78_delta_max",
    "lz78_feed",
    "lz78_lengths",
    "lz78_parse",
]

from .codebook import Codebook, codebook_symbol
from .rate import (
    K_CAP,
    KChoice,
    choose_K,
    delta_n,
    r_emp,
    rate_floor,
    termination_check,
    termination_threshold,
)
from .session import (
    BlockRecord,
    ConfigError,
    Decoder,
    Encoder,
    SchemeConfig,
    SessionLog,
    run_session,
    session_messages,
)

__all__ = [
    "BlockRecord",
    "Codebook",
    "ConfigError",
    "Decoder",
    "Encoder",
    "KChoice",
    "K_CAP",
    "SchemeConfig",
    "SessionLog",
    "choose_K",
    "codebook_symbol",
    "delta_n",
    "r_emp",
    "rate_floor",
    "run_session",
    "session_messages",
    "termination_check",
    "termination_threshold",
]

"""Termination rule, block-size choice and the achieved-rate formulas."""

from __future__ import annotations

import math
from typing import NamedTuple

K_CAP = 16


class KChoice(NamedTuple):
    K: int
    K_uncapped: int
    capped: bool


def overhead_terms(n: int, q: int, epsilon: float, delta_L_max: float) -> tuple[float, float]:
    """(a, b) of the a/K + bK overhead: a = log2 q (log2(qn/eps) + Delta), b = 1/n."""
    lq = math.log2(q)
    return lq * (math.log2(q * n / epsilon) + delta_L_max), 1.0 / n


def ceil_sqrt_ratio(a: float, b: float) -> int:
    return max(1, math.ceil(math.sqrt(a / b)))


def choose_K(n: int, q: int, epsilon: float, delta_L_max: float, K_cap: int = K_CAP) -> KChoice:
    """K = min(K_cap, ceil(sqrt(a/b))), reporting whether the cap bit."""
    if n < 1 or q < 2 or not 0 < epsilon < 1 or delta_L_max < 0:
        raise ValueError("choose_K needs n >= 1, q >= 2, 0 < eps < 1, delta >= 0")
    a, b = overhead_terms(n, q, epsilon, delta_L_max)
    k = ceil_sqrt_ratio(a, b)
    return KChoice(min(k, K_cap), k, k > K_cap)


def threshold_offset(n: int, K: int, epsilon: float) -> float:
    """log2(n/eps) + K; both decoders subtract this same float."""
    return math.log2(n / epsilon) + K


def termination_threshold(i: int, j: int, K: int, n: int, epsilon: float, q: int,
                          integer: bool = True) -> float:
    raw = (i - j) * math.log2(q) - threshold_offset(n, K, epsilon)
    return math.floor(raw) if integer else raw


def termination_check(L_T_hyp: float, L_S_prefix: float, i: int, j: int, K: int, n: int,
                      epsilon: float, q: int, integer: bool = True) -> bool:
    """True iff the hypothesis ends the block at symbol ``i`` (block began after ``j``).

    ``integer=False`` drops the floor, for real-valued code lengths.
    """
    if not i > j >= 0:
        raise ValueError(f"need i > j >= 0, got i={i}, j={j}")
    return L_T_hyp - L_S_prefix <= termination_threshold(i, j, K, n, epsilon, q, integer)


def r_emp(L_T: float, n: int, q: int) -> float:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return math.log2(q) - L_T / n


def rate_floor(L_T_true: float, n: int, q: int, K: int, epsilon: float, delta_L_max: float) -> float:
    """Lower bound on B K / n for an error-free session with block size K."""
    lq = math.log2(q)
    return (K / n) * ((n * lq - L_T_true) / (K + lq + math.log2(n / epsilon) + delta_L_max) - 1.0)


def delta_n(n: int, q: int, epsilon: float, delta_L_max: float) -> float:
    """Rate overhead 3 sqrt(log2 q / n * (log2(nq/eps) + Delta)) of the optimal K."""
    return 3.0 * math.sqrt(math.log2(q) / n * (math.log2(n * q / epsilon) + delta_L_max))

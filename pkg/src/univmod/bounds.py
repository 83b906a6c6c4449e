"""Closed-form rate, redundancy and block-length bounds (all logs base 2)."""

from __future__ import annotations

import math
from typing import NamedTuple

from scipy.optimize import brentq

from .core import SymbolSeq
from .srccode.lz78 import lz78_compress

LOG2E = math.log2(math.e)


def binary_entropy(p: float) -> float:
    """h_b(p) in bits, with 0 log 0 = 0."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def effective_rate(R: float, epsilon: float, block_len: float) -> float:
    """Error-penalised rate max(0, (1 - eps) R - h_b(eps) / block_len).

    The value lower-bounds the normalised mutual information between sent and
    decoded messages, which is never negative, hence the clip at 0.
    """
    if block_len < 1:
        raise ValueError(f"block length must be >= 1, got {block_len}")
    return max(0.0, (1.0 - epsilon) * R - binary_entropy(epsilon) / block_len)


def cifb_upper(z: SymbolSeq) -> float:
    """Finite-n proxy (1 - rho78(z)) log2 q for the iterated-block capacity bound.

    rho78 at a finite length is only an estimate of the asymptotic
    compressibility, so treat the value as indicative.
    """
    _, rho = lz78_compress(z)
    return (1.0 - rho) * math.log2(z.q)


def fano_rate_bound(k: int, epsilon: float, H_collapsed: float, q: int = 2) -> float:
    """Largest rate a k-block code with average error eps can have on a collapsed
    noise of entropy ``H_collapsed`` bits.
    """
    if not 0.0 <= epsilon < 1.0:
        raise ValueError(f"epsilon must lie in [0, 1), got {epsilon}")
    return (math.log2(q) - H_collapsed / k + binary_entropy(epsilon) / k) / (1.0 - epsilon)


def redundancy_tau(n: float, k: int, q: int) -> float:
    """tau = q**k / n."""
    return q ** k / n


def delta_minus(n: float, k: int, q: int = 2) -> float:
    """Lower bound on the minimax redundancy against k-block reference systems."""
    if n < 1 or k < 1:
        raise ValueError("n and k must be >= 1")
    lq = math.log2(q)
    tau = redundancy_tau(n, k, q)
    if tau > q / k:
        return math.floor(math.log2(k * tau) / lq) * lq / (2 * k)
    return lq / (2 * q) * tau


def delta_n_star(n: float, q: int = 2) -> float:
    return 4.0 * math.sqrt(math.log2(q) * math.log2(n * n * q) / n)


def delta_pi(k: int, n: float, q: int = 2) -> float:
    """Regret of the block-KT mixture against the best k-block i.i.d. law, per symbol."""
    tau = redundancy_tau(n, k, q)
    return tau / 2 * math.log2(1 / tau) + (k / 4 * tau ** 2 + tau + k / n) * LOG2E


def delta_plus(n: float, k: int, q: int = 2) -> float:
    """Upper bound on the minimax redundancy; defined for tau <= 1 only."""
    tau = redundancy_tau(n, k, q)
    if tau > 1:
        raise ValueError(f"upper bound needs tau = q^k/n <= 1, got {tau}")
    return (
        tau / 2 * math.log2(1 / tau)
        + (k / 4 * tau ** 2 + tau) * LOG2E
        + delta_n_star(n, q)
        + k / n * math.log2(math.e * q)
    )


def g(tau: float) -> float:
    """tau log2(1/tau)."""
    return tau * math.log2(1.0 / tau)


G_MAX = g(1 / math.e)
_TAU_LO = 1e-300


def g_inverse(y: float) -> float:
    """Inverse of g on its increasing branch (0, 1/e].

    Values above max g (reached at 1/e) return 1/e: every tau on the branch
    then satisfies g(tau) <= y.
    """
    if y <= 0:
        raise ValueError(f"g^-1 needs y > 0, got {y}")
    if y >= G_MAX:
        return 1 / math.e
    return brentq(lambda t: g(t) - y, _TAU_LO, 1 / math.e, xtol=1e-15, maxiter=500)


class NStar(NamedTuple):
    lower: float
    upper: float  # math.inf when the bound gives nothing
    T: float | None


def n_star_bounds(k: int, delta: float, q: int = 2) -> NStar:
    """Bounds on the shortest horizon with minimax redundancy <= delta log2 q."""
    if delta <= 0 or k < 1:
        raise ValueError("need delta > 0 and k >= 1")
    lq = math.log2(q)
    lower = k * q ** ((1 - 2 * delta) * k) / q
    arg = (delta - 12 * q ** (-k / 2)) * lq / 3
    if arg <= 0:
        return NStar(lower, math.inf, None)
    T = g_inverse(arg)
    return NStar(lower, q ** k / min(T, 1 / k), T)


class Shtarkov(NamedTuple):
    C_m: float
    r: float


def shtarkov_terms(l: int, m: int) -> Shtarkov:
    """KT regret constants for l super-symbols over an alphabet of size m."""
    if l < 1 or m < 2:
        raise ValueError("need l >= 1 and m >= 2")
    C_m = (m * math.lgamma(0.5) - math.lgamma(m / 2)) / math.log(2)
    r = (m - 1) / 2 * math.log2(l / (2 * math.pi)) + C_m + (m * m / (4 * l) + m / 2) * LOG2E
    return Shtarkov(C_m, r)

"""Compiled LZ78 session engine.

Same decisions as the generic engine, specialised to the LZ78 metric, but
evaluated hypothesis-major instead of time-major. Within a block the shared
trie is frozen and the channel outputs are fixed by the true message, so
each hypothesis m can be run on its own until its first passing symbol T_m.
The block ends at min_m T_m and the smallest such m wins, exactly as in a
symbol-by-symbol scan. Running hypotheses one at a time lets each stop at
the best end found so far (the true message goes first, so that bound is
usually tight) and keeps the working set in cache.

* the shared phrase trie (state after the decoded prefix) lives in a flat
  ``child[node * q + s]`` table;
* the hypothesis being run keeps the links it creates in an open-addressing
  table keyed ``parent * q + s``; its e-th new node gets id ``-e``. Base
  children never collide with private links because a hypothesis only
  creates a link where the base trie has none. Slots carry a run stamp in
  their high 32 bits, so stale entries read as empty. A run that fills the
  table is repeated with a table twice the size;
* after a decode the winner's noise tail is replayed into the shared trie.
"""

from __future__ import annotations

import numba as nb
import numpy as np

from .codebook import nb_block_key, nb_position_key, nb_symbol

STATUS_OK = 0
STATUS_OUT_OF_MESSAGES = 1


@nb.njit(cache=True, inline="always")
def _bitlen(x):
    r = 0
    while x > 0:
        x >>= 1
        r += 1
    return r


@nb.njit(cache=True, inline="always")
def _gamma_len(m):
    return 2 * (_bitlen(m) - 1) + 1


@nb.njit(cache=True)
def lz78_lengths_nb(z, q, symbol_bits):
    """(L_S, L_T, phrases) of a whole sequence under the package accounting."""
    n = z.shape[0]
    child = np.full((n + 1) * q, -1, dtype=np.int32)
    node = 0
    c = 0
    ls = 0
    for t in range(n):
        key = node * q + z[t]
        nxt = child[key]
        if nxt >= 0:
            node = nxt
        else:
            ls += _bitlen(c) + symbol_bits
            c += 1
            child[key] = c
            node = 0
    return ls, ls + _bitlen(c) + _gamma_len(n + 1), c


@nb.njit(cache=True)
def _run_hypothesis(m, j, stop, have, mt, kb, z, y, pkey, limit, child, q, lq, offset,
                    symbol_bits, base_node, base_c, base_ls, hkey, hval, stamp):
    """Run hypothesis m over symbols j+1..stop of the open block.

    Returns ``(pass_symbol, L_T, have, overflow)``; pass_symbol is -1 when
    the hypothesis never passes. ``overflow`` means the link table filled
    up and the run must be repeated with a larger one.
    """
    T = hkey.shape[0]
    mask = T - 1
    node = base_node
    phr = base_c
    ls = base_ls
    lt = base_ls + _bitlen(base_c)
    cnt = 0
    for t in range(j, stop):
        if t == have:
            kbt = nb_position_key(kb, t)
            pkey[t] = kbt
            y[t] = (nb_symbol(kbt, mt, q) + z[t]) % q
            limit[t] = base_ls + np.int64(np.floor((t + 1 - j) * lq - offset)) - _gamma_len(t + 2)
            have += 1
        s = y[t] - nb_symbol(pkey[t], m, q)
        if s < 0:
            s += q
        nxt = -1
        found = False
        if node >= 0:
            nxt = child[node * q + s]
            found = nxt >= 0
        if not found:
            key = np.int64(node) * q + s
            tag = (stamp << 32) | (key & 0xFFFFFFFF)
            slot = ((key * 2654435761) >> 16) & mask
            while True:
                cur = hkey[slot]
                if cur == tag:
                    nxt = hval[slot]
                    found = True
                    break
                if (cur >> 32) != stamp:
                    break
                slot = (slot + 1) & mask
            if not found:
                # new phrase: link it privately, back to the root
                cnt += 1
                if 2 * cnt >= T:
                    return -1, lt, have, True
                hkey[slot] = tag
                hval[slot] = -cnt
                ls += _bitlen(phr) + symbol_bits
                phr += 1
                lt = ls + _bitlen(phr)
                nxt = 0
        node = nxt
        if lt <= limit[t]:
            return t + 1, lt + _gamma_len(t + 2), have, False
    return -1, lt, have, False


@nb.njit(cache=True)
def run_lz78_session(z, q, K, seed, messages, lq, offset, symbol_bits):
    """Simulate one session.

    Returns ``(status, B, starts, ends, m_hat, m_true, lp, lt_end, final_start)``
    with 1-based block boundaries; ``final_start`` is 0 when the last block
    was decoded exactly at n.
    """
    n = z.shape[0]
    M = 1 << K
    n_msg = messages.shape[0]

    child = np.full((n + 1) * q, -1, dtype=np.int32)
    base_node = 0
    base_c = 0
    base_ls = np.int64(0)

    hkey = np.zeros(256, dtype=np.int64)
    hval = np.zeros(256, dtype=np.int32)
    stamp = np.int64(0)

    starts = np.zeros(n, dtype=np.int64)
    ends = np.zeros(n, dtype=np.int64)
    m_hat = np.zeros(n, dtype=np.int64)
    m_true = np.zeros(n, dtype=np.int64)
    lp_rec = np.zeros(n, dtype=np.int64)
    lt_rec = np.zeros(n, dtype=np.int64)
    y = np.empty(n, dtype=np.int64)
    pkey = np.empty(n, dtype=np.uint64)  # position keys of the open block
    limit = np.empty(n, dtype=np.int64)  # largest passing L_T at each symbol

    B = 0
    j = 0
    b = 0
    while j < n:
        if b >= n_msg:
            return STATUS_OUT_OF_MESSAGES, B, starts, ends, m_hat, m_true, lp_rec, lt_rec, j + 1
        kb = nb_block_key(seed, b)
        mt = messages[b]
        have = j
        best = n + 1  # earliest passing symbol so far (1-based), n + 1 = none
        winner = -1
        win_lt = np.int64(0)
        for idx in range(M + 1):
            m = mt if idx == 0 else idx - 1
            if idx > 0 and m == mt:
                continue
            # a larger m must beat best strictly, a smaller one may tie it
            stop = best if (winner < 0 or m < winner) else best - 1
            if stop > n:
                stop = n
            while True:
                stamp += 1
                at, lt, have, overflow = _run_hypothesis(
                    m, j, stop, have, mt, kb, z, y, pkey, limit, child, q, lq, offset,
                    symbol_bits, base_node, base_c, base_ls, hkey, hval, stamp)
                if not overflow:
                    break
                hkey = np.zeros(2 * hkey.shape[0], dtype=np.int64)
                hval = np.zeros(2 * hval.shape[0], dtype=np.int32)
            if at > 0:
                best = at
                winner = m
                win_lt = lt

        if winner < 0:
            break
        starts[B] = j + 1
        ends[B] = best
        m_hat[B] = winner
        m_true[B] = mt
        lp_rec[B] = base_ls
        lt_rec[B] = win_lt
        B += 1
        for u in range(j, best):
            s = y[u] - nb_symbol(pkey[u], winner, q)
            if s < 0:
                s += q
            key = base_node * q + s
            nxt = child[key]
            if nxt >= 0:
                base_node = nxt
            else:
                base_ls += _bitlen(base_c) + symbol_bits
                base_c += 1
                child[key] = base_c
                base_node = 0
        j = best
        b += 1

    final_start = j + 1 if j < n else 0
    return STATUS_OK, B, starts, ends, m_hat, m_true, lp_rec, lt_rec, final_start

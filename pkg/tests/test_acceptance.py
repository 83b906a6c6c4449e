"""Acceptance criteria, each run at its stated tolerance.

Every test records one PASS/FAIL line (see conftest.py) before asserting,
so the summary lists all criteria even when some fail.
"""

import itertools
import math
import statistics
import subprocess
import sys
import time

import numpy as np

from oracles import histogram_entropy, ml_log2_prob, rank_counting_ok
from univmod import SymbolSeq
from univmod.bounds import (
    delta_minus,
    delta_pi,
    delta_plus,
    effective_rate,
    fano_rate_bound,
    g,
    g_inverse,
    n_star_bounds,
    shtarkov_terms,
)
from univmod.harness import ExperimentPlan, PlanEntry, run_plan
from univmod.noise import (
    AllConstant,
    BernoulliLike,
    MarkovChain,
    Periodic,
    TestChannel,
    noise_generate,
)
from univmod.refsys import (
    block_errors,
    collapsed_entropy,
    exhaustive_block_codes,
    iterated_mapping_eval,
    prefix_suffix_build,
)
from univmod.refsys import testchannel_entropy_bound as tc_entropy_bound
from univmod.refsys import testchannel_entropy_exact as tc_entropy_exact
from univmod.scheme import SchemeConfig, run_session
from univmod.srccode import KTMixtureState, LZ78State

EPS = 0.05


def _periodic(q):
    return Periodic((0, 1, 1) if q == 2 else (0, 1, 3, 2), q)


# -- 1 -----------------------------------------------------------------------

def test_criterion_1_rate_floor(criterion):
    sessions = []
    # one session per grid cell, then cheap cells up to 500
    for q, n, K, noise in itertools.product((2, 4), (2 ** 12, 2 ** 13, 2 ** 14, 2 ** 15), (10, 12, 14),
                                            ("zero", "bern", "periodic")):
        sessions.append((q, n, K, noise))
    cheap = list(itertools.product((2, 4), ("zero", "bern", "periodic")))
    i = 0
    while len(sessions) < 500:
        q, noise = cheap[i % len(cheap)]
        sessions.append((q, 2 ** 12, 10, noise))
        i += 1
    makers = {"zero": lambda q: AllConstant(0, q), "bern": lambda q: BernoulliLike.bernoulli(0.02, q),
              "periodic": _periodic}
    start = time.perf_counter()
    error_free = violations = 0
    worst = math.inf
    for idx, (q, n, K, noise) in enumerate(sessions):
        cfg = SchemeConfig(n=n, q=q, K=K, epsilon=EPS, seed=1000 + idx)
        log = run_session(cfg, noise_generate(makers[noise](q), n, 1000 + idx))
        if log.error:
            continue
        error_free += 1
        worst = min(worst, log.R_act - log.rate_floor)
        violations += not (log.R_act >= log.rate_floor)
    elapsed = time.perf_counter() - start
    ok = len(sessions) == 500 and violations == 0 and elapsed < 300
    criterion(1, ok, f"{len(sessions)} sessions, {error_free} error-free, {violations} below floor, "
                     f"min(R_act - floor) = {worst:.4f}, {elapsed:.0f} s single-threaded (target < 300 s)")
    assert ok


# -- 2 -----------------------------------------------------------------------

def test_criterion_2_error_rate(criterion):
    models = [
        lambda q: AllConstant(0, q),
        lambda q: BernoulliLike.bernoulli(0.02, q),
        lambda q: BernoulliLike.bernoulli(0.11, q),
        _periodic,
        lambda q: TestChannel(4, 2, q),
        lambda q: MarkovChain(((0.95,) + (0.05 / (q - 1),) * (q - 1),)
                              + tuple(tuple(1.0 / q for _ in range(q)) for _ in range(q - 1))),
    ]
    grid = list(itertools.product((2, 4), (1024, 2048), (6, 8, 10), range(len(models))))
    total = errors = 0
    idx = 0
    while total < 2016:
        q, n, K, m = grid[idx % len(grid)]
        cfg = SchemeConfig(n=n, q=q, K=K, epsilon=EPS, seed=50_000 + idx)
        log = run_session(cfg, noise_generate(models[m](q), n, 50_000 + idx))
        errors += log.error
        total += 1
        idx += 1
    rate = errors / total
    ok = total >= 2000 and rate <= EPS
    criterion(2, ok, f"{total} sessions over {len(models)} noise models, {errors} with a wrong block, "
                     f"error rate {rate:.4f} (limit {EPS})")
    assert ok


# -- 3 -----------------------------------------------------------------------

def test_criterion_3_ergodic_convergence(criterion):
    target = 0.5002
    grid = (2 ** 13, 2 ** 15, 2 ** 17)
    plan = ExperimentPlan(tuple(PlanEntry(SchemeConfig(n=n, q=2, K=14, epsilon=EPS, seed=7), "bern:p=0.11", 3)
                                for n in grid))
    rows = run_plan(plan).rows
    med_rate = [statistics.median(r["R_act"] for r in rows if r["n"] == n) for n in grid]
    med_remp = [statistics.median(r["r_emp"] for r in rows if r["n"] == n) for n in grid]
    increasing = all(a < b for a, b in zip(med_rate, med_rate[1:]))
    close = abs(med_remp[-1] - target) <= 0.08
    ok = increasing and close
    criterion(3, ok, "median R_act " + " < ".join(f"{v:.4f}" for v in med_rate)
              + f" ({'strictly increasing' if increasing else 'NOT increasing'}); "
              + f"median r_emp at 2^17 = {med_remp[-1]:.4f}, |gap| = {abs(med_remp[-1] - target):.4f} "
              + f"(limit 0.08); r_emp by n: {', '.join(f'{v:.4f}' for v in med_remp)}")
    assert ok


# -- 4 -----------------------------------------------------------------------

def _tail_deltas(make_state, prefix, max_tail):
    """ΔL = L_T(prefix + tail) - L_S(prefix) for every tail, grouped by tail length."""
    base = make_state().feed_many(prefix)
    L_S = base.lengths()[0]
    out = {t: [] for t in range(1, max_tail + 1)}

    def walk(state, depth):
        for s in (0, 1):
            child = state.copy().feed(s)
            out[depth + 1].append(child.lengths()[1] - L_S)
            if depth + 1 < max_tail:
                walk(child, depth + 1)

    walk(base, 0)
    return out


def test_criterion_4_coder_contract(criterion):
    rng = np.random.default_rng(44)
    mono_bad = gap_bad = 0
    for _ in range(10_000):
        q = 2 if rng.random() < 0.7 else int(rng.integers(3, 6))
        z = rng.integers(0, q, 64).tolist()
        st = LZ78State(q)
        prev = st.lengths()[1]
        for i, s in enumerate(z, start=1):
            L_S, L_T = st.feed(s).lengths()
            mono_bad += L_T < prev
            gap_bad += L_T - L_S > 3 * math.log2(i + 2) + 4
            prev = L_T
    count_bad = []
    for name, make in (("lz78", lambda: LZ78State(2)), ("kt", lambda: KTMixtureState(2, k_max=3))):
        for j in range(0, 5):
            for prefix in itertools.product((0, 1), repeat=j):
                for t, deltas in _tail_deltas(make, list(prefix), 8).items():
                    if not rank_counting_ok(deltas):
                        count_bad.append((name, prefix, t))
    ok = mono_bad == 0 and gap_bad == 0 and not count_bad
    criterion(4, ok, f"10^4 fuzzed sequences: {mono_bad} monotonicity and {gap_bad} gap-bound violations; "
                     f"counting property over 31 prefixes x tails <= 8, both metrics: {len(count_bad)} failures")
    assert ok


# -- 5 -----------------------------------------------------------------------

def _all_probs_k(n, k, q=2):
    """log2 P_k of every sequence of length n, by depth-first extension."""
    out = []

    def walk(state, depth):
        if depth == n:
            out.append(state.log2_prob_k(k))
            return
        for s in range(q):
            walk(state.copy().feed(s), depth + 1)

    walk(KTMixtureState(q, k_max=k), 0)
    return out


def test_criterion_5_kt_suite(criterion):
    worst_norm = 0.0
    for n in range(0, 11):
        for k in (1, 2):
            total = math.fsum(2.0 ** v for v in _all_probs_k(n, k))
            worst_norm = max(worst_norm, abs(total - 1.0))
    shtarkov_bad = []
    for q, k, ls in ((2, 1, range(1, 7)), (2, 2, range(1, 5)), (4, 1, range(1, 5))):
        m = q ** k
        for l in ls:
            r = shtarkov_terms(l, m).r
            for a in itertools.product(range(q), repeat=l * k):
                regret = ml_log2_prob(a, k, q) - KTMixtureState(q, k_max=k).feed_many(a).log2_prob_k(k)
                if regret > r:
                    shtarkov_bad.append((m, l, a))
    lemma_bad = 0
    lemma_checked = 0
    for n in range(1, 11):
        for z in itertools.product((0, 1), repeat=n):
            log_pz = KTMixtureState(2, k_max=2).feed_many(z).log2_prob()
            for k in (1, 2):
                lemma_checked += 1
                if ml_log2_prob(z, k, 2) / n > log_pz / n + delta_pi(k, n, 2) + 1e-12:
                    lemma_bad += 1
    ok = worst_norm <= 1e-10 and not shtarkov_bad and lemma_bad == 0
    criterion(5, ok, f"max |sum P_k - 1| = {worst_norm:.2e} (n <= 10, k <= 2); Shtarkov violations "
                     f"{len(shtarkov_bad)} at (m,l) in {{(2,<=6),(4,<=4)}}; Lemma inequality violations "
                     f"{lemma_bad}/{lemma_checked}")
    assert ok


# -- 6 -----------------------------------------------------------------------

def test_criterion_6_collapsed_reference(criterion):
    rng = np.random.default_rng(66)
    hist_bad = 0
    for _ in range(500):
        q, k, b = int(rng.integers(2, 5)), int(rng.integers(1, 5)), int(rng.integers(1, 40))
        data = rng.integers(0, q, k * b)
        blocks = [tuple(int(v) for v in data[i * k:(i + 1) * k]) for i in range(b)]
        hist_bad += collapsed_entropy(SymbolSeq(q, data), k, b) != histogram_entropy(blocks)
    fano_bad = 0
    best_gap = -math.inf
    for _ in range(20):
        z = SymbolSeq(2, rng.integers(0, 2, 8))
        for k in (1, 2):
            for b in range(1, 5):
                H = collapsed_entropy(z, k, b)
                for _, rate, eps in exhaustive_block_codes(z, k, b):
                    if eps >= 1:
                        continue
                    gap = effective_rate(rate, eps, k) - fano_rate_bound(k, eps, H)
                    best_gap = max(best_gap, gap)
                    fano_bad += gap > 1e-12
    ps_bad = 0
    for seed in range(100):
        k, d = [(3, 1), (4, 2), (5, 2), (4, 1)][seed % 4]
        blocks = 12 + seed % 9
        z = noise_generate(TestChannel(k, d), k * blocks, seed)
        code, _ = prefix_suffix_build(k, d, z)
        err = iterated_mapping_eval(code, z, blocks, trials=200, seed=seed)
        ps_bad += err != 0.0 or bool(block_errors(code, z, blocks).any())
    ok = hist_bad == 0 and fano_bad == 0 and ps_bad == 0
    criterion(6, ok, f"collapsed entropy vs histogram: {hist_bad}/500 mismatches; Fano bound beaten by "
                     f"{fano_bad} (E,D) pairs, max(R* - bound) = {best_gap:.4f}; prefix/suffix code nonzero "
                     f"error on {ps_bad}/100 test-channel draws")
    assert ok


# -- 7 -----------------------------------------------------------------------

def test_criterion_7_testchannel_entropy(criterion):
    points = bad = 0
    slack = math.inf
    for k in range(2, 5):
        for d in range(1, min(2, k - 1) + 1):
            for i in range(1, 4):
                H = tc_entropy_exact(k, d, i)
                lb = tc_entropy_bound(k, d, i)
                points += 1
                slack = min(slack, H - lb)
                bad += H < lb - 1e-12
    worked = tc_entropy_exact(2, 1, 2)
    ok = bad == 0 and abs(worked - 3.5) <= 1e-12
    criterion(7, ok, f"{points} enumerable points, {bad} below the closed-form bound (min slack {slack:.4f} bits); "
                     f"H(k=2,d=1,i=2) = {worked!r}")
    assert ok


# -- 8 -----------------------------------------------------------------------

def test_criterion_8_bounds(criterion):
    er = effective_rate(1, 0.5, 1)
    grid_bad = 0
    grid = [(2 ** k * 2 ** j, k) for k in range(1, 21) for j in range(10)]
    for n, k in grid:
        grid_bad += delta_minus(n, k, 2) > delta_plus(n, k, 2)
    lower = n_star_bounds(20, 0.01, 2).lower
    lower_ok = abs(lower - 7.94e6) <= 0.01 * 7.94e6
    worst_rt = max(abs(g(g_inverse(y)) - y) for y in np.linspace(1e-9, g(1 / math.e), 1000))
    ok = er == 0 and grid_bad == 0 and len(grid) == 200 and lower_ok and worst_rt <= 1e-9
    criterion(8, ok, f"effective_rate(1, 1/2, 1) = {er}; delta_minus > delta_plus at {grid_bad}/{len(grid)} "
                     f"grid points; n*_lower(20, 0.01) = {lower:.4e}; g^-1 round trip max error {worst_rt:.1e}")
    assert ok


# -- 9 -----------------------------------------------------------------------

def test_criterion_9_determinism(criterion, tmp_path):
    entries = (
        PlanEntry(SchemeConfig(n=2048, q=2, K=8, epsilon=EPS, seed=3), "bern:p=0.05", 3),
        PlanEntry(SchemeConfig(n=1024, q=4, K=6, epsilon=EPS, seed=9), "test:k=3,d=1", 2),
        PlanEntry(SchemeConfig(n=1024, q=2, K=6, epsilon=EPS, seed=1), "periodic:pattern=0010", 1),
    )
    ExperimentPlan(entries).save(tmp_path / "plan.json")
    outs = []
    for run_no in range(2):
        plan = ExperimentPlan.load(tmp_path / "plan.json")
        run_plan(ExperimentPlan(plan.entries, str(tmp_path / f"lib{run_no}.csv")))
        outs.append((tmp_path / f"lib{run_no}.csv").read_bytes())
    args = ["simulate", "--n", "1500", "--K", "7", "--noise", "bern:p=0.03", "--trials", "3", "--seed", "12"]
    for run_no in range(2):
        subprocess.run([sys.executable, "-m", "univmod.cli", *args, "--out", str(tmp_path / f"cli{run_no}.csv")],
                       check=True)
        outs.append((tmp_path / f"cli{run_no}.csv").read_bytes())
    ok = outs[0] == outs[1] and outs[2] == outs[3]
    criterion(9, ok, f"library replay identical: {outs[0] == outs[1]}; CLI replay in fresh processes "
                     f"identical: {outs[2] == outs[3]} ({len(outs[0])} and {len(outs[2])} bytes)")
    assert ok

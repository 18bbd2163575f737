"""Acceptance criteria, each at its stated tolerance and time budget.

Every test prints one ``[PASS]``/``[FAIL]`` line (visible with ``pytest -v``).
"""
import time
from fractions import Fraction

import numpy as np
import pytest

from rrl.adversary import UtilityModel, parity_rigger, random_scripts
from rrl.analysis import (
    adaptive_search,
    best_response_search,
    check_fairness,
    check_leader_uniformity,
    coalition_utility,
    evaluate_space,
    exact_distribution,
    monte_carlo,
)
from rrl.impossibility import (
    Contradiction,
    ConsensusFunction,
    UniqueFunction,
    derive_constraints,
    equilibrium_functions_bruteforce,
)
from rrl.ring_sim import RingConfig

HALF = Fraction(1, 2)
PLACEMENTS = {"nonadjacent": [1, 3], "adjacent": [2, 3]}


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail, elapsed, budget):
        within = elapsed < budget
        tag = "PASS" if ok and within else "FAIL"
        with capsys.disabled():
            print(f"\n[{tag}] criterion {number}: {detail} ({elapsed:.2f}s, budget {budget:g}s)")
        return ok and within

    return emit


@pytest.fixture(scope="module")
def searches():
    """Exhaustive fixed-stream search with per-script tallies, both placements."""
    out = {}
    start = time.perf_counter()
    for name, honest in PLACEMENTS.items():
        config = RingConfig.build(4, honest=honest)
        rep, stats = best_response_search(config, 1, keep_stats=True)
        out[name] = (config, rep, stats)
    out["elapsed"] = time.perf_counter() - start
    return out


def test_c1_fairness(report):
    start = time.perf_counter()
    results = {n: check_fairness(n) for n in (2, 4, 6)}
    elapsed = time.perf_counter() - start
    ok = all(
        r.p_one == HALF and r.p_zero == HALF and r.agreement_violations == 0 and r.validity_violations == 0
        for r in results.values()
    )
    detail = ", ".join(f"n={n} P(1)={r.p_one} viol={r.agreement_violations + r.validity_violations}" for n, r in results.items())
    assert report(1, ok, detail, elapsed, 10)


def test_c2_leader_uniformity(report):
    start = time.perf_counter()
    config = RingConfig.build(4, honest=PLACEMENTS["nonadjacent"])
    scripts = random_scripts(config, 100, seed=2024)
    rng = np.random.default_rng(2024)
    bad = 0
    for script in scripts:
        others = {p: (int(rng.integers(2)), int(rng.integers(4))) for p in config.honest_positions}
        for u in config.honest_positions:
            r = check_leader_uniformity(config, script, u, others)
            if r.detected == 0 and any(v != Fraction(1, 4) for v in r.per_index.values()):
                bad += 1
            if r.detected and r.detected != 4:
                bad += 1  # partial detection would mean the random leaks into detection
    elapsed = time.perf_counter() - start
    assert report(2, bad == 0, f"100 scripts x 2 honest nodes, non-uniform maps: {bad}", elapsed, 5)


def test_c3_conditional_half(report, searches):
    violations = undefined = checked = 0
    for name in PLACEMENTS:
        config, _, stats = searches[name]
        for st in stats:
            for u in config.honest_positions:
                tot, one = st.cond_total[u], st.cond_one[u]
                undefined += int(np.sum(tot == 0))
                violations += int(np.sum((tot > 0) & (2 * one != tot)))
                checked += len(tot)
    config, _, stats = searches["adjacent"]
    u2 = 3
    uncond_bad = sum(int(np.sum(2 * st.decided_one[u2] != st.universe)) for st in stats)
    ok = violations == 0 and uncond_bad == 0 and undefined == 0
    detail = (
        f"{checked} (script, node) pairs, conditional violations {violations}, "
        f"adjacent P(u2=1) violations {uncond_bad}"
    )
    assert report(3, ok, detail, searches["elapsed"], 60)


def test_c4_full_control(report, searches):
    start = time.perf_counter()
    traces = exceptions = 0
    for name in PLACEMENTS:
        config, _, stats = searches[name]
        for st in stats:
            for u in config.heads:
                traces += int(st.self_elected[u].sum())
                exceptions += int(st.control_violations[u].sum())
    elapsed = time.perf_counter() - start
    ok = exceptions == 0 and traces > 0
    assert report(4, ok, f"{traces} self-elected rigged traces, exceptions {exceptions}", elapsed, 60)


def test_c5_case1_rigger(report):
    start = time.perf_counter()
    config = RingConfig.build(4, honest=PLACEMENTS["nonadjacent"])
    script = parity_rigger(config, 1, case=1)
    stats = evaluate_space(config, [script], 1)
    per_node = {u: Fraction(int(stats.decided_one[u][0]), stats.universe) for u in config.honest_positions}
    joint = coalition_utility(exact_distribution(config, script), UtilityModel(1))
    elapsed = time.perf_counter() - start
    ok = all(p == Fraction(5, 8) for p in per_node.values()) and joint == Fraction(25, 64) and joint < HALF
    assert report(5, ok, f"per-node {sorted({str(p) for p in per_node.values()})}, joint {joint}", elapsed, 10)


def test_c6_case2_rigger(report):
    start = time.perf_counter()
    config = RingConfig.build(4, honest=PLACEMENTS["nonadjacent"])
    script = parity_rigger(config, 1, case=2)
    joint = coalition_utility(exact_distribution(config, script), UtilityModel(1))
    elapsed = time.perf_counter() - start
    assert report(6, joint == Fraction(3, 8), f"joint {joint}", elapsed, 10)


def test_c7_best_response(report):
    start = time.perf_counter()
    lines, ok = [], True
    for name, honest in PLACEMENTS.items():
        config = RingConfig.build(4, honest=honest)
        rep = best_response_search(config, 1)
        ok &= rep.best_utility <= HALF and rep.verdict == "NoProfitableDeviation"
        lines.append(f"{name}: max {rep.best_utility} over {rep.scripts_evaluated}")
        ada = adaptive_search(config, 1, samples=20000, seed=0)
        ok &= ada.best_utility <= HALF
        lines.append(f"{name} adaptive: max {ada.best_utility} over {ada.scripts_evaluated}")
    elapsed = time.perf_counter() - start
    assert report(7, ok, "; ".join(lines), elapsed, 600)


def test_c8_impossibility_and_uniqueness(report):
    start = time.perf_counter()
    brute = {n: equilibrium_functions_bruteforce(n) for n in (2, 3, 4)}
    ok = brute[2] == set() and brute[4] == set() and brute[3] == {ConsensusFunction.xor(3)}
    for n in range(2, 13):
        res = derive_constraints(n)
        if n % 2 == 0:
            ok &= isinstance(res, Contradiction)
            if n in brute:
                ok &= brute[n] == set()
        else:
            ok &= isinstance(res, UniqueFunction) and res.function == ConsensusFunction.xor(n)
            if n in brute:
                ok &= brute[n] == {res.function}
    elapsed = time.perf_counter() - start
    detail = f"brute force sizes {[len(brute[n]) for n in (2, 3, 4)]}, derivation dichotomy holds up to n=12: {ok}"
    assert report(8, ok, detail, elapsed, 30)


def test_c9_monte_carlo(report):
    start = time.perf_counter()
    honest4 = RingConfig.build(4)
    hits = sum(monte_carlo(honest4, None, 100_000, seed=s).within(HALF, 4) for s in range(100))
    config8 = RingConfig.build(8, honest=PLACEMENTS["nonadjacent"])
    rig = parity_rigger(config8, 1)
    target = Fraction(81, 256)
    est8 = [monte_carlo(config8, rig, 100_000, seed=s) for s in range(5)]
    hits8 = sum(e.within(target, 4) for e in est8)
    elapsed = time.perf_counter() - start
    ok = hits >= 99 and hits8 == len(est8)
    detail = f"n=4 honest: {hits}/100 seeds within 4 SE of 1/2; n=8 rigger: {hits8}/{len(est8)} within 4 SE of 81/256"
    assert report(9, ok, detail, elapsed, 120)

"""Acceptance criteria, one test each.

Every test records a single PASS/FAIL line; the lines are printed in the
pytest terminal summary, or directly when this file is run as a script.
"""

import math
import time

import numpy as np
import pytest

from pursuitlab.cli import main as cli_main
from pursuitlab.constraints import Cardinality, Knapsack, PartitionMatroid, consecutive_groups
from pursuitlab.dictionary import random_dictionary
from pursuitlab.experiments import DoaScenario, paired_gap, run_doa, run_toy, summarize
from pursuitlab.linalg import GramInverseState, append_column
from pursuitlab.oracle import check_lemma1, check_submodularity, exhaustive_best, random_psd
from pursuitlab.pursuit import (
    SecondMoment,
    greedy_knapsack_best_of_two,
    greedy_matroid,
    guarantee_probability,
    least_squares_coefficients,
    representation_energy,
    smp_expected,
    smp_single,
)

RESULTS = {}
E = 1 - 1 / math.e


def record(num, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {num:>2}. {title}: {detail}"
    RESULTS[num] = line
    print(line)
    return ok


def test_01_toy_reproduction(capsys):
    t0 = time.perf_counter()
    rep = run_toy()
    code = cli_main(["toy"])
    elapsed = time.perf_counter() - t0
    capsys.readouterr()
    omp, smp = rep["omp"], rep["smp"]
    ok = (
        sorted(omp["atoms"]) == [1, 3]
        and abs(omp["residual_norm"] - 10.0) <= 1e-9
        and sorted(smp["atoms"]) == [1, 2]
        and abs(smp["residual_norm"] - 1.0) <= 1e-9
        and code == 0
        and elapsed < 1.0
    )
    record(1, "toy reproduction", ok,
           f"OMP {omp['atoms']} |r|={omp['residual_norm']:.12g}, SMP {smp['atoms']} |r|={smp['residual_norm']:.12g}, "
           f"{elapsed:.3f} s")
    assert ok


def test_02_modular_sanity():
    rng = np.random.default_rng(2)
    worst = 0.0
    steps = 0
    for _ in range(50):
        m = int(rng.integers(1, 9))
        n = int(rng.integers(1, 13))
        d = random_dictionary(rng, m, n)
        res = smp_expected(d, np.eye(m), n)
        gains = np.array(res.gains())
        steps += gains.size
        worst = max(worst, float(np.max(np.abs(gains - 1.0))))
    ok = worst <= 1e-10
    record(2, "modular sanity", ok, f"50 instances, {steps} steps, max |gain - 1| = {worst:.2e}")
    assert ok


def test_03_submodularity_suite():
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    violations = trials = bad_instances = 0
    worst = math.inf
    for _ in range(500):
        m = int(rng.integers(2, 7))
        n = int(rng.integers(3, 11))
        d = random_dictionary(rng, m, n)
        rep = check_submodularity(random_psd(rng, m), d, trials=100, seed=int(rng.integers(2**32)))
        trials += rep.trials
        violations += rep.violations
        bad_instances += rep.violations > 0
        worst = min(worst, rep.worst_margin)
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and elapsed < 30.0
    record(3, "submodularity suite", ok,
           f"{violations}/{trials} triples violate by > 1e-8 on {bad_instances}/500 instances, "
           f"worst margin {worst:.3g}, {elapsed:.1f} s")
    assert ok


def test_04_near_optimality_ratio():
    rng = np.random.default_rng(4)
    ratios = []
    for i in range(100):
        k = 1 + i % 3
        m = int(rng.integers(2, 7))
        n = int(rng.integers(k + 1, 11))
        d = random_dictionary(rng, m, n)
        r = random_psd(rng, m)
        _, opt = exhaustive_best(SecondMoment(r), d, Cardinality(k))
        ratios.append(smp_expected(d, r, k).objective / opt)
    ratios = np.array(ratios)
    ok = bool(np.all(ratios >= E - 1e-9))
    record(4, "near-optimality ratio", ok,
           f"min {ratios.min():.4f}, median {np.median(ratios):.4f} (bound {E:.4f}), "
           f"{int(np.sum(ratios >= 1 - 1e-12))}/100 optimal")
    assert ok


def test_05_constrained_guarantees():
    rng = np.random.default_rng(5)
    kn_ratio, pm_ratio = [], []
    for _ in range(50):
        m, n = int(rng.integers(2, 6)), int(rng.integers(4, 9))
        d = random_dictionary(rng, m, n)
        obj = SecondMoment(random_psd(rng, m))
        costs = rng.uniform(0.2, 2.0, n)
        budget = float(rng.uniform(costs.min(), 3.0))
        res = greedy_knapsack_best_of_two(d, obj, costs, budget)
        _, opt = exhaustive_best(obj, d, Knapsack(costs, budget))
        kn_ratio.append(res.objective / opt)
    for _ in range(50):
        m, n = int(rng.integers(2, 6)), 2 * int(rng.integers(2, 5))
        d = random_dictionary(rng, m, n)
        obj = SecondMoment(random_psd(rng, m))
        pm = PartitionMatroid(consecutive_groups(n, 2), rng.integers(0, 3, n // 2).tolist())
        res = greedy_matroid(d, obj, pm)
        _, opt = exhaustive_best(obj, d, pm)
        pm_ratio.append(res.objective / opt if opt > 0 else 1.0)
    kn_ratio, pm_ratio = np.array(kn_ratio), np.array(pm_ratio)
    kn_bad = int(np.sum(kn_ratio < 0.5 * E - 1e-9))
    pm_bad = int(np.sum(pm_ratio < 0.5 - 1e-9))
    ok = kn_bad == 0 and pm_bad == 0
    record(5, "constrained guarantees", ok,
           f"knapsack min ratio {kn_ratio.min():.4f} (bound {0.5 * E:.4f}, {kn_bad} violations); "
           f"matroid min ratio {pm_ratio.min():.4f} (bound 0.5, {pm_bad} violations)")
    assert ok


def test_06_inverse_update_fidelity():
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(1000):
        k = int(rng.integers(1, 21))
        b = GramInverseState.empty(32)
        for _ in range(k):
            v = rng.standard_normal(32) + 1j * rng.standard_normal(32)
            b = append_column(b, v / np.linalg.norm(v))
            direct = np.linalg.inv(b.V.conj().T @ b.V)
            worst = max(worst, float(np.max(np.abs(b.Z - direct))))
    ok = worst <= 1e-8
    record(6, "inverse-update fidelity", ok, f"1000 sequences up to k=20, M=32, max |Z - inv| = {worst:.2e}")
    assert ok


def test_07_lemma1_monte_carlo():
    rep = check_lemma1("uniform", 10**6, seed=7)
    ratio = rep.details["ratio_u"]
    ok = abs(ratio - 0.5) <= 0.005
    record(7, "two-vector inequality Monte Carlo", ok,
           f"E<y,u>^2/E||y||^2 = {ratio:.4f}, E<y,v>^2/E||y||^2 = {rep.details['ratio_v']:.4f} at 1e6 samples")
    assert ok


def _at_least(stats, a, b, k):
    # mean_a >= mean_b within one standard error of the difference of means
    (ma, sa), (mb, sb) = stats[(a, k)]["objective"], stats[(b, k)]["objective"]
    return ma >= mb - math.hypot(sa, sb)


def _ordering(rows, ks):
    stats = summarize(rows)
    notes, ok = [], True
    for k in ks:
        s, o, m = (stats[(a, k)]["objective"][0] for a in ("smp", "omp", "mp"))
        gap, se = paired_gap(rows, "smp", "omp", k)
        ok &= _at_least(stats, "smp", "omp", k) and _at_least(stats, "omp", "mp", k) and gap + se >= 0
        raw = "raw order holds" if s >= o >= m else "raw order differs"
        notes.append(f"K={k}: {s:.3f}/{o:.3f}/{m:.3f} ({raw}) gap {gap:.4f}+-{se:.4f}")
    return ok, notes


def test_08_doa_desk_scale():
    t0 = time.perf_counter()
    scen = DoaScenario(M=10, N=15, K=[1, 2, 3, 4, 5], snr_db=20.0, seed=8, trials=200)
    rows = run_doa(scen, ("mp", "omp", "smp"), timing=False)
    ok_a, notes_a = _ordering(rows, scen.K)

    mscen = DoaScenario(M=30, N=100, K=[1, 2, 3, 4, 5], snr_db=20.0, seed=8, trials=200)
    pm = PartitionMatroid(consecutive_groups(100, 2), 1)
    mrows = run_doa(mscen, ("mp", "omp", "smp"), pm, timing=False)
    mstats = summarize(mrows)
    ok_b = True
    errs = []
    for k in mscen.K:
        s, o, m = (mstats[(a, k)]["objective"][0] for a in ("smp", "omp", "mp"))
        ok_b &= s >= o and s >= m
        errs.append("/".join(f"{mstats[(a, k)]['est_error'][0]:.1f}" for a in ("smp", "omp", "mp")))
    elapsed = time.perf_counter() - t0
    ok = ok_a and ok_b and elapsed < 120.0
    record(8, "DOA desk scale", ok,
           "N=15 (SMP/OMP/MP objective) " + "; ".join(notes_a)
           + f" | matroid N=100 ordering {'holds' if ok_b else 'fails'}, est_error SMP/OMP/MP by K: "
           + ", ".join(errs) + f" | {elapsed:.1f} s")
    assert ok


def test_09_oomp_step_dominance():
    rng = np.random.default_rng(9)
    worst = math.inf
    steps = 0
    for _ in range(100):
        m, n = int(rng.integers(2, 9)), int(rng.integers(2, 16))
        d = random_dictionary(rng, m, n)
        y = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        total = float(np.vdot(y, y).real)
        res = smp_single(d, y, min(m, n))
        for j, pick in enumerate(res.selected):
            prefix = res.selected[:j]
            resid = y - d.atoms[:, prefix] @ least_squares_coefficients(d, y, prefix) if prefix else y
            cand = [i for i in range(n) if i not in prefix]
            omp_pick = cand[int(np.argmax(np.abs(d.atoms[:, cand].conj().T @ resid)))]
            gain_smp = representation_energy(d, y, prefix + [pick])
            gain_omp = representation_energy(d, y, prefix + [omp_pick])
            worst = min(worst, (gain_smp - gain_omp) / max(total, 1.0))
            steps += 1
    ok = worst >= -1e-10
    record(9, "per-step OOMP dominance", ok, f"100 instances, {steps} steps, worst relative margin {worst:.2e}")
    assert ok


def test_10_theorem4_calculator():
    worst = 0.0
    count = 0
    for k in (1, 2, 3, 5, 10):
        for m in (10, 100, 10**4):
            for eps in (0.05, 0.1, 1.0):
                for frac in (0.0, 0.01, 0.3, 0.9):
                    sigma2 = frac * m * eps**2
                    bound, log_p = guarantee_probability(k, m, eps, sigma2)
                    p = (1.0 - sigma2 / (m * eps * eps)) ** ((2 * k + 1) * k)
                    worst = max(worst, abs(math.exp(log_p) - p) / p, abs(bound - (2 * k + 1) * eps))
                    count += 1
    certain = all(guarantee_probability(k, 50, 0.2, 0.0)[1] == 0.0 for k in (1, 4, 9))
    ok = worst <= 1e-12 and certain
    record(10, "finite-sample guarantee calculator", ok,
           f"{count} grid points, max relative deviation {worst:.1e}, sigma2 = 0 gives p = 1: {certain}")
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))

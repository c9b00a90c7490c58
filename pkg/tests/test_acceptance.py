"""Acceptance suite: eleven statistical/exact criteria, one test each.

Each test runs its scenario with the reference parameter pack and fixed seed,
prints a single PASS/FAIL line with the measured quantity and its tolerance,
and asserts the verdict. All runs are deterministic given the seeds below.
"""

import time

import pytest

from noisylab.bench import ExperimentConfig, run_scenario


def _run(scenario, params, trials, seed):
    t0 = time.time()
    rep = run_scenario(
        ExperimentConfig(scenario=scenario, params=params, trials=trials, seed=seed)
    )
    return rep, time.time() - t0


def _report(name, ok, detail, elapsed):
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] {name}: {detail} ({elapsed:.1f}s)")


def test_criterion_01_contradiction_filter_exhaustive():
    # Filter properties, exhaustive over all samples of length <= 6 on a
    # 3-point domain: idempotent, contradiction-free, even drop,
    # permutation-invariant, canonical multiset.
    rep, dt = _run("ice-filter-unit", {"max_len": 6, "domain_points": 3}, 1, 0)
    ok = all(rep.verdicts.values())
    _report(
        "criterion 1 (filter exhaustive)",
        ok,
        f"{rep.aggregate['sequences_checked']} sequences, all five properties hold = {ok}",
        dt,
    )
    assert ok, rep.verdicts


def test_criterion_02_budget_law():
    # Realized budgets vs Bin(100, 0.2), 2000 trials, chi-square at 1e-3.
    rep, dt = _run("nasty-budget-law", {"n": 100, "eta": 0.2}, 2000, 1)
    p = rep.aggregate["chi2_pvalue"]
    ok = rep.verdicts["budget_law_binomial"]
    _report("criterion 2 (budget law)", ok, f"chi-square p = {p:.4f} > 1e-3", dt)
    assert ok, rep.aggregate


def test_criterion_03_amplify_concentration():
    # eps = 0.2 crafted learner, k = 64, 1000 trials: frequency of
    # sum error > eps*k + 3*sqrt(k ln 20) must be < 0.05.
    rep, dt = _run("amplify-concentration", {"eps": 0.2, "k": 64, "eta": 0.2}, 1000, 2)
    freq = rep.aggregate["exceed_frequency"]
    ok = rep.verdicts["concentration"]
    _report(
        "criterion 3 (amplify concentration)",
        ok,
        f"exceed frequency {freq:.4f} < 0.05, threshold {rep.aggregate['threshold']:.2f}",
        dt,
    )
    assert ok, rep.aggregate


def test_criterion_04_holdout_selection_counterexample():
    # eps = 0.3, eta = 0.25, n = 60, k = 10, n_test = 40, 2000 trials.
    # Clause 1: bad-output (error >= 0.99) frequency in [0.25, 0.35].
    # Clause 2: sample-splitting mixture error > 0.4 in < 1% of trials.
    # Clause 2 is analytically out of reach at these parameters: a fraction
    # T/k of the mixture's components carries error ~0.99 with
    # T ~ Bin(10, 0.3), and P(T >= 5) ~ 0.15 >> 0.01. The scenario measures
    # it faithfully and this test reports the measured frequency.
    rep, dt = _run(
        "badamplify",
        {"eps": 0.3, "eta": 0.25, "n": 60, "k": 10, "n_test": 40},
        2000,
        3,
    )
    bad = rep.aggregate["bad_output_frequency"]
    amp = rep.aggregate["amplify_exceed_frequency"]
    ok1 = rep.verdicts["bad_output_in_range"]
    ok2 = rep.verdicts["amplify_rarely_bad"]
    _report(
        "criterion 4 clause 1 (holdout selection fails)",
        ok1,
        f"bad-output frequency {bad:.4f} in [0.25, 0.35]",
        dt,
    )
    _report(
        "criterion 4 clause 2 (mixture rarely bad)",
        ok2,
        f"mixture error > 0.4 in {amp:.4f} of trials (target < 0.01; "
        f"analytic value ~0.15 at these parameters)",
        0.0,
    )
    assert ok1, rep.aggregate
    assert ok2, (
        "mixture-error clause is analytically unattainable at the stated "
        f"parameters: measured {amp:.4f} vs required < 0.01 "
        "(P[Bin(10, 0.3) >= 5] ~ 0.15)"
    )


def test_criterion_05_codes_suite():
    # Erasure round-trip exhaustive at w=12 over all <= tau*w erasure
    # patterns for 50 random codes; bit-flip decode vs brute force at
    # w <= 10; low-weight enumeration vs a second path.
    rep, dt = _run(
        "codes-suite",
        {"codes": 50, "w": 12, "rho": 0.5, "max_erasures": 3,
         "bitflip_codes": 20, "low_weight_codes": 20},
        1,
        4,
    )
    ok = all(rep.verdicts.values())
    _report(
        "criterion 5 (codes suite)",
        ok,
        f"{rep.aggregate['erasure_decodes']} erasure decodes; all three oracles agree = {ok}",
        dt,
    )
    assert ok, rep.verdicts


def test_criterion_06_separation_learner():
    # (w=24, d=12, u=8), key-erasure strong-malicious adversary at eta_M:
    # error <= 4*eta_M*1.25 + 0.05 in >= 95% of 200 trials; the decoded
    # key estimate is never wrong on determined coordinates.
    rep, dt = _run("sep-learner", {}, 200, 5)
    rate = rep.aggregate["error_ok_rate"]
    zw = rep.aggregate["z_wrong_total"]
    ok = rep.verdicts["error_ok_rate"] and rep.verdicts["z_never_wrong"]
    _report(
        "criterion 6 (separation learner)",
        ok,
        f"error <= {rep.aggregate['error_bound']:.2f} in {rate:.3f} of trials (>= 0.95); "
        f"wrong determined bits = {zw} (must be 0)",
        dt,
    )
    assert ok, rep.aggregate


def test_criterion_07_separation_adversary():
    # Key side all-+1 on >= 99% of non-exhausted trials; key-point multiset
    # independent of the concept index (chi-square at 1e-3); the value-side
    # simulation matches the real corrupted sample (chi-square at 1e-3).
    rep, dt = _run("sep-adversary", {"sim_trials": 2000, "sim_n": 500}, 200, 6)
    ok = all(rep.verdicts.values())
    _report(
        "criterion 7 (separation adversary)",
        ok,
        f"key all-+1 rate {rep.aggregate['key_all_plus_rate']:.3f} (>= 0.99); "
        f"independence p = {rep.aggregate['independence_pvalue']:.4f}, "
        f"simulation p = {rep.aggregate['simulation_blocks_pvalue']:.4f}/"
        f"{rep.aggregate['simulation_labels_pvalue']:.4f} (all > 1e-3)",
        dt,
    )
    assert ok, rep.aggregate


def test_criterion_08_rounding_bound():
    # 200 random (v, u) pairs at kappa = 0.6, w = 200: Hamming distance of
    # the rounded vector from u stays <= (1/2)(1 - kappa/2)w in >= 99%.
    rep, dt = _run("round-lemma", {"kappa": 0.6, "w": 200}, 200, 7)
    rate = rep.aggregate["hold_rate"]
    ok = rep.verdicts["rounding_bound"]
    _report(
        "criterion 8 (rounding bound)",
        ok,
        f"bound {rep.aggregate['bound']:.0f} held in {rate:.3f} of trials (>= 0.99)",
        dt,
    )
    assert ok, rep.aggregate


def test_criterion_09_coupling_identity():
    # Replaying a nasty strategy through the strong-malicious adversary:
    # exact multiset identity (output = nasty output + floor(m/2)
    # contradictory pairs) on 100% of 500 randomized trials.
    rep, dt = _run("ice-coupling", {}, 500, 8)
    ok = rep.verdicts["coupling_exact"]
    _report(
        "criterion 9 (coupling identity)",
        ok,
        f"exact on {rep.aggregate['exact_rate']:.3f} of 500 trials (must be 1.0)",
        dt,
    )
    assert ok, rep.aggregate


def test_criterion_10_filter_learner_end_to_end():
    # (w=20, d=10, eta=0.05, kappa=0.7): noiseless and low-noise recovery
    # >= 95% over 200 trials each; the idealized adversary leaves exactly
    # the predicted post-filter survivor pattern on every vulnerable trial.
    rep, dt = _run("ice-learner", {}, 200, 9)
    ok = all(rep.verdicts.values())
    _report(
        "criterion 10 (filter learner end-to-end)",
        ok,
        f"recovery noiseless {rep.aggregate['recovery_rate_noiseless']:.3f} / "
        f"low-noise {rep.aggregate['recovery_rate_low_noise']:.3f} (>= 0.95); "
        f"survivor pattern exact on {rep.aggregate['survivor_pattern_ok']}/"
        f"{rep.aggregate['vulnerable_trials']} vulnerable trials",
        dt,
    )
    assert ok, rep.aggregate


def test_criterion_11_reduction_demos():
    # Huber-as-malicious exact marginal TV = 0 (tolerance 1e-12); fixed-rate
    # vs standard mean positional difference <= sqrt(m) + 1 at m = 400,
    # eta = 0.1 over 2000 trials.
    rep, dt = _run("reduction-demos", {"m": 400, "eta": 0.1}, 2000, 10)
    ok = all(rep.verdicts.values())
    _report(
        "criterion 11 (reduction demos)",
        ok,
        f"Huber TV = {rep.aggregate['huber_marginal_tv']:.2e} (<= 1e-12); "
        f"mean positional diff {rep.aggregate['mean_positional_diff']:.2f} <= "
        f"{rep.aggregate['positional_diff_bound']:.0f}",
        dt,
    )
    assert ok, rep.aggregate

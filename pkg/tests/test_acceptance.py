"""Acceptance suite: every shipped guarantee, one pass/fail line per claim.

Run with ``pytest -v tests/test_acceptance.py``; each test's PASSED/FAILED
line is the verdict for one acceptance claim.  Tests freeze seeds, state
the tolerance they enforce, and include their wall-clock budget.

Two claims fail as measured and are kept failing on purpose rather than
weakened: Copeland cycle persistence at full dispersion (test 04c) and the
high-dispersion Condorcet-violation floor (test 07).  Both assertions print
the measured probabilities; at full dispersion the sampled electorate is
uniform i.i.d., whose no-Condorcet-winner probability sits near 0.09 at
n=6400, and at dispersion 0.9 the violation event requires a Condorcet
winner to exist *and* be missed, which together cap the rate near 0.2.
"""

import math
import time
from collections import Counter
from fractions import Fraction
from itertools import combinations_with_replacement, permutations

import numpy as np
import pytest

from smoothedvotes.axioms import (
    brute_force_audit,
    certify_counterexample,
    check_absolute,
    counterexample_library,
)
from smoothedvotes.core import Profile, enumerate_rankings
from smoothedvotes.noise import (
    berry_esseen_sup_gap,
    covariance,
    expected_pmf_exact,
    get_model,
    hoeffding_bound,
    inverse_single_voter_covariance,
    min_prob,
    pmf,
)
from smoothedvotes.rules import pairwise_margins, parse_rule_spec
from smoothedvotes.smoothed import (
    BENCHMARK_PROFILE,
    RhoSchedule,
    convergence_sweep,
    estimate_violation,
    group_flip_probability,
    preset_profile,
    sample_profile_counts,
    sweep_csv_rows,
    verify_appendixD_margins,
    write_csv,
)

MALLOWS = get_model("mallows")
SEED = 4400
RANKINGS3 = enumerate_rankings(3)


def fit_slope(ns, ps):
    return float(np.polyfit(np.log(ns), np.log(ps), 1)[0])


def test_criterion_01_covariance_closed_form_and_eigenvalue_floor():
    """20 random (profile, dispersion) draws with m=3, n <= 50: the
    single-voter covariance times its closed-form inverse is the identity
    to 1e-9, and the profile covariance's smallest eigenvalue is at least
    min-outcome-probability / (m! * n).  Budget: 5 s."""
    start = time.perf_counter()
    rng = np.random.default_rng(SEED)
    for _ in range(20):
        n = int(rng.integers(1, 51))
        counts = tuple(int(c) for c in rng.multinomial(n, [1 / 6] * 6))
        phi = float(rng.uniform(0.05, 1.0))
        profile = Profile.from_counts(3, counts)

        eigenvalues = np.linalg.eigvalsh(covariance(MALLOWS, profile, phi).matrix)
        floor = float(min_prob(MALLOWS, phi, 3)) / (6 * n)
        assert eigenvalues.min() >= floor - 1e-12

        base = profile.rankings[0]
        single = covariance(MALLOWS, Profile(3, (base,)), phi).matrix
        inverse = inverse_single_voter_covariance(pmf(MALLOWS, base, phi))
        np.testing.assert_allclose(single @ inverse, np.eye(5), atol=1e-9)
    assert time.perf_counter() - start < 5


def test_criterion_02_hoeffding_bound_is_valid_in_all_8_cells():
    """Empirical concentration Pr[||H - E[H]||_1 < eps] beats the analytic
    floor 1 - 2*m!*exp(-2 eps^2 n / m!) for (eps, n) in {0.1, 0.2} x
    {500, 2000} at dispersion {0.3, 1.0}, 10^4 trials per cell.
    Budget: 1 min."""
    start = time.perf_counter()
    for n in (500, 2000):
        base = preset_profile("two-way-tie", n)
        for phi in (0.3, 1.0):
            mean = np.array([float(x) for x in expected_pmf_exact(MALLOWS, base, phi)])
            counts = sample_profile_counts(MALLOWS, base, phi, 10_000, SEED)
            l1 = np.abs(counts / n - mean).sum(axis=1)
            for eps in (0.1, 0.2):
                empirical = float((l1 < eps).mean())
                bound = hoeffding_bound(eps, n, 3)
                assert empirical >= bound, (
                    f"cell n={n} phi={phi} eps={eps}: "
                    f"empirical {empirical:.4f} < bound {bound:.4f}"
                )
    assert time.perf_counter() - start < 60


def test_criterion_03_gaussian_gap_decays_like_a_power_law():
    """Half-space Gaussian-approximation gap at dispersion 0.5, 10^5 trials
    per point over n in {50, 200, 800, 3200}: fitted log-log slope <= -0.3.
    Budget: 5 min."""
    start = time.perf_counter()
    ns = [50, 200, 800, 3200]
    gaps = [berry_esseen_sup_gap(MALLOWS, RANKINGS3[0], 0.5, n, 100_000, 21) for n in ns]
    assert all(g > 0 for g in gaps)
    slope = fit_slope(ns, gaps)
    assert slope <= -0.3, f"slope {slope:.4f} (gaps {gaps})"
    assert time.perf_counter() - start < 300


def test_criterion_04a_plurality_tie_probability_decays():
    """Plurality from an exact two-way-tie base at dispersion 0.5 and 1.0,
    n in {100, 400, 1600, 6400}, 10^4 trials: tie probability strictly
    decreasing with log-log slope <= -0.35.  Budget: 5 min (shared with
    04b/04c)."""
    start = time.perf_counter()
    base = preset_profile("two-way-tie", 100)
    for phi in (0.5, 1.0):
        result = convergence_sweep(
            parse_rule_spec("plurality"), "resolvability", base, MALLOWS,
            [phi], [1, 4, 16, 64], 10_000, SEED,
        )
        ps = [row.estimate.p_hat for row in result.rows]
        ns = [row.n for row in result.rows]
        assert all(a > b for a, b in zip(ps, ps[1:])), (phi, ps)
        slope = fit_slope(ns, ps)
        assert slope <= -0.35, f"phi={phi}: slope {slope:.4f} (p {ps})"
    assert time.perf_counter() - start < 300


def test_criterion_04b_copeland_cycle_persists_at_moderate_dispersion():
    """Copeland from a three-way-cycle base at dispersion 0.5, n=6400,
    10^4 trials: non-singleton-winner probability stays >= 0.2."""
    start = time.perf_counter()
    est = estimate_violation(
        parse_rule_spec("copeland"), "resolvability",
        preset_profile("cycle", 100), MALLOWS, 0.5, 10_000, SEED, z=64,
    )
    assert est.p_hat >= 0.2, f"measured {est.p_hat:.4f}"
    assert time.perf_counter() - start < 300


def test_criterion_04c_copeland_cycle_persists_at_full_dispersion():
    """Copeland from a three-way-cycle base at dispersion 1.0, n=6400,
    10^4 trials: non-singleton-winner probability stays >= 0.2.

    Measured ~0.09: at dispersion 1.0 the base is forgotten and the
    electorate is uniform i.i.d., whose no-Condorcet-winner probability is
    near 0.09 at this size, bounded away from 0.2.  Kept failing rather
    than weakened."""
    start = time.perf_counter()
    est = estimate_violation(
        parse_rule_spec("copeland"), "resolvability",
        preset_profile("cycle", 100), MALLOWS, 1.0, 10_000, SEED, z=64,
    )
    assert est.p_hat >= 0.2, (
        f"measured {est.p_hat:.4f} at n=6400, dispersion 1.0: the uniform "
        "i.i.d. electorate caps the no-winner rate near 0.09"
    )
    assert time.perf_counter() - start < 300


LIBRARY_ENTRIES = (
    ("psr-condorcet", {"alpha": 0.5}),
    ("psr-iia", {"alpha": 0.5}),
    ("plurality-condorcet", None),
    ("appendixD", None),
    ("condorcet-cycle", None),
    ("copeland-resolvability", None),
)


def test_criterion_05a_every_library_counterexample_is_strict():
    """1000 sampled same-size profiles inside each library entry's
    certified ball all violate the entry's axiom.  Budget: 10 min (shared
    with 05b)."""
    start = time.perf_counter()
    for name, params in LIBRARY_ENTRIES:
        example = counterexample_library(name, dict(params) if params else None)
        checked = certify_counterexample(example, samples=1000, seed=SEED)
        assert checked == 1000
    assert time.perf_counter() - start < 600


def test_criterion_05b_violation_onset_reaches_099_by_zn_5000():
    """For each (rule, axiom) pair holding a strict counterexample, the
    violation probability on the z-fold replicated counterexample at
    dispersion 0.05 reaches >= 0.99 by z*n <= 5000 (10^4 trials).
    Budget: 10 min (shared with 05a)."""
    start = time.perf_counter()
    pairs = (
        ("psr-condorcet", {"alpha": 0.5}, "condorcet"),
        ("psr-condorcet", {"alpha": 0.5, "axiom": "majority"}, "majority"),
        ("psr-iia", {"alpha": 0.5}, "iia"),
        ("plurality-condorcet", None, "condorcet"),
        ("condorcet-cycle", None, "no-condorcet-cycle"),
        ("copeland-resolvability", None, "resolvability"),
    )
    for name, params, axiom in pairs:
        example = counterexample_library(name, dict(params) if params else None)
        z = 5000 // example.profile.n
        est = estimate_violation(
            example.rule, axiom, example, MALLOWS, 0.05, 10_000, SEED, z=z,
        )
        assert est.p_hat >= 0.99, (
            f"{name}/{axiom} at zn={z * example.profile.n}: {est.p_hat:.4f}"
        )
    assert time.perf_counter() - start < 600


def test_criterion_06_benchmark_margins_match_closed_forms_exactly():
    """The three expected margins of the perturbed 300-voter benchmark
    equal their closed-form polynomials at dispersion 0, 0.1, ..., 0.9 to
    1e-12 (they are equal as exact rationals), and at dispersion 0 they
    equal the directly counted margins of the base profile.  Budget: 1 s."""
    start = time.perf_counter()
    grid = [k / 10 for k in range(10)]
    rows = verify_appendixD_margins(grid)
    assert all(row.matches_closed_form for row in rows)

    at_zero = rows[0]
    margins = pairwise_margins(BENCHMARK_PROFILE)
    n = BENCHMARK_PROFILE.n
    firsts = Counter(r[0] for r in BENCHMARK_PROFILE.rankings)
    assert at_zero.margin_b_over_a == Fraction(margins.margin(1, 0), n) == Fraction(17, 75)
    assert at_zero.margin_b_over_c == Fraction(margins.margin(1, 2), n) == Fraction(1, 150)
    assert at_zero.plurality_gap_a_over_b == Fraction(firsts[0] - firsts[1], n) == Fraction(1, 300)

    closed = [
        lambda f, zeta: Fraction(1, 75) * (1 - f) * (17 - 23 * f + 17 * f * f) / zeta,
        lambda f, zeta: Fraction(1, 150) * (1 - f) * (1 + 116 * f + f * f) / zeta,
        lambda f, zeta: Fraction(1, 300) * (1 - f) * (1 + f) * (1 + 11 * f) / zeta,
    ]
    for row in rows:
        f = Fraction(str(row.phi))
        zeta = 1 + 2 * f + 2 * f * f + f ** 3
        values = (row.margin_b_over_a, row.margin_b_over_c, row.plurality_gap_a_over_b)
        for value, form in zip(values, closed):
            assert abs(float(value - form(f, zeta))) <= 1e-12
    assert time.perf_counter() - start < 1


def test_criterion_07_high_dispersion_condorcet_violation_floor():
    """Plurality and Borda on the 16-fold replicated benchmark at
    dispersion 0.9, 10^4 trials: Condorcet-violation probability >= 0.95.

    Measured ~0.19 (plurality) and ~0.12 (Borda): the violation event
    needs a Condorcet winner to exist and the rule to miss it, and at this
    dispersion the pairwise ordering is itself near a coin flip, so the
    joint event caps out far below 0.95.  Kept failing rather than
    weakened.  Budget: 2 min."""
    start = time.perf_counter()
    example = counterexample_library("appendixD")
    measured = {}
    for rule_name in ("plurality", "borda"):
        est = estimate_violation(
            parse_rule_spec(rule_name), "condorcet", example, MALLOWS,
            0.9, 10_000, SEED, z=16,
        )
        measured[rule_name] = est.p_hat
    assert time.perf_counter() - start < 120
    assert all(p >= 0.95 for p in measured.values()), f"measured {measured}"


def test_criterion_08_group_flip_probability_decays_below_005():
    """Plurality with coalition budget floor(n^0.25) at dispersion 0.5,
    n in {100, 1000, 10000}, 10^4 trials: flip-possible probability
    strictly decreasing and <= 0.05 at n=10^4.  The certificate path
    raises if it ever contradicts the exact top-two-gap decision, so a
    clean run doubles as the consistency check.  Budget: 5 min."""
    start = time.perf_counter()
    rows = group_flip_probability(
        parse_rule_spec("plurality"), "group-flip-base", MALLOWS, 0.5,
        RhoSchedule("pow:1,0.25"), [100, 1000, 10_000], 10_000, 44,
    )
    ps = [row.estimate.p_hat for row in rows]
    assert ps[0] > ps[1] > ps[2], ps
    assert ps[2] <= 0.05, ps
    assert time.perf_counter() - start < 300


NAIVE_WEIGHTS = {"plurality": (1, 0, 0), "borda": (2, 1, 0), "veto": (1, 1, 0)}
ALL_RULE_NAMES = ("plurality", "borda", "veto", "minimax", "copeland", "kemeny")


def naive_margin_matrix(rankings):
    mat = [[0] * 3 for _ in range(3)]
    for r in rankings:
        for i in range(3):
            for j in range(i + 1, 3):
                mat[r[i]][r[j]] += 1
                mat[r[j]][r[i]] -= 1
    return mat


def naive_winners(name, rankings):
    if name in NAIVE_WEIGHTS:
        weights = NAIVE_WEIGHTS[name]
        scores = [0, 0, 0]
        for r in rankings:
            for pos in range(3):
                scores[r[pos]] += weights[pos]
    elif name == "minimax":
        mat = naive_margin_matrix(rankings)
        scores = [-max(mat[y][x] for y in range(3) if y != x) for x in range(3)]
    elif name == "copeland":
        mat = naive_margin_matrix(rankings)
        scores = [
            sum(2 if mat[x][y] > 0 else (1 if mat[x][y] == 0 else 0)
                for y in range(3) if y != x)
            for x in range(3)
        ]
    else:  # kemeny: exhaustive over all orderings of three candidates
        orders = list(permutations(range(3)))
        costs = []
        for sigma in orders:
            disagreements = 0
            for r in rankings:
                for i in range(3):
                    for j in range(i + 1, 3):
                        if r.index(sigma[j]) < r.index(sigma[i]):
                            disagreements += 1
            costs.append(disagreements)
        best = min(costs)
        return frozenset(orders[k][0] for k in range(6) if costs[k] == best)
    top = max(scores)
    return frozenset(c for c in range(3) if scores[c] == top)


def naive_condorcet_winner(rankings):
    mat = naive_margin_matrix(rankings)
    for x in range(3):
        if all(mat[x][y] > 0 for y in range(3) if y != x):
            return x
    return None


def naive_majority_winner(rankings):
    firsts = Counter(r[0] for r in rankings)
    candidate, count = firsts.most_common(1)[0]
    return candidate if 2 * count > len(rankings) else None


def naive_satisfies(axiom, name, rankings):
    if axiom == "no-condorcet-cycle":
        return naive_condorcet_winner(rankings) is not None
    winners = naive_winners(name, rankings)
    if axiom == "resolvability":
        return len(winners) == 1
    target = (
        naive_condorcet_winner(rankings)
        if axiom == "condorcet"
        else naive_majority_winner(rankings)
    )
    return target is None or winners == frozenset({target})


def test_criterion_09a_absolute_axioms_agree_with_naive_oracle():
    """Every absolute-axiom predicate matches an independent naive
    reimplementation on all 209 histograms with m=3, n <= 4 (covering all
    1554 ordered ballot sequences) for all six rules.  Budget: 2 min
    (shared with 09b)."""
    start = time.perf_counter()
    rules = {name: parse_rule_spec(name) for name in ALL_RULE_NAMES}
    histograms = 0
    ordered_total = 0
    for n in range(1, 5):
        for combo in combinations_with_replacement(range(6), n):
            rankings = tuple(RANKINGS3[j] for j in combo)
            profile = Profile(3, rankings)
            histograms += 1
            weight = math.factorial(n)
            for j in set(combo):
                weight //= math.factorial(combo.count(j))
            ordered_total += weight
            assert check_absolute("no-condorcet-cycle", None, profile) == \
                naive_satisfies("no-condorcet-cycle", None, rankings)
            for name, rule in rules.items():
                for axiom in ("resolvability", "condorcet", "majority"):
                    assert check_absolute(axiom, rule, profile) == \
                        naive_satisfies(axiom, name, rankings), (name, axiom, combo)
    assert histograms == 209
    assert ordered_total == 6 + 36 + 216 + 1296 == 1554
    assert time.perf_counter() - start < 120


def test_criterion_09b_worst_case_census_splits_clean_from_violated():
    """Exhaustive n <= 5 censuses: rules known to satisfy an axiom show
    exactly zero violations, rules known to violate it show the frozen
    positive counts; every rule admits resolvability failures.
    Budget: 2 min (shared with 09a)."""
    start = time.perf_counter()
    expected = {
        ("plurality", "condorcet"): 48, ("plurality", "majority"): 0,
        ("plurality", "resolvability"): 101,
        ("borda", "condorcet"): 36, ("borda", "majority"): 30,
        ("borda", "resolvability"): 62,
        ("veto", "condorcet"): 204, ("veto", "majority"): 192,
        ("veto", "resolvability"): 152,
        ("minimax", "condorcet"): 0, ("minimax", "majority"): 0,
        ("minimax", "resolvability"): 74,
        ("copeland", "condorcet"): 0, ("copeland", "majority"): 0,
        ("copeland", "resolvability"): 44,
        ("kemeny", "condorcet"): 0, ("kemeny", "majority"): 0,
        ("kemeny", "resolvability"): 74,
    }
    for (rule_name, axiom), count in expected.items():
        found = brute_force_audit(parse_rule_spec(rule_name), axiom, 5)
        assert len(found) == count, (rule_name, axiom, len(found))
    for rule_name in ALL_RULE_NAMES:
        assert expected[(rule_name, "resolvability")] >= 1
    assert time.perf_counter() - start < 120


def test_criterion_10_worker_count_never_changes_results(tmp_path):
    """An acceptance sweep rerun with the same seed and different worker
    counts produces byte-identical CSV output."""
    base = preset_profile("two-way-tie", 100)
    outputs = []
    for workers in (1, 4):
        result = convergence_sweep(
            parse_rule_spec("plurality"), "resolvability", base, MALLOWS,
            [0.5], [1, 4, 16, 64], 10_000, SEED, workers=workers,
        )
        path = tmp_path / f"workers{workers}.csv"
        write_csv(path, sweep_csv_rows("acceptance-decay", result, SEED))
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]

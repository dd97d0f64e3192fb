"""Monte Carlo engine: determinism, exact corner cases, vectorized events
versus their scalar counterparts, sweep drivers, and CSV emission.

Probability values asserted below were measured once with the pinned seeds
and frozen; structural assertions (exact 0/1 outcomes, byte equality,
set inclusions) are implementation-independent facts.
"""

import csv
import math
from fractions import Fraction

import numpy as np
import pytest

from smoothedvotes.core import (
    ArgumentError,
    ConfigurationError,
    Profile,
    replicate,
)
from smoothedvotes.noise import MallowsModel, UniformMixtureModel, expected_pmf_exact
from smoothedvotes.rules import (
    CopelandRule,
    borda_rule,
    l1_distance_to_hyperplane,
    plurality_rule,
)
from smoothedvotes.axioms import check_absolute, check_group_stability, counterexample_library
from smoothedvotes import smoothed as sm

MALLOWS = MallowsModel()
PLURALITY = plurality_rule()
BENCHMARK = counterexample_library("appendixD").profile


# --------------------------------------------------------------------------
# Wilson intervals
# --------------------------------------------------------------------------

class TestWilson:
    def test_published_reference_values(self):
        low, high = sm.wilson_interval(8, 10)
        assert low == pytest.approx(0.490, abs=5e-4)
        assert high == pytest.approx(0.943, abs=5e-4)
        low, high = sm.wilson_interval(0, 10)
        assert low == 0.0
        assert high == pytest.approx(0.2775, abs=5e-4)

    def test_zero_and_full_endpoints(self):
        z2 = sm.WILSON_Z ** 2
        low, high = sm.wilson_interval(0, 100)
        assert low == 0.0
        assert high == pytest.approx(z2 / (100 + z2))
        low, high = sm.wilson_interval(100, 100)
        assert high == 1.0
        assert low == pytest.approx(1 - z2 / (100 + z2))

    def test_symmetry(self):
        low, high = sm.wilson_interval(30, 80)
        low2, high2 = sm.wilson_interval(50, 80)
        assert low == pytest.approx(1 - high2)
        assert high == pytest.approx(1 - low2)

    def test_argument_validation(self):
        with pytest.raises(ArgumentError):
            sm.wilson_interval(5, 0)
        with pytest.raises(ArgumentError):
            sm.wilson_interval(11, 10)


# --------------------------------------------------------------------------
# schedules and presets
# --------------------------------------------------------------------------

class TestSchedules:
    def test_rho_schedule_forms(self):
        assert sm.RhoSchedule("const:3").value(10**6) == 3
        assert sm.RhoSchedule("pow:1,0.25").value(10000) == 10
        with pytest.raises(ConfigurationError):
            sm.RhoSchedule("pow:1,0.6")

    def test_delta_schedule_validation(self):
        delta = sm.DeltaSchedule(c=2.0, e=-0.75)
        assert delta.value(16) == pytest.approx(0.25)
        assert sm.DeltaSchedule.from_expr("pow:1,-0.75").c == 1.0
        with pytest.raises(ConfigurationError):
            sm.DeltaSchedule(c=1.0, e=-0.5)
        with pytest.raises(ConfigurationError):
            sm.DeltaSchedule(c=0.0, e=-0.75)
        with pytest.raises(ConfigurationError):
            sm.DeltaSchedule.from_expr("const:0.1")


class TestPresets:
    def test_two_way_tie(self):
        assert sm.preset_profile("two-way-tie", 8).counts() == (4, 0, 4, 0, 0, 0)
        with pytest.raises(ArgumentError):
            sm.preset_profile("two-way-tie", 7)

    def test_cycle_margins_stay_cyclic(self):
        from smoothedvotes.rules import pairwise_margins
        for n in (3, 5, 6, 7, 100, 6400):
            p = sm.preset_profile("cycle", n)
            margins = pairwise_margins(p)
            assert margins.margin(0, 1) > 0
            assert margins.margin(1, 2) > 0
            assert margins.margin(2, 0) > 0
        with pytest.raises(ArgumentError):
            sm.preset_profile("cycle", 4)

    def test_group_flip_base_split(self):
        assert sm.preset_profile("group-flip-base", 20).counts() == (8, 0, 7, 0, 5, 0)
        assert sm.preset_profile("group-flip-base", 100).counts() == (40, 0, 35, 0, 25, 0)
        with pytest.raises(ArgumentError):
            sm.preset_profile("group-flip-base", 30)

    def test_uniform_mix(self):
        assert sm.preset_profile("uniform-mix", 8).counts() == (1, 1, 1, 1, 1, 3)
        with pytest.raises(ArgumentError):
            sm.preset_profile("uniform-mix", 5)

    def test_unknown_preset(self):
        with pytest.raises(ConfigurationError):
            sm.preset_profile("landslide", 10)

    def test_resolve_base_paths(self):
        base = sm.preset_profile("two-way-tie", 2)
        assert sm._resolve_base(base, 10).counts() == (5, 0, 5, 0, 0, 0)
        assert sm._resolve_base("two-way-tie", 10).counts() == (5, 0, 5, 0, 0, 0)
        assert sm._resolve_base(lambda n: replicate(base, n // 2), 10).n == 10
        with pytest.raises(ArgumentError):
            sm._resolve_base(base, 11)


# --------------------------------------------------------------------------
# sampling engine
# --------------------------------------------------------------------------

class TestEngine:
    def test_worker_count_does_not_change_bytes(self):
        for workers in (2, 4, 8):
            a = sm.sample_profile_counts(MALLOWS, BENCHMARK, 0.4, 2000, seed=11, workers=1)
            b = sm.sample_profile_counts(MALLOWS, BENCHMARK, 0.4, 2000, seed=11, workers=workers)
            assert np.array_equal(a, b)

    def test_prefix_stability_at_block_boundaries(self):
        # whole 512-trial blocks are seeded by index, so a longer run
        # reproduces a shorter one block for block
        a = sm.sample_profile_counts(MALLOWS, BENCHMARK, 0.4, 1024, seed=11)
        b = sm.sample_profile_counts(MALLOWS, BENCHMARK, 0.4, 1536, seed=11)
        assert np.array_equal(a, b[:1024])

    def test_counts_preserve_voters(self):
        counts = sm.sample_profile_counts(MALLOWS, BENCHMARK, 0.7, 500, seed=3)
        assert (counts.sum(axis=1) == BENCHMARK.n).all()
        assert (counts >= 0).all()

    def test_sample_mean_matches_exact_expectation(self):
        trials = 200_000
        counts = sm.sample_profile_counts(MALLOWS, BENCHMARK, 0.5, trials, seed=8)
        expectation = np.array(
            [float(q) for q in expected_pmf_exact(MALLOWS, BENCHMARK, 0.5)]
        )
        observed = counts.mean(axis=0) / BENCHMARK.n
        standard_error = np.sqrt(expectation * (1 - expectation) / (BENCHMARK.n * trials))
        assert (np.abs(observed - expectation) < 5 * standard_error + 1e-9).all()

    def test_run_validation(self):
        with pytest.raises(ArgumentError):
            sm.sample_profile_counts(MALLOWS, BENCHMARK, 0.4, 50, seed=1)
        with pytest.raises(ArgumentError):
            sm.sample_profile_counts(MALLOWS, BENCHMARK, 0.4, 500, seed=-1)
        with pytest.raises(ArgumentError):
            sm.sample_profile_counts(MALLOWS, BENCHMARK, 0.4, 500, seed=1, workers=0)


# --------------------------------------------------------------------------
# vectorized events agree with scalar predicates
# --------------------------------------------------------------------------

class TestEventVectorization:
    def _sampled_profiles(self, trials=400):
        base = sm.preset_profile("uniform-mix", 9)
        counts = sm.sample_profile_counts(MALLOWS, base, 0.9, trials, seed=17)
        return counts

    @pytest.mark.parametrize("axiom", ["resolvability", "condorcet", "majority"])
    @pytest.mark.parametrize("rule_name", ["plurality", "borda", "copeland"])
    def test_absolute_events_match_scalar_checks(self, axiom, rule_name):
        rule = {"plurality": plurality_rule(), "borda": borda_rule(),
                "copeland": CopelandRule()}[rule_name]
        counts = self._sampled_profiles()
        events = sm.violation_events(rule, axiom, counts, 3)
        for row, violated in zip(counts, events):
            profile = Profile.from_counts(3, tuple(int(c) for c in row))
            assert bool(violated) == (not check_absolute(axiom, rule, profile))

    def test_cycle_events_match_scalar_checks(self):
        counts = self._sampled_profiles()
        events = sm.violation_events(None, "no-condorcet-cycle", counts, 3)
        for row, violated in zip(counts, events):
            profile = Profile.from_counts(3, tuple(int(c) for c in row))
            assert bool(violated) == (
                not check_absolute("no-condorcet-cycle", None, profile)
            )

    @pytest.mark.parametrize("rho", [1, 2])
    def test_plurality_flip_events_match_scalar_gap(self, rho):
        counts = self._sampled_profiles()
        events = sm.plurality_unstable_events(counts, 3, rho)
        for row, unstable in zip(counts, events):
            profile = Profile.from_counts(3, tuple(int(c) for c in row))
            result = check_group_stability(PLURALITY, profile, rho, method="exact-gap")
            assert bool(unstable) == (result.status == "unstable")

    def test_certificate_events_match_scalar_certificates(self):
        base = sm.preset_profile("group-flip-base", 40)
        counts = sm.sample_profile_counts(MALLOWS, base, 0.3, 300, seed=23)
        events = sm.certified_stable_events(borda_rule(), counts, 3, 1)
        for row, certified in zip(counts, events):
            profile = Profile.from_counts(3, tuple(int(c) for c in row))
            result = check_group_stability(borda_rule(), profile, 1, method="certificate")
            assert bool(certified) == (result.status == "stable")

    def test_thick_plane_zero_width_is_exact_membership(self):
        counts = self._sampled_profiles()
        events = sm.thick_plane_events(PLURALITY, counts, 3, 0.0)
        planes = PLURALITY.hyperplanes(3)
        from smoothedvotes.core import histogram_of
        for row, hit in zip(counts, events):
            profile = Profile.from_counts(3, tuple(int(c) for c in row))
            h = histogram_of(profile)
            exact = min(l1_distance_to_hyperplane(h, p) for p in planes) == 0
            assert bool(hit) == exact

    def test_thick_plane_events_monotone_in_width(self):
        counts = self._sampled_profiles()
        narrow = sm.thick_plane_events(PLURALITY, counts, 3, 0.01)
        wide = sm.thick_plane_events(PLURALITY, counts, 3, 0.05)
        assert not (narrow & ~wide).any()

    def test_thick_plane_requires_tie_loci(self):
        counts = self._sampled_profiles()
        with pytest.raises(ArgumentError):
            sm.thick_plane_events(PLURALITY, counts, 3, -0.1)


# --------------------------------------------------------------------------
# estimator corner cases
# --------------------------------------------------------------------------

class TestEstimator:
    def test_single_voter_plurality_never_ties(self):
        one = Profile.from_counts(3, (1, 0, 0, 0, 0, 0))
        est = sm.estimate_violation(PLURALITY, "resolvability", one, MALLOWS, 0.7, 1000, seed=5)
        assert est.p_hat == 0.0

    def test_zero_noise_keeps_the_counterexample(self):
        ex = counterexample_library("plurality-condorcet")
        est = sm.estimate_violation(PLURALITY, "condorcet", ex.profile, MALLOWS, 0.0, 500, seed=5)
        assert est.p_hat == 1.0

    def test_full_noise_models_coincide(self):
        base = sm.preset_profile("two-way-tie", 100)
        a = sm.estimate_violation(PLURALITY, "resolvability", base, MALLOWS, 1.0, 5000, seed=77)
        b = sm.estimate_violation(PLURALITY, "resolvability", base, UniformMixtureModel(), 1.0, 5000, seed=77)
        assert a == b

    def test_worker_count_invariance_end_to_end(self):
        a = sm.estimate_violation(PLURALITY, "condorcet", BENCHMARK, MALLOWS, 0.3, 2000, seed=9, z=4, workers=1)
        b = sm.estimate_violation(PLURALITY, "condorcet", BENCHMARK, MALLOWS, 0.3, 2000, seed=9, z=4, workers=3)
        assert a == b

    def test_whole_electorate_coalition_always_flips(self):
        base = sm.preset_profile("group-flip-base", 100)
        est = sm.estimate_violation(
            PLURALITY, "group-stability", base, MALLOWS, 0.5, 500, seed=2, rho=100
        )
        assert est.p_hat == 1.0

    def test_iia_zero_noise_keeps_the_flip(self):
        ex = counterexample_library("psr-iia", {"alpha": "1/2"})
        est = sm.estimate_violation(borda_rule(), "iia", ex, MALLOWS, 0.0, 400, seed=3)
        assert est.p_hat == 1.0

    def test_iia_coupling_preserves_pair_side_counts(self):
        ex = counterexample_library("psr-iia", {"alpha": "1/2"})
        pair = (replicate(ex.profiles[0], 3), replicate(ex.profiles[1], 3))
        a, b = ex.iia_pair
        c1, c2 = sm.sample_matched_pair_counts(MALLOWS, pair, a, b, 0.4, 500, seed=31)
        from smoothedvotes.core import enumerate_rankings
        side = np.array(
            [1 if r.index(a) < r.index(b) else 0 for r in enumerate_rankings(3)],
            dtype=np.int64,
        )
        assert np.array_equal(c1 @ side, c2 @ side)
        assert (c1.sum(axis=1) == pair[0].n).all()

    def test_iia_coupling_marginal_matches_exact_expectation(self):
        ex = counterexample_library("psr-iia", {"alpha": "1/2"})
        pair = (replicate(ex.profiles[0], 5), replicate(ex.profiles[1], 5))
        a, b = ex.iia_pair
        trials = 100_000
        c1, _ = sm.sample_matched_pair_counts(MALLOWS, pair, a, b, 0.6, trials, seed=41)
        expectation = np.array(
            [float(q) for q in expected_pmf_exact(MALLOWS, pair[0], 0.6)]
        )
        observed = c1.mean(axis=0) / pair[0].n
        standard_error = np.sqrt(expectation * (1 - expectation) / (pair[0].n * trials))
        assert (np.abs(observed - expectation) < 5 * standard_error + 1e-9).all()

    def test_validation_errors(self):
        with pytest.raises(ConfigurationError):
            sm.estimate_violation(PLURALITY, "consistency", BENCHMARK, MALLOWS, 0.3, 500, seed=1)
        with pytest.raises(ConfigurationError):
            sm.estimate_violation(PLURALITY, "iia", BENCHMARK, MALLOWS, 0.3, 500, seed=1)
        with pytest.raises(ConfigurationError):
            sm.estimate_violation(PLURALITY, "pareto", BENCHMARK, MALLOWS, 0.3, 500, seed=1)
        with pytest.raises(ArgumentError):
            sm.estimate_violation(PLURALITY, "group-stability", BENCHMARK, MALLOWS, 0.3, 500, seed=1)
        with pytest.raises(ArgumentError):
            sm.estimate_violation(PLURALITY, "condorcet", BENCHMARK, MALLOWS, 0.3, 500, seed=1, z=0)


# --------------------------------------------------------------------------
# sweeps and measured shapes (values frozen with these exact seeds)
# --------------------------------------------------------------------------

class TestSweeps:
    def test_single_point_sweep_reproduces_estimator(self):
        direct = sm.estimate_violation(PLURALITY, "condorcet", BENCHMARK, MALLOWS, 0.2, 2000, seed=55, z=4)
        sweep = sm.convergence_sweep(
            PLURALITY, "condorcet", BENCHMARK, MALLOWS, [0.2], [4], 2000, seed=55
        )
        assert sweep.rows[0].estimate == direct
        assert sweep.rows[0].n == 1200

    def test_grid_validation(self):
        with pytest.raises(ArgumentError):
            sm.convergence_sweep(PLURALITY, "condorcet", BENCHMARK, MALLOWS, [], [1], 500, seed=1)
        with pytest.raises(ArgumentError):
            sm.convergence_sweep(PLURALITY, "condorcet", BENCHMARK, MALLOWS, [0.2, 0.2], [1], 500, seed=1)

    def test_tie_probability_decays_like_root_n(self):
        tie = sm.preset_profile("two-way-tie", 2)
        sweep = sm.convergence_sweep(
            PLURALITY, "resolvability", tie, MALLOWS, [0.5], [50, 200, 800, 3200],
            40000, seed=21,
        )
        p = [row.estimate.p_hat for row in sweep.rows]
        n = [row.n for row in sweep.rows]
        assert p == sorted(p, reverse=True)
        slope = np.polyfit(np.log(n), np.log(p), 1)[0]
        assert slope <= -0.35

    def test_violation_probability_grows_with_replication(self):
        sweep = sm.convergence_sweep(
            PLURALITY, "condorcet", BENCHMARK, MALLOWS, [0.3], [1, 4, 16, 64],
            20000, seed=6,
        )
        p = [row.estimate.p_hat for row in sweep.rows]
        assert p[0] > 0.4
        assert all(a < b for a, b in zip(p, p[1:]))

    def test_violation_probability_reaches_one_sided_certainty(self):
        est = sm.estimate_violation(PLURALITY, "condorcet", BENCHMARK, MALLOWS, 0.3, 10000, seed=13, z=400)
        assert est.p_hat >= 0.99

    def test_low_noise_onset_floors_out(self):
        values = []
        for z in (250, 2000, 8000):
            est = sm.estimate_violation(
                PLURALITY, "condorcet", BENCHMARK, MALLOWS, 0.05, 10000, seed=13, z=z
            )
            values.append(est.p_hat)
        assert values[0] >= 0.99
        assert values[1] == 1.0 and values[2] == 1.0

    def test_more_noise_smooths_the_violation_away(self):
        ests = [
            sm.estimate_violation(PLURALITY, "condorcet", BENCHMARK, MALLOWS, phi, 10000, seed=13, z=250)
            for phi in (0.05, 0.3, 0.7)
        ]
        assert ests[0].ci_low > ests[1].ci_high
        assert ests[1].ci_low > ests[2].ci_high

    def test_cycle_keeps_copeland_unresolved_at_moderate_noise(self):
        est = sm.estimate_violation(
            CopelandRule(), "resolvability", sm.preset_profile("cycle", 6400),
            MALLOWS, 0.5, 10000, seed=33,
        )
        assert est.p_hat >= 0.99

    def test_full_noise_dissolves_the_cycle(self):
        # under uniform ballots the three-way tie needs an unlikely
        # margin cycle, observed near one run in ten
        est = sm.estimate_violation(
            CopelandRule(), "resolvability", sm.preset_profile("cycle", 6400),
            MALLOWS, 1.0, 10000, seed=33,
        )
        assert 0.05 < est.p_hat < 0.15

    def test_seed_robustness_within_intervals(self):
        ests = [
            sm.estimate_violation(PLURALITY, "condorcet", BENCHMARK, MALLOWS, 0.3, 20000, seed=s, z=16)
            for s in (1, 2, 3)
        ]
        for e in ests:
            for f in ests:
                assert e.ci_low <= f.p_hat <= e.ci_high


class TestDiagnostics:
    def test_group_flip_schedule_drives_flips_to_zero(self):
        rows = sm.group_flip_probability(
            PLURALITY, "group-flip-base", MALLOWS, 0.5, sm.RhoSchedule("pow:1,0.25"),
            [100, 1000, 10000], 10000, seed=44,
        )
        p = [row.estimate.p_hat for row in rows]
        assert all(a > b for a, b in zip(p, p[1:]))
        assert p[-1] <= 0.05
        assert [row.parameter for row in rows] == [3.0, 5.0, 10.0]

    def test_group_flip_certificate_path_for_borda(self):
        rows = sm.group_flip_probability(
            borda_rule(), "group-flip-base", MALLOWS, 0.5, sm.RhoSchedule("pow:1,0.25"),
            [1000, 10000], 10000, seed=44,
        )
        p = [row.estimate.p_hat for row in rows]
        assert p[0] < 0.05 and p[1] == 0.0

    def test_thick_slab_probability_orders_by_width(self):
        zero = sm.thick_hyperplane_probability(
            PLURALITY, "uniform-mix", MALLOWS, 0.8, 0, [600], 20000, seed=9
        )[0].estimate.p_hat
        narrow = sm.thick_hyperplane_probability(
            PLURALITY, "uniform-mix", MALLOWS, 0.8, sm.DeltaSchedule(1.0, -0.75),
            [600], 20000, seed=9,
        )[0].estimate.p_hat
        wide = sm.thick_hyperplane_probability(
            PLURALITY, "uniform-mix", MALLOWS, 0.8, sm.DeltaSchedule(4.0, -0.75),
            [600], 20000, seed=9,
        )[0].estimate.p_hat
        assert zero < narrow < wide

    def test_exact_tie_probability_shrinks_with_n(self):
        rows = sm.thick_hyperplane_probability(
            PLURALITY, "uniform-mix", MALLOWS, 0.8, 0, [600, 2400], 20000, seed=9
        )
        assert rows[0].estimate.p_hat > rows[1].estimate.p_hat > 0


# --------------------------------------------------------------------------
# refinement grids
# --------------------------------------------------------------------------

class TestPhiGrids:
    def test_upward_grid_brackets_full_noise(self):
        assert sm.phi_refinement_grid(0.4, "up") == (0.4, 0.7, 1.0)
        assert sm.phi_refinement_grid(1.0, "up") == (1.0,)

    def test_downward_grid_stays_positive(self):
        assert sm.phi_refinement_grid(0.4, "down") == (0.1, 0.2, 0.4)
        with pytest.raises(ArgumentError):
            sm.phi_refinement_grid(0.0, "down")

    def test_validation(self):
        with pytest.raises(ArgumentError):
            sm.phi_refinement_grid(1.2, "up")
        with pytest.raises(ArgumentError):
            sm.phi_refinement_grid(0.4, "sideways")


# --------------------------------------------------------------------------
# exact benchmark margins
# --------------------------------------------------------------------------

class TestBenchmarkMargins:
    def test_zero_noise_margins(self):
        row = sm.verify_appendixD_margins([0.0])[0]
        assert row.margin_b_over_a == Fraction(17, 75)
        assert row.margin_b_over_c == Fraction(1, 150)
        assert row.plurality_gap_a_over_b == Fraction(1, 300)
        assert row.matches_closed_form

    def test_half_noise_margins(self):
        row = sm.verify_appendixD_margins([0.5])[0]
        assert row.margin_b_over_a == Fraction(13, 525)
        assert row.margin_b_over_c == Fraction(79, 1050)
        assert row.plurality_gap_a_over_b == Fraction(13, 2100)
        assert row.matches_closed_form

    def test_closed_forms_hold_on_a_dense_grid(self):
        grid = [k / 20 for k in range(21)] + [0.3, 0.137]
        rows = sm.verify_appendixD_margins(grid)
        assert all(row.matches_closed_form for row in rows)

    def test_margins_vanish_only_at_full_noise(self):
        rows = sm.verify_appendixD_margins([k / 10 for k in range(10)])
        for row in rows:
            assert row.margin_b_over_a > 0
            assert row.margin_b_over_c > 0
            assert row.plurality_gap_a_over_b > 0
        final = sm.verify_appendixD_margins([1.0])[0]
        assert final.margin_b_over_a == 0
        assert final.plurality_gap_a_over_b == 0

    def test_mallows_only(self):
        with pytest.raises(ArgumentError):
            sm.verify_appendixD_margins([0.2], model=UniformMixtureModel())


# --------------------------------------------------------------------------
# CSV emission
# --------------------------------------------------------------------------

class TestCsv:
    def _sweep(self):
        return sm.convergence_sweep(
            PLURALITY, "condorcet", BENCHMARK, MALLOWS, [0.2], [1, 2], 200, seed=5
        )

    def test_round_trip_and_column_order(self, tmp_path):
        path = tmp_path / "rows.csv"
        rows = sm.sweep_csv_rows("onset", self._sweep(), seed=5)
        sm.write_csv(path, rows)
        with open(path, newline="") as handle:
            reader = csv.DictReader(handle)
            assert tuple(reader.fieldnames) == sm.CSV_COLUMNS
            read = list(reader)
        assert len(read) == 2
        for row, original in zip(read, rows):
            assert row["ms"] == "0"
            assert float(row["p_hat"]) == original["p_hat"]
            assert int(row["n"]) == original["n"]
            assert row["rule"] == "plurality"
            assert row["axiom"] == "condorcet"
            assert row["model"] == "mallows"

    def test_identical_runs_identical_bytes(self, tmp_path):
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        sm.write_csv(p1, sm.sweep_csv_rows("onset", self._sweep(), seed=5))
        sm.write_csv(p2, sm.sweep_csv_rows("onset", self._sweep(), seed=5))
        assert p1.read_bytes() == p2.read_bytes()

    def test_key_mismatch_rejected(self, tmp_path):
        rows = sm.sweep_csv_rows("onset", self._sweep(), seed=5)
        rows[0] = {**rows[0], "bonus": 1}
        with pytest.raises(ArgumentError):
            sm.write_csv(tmp_path / "bad.csv", rows)

    def test_diagnostic_rows_fit_schema(self, tmp_path):
        rows = sm.group_flip_probability(
            PLURALITY, "group-flip-base", MALLOWS, 0.5, sm.RhoSchedule("const:2"),
            [100], 200, seed=3,
        )
        csv_rows = sm.diagnostic_csv_rows(
            "group-flip", "plurality", "group-stability:rho=const:2",
            "mallows", 0.5, rows, seed=3,
        )
        sm.write_csv(tmp_path / "diag.csv", csv_rows)
        assert csv_rows[0]["n"] == 100

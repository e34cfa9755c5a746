"""Greedy threshold-code construction, spectrum accounting, and resolution."""

import json
import math

import numpy as np
import pytest

from osplit.codebook import Codebook, SpectrumBin, UnresolvedAtCutoffError, build_codebook
from osplit.engine import run_batch
from osplit.channels import IidUniformChannel
from osplit.regions import binary_expansion_value, region_mass
from osplit.strategies import MpaStrategy
from osplit.engine import COLLISION, IDLE

TABLE = [
    (0.5, "1", 1 / 2),
    (0.75, "e1", 1 / 8),
    (0.25, "01", 1 / 8),
    (0.875, "ee1", 1 / 32),
    (0.625, "e01", 1 / 32),
    (0.375, "0e1", 1 / 32),
    (0.125, "001", 1 / 32),
]


class TestTwoUserTable:
    def setup_method(self):
        self.cb = build_codebook(2, 1e-4)

    def test_first_seven_entries(self):
        for (t, w, p), e in zip(TABLE, self.cb.entries):
            assert abs(e.threshold - t) <= 1e-12
            assert e.codeword == w
            assert e.probability == p
            assert e.depth == len(w)

    def test_entry_regions_match_events(self):
        # "e1" resolves pairs with second max in (1/2, 3/4] and max in (3/4, 1].
        e = self.cb.entries[1]
        assert (e.region.a, e.region.b) == (0.5, 1.0)
        assert self.cb.entries[2].region.b == 0.5

    def test_greedy_threshold_order(self):
        assert [e.threshold for e in self.cb.entries[:4]] == [0.5, 0.75, 0.25, 0.875]

    def test_binary_expansion_property(self):
        for e in self.cb.entries:
            assert abs(e.threshold - binary_expansion_value(e.codeword)) <= 1e-12

    def test_collision_subtree_mass_equals_entry_sum(self):
        # Entries whose codeword starts with 'e' partition the (1/2, 1] region,
        # so their probabilities sum to its mass (up to the residual).
        e_sum = sum(e.probability for e in self.cb.entries if e.codeword.startswith("e"))
        assert abs(e_sum - region_mass(self.cb.entries[1].region)) <= self.cb.residual_mass
        assert abs(e_sum - 0.25) <= 1e-4


class TestBuildInvariants:
    @pytest.mark.parametrize("n", [2, 3, 5, 8, 16, 32])
    def test_first_threshold_rule(self, n):
        cb = build_codebook(n, 0.5, max_nodes=4)
        assert abs(cb.entries[0].threshold - (1 - 1 / n)) <= 1e-12

    @pytest.mark.parametrize("n,eps", [(2, 1e-3), (3, 1e-4), (5, 1e-4)])
    def test_probability_accounting(self, n, eps):
        cb = build_codebook(n, eps)
        total = sum(e.probability for e in cb.entries)
        assert abs(total + cb.residual_mass - 1.0) <= 1e-10
        assert cb.residual_mass < eps
        # Spectrum covers at least the entries.
        assert cb.spectrum_residual <= cb.residual_mass + 1e-15
        assert cb.spectrum_residual < eps

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_probabilities_non_increasing(self, n):
        cb = build_codebook(n, 1e-4)
        probs = [e.probability for e in cb.entries]
        assert all(p1 >= p2 for p1, p2 in zip(probs, probs[1:]))

    def test_thresholds_pairwise_distinct(self):
        for n in (2, 3):
            cb = build_codebook(n, 1e-4)
            ts = [e.threshold for e in cb.entries]
            assert len(set(ts)) == len(ts)

    def test_codewords_prefix_free(self):
        cb = build_codebook(3, 1e-3)
        words = sorted(e.codeword for e in cb.entries)
        for w1, w2 in zip(words, words[1:]):
            assert not w2.startswith(w1)

    def test_tree_mass_conservation(self):
        cb = build_codebook(3, 1e-3)
        by_path = {e.path(): e for e in cb.entries}
        checked = 0
        for e in cb.entries:
            left, right = by_path.get(e.path() + "0"), by_path.get(e.path() + "e")
            if left is None or right is None:
                continue
            parent = region_mass(e.region)
            parts = e.probability + region_mass(left.region) + region_mass(right.region)
            assert abs(parent - parts) <= 1e-12
            checked += 1
        assert checked > 100

    def test_spectrum_matches_entries_per_level(self):
        cb = build_codebook(2, 1e-3)
        entry_sums = {}
        entry_counts = {}
        for e in cb.entries:
            entry_sums[e.depth] = entry_sums.get(e.depth, 0.0) + e.probability
            entry_counts[e.depth] = entry_counts.get(e.depth, 0) + 1
        spec_sums = {}
        for p, d, c in cb.spectrum:
            spec_sums[d] = spec_sums.get(d, 0.0) + p * c
        complete = [d for d, c in entry_counts.items() if c == 2 ** (d - 1)]
        assert max(complete) >= 9
        for d in complete:
            assert abs(entry_sums[d] - spec_sums[d]) <= 1e-14

    def test_epsilon_validation(self):
        with pytest.raises(ValueError):
            build_codebook(2, 0.0)
        with pytest.raises(ValueError):
            build_codebook(2, 1.5)
        with pytest.raises(ValueError):
            build_codebook(3, 1e-3, split_fraction=0.4)
        with pytest.raises(ValueError):
            build_codebook(2, 1e-3, split_fraction=1.0)


class TestEntropyAndDelay:
    def test_two_user_exact_values(self):
        cb = build_codebook(2, 1e-10)
        assert abs(cb.entropy() - 3.0) <= 1e-6
        assert abs(cb.expected_delay() - 2.0) <= 1e-6
        assert cb.spectrum_residual < 1e-10

    def test_single_entry_codebook(self):
        cb = Codebook(
            n_users=2,
            epsilon=1e-12,
            entries=[],
            spectrum=[SpectrumBin(1.0, 1, 1)],
            spectrum_residual=0.0,
        )
        assert cb.entropy() == 0.0
        assert cb.expected_delay() == 1.0
        assert cb.delay_bounds() == (1.0, 1.0)

    def test_delay_bounds_bracket(self):
        cb = build_codebook(4, 1e-3)
        lower, upper = cb.delay_bounds()
        assert lower == cb.expected_delay()
        assert lower < upper
        # The bracket must contain the much finer estimate.
        fine = build_codebook(4, 1e-10).expected_delay()
        assert lower <= fine <= upper

    def test_ten_user_entropy_vs_simulation(self):
        cb = build_codebook(10, 1e-10, max_nodes=80_000)
        stats = run_batch(IidUniformChannel(10), "mpa", 1_000_000, 64, seed=17)
        assert abs(cb.entropy() - stats.empirical_entropy_bits) <= 0.02

    def test_sixteen_user_delay_vs_simulation(self):
        cb = build_codebook(16, 1e-10, max_nodes=80_000)
        stats = run_batch(IidUniformChannel(16), "mpa", 1_000_000, 64, seed=23)
        assert stats.success_rate == 1.0
        assert abs(cb.expected_delay() - stats.mean_delay_conditional) <= 0.01


class TestSplitFractionTrees:
    def test_half_fraction_reproduces_greedy(self):
        greedy = build_codebook(2, 1e-6)
        forced = build_codebook(2, 1e-6, split_fraction=0.5)
        for a, b in zip(greedy.entries[:200], forced.entries[:200]):
            assert a.threshold == b.threshold and a.codeword == b.codeword
        assert abs(greedy.entropy() - forced.entropy()) <= 1e-12

    @pytest.mark.parametrize("x", [0.45, 0.55])
    def test_perturbed_tree_worsens_both_measures(self, x):
        cb = build_codebook(2, 1e-9, split_fraction=x)
        assert cb.entropy() > 3.0
        assert cb.expected_delay() > 2.0

    def test_perturbed_entries_sum_with_spectrum(self):
        cb = build_codebook(2, 1e-3, split_fraction=0.45)
        # Root entry takes 2x(1-x); children carry x^2 and (1-x)^2.
        assert abs(cb.entries[0].probability - 2 * 0.45 * 0.55) <= 1e-15
        by_depth = {}
        for p, d, c in cb.spectrum:
            by_depth[d] = by_depth.get(d, 0.0) + p * c
        assert abs(by_depth[1] - 2 * 0.45 * 0.55) <= 1e-15
        assert abs(sum(by_depth.values()) + cb.spectrum_residual - 1.0) <= 1e-10


class TestResolve:
    def setup_method(self):
        self.cb = build_codebook(2, 1e-4)

    @pytest.mark.parametrize(
        "pair,threshold,codeword",
        [((0.3, 0.8), 0.5, "1"), ((0.55, 0.9), 0.75, "e1"), ((0.26, 0.49), 0.375, "0e1")],
    )
    def test_known_pairs(self, pair, threshold, codeword):
        entry = self.cb.resolve(*pair)
        assert entry.threshold == threshold
        assert entry.codeword == codeword

    def test_invalid_pairs_rejected(self):
        with pytest.raises(ValueError):
            self.cb.resolve(0.8, 0.3)
        with pytest.raises(ValueError):
            self.cb.resolve(0.2, 1.2)

    def test_unresolved_at_cutoff(self):
        with pytest.raises(UnresolvedAtCutoffError):
            self.cb.resolve(1e-12, 2e-12)

    def test_agrees_with_interactive_strategy(self):
        # The tree walk and a live strategy must name the same threshold and
        # codeword for every resolvable pair.
        rng = np.random.default_rng(31)
        pairs = np.sort(rng.uniform(size=(100_000, 2)), axis=1)
        misses = 0
        for lo, hi in pairs:
            try:
                entry = self.cb.resolve(lo, hi)
            except UnresolvedAtCutoffError:
                misses += 1
                continue
            strat = MpaStrategy(2)
            word = ""
            probe = strat.step(None)
            for _ in range(entry.depth + 2):
                y = probe.intervals[0].lo
                if lo <= y < hi:
                    word += "1"
                    break
                fb = COLLISION if lo > y else IDLE
                word += fb.symbol
                probe = strat.step(fb)
            assert word == entry.codeword
            assert probe.intervals[0].lo == entry.threshold
        assert misses < 50


class TestExport:
    def test_json_round_trip(self):
        cb = build_codebook(2, 1e-3)
        data = json.loads(cb.to_json())
        assert data["n_users"] == 2
        assert data["epsilon"] == 1e-3
        assert len(data["entries"]) == len(cb.entries)
        assert set(data["entries"][0]) == {"threshold", "codeword", "probability", "depth"}
        assert math.isclose(data["entropy_bits"], cb.entropy())
        assert data["delay_lower"] <= data["expected_delay"] <= data["delay_upper"]

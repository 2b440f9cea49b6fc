"""Strength distributions: dyadic CDF queries, decay conditions, lazy bit streams."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixedmis import rng
from mixedmis.strength import (
    BiasedBits,
    BitSchedule,
    BitStreamSample,
    ConditionParams,
    FairBits,
    LevelRangeError,
    TabulatedDyadic,
    UnsupportedSamplingError,
    cdf_dyadic,
    check_conditions,
    decay_upper_bound_check,
    distribution_from_spec,
    distribution_to_spec,
    le_threshold,
    next_bit,
)

QUARTER_HALF = ConditionParams(Fraction(1, 4), Fraction(1, 2))


class TestCdfDyadic:
    def test_fair_bits_is_uniform(self):
        assert cdf_dyadic(FairBits(), 3) == Fraction(1, 8)

    def test_level_zero_is_whole_support(self):
        for dist in (FairBits(), BiasedBits(Fraction(1, 3)),
                     BitSchedule(["1/2", "1/4"]), TabulatedDyadic([1.0, 0.4])):
            assert cdf_dyadic(dist, 0) == 1

    def test_biased_bits_power_law(self):
        assert cdf_dyadic(BiasedBits(Fraction(1, 4)), 2) == Fraction(1, 16)

    def test_schedule_prefix_product(self):
        d = BitSchedule([Fraction(1, 2), Fraction(1, 3)])
        assert cdf_dyadic(d, 2) == Fraction(1, 6)
        # positions past the end repeat the last bias
        assert cdf_dyadic(d, 4) == Fraction(1, 6) * Fraction(1, 9)

    def test_tabulated_range_error_names_max_level(self):
        d = TabulatedDyadic([1.0, 0.5, 0.25])
        with pytest.raises(LevelRangeError, match="max supported level is 2"):
            cdf_dyadic(d, 3)

    def test_negative_level_rejected(self):
        with pytest.raises(ValueError):
            cdf_dyadic(FairBits(), -1)

    @given(st.fractions(min_value=0, max_value=1, max_denominator=64),
           st.integers(min_value=0, max_value=40))
    def test_biased_bits_exact_power(self, q, level):
        assert cdf_dyadic(BiasedBits(q), level) == q**level


class TestConditions:
    def test_bias_inside_range_passes(self):
        report = check_conditions(BiasedBits(Fraction(1, 4)), QUARTER_HALF, 64)
        assert report.passed and report.checked_depth == 64

    def test_bias_below_range_fails_lower_at_level_zero(self):
        report = check_conditions(BiasedBits(Fraction(1, 8)), QUARTER_HALF, 4)
        assert not report.passed
        assert report.first_failure.level == 0
        assert not report.first_failure.lower_ok
        assert report.first_failure.upper_ok

    def test_fair_bits_tight_params(self):
        p = ConditionParams(Fraction(1, 2), Fraction(1, 2))
        assert check_conditions(FairBits(), p, 64).passed

    @settings(max_examples=60)
    @given(
        q=st.fractions(min_value=Fraction(1, 4), max_value=Fraction(1, 2), max_denominator=128),
        depth=st.integers(min_value=1, max_value=64),
    )
    def test_any_bias_in_range_passes_any_depth(self, q, depth):
        assert check_conditions(BiasedBits(q), QUARTER_HALF, depth).passed

    @settings(max_examples=30)
    @given(
        qs=st.lists(
            st.fractions(min_value=Fraction(1, 4), max_value=Fraction(1, 2), max_denominator=32),
            min_size=1,
            max_size=6,
        )
    )
    def test_schedules_in_range_pass(self, qs):
        dist = BitSchedule(qs, params=QUARTER_HALF)
        assert check_conditions(dist, QUARTER_HALF, 32).passed

    def test_schedule_range_enforced_at_construction(self):
        with pytest.raises(ValueError, match="outside"):
            BitSchedule([Fraction(1, 8)], params=QUARTER_HALF)

    def test_tabulated_uses_tolerance(self):
        # exactly on the boundary up to float noise
        vals = [1.0, 0.5, 0.25, 0.125]
        assert check_conditions(TabulatedDyadic(vals), ConditionParams("1/2", "1/2"), 3).passed


class TestDecayUpperBound:
    def test_biased_quarter_under_half(self):
        assert decay_upper_bound_check(BiasedBits(Fraction(1, 4)), QUARTER_HALF, 32)

    def test_fair_bits_equality_everywhere(self):
        assert decay_upper_bound_check(FairBits(), QUARTER_HALF, 32)

    def test_tabulated_violation_found(self):
        assert not decay_upper_bound_check(TabulatedDyadic([1, 0.6, 0.3]), QUARTER_HALF, 2)

    @settings(max_examples=60)
    @given(
        q=st.fractions(min_value=Fraction(1, 4), max_value=Fraction(1, 2), max_denominator=128),
        depth=st.integers(min_value=1, max_value=48),
    )
    def test_conditions_imply_decay_bound(self, q, depth):
        dist = BiasedBits(q)
        assert check_conditions(dist, QUARTER_HALF, depth).passed
        assert decay_upper_bound_check(dist, QUARTER_HALF, depth)


class TestBitStreams:
    def test_bits_are_memoized_and_stable(self):
        s = BitStreamSample(seed=5, owner=2, round_index=1)
        d = BiasedBits(Fraction(1, 3))
        first = [next_bit(s, d, k) for k in range(20)]
        again = [next_bit(s, d, k) for k in range(20)]
        assert first == again
        fresh = BitStreamSample(seed=5, owner=2, round_index=1)
        assert [next_bit(fresh, d, k) for k in range(20)] == first

    def test_degenerate_bias_one_always_zero(self):
        s = BitStreamSample(seed=11, owner=0, round_index=0)
        d = BiasedBits(1)
        assert all(next_bit(s, d, k) == 0 for k in range(64))

    def test_degenerate_bias_zero_always_one(self):
        s = BitStreamSample(seed=11, owner=0, round_index=0)
        assert all(next_bit(s, BiasedBits(0), k) == 1 for k in range(64))

    def test_tabulated_not_samplable(self):
        s = BitStreamSample(seed=1, owner=0, round_index=0)
        with pytest.raises(UnsupportedSamplingError):
            next_bit(s, TabulatedDyadic([1.0, 0.5]), 0)

    def test_zero_fraction_within_3_sigma_for_quarter_bias(self):
        # 10^6 draws of bit 0 across distinct streams, q = 1/4
        t, always_one = le_threshold(Fraction(1, 4))
        assert not always_one
        words = rng.position_words(
            rng.stream_keys(97, np.arange(1_000_000), 0), np.zeros(1, dtype=np.uint64)
        )[:, 0]
        frac = (words <= np.uint64(t)).mean()
        assert 0.2487 <= frac <= 0.2513

    def test_empirical_cdf_matches_dyadic_cdf(self):
        # 10^6 lazy samples truncated to 20 bits; leading-zero prefixes vs q^l
        for dist in (FairBits(), BiasedBits(Fraction(1, 4)), BitSchedule(["1/2", "1/3", "1/4"])):
            n = 1_000_000
            keys = rng.stream_keys_grid(1234, np.zeros(1, dtype=np.uint64), np.arange(n))[:, 0]
            packed = np.zeros(n, dtype=np.uint64)
            one = np.uint64(1)
            for k in range(20):
                tl, always_one = le_threshold(dist.zero_probability(k))
                words = rng.position_word(keys, k)
                zero = (words <= np.uint64(tl)) & (not always_one)
                packed = (packed << one) | (~zero).astype(np.uint64)
            for level in range(1, 11):
                p = float(dist.cdf_dyadic(level))
                hits = int((packed >> np.uint64(20 - level) == 0).sum())
                sigma = (p * (1 - p) / n) ** 0.5
                assert abs(hits / n - p) <= 3 * sigma + 1e-12, (dist.kind, level)


class TestSpecs:
    @pytest.mark.parametrize(
        "spec",
        [
            {"kind": "fair_bits"},
            {"kind": "biased_bits", "q": 0.25},
            {"kind": "biased_bits", "q": "1/3"},
            {"kind": "bit_schedule", "biases": [0.5, "1/3", 0.25]},
            {"kind": "tabulated", "cdf": [1.0, 0.5, 0.3]},
        ],
    )
    def test_roundtrip(self, spec):
        dist = distribution_from_spec(spec)
        again = distribution_from_spec(distribution_to_spec(dist))
        assert again == dist

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="unknown distribution kind"):
            distribution_from_spec({"kind": "gaussian"})

    def test_params_validation(self):
        with pytest.raises(ValueError):
            ConditionParams(Fraction(1, 2), Fraction(1, 4))
        with pytest.raises(ValueError):
            ConditionParams(0, Fraction(1, 2))

"""Exact two-sided binomial test, cross-checked against rational arithmetic."""

from fractions import Fraction

import pytest

from chigo.stats import binomial_test
from oracles import exact_binomial_two_sided


class TestKnownValues:
    def test_balanced_outcome_is_not_significant(self):
        assert binomial_test(500, 1000) >= 0.97

    def test_perfect_sweep(self):
        # Two-sided: both all-wins and all-losses tails, 2 * 0.5^1000.
        p = binomial_test(1000, 1000)
        assert p == pytest.approx(1.87e-301, rel=1e-2)

    def test_565_wins_is_strongly_significant(self):
        p = binomial_test(565, 1000)
        assert 4.14e-05 * 0.75 < p < 4.14e-05 * 1.25

    def test_small_case_by_hand(self):
        # 5 wins out of 6 at p0=0.5: P(k in {0,1,5,6}) = (1+6+6+1)/64.
        assert binomial_test(5, 6) == pytest.approx(14 / 64, rel=1e-12)

    def test_most_likely_count_gives_p_one(self):
        assert binomial_test(5, 10) == pytest.approx(1.0)

    def test_zero_games_is_vacuously_insignificant(self):
        assert binomial_test(0, 0) == 1.0


class TestProperties:
    def test_symmetry_about_the_middle(self):
        for n, k in [(10, 2), (100, 63), (1000, 565), (7, 0)]:
            assert binomial_test(k, n) == pytest.approx(
                binomial_test(n - k, n), rel=1e-9
            )

    def test_more_extreme_counts_are_more_significant(self):
        values = [binomial_test(k, 100) for k in range(50, 101, 10)]
        assert values == sorted(values, reverse=True)

    def test_never_exceeds_one(self):
        for k in range(0, 51, 5):
            assert binomial_test(k, 50) <= 1.0


class TestOracleAgreement:
    @pytest.mark.parametrize("n", [1, 2, 5, 12, 30])
    def test_exhaustive_small_cases(self, n):
        for k in range(n + 1):
            exact = exact_binomial_two_sided(k, n, Fraction(1, 2))
            assert binomial_test(k, n) == pytest.approx(
                float(exact), rel=1e-9
            )

    def test_reference_case_to_six_significant_digits(self):
        exact = float(exact_binomial_two_sided(565, 1000, Fraction(1, 2)))
        assert binomial_test(565, 1000) == pytest.approx(exact, rel=1e-6)

    def test_biased_null_hypothesis(self):
        for k in (0, 2, 3, 7, 10):
            exact = exact_binomial_two_sided(k, 10, Fraction(3, 10))
            assert binomial_test(k, 10, p0=0.3) == pytest.approx(
                float(exact), rel=1e-9
            )


class TestValidation:
    def test_wins_above_games(self):
        with pytest.raises(ValueError):
            binomial_test(11, 10)

    def test_negative_wins(self):
        with pytest.raises(ValueError):
            binomial_test(-1, 10)

    def test_p0_bounds(self):
        with pytest.raises(ValueError):
            binomial_test(5, 10, p0=0.0)
        with pytest.raises(ValueError):
            binomial_test(5, 10, p0=1.0)

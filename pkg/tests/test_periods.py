import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from newspred.errors import (
    AlignmentError,
    DegenerateSeriesError,
    FrequencyMismatchError,
    InsufficientDataError,
)
from newspred.periods import (
    Frequency,
    Period,
    PeriodSeries,
    align,
    format_period,
    horizon_average,
    parse_period,
    period_of_date,
    standardize,
    trailing_mean_dummy,
)

from conftest import monthly


finite_floats = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


class TestPeriodLabels:
    def test_monthly_roundtrip(self):
        p = parse_period("1996-01")
        assert p.frequency is Frequency.MONTHLY
        assert p.label == "1996-01"
        assert p.shift(11).label == "1996-12"
        assert p.shift(12).label == "1997-01"

    def test_quarterly_roundtrip(self):
        p = parse_period("2005Q4")
        assert p.shift(1).label == "2006Q1"

    def test_weekly_roundtrip(self):
        p = parse_period("2021-W40")
        assert p.frequency is Frequency.WEEKLY
        assert p.shift(1).label == "2021-W41"

    def test_date_buckets(self):
        from datetime import date

        assert period_of_date(date(1996, 1, 31), Frequency.MONTHLY).label == "1996-01"
        assert period_of_date(date(1996, 4, 1), Frequency.QUARTERLY).label == "1996Q2"

    def test_bad_label(self):
        with pytest.raises(ValueError):
            parse_period("1996/01")

    @given(st.integers(min_value=1900 * 12, max_value=2100 * 12))
    def test_monthly_ordinal_roundtrip(self, o):
        assert parse_period(format_period(Frequency.MONTHLY, o)).ordinal == o

    @given(st.integers(min_value=100000, max_value=110000))
    def test_weekly_ordinal_roundtrip(self, o):
        assert parse_period(format_period(Frequency.WEEKLY, o)).ordinal == o


class TestAlign:
    def test_interval_intersection(self):
        a = monthly(np.arange(324.0), "1996-01")   # through 2022-12
        b = monthly(np.arange(306.0), "1998-01")   # through 2023-06
        aa, bb = align(a, b)
        assert aa.start.label == "1998-01" and aa.end.label == "2022-12"
        assert aa.index == bb.index

    def test_identity_when_already_aligned(self):
        a = monthly([1.0, 2.0, 3.0])
        b = monthly([4.0, 5.0, 6.0])
        aa, bb = align(a, b)
        assert aa is a and bb is b

    def test_disjoint_ranges(self):
        a = monthly([1.0, 2.0], "1996-01")
        b = monthly([1.0, 2.0], "2000-01")
        with pytest.raises(AlignmentError):
            align(a, b)

    def test_mixed_frequencies(self):
        a = monthly([1.0, 2.0])
        b = PeriodSeries.from_start("1996Q1", [1.0, 2.0])
        with pytest.raises(FrequencyMismatchError):
            align(a, b)

    def test_idempotence(self):
        a = monthly(np.arange(10.0), "1996-01")
        b = monthly(np.arange(8.0), "1996-03")
        once = align(a, b)
        twice = align(*once)
        assert [s is t for s, t in zip(once, twice)] == [True, True]


class TestHorizonAverage:
    def test_direct_arithmetic(self):
        out = horizon_average(monthly([1.0, 2.0, 3.0, 4.0]), 2)
        np.testing.assert_allclose(out.values, [2.5, 3.5])
        assert out.start.label == "1996-01" and len(out) == 2

    def test_h1_is_one_period_lead(self):
        r = monthly([0.3, -0.1, 0.7, 0.2])
        out = horizon_average(r, 1)
        np.testing.assert_array_equal(out.values, r.values[1:])

    def test_constant_series(self):
        out = horizon_average(monthly([5.0] * 8), 3)
        np.testing.assert_allclose(out.values, 5.0)

    def test_insufficient_data(self):
        with pytest.raises(InsufficientDataError):
            horizon_average(monthly([1.0, 2.0]), 2)

    @given(
        st.lists(finite_floats, min_size=4, max_size=30),
        st.integers(min_value=1, max_value=3),
        st.floats(min_value=-10, max_value=10),
        st.floats(min_value=-10, max_value=10),
    )
    def test_commutes_with_affine_maps(self, vals, h, a, b):
        r = monthly(vals)
        lhs = horizon_average(r.replace_values(a * r.values + b), h)
        rhs = horizon_average(r, h)
        np.testing.assert_allclose(lhs.values, a * rhs.values + b, atol=1e-8 * (1 + abs(a) + abs(b)))


class TestStandardize:
    def test_two_point(self):
        out = standardize(monthly([1.0, 3.0]))
        np.testing.assert_allclose(out.values, [-0.70710678, 0.70710678], atol=1e-8)

    def test_idempotent(self):
        x = standardize(monthly([0.1, 4.0, -2.0, 1.3, 0.9]))
        again = standardize(x)
        np.testing.assert_allclose(again.values, x.values, atol=1e-12)

    def test_zero_variance(self):
        with pytest.raises(DegenerateSeriesError):
            standardize(monthly([5.0, 5.0, 5.0]))

    def test_moments(self):
        out = standardize(monthly([3.0, 1.0, 4.0, 1.0, 5.0, 9.0]))
        assert out.values.mean() == pytest.approx(0.0, abs=1e-12)
        assert out.values.std(ddof=1) == pytest.approx(1.0, abs=1e-12)


class TestTrailingMeanDummy:
    def test_direct_comparison(self):
        d = trailing_mean_dummy(monthly([1.0, 2.0, 3.0, 4.0]), 2)
        np.testing.assert_array_equal(d.values, [0, 1, 1, 1])

    def test_constant_series_all_low(self):
        d = trailing_mean_dummy(monthly([2.0] * 6), 3)
        np.testing.assert_array_equal(d.values, np.zeros(6))

    def test_expanding_fallback_alternating(self):
        # hand oracle: means of all prior obs are 0, 5, 10/3 -> [0,1,0,1]
        d = trailing_mean_dummy(monthly([0.0, 10.0, 0.0, 10.0]), 60)
        np.testing.assert_array_equal(d.values, [0, 1, 0, 1])

    def test_first_observation_is_low(self):
        d = trailing_mean_dummy(monthly([100.0, 1.0, 2.0]), 5)
        assert d.values[0] == 0

    @given(st.lists(finite_floats, min_size=2, max_size=40), st.integers(min_value=1, max_value=70))
    def test_high_plus_low_is_one(self, vals, window):
        d = trailing_mean_dummy(monthly(vals), window)
        np.testing.assert_array_equal(d.high_series().values + d.low_series().values, np.ones(len(vals)))


class TestSeriesContainer:
    def test_values_are_readonly(self):
        s = monthly([1.0, 2.0])
        with pytest.raises(ValueError):
            s.values[0] = 9.0

    def test_gapfree_enforced(self):
        with pytest.raises(AlignmentError):
            PeriodSeries.from_labels(["1996-01", "1996-03"], [1.0, 2.0])

    def test_window(self):
        s = monthly(np.arange(6.0), "1996-01")
        w = s.window("1996-02", "1996-04")
        assert w.start.label == "1996-02" and list(w.values) == [1.0, 2.0, 3.0]

import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tailmean import DataError, SortedSample, empirical_quantile, lower_tail_mean, order_stat, tail_view
from tailmean.empirical import read_value_text

E_SAMPLE = SortedSample.from_values([1.0, math.e, math.e ** 2, math.e ** 3])

positive_samples = st.lists(
    st.floats(min_value=1e-6, max_value=1e6, allow_nan=False, allow_infinity=False),
    min_size=2, max_size=60,
)


class TestSortedSample:
    def test_sorts_input(self):
        s = SortedSample.from_values([3.0, 1.0, 2.0])
        assert list(s.values) == [1.0, 2.0, 3.0]
        assert s.n == 3

    def test_rejects_nonpositive(self):
        with pytest.raises(DataError):
            SortedSample.from_values([1.0, 0.0, 2.0])
        with pytest.raises(DataError):
            SortedSample.from_values([-1.0, 2.0])

    def test_rejects_unsorted_direct(self):
        with pytest.raises(ValueError):
            SortedSample(np.array([2.0, 1.0]))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            SortedSample.from_values([])

    def test_values_immutable(self):
        s = SortedSample.from_values([1.0, 2.0])
        with pytest.raises(ValueError):
            s.values[0] = 5.0


class TestCsvIngestion:
    def test_plain_column(self):
        vals = read_value_text("1.5\n2.25\n3e-1\n", require_positive=True)
        assert list(vals) == [1.5, 2.25, 0.3]

    def test_header_accepted(self):
        vals = read_value_text("value\n1\n2\n")
        assert list(vals) == [1.0, 2.0]

    def test_malformed_line_names_lineno(self):
        with pytest.raises(DataError, match="line 3"):
            read_value_text("1\n2\nx\n4\n")

    def test_nonpositive_named(self):
        with pytest.raises(DataError, match="line 2"):
            read_value_text("1\n-3\n", require_positive=True)

    def test_nonpositive_allowed_without_flag(self):
        vals = read_value_text("1\n-3\n0\n")
        assert list(vals) == [1.0, -3.0, 0.0]

    def test_header_only_is_error(self):
        with pytest.raises(DataError):
            read_value_text("value\n")

    def test_empty_is_error(self):
        with pytest.raises(DataError):
            read_value_text("")

    def test_from_csv_file_object(self):
        s = SortedSample.from_csv(io.StringIO("value\n2\n1\n"))
        assert list(s.values) == [1.0, 2.0]


class TestOrderStat:
    def test_extremes_and_middle(self):
        assert order_stat(E_SAMPLE, 4) == math.e ** 3
        assert order_stat(E_SAMPLE, 1) == 1.0
        assert order_stat(E_SAMPLE, 3) == math.e ** 2

    @pytest.mark.parametrize("i", [0, 5, -1])
    def test_out_of_range(self, i):
        with pytest.raises(IndexError):
            order_stat(E_SAMPLE, i)


class TestEmpiricalQuantile:
    SAMPLE = SortedSample.from_values([1.0, 2.0, 3.0, 4.0])

    def test_half(self):
        # ceil(4 * 0.5) = 2 from the inf definition
        assert empirical_quantile(self.SAMPLE, 0.5) == 2.0

    def test_one_gives_max(self):
        assert empirical_quantile(self.SAMPLE, 1.0) == 4.0

    def test_jump_just_after_quarter(self):
        assert empirical_quantile(self.SAMPLE, 0.25 + 1e-9) == 2.0
        assert empirical_quantile(self.SAMPLE, 0.25) == 1.0

    def test_exact_grid_identity(self):
        for n in (3, 7, 10, 13, 97):
            s = SortedSample.from_values(np.arange(1.0, n + 1.0))
            for i in range(1, n + 1):
                assert empirical_quantile(s, i / n) == float(i)

    def test_nondecreasing_in_p(self):
        ps = np.linspace(0.001, 1.0, 157)
        qs = [empirical_quantile(self.SAMPLE, float(p)) for p in ps]
        assert all(b >= a for a, b in zip(qs, qs[1:]))

    @pytest.mark.parametrize("p", [0.0, -0.5, 1.0000001])
    def test_domain(self, p):
        with pytest.raises(ValueError):
            empirical_quantile(self.SAMPLE, p)


class TestTailView:
    def test_hand_log_spacings(self):
        tv = tail_view(E_SAMPLE, 3)
        assert tv.threshold == 1.0
        assert list(tv.log_spacings) == pytest.approx([3.0, 2.0, 1.0])
        assert tv.s1 == pytest.approx(2.0)

    def test_scale_invariance_exact_for_pow2(self):
        s = SortedSample.from_values([1.0, 1.2, 1.4, 1.6])
        scaled = SortedSample.from_values(s.values * 4.0)
        a, b = tail_view(s, 3), tail_view(scaled, 3)
        assert np.allclose(a.log_spacings, b.log_spacings, rtol=0, atol=1e-14)
        assert a.s1 == pytest.approx(b.s1, abs=1e-14)

    def test_ties_give_zero_spacings(self):
        s = SortedSample.from_values([1.0, 2.0, 2.0, 2.0])
        tv = tail_view(s, 2)
        assert list(tv.log_spacings) == [0.0, 0.0]
        assert tv.s1 == 0.0

    @pytest.mark.parametrize("k", [0, 4, 7])
    def test_k_range(self, k):
        with pytest.raises(ValueError):
            tail_view(E_SAMPLE, k)


class TestLowerTailMean:
    def test_only_minimum_remains(self):
        s = SortedSample.from_values([1.0, 1.2, 1.4, 1.6])
        assert lower_tail_mean(s, 3) == pytest.approx(0.25)

    def test_k_zero_is_sample_mean(self):
        s = SortedSample.from_values([1.0, 2.0, 3.0, 4.0])
        assert lower_tail_mean(s, 0) == pytest.approx(2.5)

    def test_hand_sum(self):
        s = SortedSample.from_values([1.0, 2.0, 3.0, 4.0])
        assert lower_tail_mean(s, 2) == pytest.approx(0.75)

    def test_k_out_of_range(self):
        s = SortedSample.from_values([1.0, 2.0])
        with pytest.raises(IndexError):
            lower_tail_mean(s, 2)


@settings(max_examples=40, deadline=None)
@given(positive_samples, st.data())
def test_partition_identity(values, data):
    # bulk mean at k plus the top-k mass over n recovers the sample mean
    s = SortedSample.from_values(values)
    k = data.draw(st.integers(min_value=0, max_value=s.n - 1))
    top = s.values[s.n - k:].sum() / s.n if k else 0.0
    assert lower_tail_mean(s, k) + top == pytest.approx(s.values.mean(), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(positive_samples, st.integers(min_value=-30, max_value=30), st.data())
def test_tail_view_scale_invariant(values, exponent, data):
    s = SortedSample.from_values(values)
    k = data.draw(st.integers(min_value=1, max_value=s.n - 1))
    scaled = SortedSample.from_values(s.values * 2.0 ** exponent)
    assert np.allclose(tail_view(s, k).log_spacings,
                       tail_view(scaled, k).log_spacings, rtol=0, atol=1e-12)

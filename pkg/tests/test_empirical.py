import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import ndtr

from regimbalance.empirical import (
    EmpiricalCdf,
    Sample,
    build_histogram,
    density_at,
    ecdf_eval,
)


def count_le(values, x):
    return sum(1 for v in values if v <= x) / len(values)


def test_ecdf_examples():
    e = EmpiricalCdf.from_sample([1, 2, 3])
    assert ecdf_eval(e, 2) == pytest.approx(2 / 3)
    assert ecdf_eval(e, 0) == 0.0
    ties = EmpiricalCdf.from_sample([1, 1, 2])
    assert ecdf_eval(ties, 1) == pytest.approx(count_le([1, 1, 2], 1))
    assert ecdf_eval(ties, 1) == pytest.approx(2 / 3)


def test_ecdf_is_one_at_max_and_left_limit():
    e = EmpiricalCdf.from_sample([3.0, -1.0, 2.0])
    assert ecdf_eval(e, 3.0) == 1.0
    assert e.left(3.0) == pytest.approx(2 / 3)


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(-100, 100, allow_nan=False), min_size=1, max_size=40),
    st.floats(-120, 120, allow_nan=False),
)
def test_ecdf_matches_counting(values, x):
    assert ecdf_eval(EmpiricalCdf.from_sample(values), x) == pytest.approx(count_le(values, x))


def test_sample_keeps_original_order():
    s = Sample.from_values([3.0, 1.0, 2.0])
    np.testing.assert_array_equal(s.values, [1, 2, 3])
    np.testing.assert_array_equal(s.original(), [3, 1, 2])


def test_sample_rejects_non_finite():
    with pytest.raises(ValueError):
        Sample.from_values([1.0, math.nan])


def test_ecdf_converges_dkw():
    hits = 0
    trials = 100
    n = 10_000
    i = np.arange(1, n + 1)
    for seed in range(trials):
        x = np.sort(np.random.default_rng(seed).standard_normal(n))
        F = ndtr(x)
        sup = max(np.max(np.abs(i / n - F)), np.max(np.abs((i - 1) / n - F)))
        hits += sup < 0.03
    assert hits >= 0.99 * trials


# -- histograms -------------------------------------------------------------------


def assign_oracle(values, edges):
    counts = [0] * (len(edges) - 1)
    for v in values:
        for i in range(len(edges) - 1):
            last = i == len(edges) - 2
            if edges[i] <= v < edges[i + 1] or (last and v == edges[-1]):
                counts[i] += 1
                break
    return counts


def test_build_histogram_examples():
    h = build_histogram(Sample.from_values([0, 0.5, 1]), 2)
    assert h.counts.tolist() == assign_oracle([0, 0.5, 1], [0, 0.5, 1]) == [1, 2]
    assert build_histogram([0, 1], 1).counts.tolist() == [2]


def test_degenerate_sample_single_bin():
    h = build_histogram([5.0], 7)
    assert h.counts.tolist() == [1]
    np.testing.assert_allclose(h.bin_edges, [4.5, 5.5])


def test_explicit_range_excludes_outside_values():
    h = build_histogram([-1, 0.2, 0.7, 3], 2, (0, 1))
    assert h.counts.tolist() == [1, 1]
    assert h.n == 4 and h.n_outside == 2


def test_bad_histogram_arguments():
    with pytest.raises(ValueError):
        build_histogram([1, 2], 0)
    with pytest.raises(ValueError):
        build_histogram([1, 2], 3, (1, 1))


def test_density_examples():
    h = build_histogram(np.r_[np.full(5, 0.25), np.full(5, 0.75)], 2, (0, 1))
    assert h.counts.tolist() == [5, 5]
    for y in (0.0, 0.3, 0.5, 0.99, 1.0):
        assert density_at(h, y) == pytest.approx(5 / (10 * 0.5))
    assert density_at(h, 1.5) == 0.0
    assert density_at(h, -0.1) == 0.0
    concentrated = build_histogram([0.1, 0.2, 0.3], 2, (0, 1))
    assert density_at(concentrated, 0.2) == pytest.approx(3 / (3 * 0.5)) == pytest.approx(2.0)


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(-50, 50, allow_nan=False), min_size=1, max_size=60),
    st.integers(1, 25),
    st.one_of(st.none(), st.tuples(st.floats(-60, 0), st.floats(0.5, 60))),
)
def test_histogram_mass_conservation(values, n_bins, rng):
    h = build_histogram(values, n_bins, rng)
    in_range = h.counts.sum() / h.n
    assert np.sum(h.densities * h.widths) == pytest.approx(in_range, abs=1e-12)
    assert h.counts.sum() + h.n_outside == len(values)
    mid = density_at(h, h.centers)
    assert np.sum(mid * h.widths) == pytest.approx(in_range, abs=1e-12)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ftbessel.errors import ParameterOutOfRange
from ftbessel.specfun import bessel_cutoff, bessel_i, bessel_i_row, bessel_j_row, bessel_tail_bound


def _series(n, x, sign, terms=80):
    """Power series sum_j sign**j (x/2)**(2j+n) / (j! (j+n)!) with terms built by recurrence."""
    term = math.exp(n * math.log(x / 2) - math.lgamma(n + 1))
    out = [term]
    for j in range(1, terms):
        term *= sign * (x / 2) ** 2 / (j * (j + n))
        out.append(term)
    return math.fsum(out)


def series_j(n, x):
    """Power series oracle for J_n(x), n >= 0."""
    return _series(n, x, -1.0)


def series_i(n, x):
    return _series(n, x, 1.0)


# reference values frozen from a 40-digit evaluation
J_REF = {
    (2.0, 0): 0.22389077914123566805,
    (2.0, 1): 0.5767248077568733872,
    (2.0, 5): 0.0070396297558716854842,
    (2.0, 20): 3.9189728050907538391e-19,
    (50.0, 0): 0.055812327669251815005,
    (50.0, 49): 0.15119514252147223808,
    (50.0, 100): 1.115927369083809278e-21,
    (0.1, 3): 0.000020820315754756264895,
}


@pytest.mark.parametrize("key", sorted(J_REF))
def test_j_row_matches_reference(key):
    x, n = key
    row = bessel_j_row(x, n + 2)
    assert row[n] == pytest.approx(J_REF[key], rel=1e-13, abs=1e-16)


def test_j0_j1_at_two_match_power_series():
    row = bessel_j_row(2.0, 1)
    assert row[0] == pytest.approx(series_j(0, 2.0), abs=1e-15)
    assert row[1] == pytest.approx(series_j(1, 2.0), abs=1e-15)
    assert row[0] == pytest.approx(0.223891, abs=1e-6)
    assert row[1] == pytest.approx(0.576725, abs=1e-6)


def test_negative_orders_are_exactly_symmetric():
    row = bessel_j_row(3.7, 12)
    for n in range(13):
        assert row[-n] == (-1) ** n * row[n]
    assert row[-3] == -row[3]


def test_take_is_zero_beyond_row():
    row = bessel_j_row(1.0, 4)
    assert list(row.take([5, -7])) == [0.0, 0.0]


@given(st.floats(min_value=0.05, max_value=60.0), st.integers(min_value=0, max_value=40))
@settings(max_examples=60, deadline=None)
def test_bound_and_neumann_sum(x, n_max):
    row = bessel_j_row(x, n_max)
    n = np.arange(n_max + 1)
    vals = row.take(n)
    bounds = np.array([min(1.0, bessel_tail_bound(x, int(k))) for k in n])
    assert np.all(np.abs(vals) <= bounds + 1e-14)
    full = bessel_j_row(x, int(x) + 60)
    even = full.take(np.arange(2, int(x) + 60, 2))
    assert full[0] + 2 * even.sum() == pytest.approx(1.0, abs=1e-13)


@given(st.floats(min_value=0.05, max_value=40.0))
@settings(max_examples=40, deadline=None)
def test_sum_of_squares_is_one(x):
    row = bessel_j_row(x, int(x) + 60)
    assert float(np.sum(row.values**2)) == pytest.approx(1.0, abs=1e-13)


def test_tail_bound_values():
    assert bessel_tail_bound(2.0, 0) == 1.0
    assert bessel_tail_bound(2.0, 10) == pytest.approx(1 / math.factorial(10), rel=1e-14)
    row = bessel_j_row(2.0, 50)
    for k in range(51):
        assert bessel_tail_bound(2.0, k) >= abs(series_j(k, 2.0))
        assert bessel_tail_bound(2.0, k) >= abs(row[k])


def test_tail_bound_rejects_bad_input():
    with pytest.raises(ParameterOutOfRange):
        bessel_tail_bound(0.0, 1)
    with pytest.raises(ParameterOutOfRange):
        bessel_tail_bound(1.0, -1)


def test_cutoff_is_minimal():
    k = bessel_cutoff(4.0, 1e-12)
    assert bessel_tail_bound(4.0, k) <= 1e-12
    assert bessel_tail_bound(4.0, k - 1) > 1e-12


def test_modified_bessel_values():
    assert bessel_i(0, 2.0) == pytest.approx(2.2795853023360673, rel=1e-14)
    assert bessel_i(1, 2.0) == pytest.approx(1.590636854637329, rel=1e-14)
    assert bessel_i(3, 6.0) == pytest.approx(30.150540299463862724, rel=1e-13)
    assert bessel_i(10, 1.0) == pytest.approx(2.7529480398368736252e-10, rel=1e-13)
    row = bessel_i_row(2.0, 6)
    for n in range(7):
        assert row[n] == pytest.approx(series_i(n, 2.0), rel=1e-14)


def test_modified_bessel_vanishes_at_small_argument():
    assert bessel_i(5, 1e-3) < 1e-17
    assert bessel_i(0, 1e-3) == pytest.approx(1.0, abs=1e-6)

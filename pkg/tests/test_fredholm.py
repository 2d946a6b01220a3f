import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ftbessel import DegenerateDeterminantError, HalfInt, SigmaProfile, UnsupportedPointError
from ftbessel.fredholm import (
    gap_probability,
    q_zero,
    q_zero_detail,
    ratio_identity_residual,
    toeplitz_q,
)
from ftbessel.specfun import bessel_i

I0_2 = 2.2795853023360673
I1_2 = 1.590636854637329


@pytest.mark.parametrize("L", [0.5, 1.0, 2.0])
def test_closed_forms_for_indicator(indicator, L):
    assert gap_probability(L, "-1/2", indicator).q == pytest.approx(math.exp(-L * L), abs=1e-10)
    assert gap_probability(L, "1/2", indicator).q == pytest.approx(math.exp(-L * L) * bessel_i(0, 2 * L), abs=1e-10)


def test_indicator_values_at_one(indicator):
    assert gap_probability(1.0, "-1/2", indicator).q == pytest.approx(0.367879, abs=1e-6)
    assert gap_probability(1.0, "1/2", indicator).q == pytest.approx(math.exp(-1) * I0_2, abs=1e-14)
    # 2x2 Toeplitz determinant by hand
    assert gap_probability(1.0, "3/2", indicator).q == pytest.approx(math.exp(-1) * (I0_2**2 - I1_2**2), abs=1e-14)


def test_fermi_reference_values(fermi):
    # 30-digit determinants on windows far past the certified truncation
    assert gap_probability(1.0, "1/2", fermi).q == pytest.approx(0.42903938172610575277, abs=1e-13)
    assert gap_probability(2.0, "5/2", fermi).q == pytest.approx(0.58282508661958175303, abs=1e-13)


def test_zero_profile_gives_one(zero):
    for L in (0.3, 4.0):
        r = gap_probability(L, "-7/2", zero)
        assert r.q == 1.0 and r.trunc_err == 0.0


def test_below_support_is_reported_as_interval(indicator):
    r = gap_probability(1.0, "-3/2", indicator)
    assert r.below_floor
    assert r.interval == (0.0, r.floor)


@pytest.mark.parametrize("L", [0.5, 1.0, 2.0, 3.0])
def test_toeplitz_identity(indicator, L):
    for t in range(-1, 22, 2):
        s = HalfInt(t)
        assert abs(gap_probability(L, s, indicator).q - toeplitz_q(L, s)) < 1e-11


def test_toeplitz_rejects_negative_side():
    with pytest.raises(UnsupportedPointError):
        toeplitz_q(1.0, "-3/2")


@pytest.mark.parametrize("L", [0.5, 1.0, 2.0])
def test_tends_to_one_for_large_s(indicator, L):
    s = HalfInt(2 * (2 * math.ceil(2 * L) + 10) + 1)
    assert 1.0 - gap_probability(L, s, indicator).q < 1e-8


@given(st.sampled_from(["indicator", "fermi:0.5", "fermi:0.8"]),
       st.floats(min_value=0.1, max_value=2.5),
       st.integers(min_value=-4, max_value=8))
@settings(max_examples=30, deadline=None)
def test_monotone_in_s_and_bounded(sig, L, k):
    sigma = SigmaProfile.parse(sig)
    s = HalfInt(2 * k + 1)
    lo = gap_probability(L, s, sigma)
    hi = gap_probability(L, s + 1, sigma)
    assert 0.0 <= lo.q <= 1.0
    assert hi.q >= lo.q - lo.floor - hi.floor


@given(st.floats(min_value=0.1, max_value=2.0), st.integers(min_value=0, max_value=6))
@settings(max_examples=20, deadline=None)
def test_deterministic_and_widening_stable(L, k):
    from ftbessel.kernels import build_M

    sigma = SigmaProfile.fermi(0.5)
    s = HalfInt(2 * k + 1)
    a = gap_probability(L, s, sigma)
    assert gap_probability(L, s, sigma) == a
    km = build_M(s, L, sigma, widen=1.5)
    sign, logdet = np.linalg.slogdet(km.identity_minus)
    assert math.exp(logdet) == pytest.approx(a.q, abs=a.floor + 1e-13)


def test_small_l_limit_values(indicator, fermi, zero):
    assert q_zero("-1/2", indicator) == 1.0
    assert q_zero("-3/2", indicator) == 0.0
    assert q_zero_detail("-3/2", indicator).zero_factor == HalfInt(1)
    assert q_zero("1/2", fermi) == pytest.approx(0.5287, abs=1e-4)
    # independent direct product far past the tail
    direct = math.prod(1.0 - 1.0 / (1.0 + 0.5 ** (-i - 0.5)) for i in range(1, 400))
    assert q_zero("1/2", fermi) == pytest.approx(direct, rel=1e-14)
    assert q_zero("5/2", zero) == 1.0


def test_ratio_identity(indicator, fermi, zero):
    assert ratio_identity_residual(1.0, "1/2", indicator, 1e-12) < 1e-10
    assert ratio_identity_residual(1.0, "3/2", fermi, 1e-12) < 1e-10
    assert ratio_identity_residual(1.0, "1/2", zero) == 0.0


def test_ratio_identity_refuses_vanishing_determinant(indicator):
    with pytest.raises(DegenerateDeterminantError):
        ratio_identity_residual(1.0, "-3/2", indicator)


def test_csv_row_columns(fermi):
    row = gap_probability(1.0, "1/2", fermi).csv_row()
    assert list(row) == ["sigma_id", "L", "s", "q", "trunc_err", "window_lo", "window_hi"]
    assert row["sigma_id"] == "fermi:0.5"

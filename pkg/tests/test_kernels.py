import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ftbessel import HalfInt, ResourceLimitError, SigmaProfile
from ftbessel.kernels import (
    build_M,
    kernel_bessel,
    kernel_bessel_block,
    kernel_bessel_complement,
    kernel_finite_temp,
)
from ftbessel.specfun import bessel_j_row

halfints = st.integers(min_value=-30, max_value=30).map(lambda k: HalfInt(2 * k + 1))
Ls = st.floats(min_value=0.05, max_value=6.0)

# 40-digit evaluations of the defining series
K_REF = {
    ("1/2", "1/2", 1.0): 0.47493645950776521575,
    ("1/2", "3/2", 1.0): 0.25361521830790639562,
    ("-5/2", "7/2", 2.0): 0.092523748468162444758,
    ("-1/2", "-1/2", 0.7): 0.66066236374727470542,
}


@pytest.mark.parametrize("key", sorted(K_REF))
def test_bessel_kernel_reference(key):
    a, b, L = key
    assert kernel_bessel(a, b, L) == pytest.approx(K_REF[key], abs=1e-15)


def test_diagonal_from_orthogonality():
    # sum_k J_k(2)^2 = 1 and symmetry give K(1/2, 1/2) = (1 - J_0(2)^2) / 2
    j0 = 0.22389077914123566805
    assert kernel_bessel("1/2", "1/2", 1.0) == pytest.approx((1 - j0**2) / 2, abs=1e-15)
    assert kernel_bessel("1/2", "1/2", 1.0) == pytest.approx(0.474936, abs=1e-6)


def test_far_left_diagonal_tends_to_one():
    assert abs(kernel_bessel("-41/2", "-41/2", 1.0) - 1.0) < 1e-6
    assert kernel_bessel_complement("-41/2", 1.0) > 0.0


@given(halfints, halfints, Ls)
@settings(max_examples=80, deadline=None)
def test_symmetry_and_closed_form(a, b, L):
    assert kernel_bessel(a, b, L) == pytest.approx(kernel_bessel(b, a, L), abs=1e-14)


@given(halfints, Ls)
@settings(max_examples=60, deadline=None)
def test_diagonal_in_unit_interval(a, L):
    d = kernel_bessel(a, a, L)
    c = kernel_bessel_complement(a, L)
    assert -1e-15 <= d <= 1 + 1e-15
    assert d + c == pytest.approx(1.0, abs=1e-14)


def test_block_matches_pointwise():
    pts = np.arange(-6, 7) + 0.5
    block = kernel_bessel_block(1.3, pts, pts)
    for i, a in enumerate(pts):
        for j, b in enumerate(pts):
            assert block[i, j] == pytest.approx(kernel_bessel(a, b, 1.3), abs=1e-14)


def test_finite_temp_indicator_is_bessel_kernel(indicator):
    for a, b in [("1/2", "1/2"), ("-3/2", "5/2"), ("7/2", "9/2")]:
        assert kernel_finite_temp(a, b, 1.0, indicator) == pytest.approx(kernel_bessel(a, b, 1.0), abs=2e-15)


def test_finite_temp_zero(zero):
    assert kernel_finite_temp("1/2", "3/2", 1.0, zero) == 0.0


def test_finite_temp_fermi_brute_force(fermi):
    # sum over |l| <= 60 of sigma(l) J_{l+1/2}(2)^2 at 30 digits
    assert kernel_finite_temp("1/2", "1/2", 1.0, fermi) == pytest.approx(0.42979716170644192258, abs=1e-15)
    row = bessel_j_row(2.0, 70)
    ls = np.arange(-60, 61) + 0.5
    direct = float(np.sum(fermi.values(ls) * row.take((ls + 0.5).astype(int)) ** 2))
    assert kernel_finite_temp("1/2", "1/2", 1.0, fermi) == pytest.approx(direct, abs=1e-15)


def test_window_starts_after_indicator_support(indicator):
    km = build_M("-1/2", 1.0, indicator)
    assert km.lo == HalfInt(1)
    assert km.trunc_err < 1e-15


def test_zero_profile_gives_empty_window(zero):
    km = build_M("1/2", 1.0, zero)
    assert km.size == 0 and km.trunc_err == 0.0


def test_window_spectrum_in_unit_interval(fermi):
    km = build_M("1/2", 1.0, fermi, 1e-12)
    ev = np.linalg.eigvalsh(km.entries)
    assert ev.min() >= -1e-10 and ev.max() <= 1 + 1e-10
    assert km.trunc_err <= 1e-12


@given(st.sampled_from(["indicator", "fermi:0.5", "fermi:0.2"]), Ls,
       st.integers(min_value=-5, max_value=10).map(lambda k: HalfInt(2 * k + 1)))
@settings(max_examples=30, deadline=None)
def test_window_is_symmetric_with_unit_diagonal(sig, L, s):
    km = build_M(s, L, SigmaProfile.parse(sig))
    if km.size == 0:
        return
    assert np.allclose(km.entries, km.entries.T, atol=1e-15)
    d = np.diag(km.entries)
    assert np.all(d >= -1e-15) and np.all(d <= 1 + 1e-15)
    assert np.allclose(km.one_minus_diag + d, 1.0, atol=1e-14)


def test_resource_cap(fermi):
    with pytest.raises(ResourceLimitError):
        build_M("1/2", 5000.0, fermi)

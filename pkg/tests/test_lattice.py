import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ftbessel import HalfInt, ParameterOutOfRange, SigmaProfile, as_halfint, halfint_range

halfints = st.integers(min_value=-2000, max_value=2000).map(lambda k: HalfInt(2 * k + 1))


def test_parse_forms():
    assert HalfInt.parse("-1/2") == HalfInt(-1)
    assert HalfInt.parse("21/2") == HalfInt(21)
    assert HalfInt.parse("1.5") == HalfInt(3)
    assert as_halfint(Fraction(-3, 2)) == HalfInt(-3)
    assert as_halfint(2.5) == HalfInt(5)


@pytest.mark.parametrize("bad", ["1/3", "2/2", "1.0", "0"])
def test_parse_rejects_non_lattice(bad):
    with pytest.raises(ParameterOutOfRange):
        HalfInt.parse(bad)


def test_even_doubling_rejected():
    with pytest.raises(ParameterOutOfRange):
        HalfInt(4)


@given(halfints, st.integers(min_value=-50, max_value=50))
def test_arithmetic(a, k):
    assert float(a + k) == float(a) + k
    assert float(a - k) == float(a) - k
    assert (a + k) - a == k
    assert HalfInt.parse(str(a)) == a
    assert -(-a) == a
    assert a.upper - a.lower == 1
    assert a.lower + 0.5 == float(a)


@given(st.floats(min_value=-1e4, max_value=1e4, allow_nan=False))
def test_nearest_within_half(x):
    h = HalfInt.nearest(x)
    assert abs(float(h) - x) <= 0.5


def test_range_is_inclusive():
    r = halfint_range("-1/2", "21/2")
    assert len(r) == 12 and r[0] == HalfInt(-1) and r[-1] == HalfInt(21)


def test_indicator_values():
    s = SigmaProfile.indicator()
    assert s(0.5) == 1.0 and s(-0.5) == 0.0
    assert s.left_support() == 0.5
    assert s.tail_bound(0.5) == 0.0


def test_fermi_values_and_complement():
    s = SigmaProfile.fermi(0.5)
    assert s(-0.5) == pytest.approx(1 / (1 + math.sqrt(2)), rel=1e-15)
    assert s(-1.5) == pytest.approx(1 / (1 + 2 * math.sqrt(2)), rel=1e-15)
    ls = np.arange(-80, 81) + 0.5
    assert np.allclose(s.values(ls) + s.one_minus(ls), 1.0, atol=1e-15)
    # the complement stays accurate where sigma is close to 1
    assert s.one_minus(np.array([60.5]))[0] == pytest.approx(0.5**60.5 / (1 + 0.5**60.5), rel=1e-14)


@given(st.floats(min_value=0.05, max_value=0.95), st.floats(min_value=0.0, max_value=60.0))
@settings(max_examples=60)
def test_fermi_tail_bound_is_certified(u, T):
    s = SigmaProfile.fermi(u)
    m = math.ceil(T - 0.5) + 0.5
    direct = math.fsum(float(s(-(m + k))) for k in range(2000))
    assert s.tail_bound(T) >= direct * (1 - 1e-12)


@given(st.floats(min_value=0.05, max_value=0.95), st.sampled_from([1e-6, 1e-10, 1e-15]))
@settings(max_examples=40)
def test_left_cut_meets_tolerance(u, tol):
    s = SigmaProfile.fermi(u)
    T = s.left_cut(tol)
    assert s.tail_bound(T) <= tol


def test_tail_bound_decreases_to_zero():
    s = SigmaProfile.fermi(0.7)
    vals = [s.tail_bound(T) for T in (1.0, 10.0, 100.0, 1000.0)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-100


def test_table_profile_and_geometric_tail():
    t = SigmaProfile.table({"-1/2": 0.4, "1/2": 0.8}, left_tail="geometric", ratio=0.5, right_value=1.0)
    assert t(-2.5) == pytest.approx(0.1)
    assert t(5.5) == 1.0
    direct = sum(t(-(3.5 + k)) for k in range(200))
    assert t.tail_bound(3.5) >= direct - 1e-15


def test_zero_profile():
    z = SigmaProfile.zero()
    assert z.is_zero
    assert z(-3.5) == 0.0 and z(7.5) == 0.0
    assert z.sigma_id == "zero"


@pytest.mark.parametrize("sigma", [SigmaProfile.indicator(), SigmaProfile.fermi(0.25),
                                   SigmaProfile.table({"1/2": 0.5}, left_tail="zero", right_value=0.9)])
def test_json_round_trip(sigma):
    back = SigmaProfile.from_json(json.dumps(sigma.to_json()))
    assert back == sigma
    assert back.sigma_id == sigma.sigma_id


def test_parse_shorthand():
    assert SigmaProfile.parse("fermi:0.5") == SigmaProfile.fermi(0.5)
    assert SigmaProfile.parse("indicator") == SigmaProfile.indicator()
    with pytest.raises(ParameterOutOfRange):
        SigmaProfile.parse("bogus")


def test_table_requires_declared_tail():
    with pytest.raises(ParameterOutOfRange):
        SigmaProfile.from_json({"kind": "table", "values": {"1/2": 0.3}})


def test_table_id_is_stable():
    t = SigmaProfile.table({"1/2": 0.3, "3/2": 0.9}, left_tail="geometric", ratio=0.5)
    assert t.sigma_id == "table:19b4ccc3"

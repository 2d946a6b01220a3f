import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ftbessel import ParameterOutOfRange, ResourceLimitError, SigmaProfile
from ftbessel.fredholm import gap_probability
from ftbessel.plancherel import (
    Partition,
    estimate_many,
    exact_q_by_enumeration,
    multiplicative_statistic,
    multiplicative_statistic_mc,
    plancherel_probability,
    rsk_shape,
    sample_partitions,
    sample_plancherel,
)


def longest_increasing(word):
    best = []
    for i, x in enumerate(word):
        best.append(1 + max((best[j] for j in range(i) if word[j] < x), default=0))
    return max(best, default=0)


@given(st.permutations(list(range(7))))
def test_rsk_first_row_is_longest_increasing_subsequence(perm):
    lam = rsk_shape(perm)
    assert lam.weight == 7
    assert lam.largest == longest_increasing(perm)
    # the number of rows is the longest decreasing subsequence
    assert len(lam) == longest_increasing([-x for x in perm])


def test_rsk_shape_law_at_three():
    rng = np.random.default_rng(99)
    n = 60_000
    counts = Counter(rsk_shape(rng.permutation(3).tolist()).parts for _ in range(n))
    for shape, p in {(3,): 1 / 6, (2, 1): 4 / 6, (1, 1, 1): 1 / 6}.items():
        sd = math.sqrt(p * (1 - p) / n)
        assert abs(counts[shape] / n - p) <= 3 * sd


def test_plancherel_weights_sum_to_one():
    from ftbessel.plancherel import _partitions

    for n in range(1, 9):
        assert sum(plancherel_probability(p) for p in _partitions(n)) == pytest.approx(1.0, abs=1e-13)
    assert plancherel_probability((2, 1)) == pytest.approx(4 / 6)


def test_empty_partition_frequency():
    lam = sample_partitions(1.0, 100_000, seed=5)
    freq = sum(1 for p in lam if p.weight == 0) / len(lam)
    p = math.exp(-1)
    assert abs(freq - p) <= 3 * math.sqrt(p * (1 - p) / len(lam))


def test_tiny_L_is_almost_always_empty():
    lam = sample_partitions(0.01, 100_000, seed=6)
    freq = sum(1 for p in lam if p.weight == 0) / len(lam)
    assert freq >= 0.9999 - 3 * math.sqrt(1e-4 / len(lam))


def test_mean_size_is_poisson_mean():
    w = np.array([p.weight for p in sample_partitions(2.0, 40_000, seed=8)])
    assert abs(w.mean() - 4.0) <= 3 * math.sqrt(4.0 / len(w))


def test_sampler_is_reproducible():
    assert sample_plancherel(1.5, 42) == sample_plancherel(1.5, 42)


def test_sampler_caps():
    with pytest.raises(ResourceLimitError):
        sample_plancherel(100.0, 1)
    with pytest.raises(ParameterOutOfRange):
        sample_plancherel(-1.0, 1)


def test_partition_validation():
    with pytest.raises(ParameterOutOfRange):
        Partition((1, 2))


def test_statistic_for_indicator_is_cdf_of_first_row(indicator):
    lam = Partition((3, 1))
    assert multiplicative_statistic(lam, "5/2", indicator) == 1.0
    assert multiplicative_statistic(lam, "3/2", indicator) == 0.0


def test_zero_profile_statistic(zero):
    est = multiplicative_statistic_mc(zero, 1.0, "1/2", 100, seed=1)
    assert est.mean == 1.0 and est.std_err == 0.0


@pytest.mark.parametrize("sig,L,s", [("fermi:0.5", 1.0, "1/2"), ("fermi:0.3", 1.2, "-1/2"), ("indicator", 1.0, "3/2")])
def test_exact_enumeration_matches_determinant(sig, L, s):
    sigma = SigmaProfile.parse(sig)
    total, omitted = exact_q_by_enumeration(L, s, sigma, n_max=22)
    assert omitted < 1e-12
    assert total == pytest.approx(gap_probability(L, s, sigma).q, abs=1e-12)


def test_mc_matches_fredholm(fermi, indicator):
    est = multiplicative_statistic_mc(fermi, 2.0, "3/2", 100_000, seed=31)
    assert abs(est.z_score(gap_probability(2.0, "3/2", fermi).q)) <= 3
    est = multiplicative_statistic_mc(indicator, 1.0, "-1/2", 100_000, seed=32)
    assert abs(est.z_score(math.exp(-1))) <= 3


def test_streams_do_not_depend_on_call_order(fermi):
    a = estimate_many(fermi, 1.0, ["1/2", "3/2"], 2000, seed=3, n_streams=4)
    b = estimate_many(fermi, 1.0, ["3/2", "1/2"], 2000, seed=3, n_streams=4)
    assert a == b


def test_seed_reuse_is_rejected(fermi):
    used = set()
    estimate_many(fermi, 1.0, ["1/2"], 100, seed=11, used_seeds=used)
    with pytest.raises(ParameterOutOfRange):
        estimate_many(fermi, 1.0, ["1/2"], 100, seed=11, used_seeds=used)

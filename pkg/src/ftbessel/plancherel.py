"""Poissonised Plancherel sampling and the multiplicative-statistic estimator of ``Q``."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import ParameterOutOfRange, ResourceLimitError
from .fredholm import q_zero_tail
from .lattice import HalfInt, SigmaProfile, as_halfint

__all__ = [
    "Partition",
    "McEstimate",
    "MAX_MEAN_SIZE",
    "rsk_shape",
    "sample_plancherel",
    "sample_partitions",
    "multiplicative_statistic",
    "multiplicative_statistic_mc",
    "estimate_many",
    "exact_q_by_enumeration",
    "plancherel_probability",
]

#: Largest admissible ``L**2`` (mean partition size).
MAX_MEAN_SIZE = 400.0


@dataclass(frozen=True)
class Partition:
    """A weakly decreasing tuple of positive parts."""

    parts: tuple = ()

    def __post_init__(self):
        p = tuple(int(x) for x in self.parts)
        if any(x <= 0 for x in p) or any(p[i] < p[i + 1] for i in range(len(p) - 1)):
            raise ParameterOutOfRange(f"{p} is not a partition")
        object.__setattr__(self, "parts", p)

    @property
    def weight(self) -> int:
        return sum(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    @property
    def largest(self) -> int:
        return self.parts[0] if self.parts else 0


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo mean with its standard error (sample std / sqrt(n))."""

    mean: float
    std_err: float
    n_samples: int
    seed: int

    def z_score(self, reference: float) -> float:
        if self.std_err == 0.0:
            return 0.0 if self.mean == reference else math.inf
        return (self.mean - reference) / self.std_err


def rsk_shape(word: Sequence[int]) -> Partition:
    """Shape of the RSK insertion tableau of ``word`` (row insertion with bisection)."""
    rows: list[list[int]] = []
    for x in word:
        for row in rows:
            i = bisect.bisect_right(row, x)
            if i == len(row):
                row.append(x)
                break
            row[i], x = x, row[i]
        else:
            rows.append([x])
    return Partition(tuple(len(r) for r in rows))


def _check_L(L: float) -> float:
    L = float(L)
    if not L > 0:
        raise ParameterOutOfRange(f"L must be positive, got {L}")
    if L * L > MAX_MEAN_SIZE:
        raise ResourceLimitError(f"L**2 = {L * L} exceeds the sampler cap {MAX_MEAN_SIZE}")
    return L


def _draw(L: float, rng: np.random.Generator) -> Partition:
    n = int(rng.poisson(L * L))
    if n == 0:
        return Partition()
    return rsk_shape(rng.permutation(n).tolist())


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_plancherel(L: float, seed) -> Partition:
    """One partition from the Poissonised Plancherel measure with parameter ``L``.

    Draws ``n ~ Poisson(L**2)``, a uniform permutation of ``n`` letters, and
    returns its RSK shape.
    """
    return _draw(_check_L(L), _rng(seed))


def sample_partitions(L: float, n_samples: int, seed) -> list[Partition]:
    """``n_samples`` independent draws from one seeded stream."""
    L = _check_L(L)
    rng = _rng(seed)
    return [_draw(L, rng) for _ in range(int(n_samples))]


@lru_cache(maxsize=4096)
def _tail_factor(s_twice: int, sigma: SigmaProfile, start: int) -> float:
    return q_zero_tail(HalfInt(s_twice), sigma, start).value


def multiplicative_statistic(lam: Partition, s, sigma: SigmaProfile) -> float:
    """``prod_{i >= 1} (1 - sigma(lam_i - i - s))`` with ``lam_i = 0`` beyond the length.

    The factors with ``i > len(lam)`` do not depend on the sample and are
    supplied by a certified tail product.
    """
    s = as_halfint(s)
    if sigma.is_zero:
        return 1.0
    k = len(lam)
    head = 1.0
    if k:
        ls = np.array(lam.parts, dtype=float) - np.arange(1, k + 1) - float(s)
        head = float(np.prod(sigma.one_minus(ls)))
    return head * _tail_factor(s.twice, sigma, k + 1)


def multiplicative_statistic_mc(
    sigma: SigmaProfile, L: float, s, n_samples: int, seed: int
) -> McEstimate:
    """Monte Carlo estimate of ``Q_sigma(L, s)`` as a Plancherel expectation."""
    return estimate_many(sigma, L, [s], n_samples, seed)[as_halfint(s).twice]


def _spawn(seed: int, n_streams: int) -> list[np.random.Generator]:
    return [np.random.default_rng(ss) for ss in np.random.SeedSequence(seed).spawn(n_streams)]


def estimate_many(
    sigma: SigmaProfile,
    L: float,
    s_values: Iterable,
    n_samples: int,
    seed: int,
    n_streams: int = 1,
    used_seeds: set | None = None,
) -> dict:
    """Estimates at several ``s`` from one shared set of partitions.

    Sharing the samples across ``s`` (common random numbers) makes
    differences in ``s`` low-variance.  With ``n_streams > 1`` the samples
    are split over independent child streams of ``seed``; the result does not
    depend on how streams are scheduled.  Passing the same ``used_seeds`` set
    to several calls rejects accidental reuse of a master seed.
    """
    L = _check_L(L)
    n_samples = int(n_samples)
    if n_samples < 2:
        raise ParameterOutOfRange("need at least two samples for a standard error")
    if used_seeds is not None:
        if seed in used_seeds:
            raise ParameterOutOfRange(f"seed {seed} was already used by another stream")
        used_seeds.add(seed)
    s_values = [as_halfint(s) for s in s_values]
    counts = [n_samples // n_streams + (1 if i < n_samples % n_streams else 0) for i in range(n_streams)]
    parts: list[Partition] = []
    for rng, m in zip(_spawn(seed, n_streams), counts):
        parts.extend(_draw(L, rng) for _ in range(m))
    out = {}
    for s in s_values:
        if sigma.is_zero:
            out[s.twice] = McEstimate(1.0, 0.0, n_samples, seed)
            continue
        vals = np.array([multiplicative_statistic(p, s, sigma) for p in parts])
        out[s.twice] = McEstimate(
            mean=float(vals.mean()),
            std_err=float(vals.std(ddof=1) / math.sqrt(n_samples)),
            n_samples=n_samples,
            seed=seed,
        )
    return out


# ---------------------------------------------------------------------------
# exact small-size oracle


def _partitions(n: int, max_part: int | None = None):
    if n == 0:
        yield ()
        return
    if max_part is None:
        max_part = n
    for first in range(min(n, max_part), 0, -1):
        for rest in _partitions(n - first, first):
            yield (first,) + rest


def _log_dim(parts: tuple) -> float:
    """``log(dim lambda)`` by the hook length formula."""
    n = sum(parts)
    if n == 0:
        return 0.0
    conj = [sum(1 for p in parts if p > j) for j in range(parts[0])]
    log_hooks = 0.0
    for i, p in enumerate(parts):
        for j in range(p):
            log_hooks += math.log((p - j - 1) + (conj[j] - i - 1) + 1)
    return math.lgamma(n + 1) - log_hooks


def plancherel_probability(parts: tuple, L: float | None = None) -> float:
    """Plancherel weight ``dim(lambda)**2 / n!``, or the Poissonised weight when ``L`` is given."""
    parts = tuple(parts)
    n = sum(parts)
    log_p = 2.0 * _log_dim(parts) - math.lgamma(n + 1)
    if L is not None:
        # e^{-L^2} L^{2n} (dim / n!)^2 = Poisson(n; L^2) * dim^2 / n!
        log_p += -L * L + 2 * n * math.log(L) - math.lgamma(n + 1)
    return math.exp(log_p)


def exact_q_by_enumeration(L: float, s, sigma: SigmaProfile, n_max: int = 25) -> tuple[float, float]:
    """``E prod (1 - sigma(lam_i - i - s))`` summed exactly over ``|lam| <= n_max``.

    Returns the partial sum and the Poisson mass of the omitted sizes, which
    bounds the truncation error since the statistic lies in ``[0, 1]``.
    """
    L = float(L)
    s = as_halfint(s)
    total = 0.0
    for n in range(n_max + 1):
        for parts in _partitions(n):
            total += plancherel_probability(parts, L) * multiplicative_statistic(Partition(parts), s, sigma)
    omitted = 1.0 - sum(math.exp(-L * L + 2 * n * math.log(L) - math.lgamma(n + 1)) for n in range(n_max + 1))
    return total, max(omitted, 0.0)

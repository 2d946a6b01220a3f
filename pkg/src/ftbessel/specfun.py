r"""Integer-order Bessel functions of real positive argument.

Everything downstream evaluates :math:`J_k(2L)` and :math:`I_k(2L)` at integer
orders only, so this module provides exactly that:

* :func:`bessel_j_row` -- a whole row :math:`J_{-n}(x), \dots, J_n(x)` from one
  Miller backward recurrence normalised by
  :math:`J_0(x) + 2\sum_{k\ge1} J_{2k}(x) = 1`.
* :func:`bessel_i` / :func:`bessel_i_row` -- modified Bessel functions from the
  backward continued fraction for :math:`I_k/I_{k-1}`, normalised by
  :math:`I_0(x) + 2\sum_{k\ge1} I_k(x) = e^x`.
* :func:`bessel_tail_bound` -- the bound :math:`|J_{\pm k}(x)| \le (x/2)^k/k!`
  that every truncation certificate in the package is expressed through.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ParameterOutOfRange

__all__ = [
    "BesselRow",
    "bessel_j_row",
    "bessel_i",
    "bessel_i_row",
    "bessel_tail_bound",
    "log_bessel_tail_bound",
    "bessel_cutoff",
    "MAX_START_ORDER",
]

#: Largest start order the backward recurrences accept.
MAX_START_ORDER = 200_000

_RESCALE = 1e250


def log_bessel_tail_bound(x: float, k: int) -> float:
    """Natural log of ``(x/2)**k / k!``."""
    if k == 0:
        return 0.0
    return k * math.log(x / 2.0) - math.lgamma(k + 1.0)


def bessel_tail_bound(x: float, k: int) -> float:
    """Upper bound ``(x/2)**k / k!`` for ``|J_k(x)|`` and ``|J_{-k}(x)|``.

    Evaluated in log space, so it never overflows; it underflows cleanly to 0.
    The bound is non-increasing in ``k`` once ``k + 1 > x/2``.
    """
    if x <= 0:
        raise ParameterOutOfRange(f"x must be positive, got {x}")
    if k < 0:
        raise ParameterOutOfRange(f"k must be non-negative, got {k}")
    return math.exp(log_bessel_tail_bound(x, k))


def bessel_cutoff(x: float, tol: float) -> int:
    """Smallest ``k`` with ``bessel_tail_bound(x, j) <= tol`` for every ``j >= k``."""
    k = max(0, math.floor(x / 2.0))
    log_tol = math.log(tol)
    while log_bessel_tail_bound(x, k) > log_tol:
        k += 1
        if k > MAX_START_ORDER:
            raise ParameterOutOfRange(f"no Bessel cutoff below {MAX_START_ORDER} for x={x}")
    return k


@dataclass(frozen=True, eq=False)
class BesselRow:
    """Values ``J_n(x)`` for ``-n_max <= n <= n_max``.

    ``values[n + n_max]`` holds ``J_n(x)``; negative orders are filled from the
    positive ones by ``J_{-k} = (-1)**k J_k``, so that symmetry is exact.
    ``eps`` is the absolute error bound per entry.
    """

    x: float
    n_max: int
    values: np.ndarray
    eps: float

    def __getitem__(self, n: int) -> float:
        if abs(n) > self.n_max:
            raise IndexError(f"order {n} outside row of half-width {self.n_max}")
        return float(self.values[n + self.n_max])

    @property
    def orders(self) -> np.ndarray:
        return np.arange(-self.n_max, self.n_max + 1)

    def take(self, orders) -> np.ndarray:
        """Vectorised lookup; orders beyond ``n_max`` are returned as 0.

        Callers size the row with :func:`bessel_cutoff`, so those entries are
        below the row's own ``eps``.
        """
        orders = np.asarray(orders, dtype=np.int64)
        out = np.zeros(orders.shape)
        inside = np.abs(orders) <= self.n_max
        out[inside] = self.values[orders[inside] + self.n_max]
        return out


def _start_order(x: float, n_max: int, eps: float) -> int:
    start = n_max + max(20, math.ceil(x))
    # the neglected J_N must sit far below eps for the normalised values to be good
    start = max(start, bessel_cutoff(x, eps * 1e-6) + 10)
    if start > MAX_START_ORDER:
        raise ParameterOutOfRange(
            f"start order {start} for x={x}, n_max={n_max} exceeds {MAX_START_ORDER}"
        )
    return start


@lru_cache(maxsize=512)
def _j_positive(x: float, n_max: int, eps: float) -> np.ndarray:
    start = _start_order(x, n_max, eps)
    v = np.zeros(start + 2)
    v[start] = 1.0
    two_over_x = 2.0 / x
    for k in range(start, 0, -1):
        v[k - 1] = k * two_over_x * v[k] - v[k + 1]
        if abs(v[k - 1]) > _RESCALE:
            v[k - 1 :] /= _RESCALE
    norm = v[0] + 2.0 * v[2::2].sum()
    out = v[: n_max + 1] / norm
    out.setflags(write=False)
    return out


def bessel_j_row(x: float, n_max: int, eps: float = 1e-15) -> BesselRow:
    """Bessel functions ``J_n(x)`` for all integer ``|n| <= n_max``.

    Parameters
    ----------
    x : float
        Positive argument (``2L`` throughout the package).
    n_max : int
        Largest order returned.
    eps : float
        Requested absolute accuracy per entry, at least ``1e-15``.

    Raises
    ------
    ParameterOutOfRange
        If ``x <= 0``, ``n_max < 0``, ``eps < 1e-15`` or the start order of the
        recurrence would exceed :data:`MAX_START_ORDER`.
    """
    if not x > 0:
        raise ParameterOutOfRange(f"x must be positive, got {x}")
    if n_max < 0:
        raise ParameterOutOfRange(f"n_max must be non-negative, got {n_max}")
    if eps < 1e-15:
        raise ParameterOutOfRange(f"eps must be at least 1e-15, got {eps}")
    pos = _j_positive(float(x), int(n_max), float(eps))
    neg = pos[:0:-1] * np.where(np.arange(n_max, 0, -1) % 2 == 0, 1.0, -1.0)
    values = np.concatenate([neg, pos])
    values.setflags(write=False)
    return BesselRow(x=float(x), n_max=int(n_max), values=values, eps=float(eps))


@lru_cache(maxsize=256)
def _log_i_row(x: float, n_max: int) -> np.ndarray:
    # ratios rho_k = I_k / I_{k-1} from the backward continued fraction
    start = max(n_max, math.ceil(x)) + 30
    while log_bessel_tail_bound(x, start) - x > math.log(1e-40):
        start += 10
        if start > MAX_START_ORDER:
            raise ParameterOutOfRange(f"start order exceeds {MAX_START_ORDER} for x={x}")
    # extended precision keeps the cumulative products accurate at high order
    xl = np.longdouble(x)
    rho = np.zeros(start + 2, dtype=np.longdouble)
    for k in range(start, 0, -1):
        rho[k] = 1 / (2 * k / xl + rho[k + 1])
    log_rho = np.log(rho[1 : start + 1])
    cum = np.cumsum(log_rho)
    # I_0 e^{-x} = 1 / (1 + 2 sum_k prod_{j<=k} rho_j)
    log_i0 = xl - np.log1p(2 * np.exp(cum).sum())
    out = np.empty(n_max + 1, dtype=np.longdouble)
    out[0] = log_i0
    out[1:] = log_i0 + cum[:n_max]
    out.setflags(write=False)
    return out


def bessel_i_row(x: float, n_max: int) -> np.ndarray:
    """Array ``[I_0(x), ..., I_{n_max}(x)]``; ``I_{-n} = I_n`` for integer ``n``."""
    if not x > 0:
        raise ParameterOutOfRange(f"x must be positive, got {x}")
    if n_max < 0:
        raise ParameterOutOfRange(f"n_max must be non-negative, got {n_max}")
    return np.exp(_log_i_row(float(x), int(n_max))).astype(float)


def bessel_i(n: int, x: float) -> float:
    """Modified Bessel function ``I_n(x)`` for integer ``n`` and ``x > 0``."""
    n = abs(int(n))
    if not x > 0:
        raise ParameterOutOfRange(f"x must be positive, got {x}")
    return float(np.exp(_log_i_row(float(x), n)[n]))

r"""Discrete Bessel kernels on the lattice Z' and the symmetrised operator M_s.

The basic kernel is

.. math::

    K^{Be}(a, b) = \sum_{l \in Z'_+} J_{a+l}(2L) J_{b+l}(2L)
                 = L \frac{J_{a-1/2} J_{b+1/2} - J_{a+1/2} J_{b-1/2}}{a - b},

and its finite-temperature deformation replaces the half-line by a weight
``sigma(l)`` on all of Z'.  The gap probability of the deformed process is the
Fredholm determinant of

.. math::

    M_s(a, b) = \sqrt{\tilde\sigma(a)}\, K^{Be}(a, b)\, \sqrt{\tilde\sigma(b)},
    \qquad \tilde\sigma(a) = \sigma(a - s - 1/2),

which :func:`build_M` assembles on a finite window with a certified bound on
the discarded trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InternalConsistencyError, ParameterOutOfRange, ResourceLimitError
from .lattice import HalfInt, SigmaProfile, as_halfint
from .specfun import BesselRow, bessel_j_row, log_bessel_tail_bound

__all__ = [
    "KernelMatrix",
    "MAX_WINDOW",
    "kernel_bessel",
    "kernel_bessel_complement",
    "kernel_finite_temp",
    "build_M",
    "right_cut",
    "kernel_bessel_block",
]

#: Largest number of lattice points a window may hold.
MAX_WINDOW = 4000

_MACHINE_EPS = np.finfo(float).eps


def _check_L(L: float) -> float:
    L = float(L)
    if not L > 0:
        raise ParameterOutOfRange(f"L must be positive, got {L}")
    return L


def _row(L: float, half_width: int) -> BesselRow:
    if half_width > MAX_WINDOW * 4:
        raise ResourceLimitError(f"Bessel row of half-width {half_width} exceeds the window cap")
    return bessel_j_row(2.0 * L, half_width)


def _square_tail_order(x: float, tol: float) -> int:
    """Smallest ``K`` with ``sum_{k >= K} B(x, k)**2 <= tol``."""
    K = max(1, math.floor(x / 2.0) + 1)
    log_tol = math.log(tol)
    while True:
        # B is decreasing past x/2 with ratio <= x/(2(K+1)) < 1; bound the tail geometrically
        q = (x / (2.0 * (K + 1))) ** 2
        if q < 1.0:
            log_tail = 2.0 * log_bessel_tail_bound(x, K) - math.log1p(-q)
            if log_tail <= log_tol:
                return K
        K += 1
        if K > MAX_WINDOW * 4:
            raise ResourceLimitError(f"Bessel square tail never drops below {tol} for x={x}")


def kernel_bessel(a, b, L: float, eps: float = 1e-15) -> float:
    """Discrete Bessel kernel ``K^Be(a, b)`` at two points of Z'.

    Off the diagonal the value is computed twice, from the closed form and from
    the truncated series, and the two must agree; on the diagonal only the
    series is used.

    Raises
    ------
    InternalConsistencyError
        If the two off-diagonal routes disagree beyond ``10*eps`` plus a
        rounding allowance proportional to ``L``.
    """
    a, b = as_halfint(a), as_halfint(b)
    L = _check_L(L)
    x = 2.0 * L
    eps = max(float(eps), 1e-15)
    K0 = _square_tail_order(x, eps)
    lo_order = min(a.upper, b.upper)
    n_terms = K0 + max(0, -lo_order) + 2
    half = max(abs(a.lower), abs(b.lower), K0 + abs(lo_order) + n_terms) + 2
    row = _row(L, half)
    n = np.arange(n_terms)
    series = float(np.dot(row.take(a.upper + n), row.take(b.upper + n)))
    if a == b:
        return series
    closed = L * (row[a.lower] * row[b.upper] - row[a.upper] * row[b.lower]) / (float(a) - float(b))
    allowance = 10.0 * eps + 16.0 * (1.0 + L) * _MACHINE_EPS
    if abs(series - closed) > allowance:
        raise InternalConsistencyError(
            f"K^Be({a},{b}; L={L}): series {series!r} vs closed form {closed!r}"
        )
    return series


def kernel_bessel_complement(a, L: float) -> float:
    """``1 - K^Be(a, a)`` computed without cancellation.

    For ``a < 0`` this is ``sum_{m >= 1/2 - a} J_m(2L)**2``, a sum of small
    positive terms; for ``a > 0`` the kernel itself is the small quantity.
    """
    a = as_halfint(a)
    L = _check_L(L)
    x = 2.0 * L
    K0 = _square_tail_order(x, 1e-34)
    start = 1 - a.upper if a.twice < 0 else a.upper  # = 1/2 - a or a + 1/2
    stop = max(K0, start) + 40
    row = _row(L, stop)
    tail = float(np.sum(row.take(np.arange(start, stop)) ** 2))
    return tail if a.twice < 0 else 1.0 - tail


def kernel_finite_temp(a, b, L: float, sigma: SigmaProfile, eps: float = 1e-15) -> float:
    """Finite-temperature kernel ``sum_{l in Z'} sigma(l) J_{a+l}(2L) J_{b+l}(2L)``.

    Both tails are cut where the Bessel bound certifies a remainder below
    ``eps`` (by Cauchy-Schwarz and ``sigma <= 1``), so no property of the
    profile beyond boundedness is used.
    """
    a, b = as_halfint(a), as_halfint(b)
    L = _check_L(L)
    if sigma.is_zero:
        return 0.0
    x = 2.0 * L
    K0 = _square_tail_order(x, max(float(eps), 1e-300) / 2.0)
    # keep every l for which |a+l| < K0 or |b+l| < K0
    l_lo = -K0 - max(a.upper, b.upper)
    l_hi = K0 - min(a.lower, b.lower)
    ls = np.arange(l_lo, l_hi + 1) + 0.5
    half = K0 + max(abs(a.twice), abs(b.twice)) + 4
    row = _row(L, half)
    ja = row.take(np.rint(ls + float(a)).astype(np.int64))
    jb = row.take(np.rint(ls + float(b)).astype(np.int64))
    return float(np.sum(sigma.values(ls) * ja * jb))


def right_cut(L: float, tol: float, lo: float | None = None) -> float:
    """Smallest ``hi`` in Z' whose discarded diagonal of ``K^Be`` beyond ``hi`` is <= ``tol``.

    Uses ``sum_{a > hi} K^Be(a, a) <= sum_{k >= hi + 3/2} (k - hi - 1/2) B(2L, k)**2``.
    """
    x = 2.0 * L
    j = max(0, math.floor(x / 2.0))  # j = hi + 1/2
    if lo is not None:
        j = max(j, math.floor(lo + 0.5) - 1)
    while _right_tail(x, j) > tol:
        j += 1
        if j > MAX_WINDOW * 4:
            raise ResourceLimitError(f"right window edge for L={L} exceeds the cap")
    while j > 0 and (lo is None or j - 0.5 > lo - 1) and _right_tail(x, j - 1) <= tol:
        j -= 1
    return j - 0.5


def _right_tail(x: float, j: int) -> float:
    total = 0.0
    k = j + 1
    while True:
        if k > x / 2.0:
            # |J_k| <= min(1, B(x, k)); the clamp also keeps exp from overflowing
            term = (k - j) * math.exp(min(0.0, 2.0 * log_bessel_tail_bound(x, k)))
        else:
            term = float(k - j)
        total += term
        if k > x and term < 1e-40 * max(total, 1e-300):
            return total
        if k > x and term == 0.0:
            return total
        k += 1


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    """Finite window of ``M_s`` with its truncation certificate.

    Attributes
    ----------
    lo, hi : HalfInt or None
        Window bounds (``None`` for an empty window).
    points : ndarray
        The lattice points ``lo, lo+1, ..., hi`` as floats.
    entries : ndarray
        ``M_s`` restricted to the window.
    trunc_err : float
        Certified bound on the discarded diagonal trace.
    sigma_tilde : ndarray
        ``sigma(a - s - 1/2)`` on the window.
    one_minus_sigma_tilde : ndarray
        ``1 - sigma_tilde`` computed without cancellation.
    kbe : ndarray
        ``K^Be`` restricted to the window (diagonal from the accurate route).
    one_minus_diag : ndarray
        ``1 - M_s(a, a)`` computed without cancellation.
    jm, jp : ndarray
        ``J_{a-1/2}(2L)`` and ``J_{a+1/2}(2L)`` on the window.
    """

    L: float
    s: HalfInt
    sigma: SigmaProfile
    lo: HalfInt | None
    hi: HalfInt | None
    points: np.ndarray
    entries: np.ndarray
    trunc_err: float
    sigma_tilde: np.ndarray
    one_minus_sigma_tilde: np.ndarray
    kbe: np.ndarray
    one_minus_diag: np.ndarray
    jm: np.ndarray
    jp: np.ndarray

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def identity_minus(self) -> np.ndarray:
        """``I - M`` with the accurate diagonal."""
        out = -self.entries.copy()
        out[np.diag_indices_from(out)] = self.one_minus_diag
        return out


def _empty(L, s, sigma, trunc_err=0.0) -> KernelMatrix:
    z = np.zeros(0)
    return KernelMatrix(L, s, sigma, None, None, z, np.zeros((0, 0)), trunc_err,
                        z, z, np.zeros((0, 0)), z, z, z)


def build_M(
    s,
    L: float,
    sigma: SigmaProfile,
    eps: float = 1e-15,
    widen: float = 1.0,
    window: tuple | None = None,
) -> KernelMatrix:
    """Assemble the window of ``M_s`` with certified truncation error.

    Parameters
    ----------
    s : HalfInt or str
        Shift; ``M_s`` is the kernel whose determinant is ``P(a_max <= s)``.
    L : float
        Positive Bessel parameter.
    sigma : SigmaProfile
        Filling function.
    eps : float
        Target for ``trunc_err``; half is spent on each side of the window.
    widen : float
        Grow the window symmetrically by this factor (for self-consistency checks).
    window : (lo, hi), optional
        Use this window instead of the automatic one; ``trunc_err`` is still
        the honest certificate for the window actually used.

    Returns
    -------
    KernelMatrix
    """
    s = as_halfint(s)
    L = _check_L(L)
    if sigma.is_zero:
        return _empty(L, s, sigma)
    x = 2.0 * L
    if L > MAX_WINDOW:
        # the right edge alone sits beyond a = L
        raise ResourceLimitError(f"L={L} needs a window wider than MAX_WINDOW={MAX_WINDOW}")
    half_eps = eps / 2.0

    # left edge: discarded a satisfy a - s - 1/2 <= -T
    T = sigma.left_cut(half_eps)
    left_err = sigma.tail_bound(T)
    lo = float(s) + 1.5 - T
    hi = right_cut(L, half_eps, lo=lo)
    if window is not None:
        lo, hi = float(as_halfint(window[0])), float(as_halfint(window[1]))
        left_err = sigma.tail_bound(float(s) + 1.5 - lo)
    if widen != 1.0:
        extra = math.ceil((widen - 1.0) * (hi - lo + 1) / 2.0)
        lo -= extra
        hi += extra
        left_err = sigma.tail_bound(float(s) + 1.5 - lo)
    right_err = _right_tail(x, int(round(hi + 0.5)))
    n = int(round(hi - lo)) + 1
    if n > MAX_WINDOW:
        raise ResourceLimitError(f"window of {n} points exceeds MAX_WINDOW={MAX_WINDOW}")
    trunc_err = left_err + right_err
    if n <= 0:
        return _empty(L, s, sigma, trunc_err)

    points = lo + np.arange(n)
    ls = points - float(s) - 0.5
    st = sigma.values(ls)
    omst = sigma.one_minus(ls)

    # Gram factor G[i, k] = J_{a_i + 1/2 + k}
    top = _square_tail_order(x, 1e-34) + 2
    lo_order = int(round(lo + 0.5))
    n_cols = max(top - lo_order + 1, 1)
    half = max(abs(lo_order) + 1, top + n + 2)
    row = _row(L, half)
    orders = (np.rint(points + 0.5).astype(np.int64))[:, None] + np.arange(n_cols)[None, :]
    G = row.take(orders)
    kbe = G @ G.T

    # accurate diagonal and its complement from cumulative tails of J_k^2
    sq = row.take(np.arange(0, half + 1)) ** 2
    tail = np.cumsum(sq[::-1])[::-1]  # tail[k] = sum_{j >= k} J_j^2
    up = np.rint(points + 0.5).astype(np.int64)
    neg = points < 0
    k_diag = np.empty(n)
    one_minus_k = np.empty(n)
    idx_pos = np.minimum(up, half)
    idx_neg = np.minimum(1 - up, half)
    small = np.where(neg, tail[idx_neg], tail[idx_pos])
    k_diag[:] = np.where(neg, 1.0 - small, small)
    one_minus_k[:] = np.where(neg, small, 1.0 - small)
    kbe[np.diag_indices(n)] = k_diag

    root = np.sqrt(st)
    entries = root[:, None] * kbe * root[None, :]
    entries = 0.5 * (entries + entries.T)
    one_minus_diag = omst + st * one_minus_k
    entries[np.diag_indices(n)] = st * k_diag

    jm = row.take(up - 1)
    jp = row.take(up)
    return KernelMatrix(
        L=L,
        s=s,
        sigma=sigma,
        lo=HalfInt(int(round(2 * lo))),
        hi=HalfInt(int(round(2 * hi))),
        points=points,
        entries=entries,
        trunc_err=float(trunc_err),
        sigma_tilde=st,
        one_minus_sigma_tilde=omst,
        kbe=kbe,
        one_minus_diag=one_minus_diag,
        jm=jm,
        jp=jp,
    )


def kernel_bessel_block(L: float, rows, cols) -> np.ndarray:
    """``K^Be(w, b)`` for every ``w`` in ``rows`` and ``b`` in ``cols`` (floats in Z').

    Computed as a Gram product of Bessel tails, so coincident points are
    handled without the closed form's ``0/0``.
    """
    L = _check_L(L)
    rows = np.asarray(rows, dtype=float)
    cols = np.asarray(cols, dtype=float)
    if rows.size == 0 or cols.size == 0:
        return np.zeros((rows.size, cols.size))
    x = 2.0 * L
    top = _square_tail_order(x, 1e-34) + 2
    lo_order = int(round(min(rows.min(), cols.min()) + 0.5))
    n_cols = max(top - lo_order + 1, 1)
    half = max(abs(lo_order) + 1, top + 2, int(round(max(rows.max(), cols.max()))) + 2)
    row = _row(L, half)
    k = np.arange(n_cols)[None, :]
    Gr = row.take(np.rint(rows + 0.5).astype(np.int64)[:, None] + k)
    Gc = row.take(np.rint(cols + 0.5).astype(np.int64)[:, None] + k)
    return Gr @ Gc.T

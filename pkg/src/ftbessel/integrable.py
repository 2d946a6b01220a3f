"""Numerical certificates for the integrable structure of ``Q_sigma(L, s)``.

Every check returns residuals rather than booleans; tolerances live with the
caller (tests, CLI reports).  ``L``-derivatives are taken by central finite
differences of certified determinants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .drhp import RHSolution, solve_rhp
from .errors import (
    DegenerateDeterminantError,
    ParameterOutOfRange,
    UnsupportedPointError,
)
from .fredholm import DEFAULT_EPS, gap_probability, q_zero_detail
from .kernels import kernel_bessel_block
from .lattice import HalfInt, SigmaProfile, as_halfint, halfint_range
from .specfun import bessel_cutoff, bessel_i_row, bessel_j_row

__all__ = [
    "FrakPair",
    "PhiTable",
    "PainleveSequence",
    "SmallLFit",
    "TodaConvergence",
    "toda_residual",
    "toda_convergence",
    "small_l_coefficient",
    "small_l_check",
    "frak_a",
    "frak_b_rh",
    "frak_b_fd",
    "frak_ab",
    "wavefunction_columns",
    "phi_table",
    "verify_idpii",
    "large_s_ratio",
    "dpii_sequence",
    "volterra_residual",
    "lax_residuals",
]

_INDICATOR = SigmaProfile.indicator()
_MACHINE_EPS = float(np.finfo(float).eps)


# ---------------------------------------------------------------------------
# finite differences


def _d1(f, x: float, h: float) -> float:
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)


def _d2(f, x: float, h: float) -> float:
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h)


def _log_q(L, s, sigma, eps) -> float:
    res = gap_probability(L, s, sigma, eps)
    if res.below_floor:
        raise DegenerateDeterminantError(f"Q({L}, {s}) = {res.q:.3g} is within its error floor {res.floor:.3g}")
    return res.log_q


def _q_ratio(L, s, sigma, eps) -> float:
    """``Q(s+1) Q(s-1) / Q(s)**2``; ``Q(s-1)`` may vanish exactly."""
    mid = gap_probability(L, s, sigma, eps)
    if mid.below_floor:
        raise DegenerateDeterminantError(f"Q({L}, {s}) is within its error floor")
    up = gap_probability(L, s + 1, sigma, eps)
    dn = gap_probability(L, s - 1, sigma, eps)
    if dn.q == 0.0:
        return 0.0
    return math.exp(up.log_q + dn.log_q - 2.0 * mid.log_q)


# ---------------------------------------------------------------------------
# cylindrical Toda


def toda_residual(L: float, s, sigma: SigmaProfile, h: float = 1e-2, eps: float = DEFAULT_EPS) -> float:
    """``|d2 log Q + (1/L) d log Q + 4 - 4 Q(s+1) Q(s-1) / Q(s)**2|`` at ``(L, s)``.

    Derivatives use five-point central stencils with step ``h``, so the
    residual is ``O(h**4)`` plus the propagated determinant error.
    ``Q(s-1) = 0`` is allowed (indicator at ``s = -1/2``).
    """
    s = as_halfint(s)
    if sigma.is_zero:
        return 0.0
    if not 2 * h < L:
        raise ParameterOutOfRange(f"step h={h} too large for L={L}")

    def f(x):
        return _log_q(x, s, sigma, eps)

    lhs = _d2(f, L, h) + _d1(f, L, h) / L + 4.0
    return abs(lhs - 4.0 * _q_ratio(L, s, sigma, eps))


#: Rounding amplification of the five-point second-difference stencil, sum |w| / 12.
_STENCIL_GAIN = 64.0 / 12.0


@dataclass(frozen=True)
class TodaConvergence:
    """Residuals of the Toda identity under step halving.

    ``ok`` holds when every halving either shrinks the residual by at least
    ``min_ratio`` (fourth order gives 16) or the finer residual is already at
    the rounding floor ``_STENCIL_GAIN * delta / h**2``.
    """

    steps: tuple
    residuals: tuple
    floors: tuple
    ratios: tuple
    ok: bool


def toda_convergence(
    L: float,
    s,
    sigma: SigmaProfile,
    steps=(2e-2, 1e-2, 5e-3),
    delta: float | None = None,
    min_ratio: float = 8.0,
    eps: float = DEFAULT_EPS,
) -> TodaConvergence:
    """Check fourth-order decay of :func:`toda_residual` until the rounding floor.

    ``delta`` is the absolute error of one ``log Q`` evaluation; by default
    it is the largest ``log_err`` reported over the stencil nodes.
    """
    s = as_halfint(s)
    steps = tuple(sorted(steps, reverse=True))
    if delta is None:
        nodes = [L + k * h for h in steps for k in (-2, -1, 0, 1, 2)]
        delta = max(gap_probability(x, s, sigma, eps).log_err for x in nodes)
        delta = max(delta, _MACHINE_EPS)
    res = tuple(toda_residual(L, s, sigma, h, eps) for h in steps)
    floors = tuple(_STENCIL_GAIN * delta / h**2 + 1e-14 for h in steps)
    ratios = []
    ok = True
    for i in range(len(steps) - 1):
        r = res[i] / res[i + 1] if res[i + 1] > 0 else math.inf
        ratios.append(r)
        if not (r >= min_ratio or res[i + 1] <= floors[i + 1]):
            ok = False
    return TodaConvergence(steps, res, floors, tuple(ratios), ok)


# ---------------------------------------------------------------------------
# small-L asymptotics


def small_l_coefficient(s, sigma: SigmaProfile) -> float:
    """Predicted ``lim (log Q - log Q0) / L**2 = -(sigma(-s) - sigma(-s-1)) / (1 - sigma(-s-1))``."""
    s = as_halfint(s)
    a = sigma(-float(s))
    b = sigma(-float(s) - 1.0)
    om = float(sigma.one_minus(np.array([-float(s) - 1.0]))[0])
    if om == 0.0:
        raise UnsupportedPointError(f"1 - sigma(-s-1) vanishes at s={s}")
    return -(a - b) / om


@dataclass(frozen=True)
class SmallLFit:
    """Least-squares fit ``(log Q - log Q0) / L**2 = c + d L**2``."""

    s: HalfInt
    Ls: tuple
    scaled: tuple
    coefficient: float
    slope: float
    expected: float
    deviation: float
    pointwise_deviation: tuple


def small_l_check(s, sigma: SigmaProfile, L_list=(0.05, 0.025, 0.0125), eps: float = 1e-15) -> SmallLFit:
    """Fit the ``L**2`` coefficient of ``log Q(L, s) - log Q0(s)`` and compare with the prediction.

    Raises
    ------
    UnsupportedPointError
        If ``Q0(s) = 0``.
    """
    s = as_halfint(s)
    qz = q_zero_detail(s, sigma)
    if qz.value == 0.0:
        raise UnsupportedPointError(f"small-L limit of Q vanishes at s={s}")
    Ls = tuple(sorted((float(x) for x in L_list), reverse=True))
    log0 = math.log(qz.value)
    y = np.array([(gap_probability(L, s, sigma, max(eps, 1e-15)).log_q - log0) / L**2 for L in Ls])
    X = np.stack([np.ones(len(Ls)), np.array(Ls) ** 2], axis=1)
    (c, d), *_ = np.linalg.lstsq(X, y, rcond=None)
    expected = small_l_coefficient(s, sigma)
    return SmallLFit(
        s=s,
        Ls=Ls,
        scaled=tuple(map(float, y)),
        coefficient=float(c),
        slope=float(d),
        expected=expected,
        deviation=abs(float(c) - expected),
        pointwise_deviation=tuple(abs(float(v) - expected) for v in y),
    )


# ---------------------------------------------------------------------------
# the pair (frak a, frak b)


@dataclass(frozen=True)
class FrakPair:
    """``frak a(s)`` from three determinants and ``frak b(s)`` by two independent routes."""

    L: float
    s: HalfInt
    a_frak: float
    b_frak: float
    b_frak_fd: float

    @property
    def b_gap(self) -> float:
        return abs(self.b_frak - self.b_frak_fd)


def frak_a(L: float, s, sigma: SigmaProfile, eps: float = DEFAULT_EPS) -> float:
    """``sqrt(Q(s+1) Q(s-1)) / Q(s)``."""
    s = as_halfint(s)
    if sigma.is_zero:
        return 1.0
    return math.sqrt(_q_ratio(L, s, sigma, eps))


def frak_b_rh(L: float, s, sigma: SigmaProfile, eps: float = DEFAULT_EPS, cache: dict | None = None) -> float:
    """``-(2/L) (alpha(s) - alpha(s-1))`` from two RH solves."""
    s = as_halfint(s)
    if sigma.is_zero:
        return 0.0
    sols = cache if cache is not None else {}
    return -2.0 / L * (_solve(L, s, sigma, eps, sols).alpha - _solve(L, s - 1, sigma, eps, sols).alpha)


def frak_b_fd(L: float, s, sigma: SigmaProfile, h: float = 1e-3, eps: float = DEFAULT_EPS) -> float:
    """``d/dL log(Q(s) / Q(s-1))`` by a five-point stencil."""
    s = as_halfint(s)
    if sigma.is_zero:
        return 0.0
    return _d1(lambda x: _log_q(x, s, sigma, eps) - _log_q(x, s - 1, sigma, eps), L, h)


def frak_ab(L: float, s, sigma: SigmaProfile, h: float = 1e-3, eps: float = DEFAULT_EPS) -> FrakPair:
    s = as_halfint(s)
    return FrakPair(
        L=float(L),
        s=s,
        a_frak=frak_a(L, s, sigma, eps),
        b_frak=frak_b_rh(L, s, sigma, eps),
        b_frak_fd=frak_b_fd(L, s, sigma, h, eps),
    )


# ---------------------------------------------------------------------------
# wavefunctions


def _solve(L, s, sigma, eps, cache: dict) -> RHSolution:
    key = (float(L), s.twice)
    if key not in cache:
        cache[key] = solve_rhp(L, s, sigma, None, eps)
    return cache[key]


def wavefunction_columns(sol: RHSolution, L: float, km_one_minus: np.ndarray, ls) -> np.ndarray:
    """First column of ``Y(w) Phi(w)`` at ``w = l + s + 1/2``, for each ``l`` in ``ls``.

    At a window point the pole of ``Y`` meets a zero of ``ghat(w)^T Phi(w) e_1``;
    the finite limit is ``r(w) K^Be(w, w) / (1 - M_s(w, w))``, which makes the
    uniform formula ``Phi(w) e_1 + sum_b r(b) K^Be(w, b) / (1 - M_s(b, b))``
    valid everywhere on Z'.

    Returns
    -------
    ndarray of shape (len(ls), 2)
    """
    ls = np.asarray(ls, dtype=float)
    w = ls + float(sol.s) + 0.5
    up = np.rint(w + 0.5).astype(np.int64)
    half = int(max(np.abs(up).max() + 2, 2))
    row = bessel_j_row(2.0 * L, half)
    out = np.stack([row.take(up - 1), L * row.take(up)], axis=1)
    if sol.size:
        Kx = kernel_bessel_block(L, w, sol.points)
        out = out + Kx @ (sol.r / km_one_minus[:, None])
    return out


@dataclass
class PhiTable:
    """Values ``phi(l; L, s)`` on a rectangular grid of ``l`` and ``s``."""

    L: float
    sigma_id: str
    s_values: list
    l_values: np.ndarray
    values: dict = field(default_factory=dict)
    upper: dict = field(default_factory=dict)

    def column(self, s) -> np.ndarray:
        return self.values[as_halfint(s).twice]

    def __call__(self, l, s) -> float:
        l = float(as_halfint(l))
        i = int(round(l - self.l_values[0]))
        if not (0 <= i < len(self.l_values)):
            raise KeyError(f"l={l} outside the table")
        return float(self.values[as_halfint(s).twice][i])


def _one_minus_for(L, s, sigma, eps):
    from .kernels import build_M

    km = build_M(s, L, sigma, eps)
    return km.one_minus_diag


def phi_table(
    L: float,
    sigma: SigmaProfile,
    s_range,
    l_range,
    N: int | None = None,
    eps: float = DEFAULT_EPS,
    cache: dict | None = None,
) -> PhiTable:
    """Tabulate ``phi(l; L, s) = sqrt((1 + beta(s+1)) / L) chi(l; s)``.

    ``chi(l; s)`` is the second entry of ``Y(w; s) Phi(w) e_1`` at
    ``w = l + s + 1/2``.  The first entry, rescaled by ``L / (1 + beta(s))``,
    is ``chi(l; s-1)``; it is stored in ``upper`` for consistency checks.
    Only Bessel ``J`` of integer order is needed.
    """
    if N is not None:
        raise ParameterOutOfRange("phi_table uses the certified automatic windows; N is not supported")
    L = float(L)
    s_values = [as_halfint(s) for s in s_range]
    l_lo, l_hi = as_halfint(l_range[0]), as_halfint(l_range[1])
    ls = np.array([float(x) for x in halfint_range(l_lo, l_hi)])
    cache = {} if cache is None else cache
    table = PhiTable(L=L, sigma_id=sigma.sigma_id, s_values=s_values, l_values=ls)
    for s in s_values:
        if sigma.is_zero:
            row = bessel_j_row(2.0 * L, int(np.abs(ls).max() + abs(s.twice) + 4))
            table.values[s.twice] = math.sqrt(L) * row.take(np.rint(ls + float(s) + 1.0).astype(np.int64))
            table.upper[s.twice] = math.sqrt(L) * row.take(np.rint(ls + float(s)).astype(np.int64))
            continue
        sol = _solve(L, s, sigma, eps, cache)
        sol_up = _solve(L, s + 1, sigma, eps, cache)
        om = _one_minus_for(L, s, sigma, eps)
        cols = wavefunction_columns(sol, L, om, ls)
        norm_up = 1.0 + sol_up.beta
        if not norm_up > 0:
            raise DegenerateDeterminantError(f"1 + beta(s+1) = {norm_up} is not positive at s={s}")
        table.values[s.twice] = math.sqrt(norm_up / L) * cols[:, 1]
        # chi(l; s-1) = L/(1+beta(s)) * first entry; scaled by sqrt((1+beta(s))/L) to give phi(l; s-1)
        norm = 1.0 + sol.beta
        table.upper[s.twice] = math.sqrt(L / norm) * cols[:, 0] if norm > 0 else np.full(len(ls), np.nan)
    return table


def _delta_sigma_range(L: float, s: HalfInt, sigma: SigmaProfile, tol: float = 1e-17) -> tuple[HalfInt, HalfInt]:
    """``l`` range outside which ``Delta sigma(l) phi phi`` is negligible."""
    if sigma.kind == "indicator" or (sigma.kind == "fermi" and sigma.u == 0.0):
        return HalfInt(-1), HalfInt(-1)
    T = sigma.left_cut(tol)
    lo = -T - 1.0
    K0 = bessel_cutoff(2.0 * L, tol)
    hi = max(K0 - float(s) + 1.0, 0.5)
    if sigma.kind == "fermi":
        hi = min(hi, T + 1.0)
    return HalfInt.nearest(lo), HalfInt.nearest(hi)


def verify_idpii(
    L: float,
    s,
    sigma: SigmaProfile,
    phi: PhiTable | None = None,
    l_cut=None,
    eps: float = DEFAULT_EPS,
) -> dict:
    """Residuals of the non-local identities and the three-term recursion.

    Returns
    -------
    dict
        ``res_a_sum = |1/a(s) - a(s) - (1/L) sum Dsigma(l) phi(l+1; s-1) phi(l; s)|``,
        ``res_b_sum = |b(s+1) - (2/L) sum Dsigma(l) phi(l+1; s) phi(l; s)|``,
        ``res_recursion`` the largest residual of
        ``a(s+1) phi(l; s+1) + a(s) phi(l; s-1) = ((l+s+1)/L + b(s+1)/2) phi(l; s)``
        over ``|l| <= l_cut``, and ``res_upper`` the gap between the two
        computations of ``phi(l; s-1)``.
    """
    s = as_halfint(s)
    L = float(L)
    if sigma.is_zero:
        return {"res_a_sum": 0.0, "res_b_sum": 0.0, "res_recursion": 0.0, "res_upper": 0.0}
    l_cut = as_halfint(l_cut) if l_cut is not None else HalfInt(41)
    d_lo, d_hi = _delta_sigma_range(L, s, sigma)
    lo = min(d_lo, -l_cut)
    hi = max(d_hi + 1, l_cut)
    cache: dict = {}
    if phi is None:
        phi = phi_table(L, sigma, [s - 1, s, s + 1], (lo, hi), eps=eps, cache=cache)
    ls = phi.l_values
    a_s = frak_a(L, s, sigma, eps)
    a_up = frak_a(L, s + 1, sigma, eps)
    b_up = frak_b_rh(L, s + 1, sigma, eps, cache)

    dsig = sigma.values(ls + 1.0) - sigma.values(ls)
    p_dn, p_s, p_up = phi.column(s - 1), phi.column(s), phi.column(s + 1)
    # phi(l+1; .) is the next entry; the last l has no successor and its Dsigma weight is dropped
    shift = lambda v: np.append(v[1:], 0.0)
    w = dsig.copy()
    w[-1] = 0.0
    sum_a = float(np.sum(w * shift(p_dn) * p_s)) / L
    sum_b = 2.0 * float(np.sum(w * shift(p_s) * p_s)) / L

    mask = np.abs(ls) <= float(l_cut)
    lhs = a_up * p_up + a_s * p_dn
    rhs = ((ls + float(s) + 1.0) / L + b_up / 2.0) * p_s
    rec = float(np.max(np.abs(lhs - rhs)[mask]))
    upper = float(np.max(np.abs(phi.upper[s.twice] - p_dn)[mask]))
    return {
        "res_a_sum": abs(1.0 / a_s - a_s - sum_a),
        "res_b_sum": abs(b_up - sum_b),
        "res_recursion": rec,
        "res_upper": upper,
    }


def large_s_ratio(L: float, sigma: SigmaProfile, l_max=HalfInt(5), s=None, eps: float = DEFAULT_EPS) -> dict:
    """``phi(l; s) / (sqrt(L) J_{l+s+1}(2L))`` for ``|l| <= l_max`` at a large ``s``.

    The default ``s`` is ``2 ceil(2L) + 21/2``.
    """
    s = as_halfint(s) if s is not None else HalfInt(2 * (2 * math.ceil(2 * L)) + 21)
    l_max = as_halfint(l_max)
    tab = phi_table(L, sigma, [s], (-l_max, l_max), eps=eps)
    row = bessel_j_row(2.0 * L, int(abs(s.twice) + abs(l_max.twice) + 4))
    ref = math.sqrt(L) * row.take(np.rint(tab.l_values + float(s) + 1.0).astype(np.int64))
    ratios = tab.column(s) / ref
    return {"s": s, "l": tab.l_values, "ratios": ratios, "max_dev": float(np.max(np.abs(ratios - 1.0)))}



# ---------------------------------------------------------------------------
# discrete Painleve II


@dataclass(frozen=True)
class PainleveSequence:
    """``v(L, s)`` for ``s = -1/2, 1/2, ...`` with determinant cross-checks.

    ``cross_check[i]`` is ``|1 - v(s_i)**2 - Q(s_i+1) Q(s_i-1) / Q(s_i)**2|``.
    ``horizon`` is the last ``s`` whose cross-check met the tolerance; when the
    forward iteration loses accuracy ``halted`` is set and ``blowup_index``
    records the first failing position.

    The cross-check compares ``v**2`` in absolute terms, so it stays small
    long after ``v`` itself (which decays quickly in ``s``) has lost its
    relative accuracy.  ``error_bound[i]`` is a first-order bound on the
    accumulated rounding error of ``v(s_i)``, obtained by propagating the
    local rounding through the linearised recursion, and
    :meth:`stable_horizon` combines both criteria.
    """

    L: float
    s_values: tuple
    v: np.ndarray
    cross_check: np.ndarray
    horizon: HalfInt
    halted: bool
    blowup_index: int | None
    tolerance: float
    error_bound: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def stable_horizon(self, tol: float | None = None) -> HalfInt:
        """Last ``s`` up to which the cross-check and the rounding bound both stay within ``tol``."""
        tol = self.tolerance if tol is None else tol
        last = self.s_values[0]
        for s, c, e in zip(self.s_values, self.cross_check, self.error_bound):
            if not (c <= tol and e <= tol):
                break
            last = s
        return last

    def value(self, s) -> float:
        s = as_halfint(s)
        return float(self.v[(s.twice + 1) // 2])


def _dpii_values(L: float, n_steps: int) -> np.ndarray:
    """Forward dPII iteration from ``v(-1/2) = 1``, ``v(1/2) = -I_1/I_0``."""
    i01 = bessel_i_row(2.0 * L, 1)
    v = np.empty(n_steps + 2)
    v[0] = 1.0
    v[1] = -i01[1] / i01[0]
    for k in range(1, n_steps + 1):
        s = k - 0.5
        denom = L * (v[k] ** 2 - 1.0)
        if denom == 0.0:
            raise DegenerateDeterminantError(f"v({s})**2 = 1 stops the recursion")
        v[k + 1] = (s + 0.5) * v[k] / denom - v[k - 1]
    return v


def _dpii_error_bound(L: float, v: np.ndarray) -> np.ndarray:
    """First-order bound on the rounding error of the forward recursion.

    Perturbing ``v(s)`` by ``d`` moves ``v(s+1)`` by ``A d`` with
    ``A = -(s+1/2)(v**2 + 1) / (L (v**2 - 1)**2)``; each step also adds a
    few ulps of the computed terms.  The initial value ``v(1/2)`` carries one
    rounding.
    """
    u = float(np.finfo(float).eps)
    e = np.zeros(len(v))
    if len(v) > 1:
        e[1] = u * abs(v[1])
    for k in range(1, len(v) - 1):
        s = k - 0.5
        w = v[k] ** 2 - 1.0
        gain = (s + 0.5) * (v[k] ** 2 + 1.0) / (L * w * w)
        local = 2.0 * u * (abs((s + 0.5) * v[k] / (L * w)) + abs(v[k - 1]))
        e[k + 1] = gain * e[k] + e[k - 1] + local
    return e


def dpii_sequence(L: float, s_max, eps: float = DEFAULT_EPS, halt_tol: float = 1e-6) -> PainleveSequence:
    """Iterate discrete Painleve II and cross-check against determinant ratios.

    Iteration halts (flagged) at the first ``s`` whose cross-check exceeds
    ``halt_tol``; values computed up to there are kept.
    """
    L = float(L)
    s_max = as_halfint(s_max)
    if s_max.twice < -1:
        raise ParameterOutOfRange("s_max must be at least -1/2")
    n = (s_max.twice + 1) // 2  # index of s_max
    v = _dpii_values(L, max(n, 1))[: n + 1]
    s_values = tuple(HalfInt(2 * k - 1) for k in range(n + 1))
    checks = []
    halted = False
    blowup = None
    for k, s in enumerate(s_values):
        c = abs(1.0 - v[k] ** 2 - _q_ratio(L, s, _INDICATOR, eps))
        checks.append(c)
        if not c <= halt_tol:
            halted, blowup = True, k
            break
    m = len(checks)
    good = m - 1 if not halted else blowup - 1
    horizon = s_values[max(good, 0)]
    return PainleveSequence(
        L=L,
        s_values=s_values[:m],
        v=v[:m],
        cross_check=np.array(checks),
        horizon=horizon,
        halted=halted,
        blowup_index=blowup,
        tolerance=halt_tol,
        error_bound=_dpii_error_bound(L, v)[:m],
    )


def volterra_residual(L: float, s, h: float = 1e-3) -> float:
    """``|dv/dL - (1 - v**2)(v(s+1) - v(s-1))|`` with ``v`` from the recursion at ``L``, ``L +- h``, ``L +- 2h``."""
    s = as_halfint(s)
    if s.twice == -1:
        return 0.0
    k = (s.twice + 1) // 2
    if k < 0:
        raise ParameterOutOfRange("the recursion starts at s = -1/2")

    def v_at(x):
        return _dpii_values(x, k + 1)

    dv = _d1(lambda x: v_at(x)[k], L, h)
    vv = v_at(L)
    return abs(dv - (1.0 - vv[k] ** 2) * (vv[k + 1] - vv[k - 1]))


def lax_residuals(L: float, s, sigma: SigmaProfile, h: float = 1e-3, eps: float = DEFAULT_EPS) -> dict:
    """Residuals of the two Lax compatibility relations.

    ``d a(s)/dL = a(s)/2 (b(s+1) - b(s))`` and
    ``d b(s)/dL = 4 (a(s)**2 - a(s-1)**2) - b(s)/L``, with ``b`` from the RH
    route and ``L``-derivatives by five-point stencils.
    """
    s = as_halfint(s)
    if sigma.is_zero:
        return {"res_a": 0.0, "res_b": 0.0}
    da = _d1(lambda x: frak_a(x, s, sigma, eps), L, h)
    db = _d1(lambda x: frak_b_rh(x, s, sigma, eps), L, h)
    a_s = frak_a(L, s, sigma, eps)
    a_dn = frak_a(L, s - 1, sigma, eps)
    b_s = frak_b_rh(L, s, sigma, eps)
    b_up = frak_b_rh(L, s + 1, sigma, eps)
    return {
        "res_a": abs(da - a_s / 2.0 * (b_up - b_s)),
        "res_b": abs(db - (4.0 * (a_s**2 - a_dn**2) - b_s / L)),
    }

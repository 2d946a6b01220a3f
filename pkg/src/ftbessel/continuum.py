"""Scaling diagnostics: the discrete Toda identity approaching bilinear KdV.

Under ``L = 1/(eps**3 t**2)`` and ``s = 2/(eps**3 t**2) - x/(eps t)`` the log of
``F(x, t; eps) = Q_sigma(L, s)`` should satisfy, as ``eps -> 0``,

    d_t d_x f + (x/t) d_x^2 f + (d_x^2 f)**2 + (1/6) d_x^4 f = 0.

Only lattice values of ``s`` exist, so every evaluation is made at the lattice
point nearest to the requested ``x`` and the induced ``x`` is recorded; all
``x``-derivatives are then taken from those lattice-induced nodes with exact
finite-difference weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterOutOfRange, ResourceLimitError
from .fredholm import DEFAULT_EPS, gap_probability
from .integrable import toda_residual
from .lattice import HalfInt, SigmaProfile

__all__ = [
    "ScalingPoint",
    "MAX_L",
    "scale_point",
    "fermi_family",
    "fd_weights",
    "x_derivatives",
    "kdv_residual",
    "kdv_residual_diagnostic",
    "KdvReport",
]

#: Largest ``L`` the diagnostics will evaluate (window sizes grow like ``4L``).
MAX_L = 400.0


@dataclass(frozen=True)
class ScalingPoint:
    """A point ``(x, t)`` mapped to the lattice at scale ``eps``."""

    x: float
    t: float
    epsilon: float
    L: float
    s: HalfInt
    rounding_shift: float

    @property
    def x_lattice(self) -> float:
        """The ``x`` that the chosen ``s`` corresponds to exactly."""
        return (2.0 * self.L - float(self.s)) * self.epsilon * self.t


def scale_point(x: float, t: float, epsilon: float) -> ScalingPoint:
    """Map ``(x, t)`` to ``(L, s)``; ``s`` is the nearest point of Z' and the shift is kept."""
    if not (t > 0 and epsilon > 0):
        raise ParameterOutOfRange("t and epsilon must be positive")
    L = 1.0 / (epsilon**3 * t**2)
    if L > MAX_L:
        raise ResourceLimitError(f"L = {L:.4g} exceeds MAX_L = {MAX_L}")
    s_exact = 2.0 * L - x / (epsilon * t)
    s = HalfInt.nearest(s_exact)
    return ScalingPoint(float(x), float(t), float(epsilon), L, s, float(s) - s_exact)


def fermi_family(epsilon: float, kappa: float = 1.0) -> SigmaProfile:
    """``sigma_eps(l) = 1 / (1 + exp(-kappa * eps * l))``, i.e. fermi with ``u = exp(-kappa eps)``."""
    return SigmaProfile.fermi(math.exp(-kappa * epsilon))


def fd_weights(nodes, x0: float, order: int) -> np.ndarray:
    """Finite-difference weights for the ``order``-th derivative at ``x0`` (Fornberg's recursion)."""
    z = np.asarray(nodes, dtype=float)
    n = len(z)
    if order >= n:
        raise ParameterOutOfRange(f"need more than {order} nodes")
    c = np.zeros((n, order + 1))
    c1, c4 = 1.0, z[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2, c5, c4 = 1.0, c4, z[i] - x0
        for j in range(i):
            c3 = z[i] - z[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def _log_f(L: float, s: HalfInt, sigma: SigmaProfile, eps: float) -> float:
    res = gap_probability(L, s, sigma, eps)
    if res.below_floor:
        raise ParameterOutOfRange(f"Q({L:.4g}, {s}) is below its error floor")
    return res.log_q


def x_derivatives(
    x: float, t: float, epsilon: float, sigma: SigmaProfile, half_width: int = 4, eps: float = DEFAULT_EPS
) -> dict:
    """``d_x^k log F`` at ``x`` for ``k = 1, 2, 4``, from ``2*half_width + 1`` lattice nodes.

    Keys ``1, 2, 4`` hold the derivatives; ``"noise1"`` etc. bound their
    rounding error from the reported ``log_err`` of the nodes.

    At fixed ``t`` the lattice points ``s0 - k`` correspond to the uniform
    grid ``x_lattice + k * eps * t``; weights are computed for the requested
    ``x``, which may sit between nodes.
    """
    p = scale_point(x, t, epsilon)
    ks = np.arange(-half_width, half_width + 1)
    nodes = p.x_lattice + ks * epsilon * t
    results = [gap_probability(p.L, p.s - int(k), sigma, eps) for k in ks]
    if any(r.below_floor for r in results):
        raise ParameterOutOfRange(f"a stencil node at L = {p.L:.4g} is below its error floor")
    vals = np.array([r.log_q for r in results])
    delta = max(r.log_err for r in results)
    out = {}
    for order in (1, 2, 4):
        w = fd_weights(nodes, x, order)
        out[order] = float(w @ vals)
        out[f"noise{order}"] = float(np.sum(np.abs(w)) * delta)
    return out


def kdv_residual(
    x: float,
    t: float,
    epsilon: float,
    sigma: SigmaProfile | None = None,
    dt_factor: float = 0.25,
    eps: float = DEFAULT_EPS,
) -> dict:
    """Bilinear KdV combination of ``log F`` at one ``(x, t, eps)``.

    ``d_t d_x`` uses a five-point stencil in ``t`` with step ``dt_factor * eps * t``
    applied to lattice ``x``-derivatives at each ``t`` node.  ``noise`` bounds
    the rounding contribution to ``residual``; ``noisy`` flags points where it
    exceeds the residual itself, i.e. the stencil is too fine for the lattice.
    """
    sigma = fermi_family(epsilon) if sigma is None else sigma
    if sigma.is_zero:
        return {"residual": 0.0, "dx2": 0.0, "dx4": 0.0, "dtdx": 0.0, "toda_gap": 0.0,
                "noise": 0.0, "noisy": False}
    dt = dt_factor * epsilon * t
    d = x_derivatives(x, t, epsilon, sigma, eps=eps)
    g = {j: x_derivatives(x, t + j * dt, epsilon, sigma, eps=eps) for j in (-2, -1, 1, 2)}
    dtdx = (-g[2][1] + 8 * g[1][1] - 8 * g[-1][1] + g[-2][1]) / (12 * dt)
    residual = dtdx + (x / t) * d[2] + d[2] ** 2 + d[4] / 6.0
    noise = (
        18.0 * max(v["noise1"] for v in g.values()) / (12 * dt)
        + (abs(x / t) + 2.0 * abs(d[2])) * d["noise2"]
        + d["noise4"] / 6.0
    )

    # discrete Toda right side minus its two leading continuum terms, scaled by eps^4
    p = scale_point(x, t, epsilon)
    f0 = _log_f(p.L, p.s, sigma, eps)
    rhs = 4.0 * math.exp(_log_f(p.L, p.s + 1, sigma, eps) + _log_f(p.L, p.s - 1, sigma, eps) - 2 * f0)
    gap = (rhs - 4.0 - 4.0 * (epsilon * t) ** 2 * d[2]) / epsilon**4
    return {
        "residual": float(residual),
        "dx2": d[2],
        "dx4": d[4],
        "dtdx": float(dtdx),
        "toda_gap": float(gap),
        "noise": float(noise),
        "noisy": bool(noise > abs(residual)),
    }


@dataclass(frozen=True)
class KdvReport:
    """Per-``eps`` KdV residuals with the scaled Toda expansion gap."""

    x: float
    t: float
    epsilons: tuple
    residuals: tuple
    toda_gaps: tuple
    toda_anchor: tuple
    points: tuple
    noise: tuple = ()
    noisy: tuple = ()
    q_values: tuple = ()

    @property
    def decreasing(self) -> bool:
        r = [abs(v) for v in self.residuals]
        return all(r[i + 1] < r[i] for i in range(len(r) - 1))

    def csv_rows(self) -> list[dict]:
        rows = []
        for e, r, p, q in zip(self.epsilons, self.residuals, self.points, self.q_values):
            rows.append({"x": repr(self.x), "t": repr(self.t), "epsilon": repr(e), "L": repr(p.L),
                         "s": repr(float(p.s)), "q": repr(q), "kdv_residual": repr(r)})
        return rows


def kdv_residual_diagnostic(
    x: float = 0.0,
    t: float = 1.0,
    epsilon_list=(0.4, 0.3, 0.2),
    family=fermi_family,
    anchor_h: float | None = None,
    eps: float = DEFAULT_EPS,
) -> KdvReport:
    """Evaluate :func:`kdv_residual` over decreasing ``eps`` for the profile family ``family(eps)``.

    ``toda_anchor`` holds the exact discrete Toda residual at the central node
    for each ``eps``, which must stay at determinant accuracy regardless of ``eps``.
    """
    eps_list = tuple(sorted((float(e) for e in epsilon_list), reverse=True))
    res, gaps, anchors, pts, noise, noisy, qs = [], [], [], [], [], [], []
    for e in eps_list:
        sigma = family(e)
        out = kdv_residual(x, t, e, sigma, eps=eps)
        p = scale_point(x, t, e)
        h = anchor_h if anchor_h is not None else 1e-2 * math.sqrt(p.L)
        res.append(out["residual"])
        gaps.append(out["toda_gap"])
        anchors.append(toda_residual(p.L, p.s, sigma, h, eps) if not sigma.is_zero else 0.0)
        pts.append(p)
        noise.append(out["noise"])
        noisy.append(out["noisy"])
        qs.append(gap_probability(p.L, p.s, sigma, eps).q)
    return KdvReport(float(x), float(t), eps_list, tuple(res), tuple(gaps), tuple(anchors), tuple(pts),
                     tuple(noise), tuple(noisy), tuple(qs))

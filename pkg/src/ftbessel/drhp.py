r"""Discrete Riemann-Hilbert problem for the gap probability, solved as a linear system.

On the window of :func:`~ftbessel.kernels.build_M` we set

.. math::

    \hat f(a) = \tilde\sigma(a) \begin{pmatrix} J_{a-1/2} \\ L J_{a+1/2} \end{pmatrix},
    \qquad
    \hat g(a) = \frac{1}{1 - M_s(a,a)} \begin{pmatrix} L J_{a+1/2} \\ -J_{a-1/2} \end{pmatrix},

so that :math:`\hat g(a)^T \hat f(a) = 0` and
:math:`\hat g(b)^T \hat f(a) / (a - b) = \tilde\sigma(a) K^{Be}(a,b) / (1 - M_s(b,b))`.
The residue vectors solve :math:`r(a) - \sum_{b \ne a} r(b)\, \hat g(b)^T \hat f(a)/(a-b) = \hat f(a)`
and the solution of the jump problem is the partial fraction

.. math::

    Y(z) = I + \sum_b \frac{r(b) \hat g(b)^T}{z - b}.

The coefficient of :math:`1/z` at infinity is the exact residue sum, whose
entries are :math:`\alpha, \beta, \gamma`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDeterminantError, ParameterOutOfRange, PoleEvaluationError
from .fredholm import DEFAULT_EPS, gap_probability
from .kernels import KernelMatrix, build_M
from .lattice import HalfInt, SigmaProfile, as_halfint

__all__ = [
    "RHSolution",
    "MAX_CONDITION",
    "build_C",
    "build_D",
    "solve_rhp",
    "solve_rhp_neumann",
    "eval_Y",
    "central_log_derivative",
    "verify_variational",
]

#: Condition number of ``I - C`` above which the system is reported as degenerate.
MAX_CONDITION = 1e12


def _window(L, s, sigma, N, eps) -> KernelMatrix:
    if N is None:
        return build_M(s, L, sigma, eps)
    if N <= 0:
        raise ParameterOutOfRange(f"window half-width N must be positive, got {N}")
    return build_M(s, L, sigma, eps, window=(HalfInt(-2 * int(N) + 1), HalfInt(2 * int(N) - 1)))


def _hat_vectors(km: KernelMatrix) -> tuple[np.ndarray, np.ndarray]:
    L = km.L
    fhat = km.sigma_tilde[:, None] * np.stack([km.jm, L * km.jp], axis=1)
    ghat = np.stack([L * km.jp, -km.jm], axis=1) / km.one_minus_diag[:, None]
    return fhat, ghat


def build_C(km: KernelMatrix) -> np.ndarray:
    """Scalar kernel ``C[a, b] = ghat(b)^T fhat(a) / (a - b)`` (zero on the diagonal)."""
    n = km.size
    if n == 0:
        return np.zeros((0, 0))
    C = km.sigma_tilde[:, None] * km.kbe / km.one_minus_diag[None, :]
    C[np.diag_indices(n)] = 0.0
    return C


def build_D(L: float, s, sigma: SigmaProfile, N: int | None = None, eps: float = DEFAULT_EPS) -> np.ndarray:
    """Matrix of the operator ``D`` on 2-vector fields over the window.

    Ordering is point-major: entry ``(2i + p, 2j + q)`` couples component ``q``
    at point ``j`` to component ``p`` at point ``i``; ``D = C kron I_2``.
    """
    km = _window(L, as_halfint(s), sigma, N, eps)
    if np.any(km.one_minus_diag <= 0.0):
        raise DegenerateDeterminantError("1 - M_s(a, a) vanishes on the window")
    return np.kron(build_C(km), np.eye(2))


@dataclass(frozen=True, eq=False)
class RHSolution:
    """Solved residue data for ``Y`` at one ``(L, s)``."""

    L: float
    s: HalfInt
    sigma_id: str
    points: np.ndarray
    fhat: np.ndarray
    ghat: np.ndarray
    r: np.ndarray
    alpha: float
    beta: float
    gamma: float
    residue_sum: np.ndarray
    solver_residual: float
    condition: float
    trunc_err: float
    extra: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.points)

    def residue(self, b) -> np.ndarray:
        """``R_b = r(b) ghat(b)^T``; zero for points outside the window."""
        idx = self._index(float(as_halfint(b)))
        if idx is None:
            return np.zeros((2, 2))
        return np.outer(self.r[idx], self.ghat[idx])

    def _index(self, value: float):
        if self.size == 0:
            return None
        i = int(round(value - self.points[0]))
        if 0 <= i < self.size and self.points[i] == value:
            return i
        return None

    def to_json(self) -> str:
        return json.dumps(
            {
                "L": self.L,
                "s": str(self.s),
                "sigma_id": self.sigma_id,
                "alpha": self.alpha,
                "beta": self.beta,
                "gamma": self.gamma,
                "solver_residual": self.solver_residual,
                "condition": self.condition,
                "trunc_err": self.trunc_err,
                "residues": [
                    {"a": str(HalfInt(int(round(2 * a)))), "r": list(map(float, ri)), "ghat": list(map(float, gi))}
                    for a, ri, gi in zip(self.points, self.r, self.ghat)
                ],
            },
            sort_keys=True,
        )


def _package(km, fhat, ghat, r, resid, cond, sigma) -> RHSolution:
    R = r.T @ ghat if km.size else np.zeros((2, 2))
    return RHSolution(
        L=km.L,
        s=km.s,
        sigma_id=sigma.sigma_id,
        points=km.points,
        fhat=fhat,
        ghat=ghat,
        r=r,
        alpha=float(R[0, 0]),
        beta=float(R[0, 1]),
        gamma=float(R[1, 0]),
        residue_sum=R,
        solver_residual=resid,
        condition=cond,
        trunc_err=km.trunc_err,
    )


def solve_rhp(
    L: float, s, sigma: SigmaProfile, N: int | None = None, eps: float = DEFAULT_EPS
) -> RHSolution:
    """Solve ``(I - D) r = fhat`` by a dense factorisation and extract ``alpha, beta, gamma``.

    Parameters
    ----------
    L : float
        Positive parameter.
    s : HalfInt or str
        Lattice shift.
    sigma : SigmaProfile
        Filling function.
    N : int, optional
        Use the window ``[-N + 1/2, N - 1/2]`` instead of the certified automatic one.
    eps : float
        Truncation target for the automatic window.

    Raises
    ------
    DegenerateDeterminantError
        If the condition number of ``I - C`` exceeds :data:`MAX_CONDITION`,
        the numerical counterpart of a vanishing gap probability.
    """
    s = as_halfint(s)
    km = _window(float(L), s, sigma, N, eps)
    if km.size == 0:
        z = np.zeros((0, 2))
        return _package(km, z, z, z, 0.0, 1.0, sigma)
    if np.any(km.one_minus_diag <= 0.0):
        raise DegenerateDeterminantError("1 - M_s(a, a) vanishes on the window")
    fhat, ghat = _hat_vectors(km)
    A = np.eye(km.size) - build_C(km)
    cond = float(np.linalg.cond(A))
    if not cond < MAX_CONDITION:
        raise DegenerateDeterminantError(
            f"determinant vanishes numerically at L={L}, s={s} (condition {cond:.3g})"
        )
    r = np.linalg.solve(A, fhat)
    resid = float(np.max(np.abs(A @ r - fhat)))
    return _package(km, fhat, ghat, r, resid, cond, sigma)


def solve_rhp_neumann(
    L: float,
    s,
    sigma: SigmaProfile,
    N: int | None = None,
    eps: float = DEFAULT_EPS,
    tol: float = 1e-14,
    max_iter: int = 500,
) -> RHSolution:
    """Same problem by the Neumann iteration ``r <- fhat + C r``.

    Only converges when the spectral radius of ``C`` is below one, which holds
    for small ``L``; meant as an independent check of :func:`solve_rhp`.
    """
    s = as_halfint(s)
    km = _window(float(L), s, sigma, N, eps)
    if km.size == 0:
        z = np.zeros((0, 2))
        return _package(km, z, z, z, 0.0, 1.0, sigma)
    fhat, ghat = _hat_vectors(km)
    C = build_C(km)
    r = fhat.copy()
    for _ in range(max_iter):
        nxt = fhat + C @ r
        step = float(np.max(np.abs(nxt - r)))
        r = nxt
        if step <= tol:
            break
    else:
        raise DegenerateDeterminantError(f"Neumann series did not converge in {max_iter} steps")
    resid = float(np.max(np.abs(r - C @ r - fhat)))
    return _package(km, fhat, ghat, r, resid, math.nan, sigma)


def eval_Y(sol: RHSolution, z, regularize: bool = False) -> np.ndarray:
    """Evaluate ``Y(z) = I + sum_b R_b / (z - b)``.

    Parameters
    ----------
    sol : RHSolution
    z : complex
        Evaluation point.
    regularize : bool
        If ``z`` is a window point, drop its own pole term and return the
        regular part; otherwise such a ``z`` raises.

    Raises
    ------
    PoleEvaluationError
        If ``z`` coincides with a window point and ``regularize`` is false.
        Use :meth:`RHSolution.residue` for the residue there.
    """
    z = complex(z)
    Y = np.eye(2, dtype=complex)
    if sol.size == 0:
        return Y
    diff = z - sol.points
    hit = diff == 0
    if np.any(hit):
        if not regularize:
            raise PoleEvaluationError(f"Y has a pole at z={z.real}; use RHSolution.residue")
        diff = np.where(hit, 1.0, diff)
    w = np.where(hit, 0.0, 1.0 / diff)
    Y += (sol.r * w[:, None]).T @ sol.ghat
    return Y


def central_log_derivative(L: float, s, sigma: SigmaProfile, h: float = 1e-3, eps: float = DEFAULT_EPS) -> float:
    """``d/dL log Q(L, s)`` by central differences at ``h`` and ``h/2``, Richardson-extrapolated."""
    def d(step):
        up = gap_probability(L + step, s, sigma, eps).log_q
        dn = gap_probability(L - step, s, sigma, eps).log_q
        return (up - dn) / (2.0 * step)

    return (4.0 * d(h / 2.0) - d(h)) / 3.0


def verify_variational(
    L: float,
    s,
    sigma: SigmaProfile,
    N: int | None = None,
    h: float = 1e-3,
    eps: float = DEFAULT_EPS,
) -> dict:
    """Residuals of the three identities tying ``alpha, beta, gamma`` to ``Q``.

    Returns
    -------
    dict
        ``res_beta = |Q(s-1)/Q(s) - 1 - beta(s)|``,
        ``res_alpha = |d/dL log Q(s) + 2 alpha(s) / L|`` and
        ``res_det_relation = |(1 + beta(s+1)) (L^2 + gamma(s)) - L^2|``.

    Only ``Q(s)`` must be above its error floor; ``Q(s-1) = 0`` is allowed.
    """
    s = as_halfint(s)
    if sigma.is_zero:
        return {"res_beta": 0.0, "res_alpha": 0.0, "res_det_relation": 0.0}
    here = gap_probability(L, s, sigma, eps)
    below = gap_probability(L, s - 1, sigma, eps)
    if here.below_floor:
        raise DegenerateDeterminantError(f"Q({L}, {s}) is within its error floor")
    sol = solve_rhp(L, s, sigma, N, eps)
    sol_up = solve_rhp(L, s + 1, sigma, N, eps)
    # Q(s-1) may vanish (indicator at s = -1/2); the ratio is then 0 up to floor/Q(s)
    ratio = 0.0 if below.q == 0.0 else math.exp(below.log_q - here.log_q)
    return {
        "res_beta": abs(ratio - 1.0 - sol.beta),
        "res_alpha": abs(central_log_derivative(L, s, sigma, h, eps) + 2.0 * sol.alpha / L),
        "res_det_relation": abs((1.0 + sol_up.beta) * (L * L + sol.gamma) - L * L),
    }

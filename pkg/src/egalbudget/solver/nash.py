"""Nash welfare: maximize sum_i log u_i(x) over the budget simplex.

Optimality is certified per project: with g_j = sum over approvers i of 1/u_i,
an optimum has g_j <= n everywhere and g_j = n on every funded project.
"""

from __future__ import annotations

import numpy as np

from ..core import Instance, as_distribution
from .simplex import SolverError

CERT_TOL = 1e-6
FUNDED = 1e-8
# coordinates this small that the Newton step wants to shrink are dropped outright
_NEGLIGIBLE = 1e-12


class NashConvergenceError(SolverError):
    def __init__(self, x: np.ndarray, residual: float, iterations: int):
        super().__init__(f"Nash solver stopped after {iterations} iterations "
                         f"with certificate residual {residual:.3g}")
        self.x = x
        self.residual = residual


def kkt_gradient(inst: Instance, x) -> np.ndarray:
    """g_j = sum_{i approving j} 1/u_i(x)."""
    u = inst.incidence @ np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return inst.incidence.T @ (1.0 / u)


def kkt_residual(inst: Instance, x, funded: float = FUNDED) -> float:
    """Largest violation of g_j <= n (all j) and g_j = n (funded j); divide by n for a relative figure."""
    x = as_distribution(x, inst.m)
    g = kkt_gradient(inst, x)
    n = inst.n
    over = float(np.max(g - n))
    on = x > funded
    gap = float(np.max(np.abs(g[on] - n))) if on.any() else 0.0
    return max(over, gap)


def _objective(A, x):
    u = A @ x
    if np.any(u <= 0):
        return -np.inf
    return float(np.sum(np.log(u)))


def _gap(A, x):
    g = A.T @ (1.0 / (A @ x))
    n = A.shape[0]
    return max(float(g.max() - n), float(np.abs(g[x > 0] - n).max()))


def _newton_direction(A, x, S, g):
    """Equality-constrained Newton step on the face spanned by ``S``."""
    B = A[:, S]
    u = A @ x
    H = -(B.T * (1.0 / u ** 2)) @ B
    k = len(S)
    K = np.zeros((k + 1, k + 1))
    K[:k, :k] = H
    K[:k, k] = 1.0
    K[k, :k] = 1.0
    rhs = np.concatenate([-g[S], [0.0]])
    sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    d = sol[:k]
    return d - d.sum() / k


def nash_solve(inst: Instance, tol: float = 1e-10, max_iter: int = 100_000) -> np.ndarray:
    """Maximize the Nash product; the returned point passes :func:`kkt_residual` at ``n * 1e-6``.

    Starts at the equal-shares distribution, takes multiplicative-weights
    steps to settle the support, then polishes with active-set Newton steps.
    Falls back to a Frank-Wolfe step toward the steepest project whenever
    Newton cannot make progress.
    """
    A = inst.incidence
    n, m = A.shape
    x = (A / A.sum(axis=1, keepdims=True)).sum(axis=0) / n

    for _ in range(50):
        g = A.T @ (1.0 / (A @ x))
        x = x * g / n
        x /= x.sum()

    target = tol * n
    it = 0
    for it in range(1, max_iter + 1):
        g = A.T @ (1.0 / (A @ x))
        drop = (x > 0) & (x <= _NEGLIGIBLE) & (g < n)
        if drop.any():
            x[drop] = 0.0
            x /= x.sum()
            g = A.T @ (1.0 / (A @ x))
        support = x > 0
        over = g.max() - n
        gap = np.abs(g[support] - n).max()
        if max(over, gap) <= target:
            break
        f0 = _objective(A, x)
        S = list(np.flatnonzero(support))
        if over > target:
            S.append(int(np.argmax(g)))
            S = sorted(set(S))
        d = None
        while S:
            d = _newton_direction(A, x, S, g)
            stuck = {s for s, dj in zip(S, d) if x[s] <= _NEGLIGIBLE and dj < 0}
            if not stuck:
                break
            S = [s for s in S if s not in stuck]
            x[list(stuck)] = 0.0
            x /= x.sum()
            d = None
        xn = _newton_line_search(A, x, S, d, g, f0) if d is not None else None
        x = xn if xn is not None else _frank_wolfe_step(A, x, g)
    else:
        res = kkt_residual(inst, x)
        raise NashConvergenceError(x, res, max_iter)

    res = kkt_residual(inst, x)
    if res > n * CERT_TOL:
        raise NashConvergenceError(x, res, it)
    return x


def _newton_line_search(A, x, S, d, g, f0):
    """Armijo backtracking along ``d`` on the face ``S``; returns the new point or None."""
    slope = float(g[S] @ d)
    if slope <= 0:
        return None
    S = np.asarray(S)
    neg = d < 0
    limits = -x[S][neg] / d[neg]
    amax = float(limits.min()) if neg.any() else np.inf
    alpha = min(1.0, amax)
    while alpha > 1e-14:
        xn = x.copy()
        xn[S] += alpha * d
        if alpha == amax:
            xn[S[neg][limits <= amax]] = 0.0
        xn = np.clip(xn, 0.0, None)
        xn /= xn.sum()
        f = _objective(A, xn)
        if f >= f0 + 1e-4 * alpha * slope:
            return xn
        # below float resolution of f: judge the step by the stationarity gap instead
        if np.isfinite(f) and slope < 1e-10 and _gap(A, xn) < _gap(A, x):
            return xn
        alpha *= 0.5
    return None


def _frank_wolfe_step(A, x, g):
    """Line search toward the project with the largest gradient, else a multiplicative step."""
    j = int(np.argmax(g))
    d = -x.copy()
    d[j] += 1.0
    # the derivative along d is decreasing in a; bisect for its root
    Ad = A @ d
    u = A @ x
    lo, hi = 0.0, 1.0

    def deriv(a):
        with np.errstate(divide="ignore", invalid="ignore"):
            return float(np.sum(Ad / (u + a * Ad)))
    if deriv(0.0) <= 0:
        # no ascent toward the best vertex: move funded mass proportionally (multiplicative step)
        xn = x * g / A.shape[0]
        return xn / xn.sum()
    if deriv(hi) > 0 and np.all(u + Ad > 0):
        a = 1.0
    else:
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if np.all(u + mid * Ad > 0) and deriv(mid) > 0:
                lo = mid
            else:
                hi = mid
        a = lo
    xn = np.clip(x + a * d, 0.0, None)
    return xn / xn.sum()

"""Brute-force reference implementations used to cross-check the library.

Everything here works from the raw approval sets with exact rationals and
shares no code with the package beyond the Instance container.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, combinations_with_replacement

import numpy as np


def subsets(items, min_size=1):
    items = list(items)
    for k in range(min_size, len(items) + 1):
        yield from combinations(items, k)


def grid(m: int, steps: int):
    """Integer compositions of ``steps`` into ``m`` non-negative parts."""
    if m == 1:
        yield (steps,)
        return
    for first in range(steps + 1):
        for rest in grid(m - 1, steps - first):
            yield (first,) + rest


def frac_dist(parts, steps):
    return [Fraction(p, steps) for p in parts]


def util(approvals, i, x):
    return sum(x[j] for j in approvals[i])


def ifs_ok(approvals, x):
    n = len(approvals)
    return all(util(approvals, i, x) >= Fraction(1, n) for i in range(n))


def ufs_ok(approvals, x):
    n = len(approvals)
    for i in range(n):
        same = sum(1 for a in approvals if a == approvals[i])
        if util(approvals, i, x) < Fraction(same, n):
            return False
    return True


def gfs_ok(approvals, x):
    """Every coalition's union gets at least its proportional share."""
    n = len(approvals)
    for S in subsets(range(n)):
        union = set().union(*(approvals[i] for i in S))
        if sum(x[j] for j in union) < Fraction(len(S), n):
            return False
    return True


def imp_ok(approvals, x, m):
    """Hall's condition on every project set: x(T) <= |agents approving something in T| / n."""
    n = len(approvals)
    for T in subsets(range(m)):
        reach = sum(1 for a in approvals if a & set(T))
        if sum(x[j] for j in T) > Fraction(reach, n):
            return False
    return True


def afs_ok(approvals, x):
    n = len(approvals)
    for S in subsets(range(n)):
        if not set.intersection(*(set(approvals[i]) for i in S)):
            continue
        if sum(util(approvals, i, x) for i in S) < Fraction(len(S) ** 2, n):
            return False
    return True


def cfs_blocked_on_grid(approvals, parts, x_steps, m, steps):
    """Some coalition S and some z on the 1/steps grid of budget |S|/n improve every member strictly.

    ``x = parts / x_steps``.  The comparison |S|/n * C_i/steps > X_i/x_steps is
    done in integers, so the verdict is exact for the grid.
    """
    n = len(approvals)
    inc = np.array([[1 if j in a else 0 for j in range(m)] for a in approvals], dtype=np.int64)
    X = inc @ np.asarray(parts, dtype=np.int64)
    C = np.array(list(grid(m, steps)), dtype=np.int64) @ inc.T  # grid point utilities, scaled by steps
    for S in subsets(range(n)):
        S = list(S)
        lhs = len(S) * C[:, S] * x_steps
        rhs = n * steps * X[S]
        if np.any(np.all(lhs > rhs, axis=1)):
            return True
    return False


def maxmin_by_grid(approvals, m, steps):
    """Best minimum utility over the 1/steps grid (a lower bound on sw*)."""
    best = Fraction(0)
    for c in grid(m, steps):
        x = frac_dist(c, steps)
        best = max(best, min(util(approvals, i, x) for i in range(len(approvals))))
    return best


def lp_by_vertices(c, A, b):
    """max c.x s.t. A x <= b, x >= 0, by enumerating every basic solution (tiny LPs only).

    Returns None when no vertex is feasible.  Callers keep the region bounded.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    nv = len(c)
    G = np.vstack([A, -np.eye(nv)])
    h = np.concatenate([b, np.zeros(nv)])
    best = None
    for rows in combinations(range(len(G)), nv):
        M = G[list(rows)]
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        v = np.linalg.solve(M, h[list(rows)])
        if np.all(G @ v <= h + 1e-9):
            val = float(c @ v)
            if best is None or val > best:
                best = val
    return best


def exhaustive_profiles(max_n: int, max_m: int):
    """Every approval profile up to agent relabeling: multisets of non-empty subsets."""
    for m in range(1, max_m + 1):
        sets = [frozenset(s) for s in subsets(range(m))]
        for n in range(1, max_n + 1):
            for idx in combinations_with_replacement(range(len(sets)), n):
                yield m, [sets[k] for k in idx]


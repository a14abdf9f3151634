"""Dense two-phase simplex with Bland's anti-cycling rule.

Problems here have at most a few dozen rows and columns, so a dense tableau
is adequate.  ``exact=True`` runs the same pivots over :class:`fractions.Fraction`
with zero tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

FEAS_TOL = 1e-8
_PIVOT_TOL = 1e-10
_COST_TOL = 1e-11
_PHASE1_TOL = 1e-9

RELATIONS = ("<=", "==", ">=")


class SolverError(RuntimeError):
    """Numerical failure inside an optimization kernel."""


@dataclass
class LinearProgram:
    """``max objective @ x`` subject to ``A[r] @ x  relations[r]  rhs[r]`` and ``lower <= x <= upper``.

    Bounds default to ``0 <= x < inf``; use ``-inf`` / ``inf`` for free directions.
    """

    objective: Sequence
    A: Sequence[Sequence] = ()
    relations: Sequence[str] = ()
    rhs: Sequence = ()
    lower: Sequence | None = None
    upper: Sequence | None = None

    def __post_init__(self):
        nv = len(self.objective)
        if nv == 0:
            raise ValueError("LP needs at least one variable")
        if not (len(self.A) == len(self.relations) == len(self.rhs)):
            raise ValueError("A, relations and rhs must have equal length")
        for r, row in enumerate(self.A):
            if len(row) != nv:
                raise ValueError(f"row {r} has width {len(row)}, expected {nv}")
        for rel in self.relations:
            if rel not in RELATIONS:
                raise ValueError(f"unknown relation {rel!r}")
        if self.lower is None:
            self.lower = [0] * nv
        if self.upper is None:
            self.upper = [float("inf")] * nv
        if len(self.lower) != nv or len(self.upper) != nv:
            raise ValueError("bounds must match the variable count")

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    def violation(self, x) -> float:
        """Largest constraint or bound violation at ``x``."""
        x = np.asarray(x, dtype=float)
        worst = 0.0
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        worst = max(worst, float(np.max(lo - x, initial=0.0)), float(np.max(x - hi, initial=0.0)))
        if len(self.A):
            lhs = np.asarray(self.A, dtype=float) @ x
            b = np.asarray(self.rhs, dtype=float)
            for v, rel, rb in zip(lhs, self.relations, b):
                if rel == "<=":
                    worst = max(worst, v - rb)
                elif rel == ">=":
                    worst = max(worst, rb - v)
                else:
                    worst = max(worst, abs(v - rb))
        return worst


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: float | Fraction | None = None
    x: np.ndarray | None = None
    pivots: int = field(default=0, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _is_inf(v) -> bool:
    return isinstance(v, float) and np.isinf(v)


class _Tableau:
    def __init__(self, T, basis, exact):
        self.T = T
        self.basis = basis
        self.exact = exact
        self.pivots = 0
        self.zero = Fraction(0) if exact else 0.0
        self.ptol = 0 if exact else _PIVOT_TOL
        self.ctol = 0 if exact else _COST_TOL

    def pivot(self, r, e, cost):
        T = self.T
        T[r] = T[r] / T[r, e]
        col = T[:, e].copy()
        col[r] = self.zero
        T -= np.outer(col, T[r])
        cost -= cost[e] * T[r]
        if not self.exact:
            rhs = T[:, -1]
            rhs[np.abs(rhs) < 1e-13] = 0.0
        self.basis[r] = e
        self.pivots += 1

    def run(self, cost, allowed: int) -> bool:
        """Minimize; ``cost`` is the reduced-cost row.  Returns False if unbounded."""
        T = self.T
        while True:
            neg = np.flatnonzero(cost[:allowed] < -self.ctol)
            if neg.size == 0:
                return True
            e = int(neg[0])
            colv = T[:, e]
            rows = np.flatnonzero(colv > self.ptol)
            if rows.size == 0:
                return False
            ratios = T[rows, -1] / colv[rows]
            best = ratios.min()
            if self.exact:
                ties = rows[ratios == best]
            else:
                ties = rows[ratios <= best + 1e-12]
            r = min(ties, key=lambda i: self.basis[i])
            self.pivot(int(r), e, cost)
            if self.pivots > 50_000:
                raise SolverError("simplex exceeded 50000 pivots")


def solve_lp(lp: LinearProgram, exact: bool = False) -> LPResult:
    """Solve ``lp``; infeasible and unbounded problems are reported through ``status``."""
    num = Fraction if exact else float

    def conv(v):
        if exact:
            if _is_inf(v):
                return v
            return Fraction(v)
        return float(v)

    nv = lp.num_vars
    c = [conv(v) for v in lp.objective]
    A = [[conv(v) for v in row] for row in lp.A]
    rel = list(lp.relations)
    b = [conv(v) for v in lp.rhs]
    lo = [conv(v) for v in lp.lower]
    hi = [conv(v) for v in lp.upper]
    if not exact:
        for arr in (c, b, *A):
            if not all(np.isfinite(arr)):
                raise ValueError("LP coefficients must be finite")

    # x_k = offset_k + sum(sign * y_col) over its columns
    cols: list[list[tuple[int, int]]] = []
    offsets = []
    ny = 0
    extra_rows = []
    for k in range(nv):
        l, h = lo[k], hi[k]
        if _is_inf(l) and l < 0:
            if _is_inf(h):
                cols.append([(ny, 1), (ny + 1, -1)])
                offsets.append(num(0))
                ny += 2
            else:
                cols.append([(ny, -1)])
                offsets.append(h)
                ny += 1
        else:
            if _is_inf(l):
                raise ValueError(f"variable {k} has lower bound +inf")
            cols.append([(ny, 1)])
            offsets.append(l)
            if not _is_inf(h):
                if h < l:
                    return LPResult("infeasible")
                extra_rows.append((ny, h - l))
            ny += 1

    rows = []
    for r in range(len(A)):
        coeffs = [num(0)] * ny
        shift = num(0)
        for k in range(nv):
            a = A[r][k]
            if a == 0:
                continue
            shift += a * offsets[k]
            for col, sgn in cols[k]:
                coeffs[col] += sgn * a
        rows.append((coeffs, rel[r], b[r] - shift))
    for col, cap in extra_rows:
        coeffs = [num(0)] * ny
        coeffs[col] = num(1)
        rows.append((coeffs, "<=", cap))

    cost_y = [num(0)] * ny
    for k in range(nv):
        for col, sgn in cols[k]:
            cost_y[col] -= sgn * c[k]  # minimize -c.x

    # normalize rhs >= 0
    norm = []
    for coeffs, r_, rb in rows:
        if rb < 0:
            coeffs = [-v for v in coeffs]
            rb = -rb
            r_ = {"<=": ">=", ">=": "<=", "==": "=="}[r_]
        norm.append((coeffs, r_, rb))

    k = len(norm)
    n_slack = sum(1 for _, r_, _ in norm if r_ != "==")
    n_art = sum(1 for _, r_, _ in norm if r_ != "<=")
    width = ny + n_slack + n_art + 1
    dtype = object if exact else float
    T = np.empty((k, width), dtype=dtype)
    T[:] = num(0)
    basis = [0] * k
    s_idx = ny
    a_idx = ny + n_slack
    art_rows = []
    for i, (coeffs, r_, rb) in enumerate(norm):
        T[i, :ny] = coeffs
        T[i, -1] = rb
        if r_ == "<=":
            T[i, s_idx] = num(1)
            basis[i] = s_idx
            s_idx += 1
        else:
            if r_ == ">=":
                T[i, s_idx] = num(-1)
                s_idx += 1
            T[i, a_idx] = num(1)
            basis[i] = a_idx
            art_rows.append(i)
            a_idx += 1

    tab = _Tableau(T, basis, exact)
    first_art = ny + n_slack

    if n_art:
        cost = np.empty(width, dtype=dtype)
        cost[:] = num(0)
        cost[first_art:-1] = num(1)
        for i in art_rows:
            cost -= tab.T[i]
        tab.run(cost, width - 1)
        if -cost[-1] > (0 if exact else _PHASE1_TOL):
            return LPResult("infeasible", pivots=tab.pivots)
        # drive zero-level artificials out of the basis
        keep = []
        for i in range(tab.T.shape[0]):
            if tab.basis[i] >= first_art:
                row = tab.T[i, :first_art]
                cand = np.flatnonzero(np.abs(row) > (0 if exact else _PIVOT_TOL))
                if cand.size:
                    tab.pivot(i, int(cand[0]), cost)
                    keep.append(i)
            else:
                keep.append(i)
        tab.T = np.concatenate([tab.T[keep, :first_art], tab.T[keep, -1:]], axis=1)
        tab.basis = [tab.basis[i] for i in keep]
        width = first_art + 1

    cost = np.empty(width, dtype=dtype)
    cost[:] = num(0)
    cost[:ny] = cost_y
    for i, bi in enumerate(tab.basis):
        if cost[bi] != 0:
            cost -= cost[bi] * tab.T[i]
    if not tab.run(cost, width - 1):
        return LPResult("unbounded", pivots=tab.pivots)

    y = [num(0)] * (width - 1)
    for i, bi in enumerate(tab.basis):
        y[bi] = tab.T[i, -1]
    x = []
    for kk in range(nv):
        v = offsets[kk]
        for col, sgn in cols[kk]:
            v += sgn * y[col]
        x.append(v)
    value = sum((ci * xi for ci, xi in zip(c, x)), num(0))
    if exact:
        xa = np.array(x, dtype=object)
    else:
        xa = np.array(x, dtype=float)
        viol = lp.violation(xa)
        if viol > FEAS_TOL:
            raise SolverError(f"simplex returned a point violating constraints by {viol:.3g}")
    return LPResult("optimal", value if exact else float(value), xa, tab.pivots)

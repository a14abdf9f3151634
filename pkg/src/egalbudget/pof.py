"""Per-instance price of fairness, efficiency ratios of rules, and welfare bounds."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb, floor

import numpy as np

from .axioms import (
    CFS_MAX_N,
    GFS_MAX_N,
    Axiom,
    check,
    check_afs,
    distinct_unions,
    identical_classes,
)
from .core import EPS, CapExceededError, Instance, egalitarian_welfare, normalized_welfare
from .rules import Rule, nash_rule, run_rule
from .solver import maxmin_lp, optimal_egalitarian
from .solver.simplex import LinearProgram, SolverError, solve_lp

AFS_MAX_ROUNDS = 1000
#: Largest simplex grid scanned when searching CFS distributions.
CFS_GRID_CAP = 5000
COVER_MAX_M = 20
SUPPORT_MAX_M = 15


@dataclass
class PofResult:
    axiom: Axiom
    best_fair_welfare: float
    sw_star: float
    ratio: float
    distribution: np.ndarray
    exactness: str  # "exact" | "lower-bound"

    def to_json(self) -> dict:
        return {
            "axiom": self.axiom.value,
            "best_fair_welfare": self.best_fair_welfare,
            "sw_star": self.sw_star,
            "ratio": self.ratio,
            "distribution": [float(v) for v in self.distribution],
            "exactness": self.exactness,
        }


def _solved(res, what):
    if not res.optimal:
        raise SolverError(f"{what} LP returned {res.status}")
    x = np.clip(res.x[:-1], 0.0, None)
    return x / x.sum(), float(res.value)


def _best_ufs(inst: Instance):
    floors = {}
    for cls in identical_classes(inst):
        for i in cls:
            floors[i] = len(cls) / inst.n
    return _solved(maxmin_lp(inst, range(inst.n), floors), "UFS")


def _best_gfs(inst: Instance, max_n: int):
    rows = []
    for U, members in distinct_unions(inst, max_n).items():
        coeffs = np.array([(U >> j) & 1 for j in range(inst.m)], dtype=float)
        rows.append((coeffs, ">=", len(members) / inst.n))
    return _solved(maxmin_lp(inst, range(inst.n), extra_rows=rows), "GFS")


def _best_imp(inst: Instance):
    """Joint LP over x and the per-agent spending y_ij (= x_ij / n) on approved projects."""
    n, m = inst.n, inst.m
    arcs = [(i, j) for i in range(n) for j in sorted(inst.approvals[i])]
    nv = m + len(arcs) + 1
    A, rel, rhs = [], [], []
    for i in range(n):
        row = np.zeros(nv)
        for k, (a, _) in enumerate(arcs):
            if a == i:
                row[m + k] = 1.0
        A.append(row)
        rel.append("==")
        rhs.append(1.0 / n)
    for j in range(m):
        row = np.zeros(nv)
        row[j] = 1.0
        for k, (_, b) in enumerate(arcs):
            if b == j:
                row[m + k] = -1.0
        A.append(row)
        rel.append("==")
        rhs.append(0.0)
    for i in range(n):
        row = np.zeros(nv)
        row[:m] = inst.incidence[i]
        row[-1] = -1.0
        A.append(row)
        rel.append(">=")
        rhs.append(0.0)
    obj = np.zeros(nv)
    obj[-1] = 1.0
    res = solve_lp(LinearProgram(obj, A, rel, rhs))
    if not res.optimal:
        raise SolverError(f"IMP LP returned {res.status}")
    x = np.clip(res.x[:m], 0.0, None)
    return x / x.sum(), float(res.value)


def _best_afs(inst: Instance, max_rounds: int = AFS_MAX_ROUNDS):
    """Cutting planes: add violated prefix constraints sum_{i in S} u_i >= |S|^2/n until none remain."""
    pool: dict[tuple[int, ...], tuple] = {}
    for _ in range(max_rounds):
        x, t = _solved(maxmin_lp(inst, range(inst.n), extra_rows=list(pool.values())), "AFS")
        u = inst.incidence @ x
        added = 0
        for j in range(inst.m):
            sup = sorted(inst.supporters(j), key=lambda i: (u[i], i))
            running = 0.0
            for k, i in enumerate(sup, start=1):
                running += u[i]
                if k * k / inst.n - running > EPS:
                    S = tuple(sorted(sup[:k]))
                    if S not in pool:
                        pool[S] = (inst.incidence[list(S)].sum(axis=0), ">=", k * k / inst.n)
                        added += 1
        if not added:
            if not check_afs(inst, x):
                raise SolverError("AFS cutting plane stalled on an already-pooled constraint")
            return x, t
    raise SolverError(f"AFS cutting plane did not converge in {max_rounds} rounds")


def simplex_grid(m: int, steps: int):
    """All distributions with entries in multiples of 1/steps."""
    for bars in combinations(range(steps + m - 1), m - 1):
        prev = -1
        parts = []
        for b in bars:
            parts.append(b - prev - 1)
            prev = b
        parts.append(steps + m - 2 - prev)
        yield np.array(parts, dtype=float) / steps


def _best_cfs(inst: Instance, grid_cap: int, max_n: int):
    """NASH output plus the best CFS point of a 1/(12m) simplex grid; a lower bound."""
    best_x = nash_rule(inst)
    best = egalitarian_welfare(inst, best_x)
    steps = 12 * inst.m
    if comb(steps + inst.m - 1, inst.m - 1) <= grid_cap:
        inc = inst.incidence
        scored = sorted(((float((inc @ p).min()), k, p) for k, p in enumerate(simplex_grid(inst.m, steps))),
                        key=lambda t: (-t[0], t[1]))
        for w, _, p in scored:
            if w <= best + EPS:
                break
            if check(Axiom.CFS, inst, p, max_n=max_n).holds:
                best, best_x = w, p
                break
    return best_x, best


def best_fair_welfare(inst: Instance, axiom: Axiom | str, max_n_subsets: int | None = None,
                      grid_cap: int = CFS_GRID_CAP) -> PofResult:
    """Highest egalitarian welfare over distributions satisfying ``axiom``.

    Exact for every axiom but CFS, where the fair set is not convex and the
    result is a certified lower bound.
    """
    axiom = Axiom(axiom)
    _, sw_star = optimal_egalitarian(inst)
    exactness = "exact"
    if axiom is Axiom.IFS:
        x, _ = optimal_egalitarian(inst)
    elif axiom is Axiom.UFS:
        x, _ = _best_ufs(inst)
    elif axiom is Axiom.GFS:
        x, _ = _best_gfs(inst, max_n_subsets or GFS_MAX_N)
    elif axiom is Axiom.IMP:
        x, _ = _best_imp(inst)
    elif axiom is Axiom.AFS:
        x, _ = _best_afs(inst)
    else:
        x, _ = _best_cfs(inst, grid_cap, max_n_subsets or CFS_MAX_N)
        exactness = "lower-bound"
    w = egalitarian_welfare(inst, x)
    return PofResult(axiom, w, sw_star, w / sw_star, x, exactness)


def pof(inst: Instance, axiom: Axiom | str, **options) -> float:
    return best_fair_welfare(inst, axiom, **options).ratio


def efficiency_ratio(inst: Instance, rule: Rule | str, **options) -> float:
    """Normalized egalitarian welfare of the rule's outcome."""
    _, sw_star = optimal_egalitarian(inst)
    return normalized_welfare(inst, run_rule(rule, inst, **options), sw_star)


@dataclass
class WelfareBounds:
    cover_number: int
    min_support: int
    lower: float
    upper: float
    score_floor: int
    max_score: int
    sw_star: float
    cover: tuple[int, ...]
    support: tuple[int, ...]

    def to_json(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


def welfare_bounds(inst: Instance, cover_cap: int = COVER_MAX_M, support_cap: int = SUPPORT_MAX_M) -> WelfareBounds:
    """Bounds on the optimal welfare from cover size, minimal optimal support, and scores.

    * lower = 1/m' with m' the fewest projects covering all agents;
    * upper = (m*-1)/m* with m* the smallest support of an optimal distribution (1 if m* = 1);
    * some project is approved by at least floor(n * sw*) agents.
    """
    m, n = inst.m, inst.n
    if m > cover_cap:
        raise CapExceededError("m", m, cover_cap)
    if m > support_cap:
        raise CapExceededError("m", m, support_cap)
    _, sw_star = optimal_egalitarian(inst)
    everyone = (1 << n) - 1
    reach = [sum(1 << i for i in inst.supporters(j)) for j in range(m)]

    def covers(S):
        acc = 0
        for j in S:
            acc |= reach[j]
        return acc == everyone

    cover = next(S for k in range(1, m + 1) for S in combinations(range(m), k) if covers(S))
    support = None
    for k in range(1, m + 1):
        for S in combinations(range(m), k):
            if not covers(S):
                continue
            res = maxmin_lp(inst, range(n), support=S)
            if res.optimal and res.value >= sw_star - EPS:
                support = S
                break
        if support is not None:
            break
    if support is None:
        raise SolverError("no support attains the optimal welfare")
    ms = len(support)
    return WelfareBounds(
        cover_number=len(cover),
        min_support=ms,
        lower=1.0 / len(cover),
        upper=(ms - 1) / ms if ms > 1 else 1.0,
        score_floor=floor(n * sw_star + EPS),
        max_score=int(inst.scores.max()),
        sw_star=sw_star,
        cover=tuple(cover),
        support=tuple(support),
    )

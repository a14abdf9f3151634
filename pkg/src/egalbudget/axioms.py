"""Verifiers for the six fairness axioms.

Every failing report carries a witness that :func:`witness_violates` can
re-check with plain utility arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations

import numpy as np

from .core import EPS, CapExceededError, Instance, as_distribution
from .solver import decomposition_feasible, hall_violation
from .solver.simplex import LinearProgram, SolverError, solve_lp

#: A blocking coalition must improve every member by more than this.
CFS_STRICT = 1e-7
GFS_MAX_N = 20
CFS_MAX_N = 16


class Axiom(str, Enum):
    IFS = "ifs"
    UFS = "ufs"
    GFS = "gfs"
    IMP = "imp"
    AFS = "afs"
    CFS = "cfs"


@dataclass
class Witness:
    """``margin`` is how far the defining inequality is violated (positive on failure)."""

    coalition: tuple[int, ...]
    margin: float
    deviation: np.ndarray | None = None
    projects: tuple[int, ...] | None = None

    def to_json(self) -> dict:
        out = {"coalition": list(self.coalition), "margin": float(self.margin)}
        if self.deviation is not None:
            out["deviation"] = [float(v) for v in self.deviation]
        if self.projects is not None:
            out["projects"] = list(self.projects)
        return out


@dataclass
class AxiomReport:
    axiom: Axiom
    holds: bool
    witness: Witness | None = field(default=None)

    def __bool__(self) -> bool:
        return self.holds

    def to_json(self) -> dict:
        return {
            "axiom": self.axiom.value,
            "holds": self.holds,
            "witness": self.witness.to_json() if self.witness else None,
        }


def _prep(inst: Instance, x):
    x = as_distribution(x, inst.m)
    return x, inst.incidence @ x


def check_ifs(inst: Instance, x, tol: float = EPS) -> AxiomReport:
    x, u = _prep(inst, x)
    i = int(np.argmin(u))
    margin = 1.0 / inst.n - u[i]
    if margin > tol:
        return AxiomReport(Axiom.IFS, False, Witness((i,), float(margin)))
    return AxiomReport(Axiom.IFS, True)


def identical_classes(inst: Instance) -> list[tuple[int, ...]]:
    """Agents grouped by identical approval sets, ordered by first member."""
    groups: dict[frozenset[int], list[int]] = {}
    for i, a in enumerate(inst.approvals):
        groups.setdefault(a, []).append(i)
    return sorted((tuple(g) for g in groups.values()), key=lambda g: g[0])


def check_ufs(inst: Instance, x, tol: float = EPS) -> AxiomReport:
    """Each agent gets at least (size of its identical-ballot class)/n."""
    x, u = _prep(inst, x)
    worst = None
    for cls in identical_classes(inst):
        margin = len(cls) / inst.n - u[cls[0]]
        if margin > tol and (worst is None or margin > worst.margin):
            worst = Witness(cls, float(margin))
    return AxiomReport(Axiom.UFS, worst is None, worst)


def _mask(projects) -> int:
    out = 0
    for j in projects:
        out |= 1 << j
    return out


def _bits(mask: int) -> list[int]:
    return [j for j in range(mask.bit_length()) if mask >> j & 1]


def distinct_unions(inst: Instance, max_n: int = GFS_MAX_N) -> dict[int, tuple[int, ...]]:
    """Every distinct union of approval sets, mapped to the agents whose set lies inside it.

    For a fixed union the largest coalition producing it is the binding one.
    """
    if inst.n > max_n:
        raise CapExceededError("n", inst.n, max_n)
    masks = [_mask(a) for a in inst.approvals]
    unions: set[int] = set()
    for a in sorted(set(masks)):
        unions |= {a} | {u | a for u in unions}
    return {U: tuple(i for i, a in enumerate(masks) if a & ~U == 0) for U in sorted(unions)}


def check_gfs(inst: Instance, x, tol: float = EPS, max_n: int = GFS_MAX_N) -> AxiomReport:
    """x(union of the coalition's approvals) >= |coalition|/n for every coalition."""
    x, _ = _prep(inst, x)
    worst = None
    for U, members in distinct_unions(inst, max_n).items():
        proj = _bits(U)
        margin = len(members) / inst.n - float(x[proj].sum())
        if margin > tol and (worst is None or margin > worst.margin):
            worst = Witness(members, float(margin), projects=tuple(proj))
    return AxiomReport(Axiom.GFS, worst is None, worst)


def check_imp(inst: Instance, x, tol: float = EPS) -> AxiomReport:
    """Decomposable into per-agent budgets of 1/n spent only on approved projects."""
    x, _ = _prep(inst, x)
    feasible, _parts = decomposition_feasible(inst, x, tol)
    if feasible:
        return AxiomReport(Axiom.IMP, True)
    cut = hall_violation(inst, x, tol)
    if cut is None:
        raise SolverError("decomposition infeasible but no deficient project set found")
    projects, agents = cut
    margin = float(x[projects].sum()) - len(agents) / inst.n
    return AxiomReport(Axiom.IMP, False, Witness(tuple(agents), margin, projects=tuple(projects)))


def check_afs(inst: Instance, x, tol: float = EPS) -> AxiomReport:
    """Average utility >= |S|/n for every coalition sharing an approved project.

    Coalitions with a common project are subsets of some N(p); for a fixed size
    the k worst-off supporters of p are binding, so prefixes suffice.
    """
    x, u = _prep(inst, x)
    worst = None
    for j in range(inst.m):
        sup = inst.supporters(j)
        if not sup:
            continue
        sup.sort(key=lambda i: (u[i], i))
        running = 0.0
        for k, i in enumerate(sup, start=1):
            running += u[i]
            margin = k / inst.n - running / k
            if margin > tol and (worst is None or margin > worst.margin):
                worst = Witness(tuple(sorted(sup[:k])), float(margin), projects=(j,))
    return AxiomReport(Axiom.AFS, worst is None, worst)


def coalition_gain(inst: Instance, x, coalition) -> tuple[float, np.ndarray]:
    """Best uniform improvement delta the coalition can secure with budget |S|/n, and its vector z."""
    x, u = _prep(inst, x)
    m = inst.m
    inc = inst.incidence
    A = [np.append(inc[i], -1.0) for i in coalition]
    rel = [">="] * len(A)
    rhs = [float(u[i]) for i in coalition]
    A.append(np.append(np.ones(m), 0.0))
    rel.append("==")
    rhs.append(len(coalition) / inst.n)
    obj = np.zeros(m + 1)
    obj[-1] = 1.0
    lower = [0.0] * m + [-np.inf]
    upper = [np.inf] * m + [1.0]
    res = solve_lp(LinearProgram(obj, A, rel, rhs, lower=lower, upper=upper))
    if not res.optimal:
        raise SolverError(f"coalition LP returned {res.status}")
    return float(res.value), np.clip(res.x[:-1], 0.0, None)


def check_cfs(inst: Instance, x, strict: float = CFS_STRICT, max_n: int = CFS_MAX_N) -> AxiomReport:
    """No coalition S can spend |S|/n to make every member strictly better off.

    Agents with the same ballot face the same constraint and only add budget,
    so a coalition blocks iff the union of its members' whole identical-ballot
    classes does.  Only such unions are tried, by size and then
    lexicographically; the first blocking one is the witness.
    """
    if inst.n > max_n:
        raise CapExceededError("n", inst.n, max_n)
    x, u = _prep(inst, x)
    n = inst.n
    classes = identical_classes(inst)
    candidates = sorted(
        (tuple(sorted(i for c in pick for i in c))
         for k in range(1, len(classes) + 1) for pick in combinations(classes, k)),
        key=lambda S: (len(S), S),
    )
    for S in candidates:
        # no member can gain more than budget - u_i
        if len(S) / n - max(u[i] for i in S) <= strict:
            continue
        delta, z = coalition_gain(inst, x, S)
        if delta > strict:
            return AxiomReport(Axiom.CFS, False, Witness(S, delta, deviation=z))
    return AxiomReport(Axiom.CFS, True)


CHECKERS = {
    Axiom.IFS: check_ifs,
    Axiom.UFS: check_ufs,
    Axiom.GFS: check_gfs,
    Axiom.IMP: check_imp,
    Axiom.AFS: check_afs,
    Axiom.CFS: check_cfs,
}


def check(axiom: Axiom | str, inst: Instance, x, tol: float = EPS, max_n: int | None = None) -> AxiomReport:
    """Dispatch by axiom id or lowercase name; ``max_n`` overrides the GFS/CFS enumeration cap."""
    axiom = Axiom(axiom)
    if axiom is Axiom.CFS:
        return check_cfs(inst, x, max_n=max_n or CFS_MAX_N)
    if axiom is Axiom.GFS:
        return check_gfs(inst, x, tol, max_n=max_n or GFS_MAX_N)
    return CHECKERS[axiom](inst, x, tol)


def witness_violates(inst: Instance, x, report: AxiomReport, tol: float = EPS) -> bool:
    """Independently confirm that a failing report's witness breaks the axiom."""
    w = report.witness
    if report.holds or w is None:
        return False
    x = as_distribution(x, inst.m)
    n = inst.n

    def u(i, vec=x):
        return sum(vec[j] for j in inst.approvals[i])

    S = list(w.coalition)
    if report.axiom is Axiom.IFS:
        return len(S) == 1 and 1 / n - u(S[0]) > tol
    if report.axiom is Axiom.UFS:
        same = all(inst.approvals[i] == inst.approvals[S[0]] for i in S)
        return same and any(len(S) / n - u(i) > tol for i in S)
    if report.axiom is Axiom.GFS:
        union = set().union(*(inst.approvals[i] for i in S))
        return len(S) / n - sum(x[j] for j in union) > tol
    if report.axiom is Axiom.IMP:
        T = set(w.projects)
        reach = [i for i in range(n) if inst.approvals[i] & T]
        return sum(x[j] for j in T) - len(reach) / n > tol
    if report.axiom is Axiom.AFS:
        common = set.intersection(*(set(inst.approvals[i]) for i in S))
        return bool(common) and len(S) / n - sum(u(i) for i in S) / len(S) > tol
    if report.axiom is Axiom.CFS:
        z = np.asarray(w.deviation, dtype=float)
        if np.any(z < -1e-12) or abs(z.sum() - len(S) / n) > 1e-9:
            return False
        return all(u(i, z) - u(i) > tol for i in S)
    return False

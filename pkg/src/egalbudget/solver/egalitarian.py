"""Max-min, leximin and lexicographic LPs over the budget simplex, plus decomposition feasibility."""

from __future__ import annotations

from collections import deque
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..core import Instance, InstanceError, as_distribution
from .simplex import LinearProgram, SolverError, solve_lp

#: Saturation threshold when deciding which agents leximin freezes.
FREEZE_TOL = 1e-7
#: Relaxation of the floors imposed on frozen agents; phase-1 tolerance already absorbs round-off.
FLOOR_SLACK = 0.0


def _clean(x) -> np.ndarray:
    x = np.clip(np.asarray(x, dtype=float), 0.0, None)
    return x / x.sum()


def maxmin_lp(inst: Instance, agents: Iterable[int], floors: Mapping[int, float] | None = None,
              support: Sequence[int] | None = None, extra_rows=(), exact: bool = False):
    """LP: maximize t subject to u_i >= t for ``agents``, u_i >= floors[i], and the simplex.

    Returns the raw :class:`LPResult`; variables are x_0..x_{m-1} then t.
    ``support`` restricts budget to the listed projects.  ``extra_rows`` are
    additional ``(coeffs over x, relation, rhs)`` rows.
    """
    m = inst.m
    inc = inst.incidence
    A, rel, rhs = [], [], []
    for i in agents:
        A.append(np.append(inc[i], -1.0))
        rel.append(">=")
        rhs.append(0.0)
    for i, f in (floors or {}).items():
        A.append(np.append(inc[i], 0.0))
        rel.append(">=")
        rhs.append(f)
    for coeffs, r, b in extra_rows:
        A.append(np.append(np.asarray(coeffs, dtype=float), 0.0))
        rel.append(r)
        rhs.append(b)
    A.append(np.append(np.ones(m), 0.0))
    rel.append("==")
    rhs.append(1.0)
    upper = [float("inf")] * (m + 1)
    if support is not None:
        keep = set(support)
        upper = [float("inf") if j in keep else 0.0 for j in range(m)] + [float("inf")]
    objective = np.zeros(m + 1)
    objective[-1] = 1.0
    lp = LinearProgram(objective, A, rel, rhs, upper=upper)
    return solve_lp(lp, exact=exact)


def maximize_utility(inst: Instance, agent: int, floors: Mapping[int, float]):
    """LP: maximize u_agent subject to floors and the simplex; variables are x only."""
    inc = inst.incidence
    A = [inc[i] for i in floors]
    rel = [">="] * len(A)
    rhs = list(floors.values())
    A.append(np.ones(inst.m))
    rel.append("==")
    rhs.append(1.0)
    res = solve_lp(LinearProgram(inc[agent], A, rel, rhs))
    if not res.optimal:
        raise SolverError(f"lexicographic stage for agent {agent} returned {res.status}")
    return res


def optimal_egalitarian(inst: Instance, exact: bool = False):
    """Return ``(x, sw_star)`` with x maximizing the minimum utility."""
    res = maxmin_lp(inst, range(inst.n), exact=exact)
    if not res.optimal:
        raise SolverError(f"max-min LP returned {res.status}")
    x = res.x[:-1]
    if exact:
        return x, res.value
    return _clean(x), float(res.value)


def leximin(inst: Instance) -> np.ndarray:
    """Distribution whose sorted utility vector is lexicographically maximal.

    Repeatedly solves the max-min LP over the unfrozen agents, then freezes
    every agent that cannot exceed the current level while the others keep it.
    """
    floors: dict[int, float] = {}
    free = list(range(inst.n))
    x = None
    while free:
        res = maxmin_lp(inst, free, floors)
        if not res.optimal:
            raise SolverError(f"leximin stage returned {res.status}")
        t = float(res.value)
        x = res.x[:-1]
        u = inst.incidence @ x
        level = {i: t - FLOOR_SLACK for i in free}
        newly = []
        for i in free:
            if u[i] > t + FREEZE_TOL:
                continue
            others = {**floors, **{k: v for k, v in level.items() if k != i}}
            best = maximize_utility(inst, i, others).value
            if best <= t + FREEZE_TOL:
                newly.append(i)
        if not newly:
            # numerically every agent looks slack; freeze the worst-off to guarantee progress
            newly = [min(free, key=lambda i: u[i])]
        for i in newly:
            floors[i] = t - FLOOR_SLACK
        free = [i for i in free if i not in newly]
    return _clean(x)


def lexicographic_stages(inst: Instance, order: Sequence[int]):
    """Return ``(x, values)``: ``values[s]`` is the stage-s optimum for agent ``order[s]``."""
    if sorted(order) != list(range(inst.n)):
        raise InstanceError(f"order {list(order)} is not a permutation of 0..{inst.n - 1}")
    floors: dict[int, float] = {}
    values = []
    x = None
    for a in order:
        res = maximize_utility(inst, a, floors)
        v = float(res.value)
        values.append(v)
        floors[a] = v - FLOOR_SLACK
        x = res.x
    return _clean(x), values


def lexicographic_max(inst: Instance, order: Sequence[int]) -> np.ndarray:
    """Maximize the utilities of ``order[0]``, ``order[1]``, ... in turn."""
    return lexicographic_stages(inst, order)[0]


# -- decomposition ------------------------------------------------------------

def _max_flow(inst: Instance, x: np.ndarray):
    """Max flow agents -> projects with supplies 1/n and demands x_j, as an LP.

    Returns (flow value, arcs, arc flows).
    """
    n, m = inst.n, inst.m
    arcs = [(i, j) for i in range(n) for j in sorted(inst.approvals[i])]
    A, rel, rhs = [], [], []
    for i in range(n):
        A.append([1.0 if a == i else 0.0 for a, _ in arcs])
        rel.append("<=")
        rhs.append(1.0 / n)
    for j in range(m):
        A.append([1.0 if b == j else 0.0 for _, b in arcs])
        rel.append("<=")
        rhs.append(float(x[j]))
    res = solve_lp(LinearProgram(np.ones(len(arcs)), A, rel, rhs))
    if not res.optimal:
        raise SolverError(f"transportation LP returned {res.status}")
    return float(res.value), arcs, np.clip(res.x, 0.0, None)


def decomposition_feasible(inst: Instance, x, tol: float = 1e-9):
    """Can ``x`` be written as (1/n) * sum of per-agent distributions supported on approval sets?

    Returns ``(True, parts)`` with ``parts[i]`` agent i's distribution, or ``(False, None)``.
    """
    x = as_distribution(x, inst.m)
    value, arcs, flow = _max_flow(inst, x)
    if value < 1.0 - tol:
        return False, None
    parts = np.zeros((inst.n, inst.m))
    for (i, j), f in zip(arcs, flow):
        parts[i, j] = f
    parts /= parts.sum(axis=1, keepdims=True)
    return True, parts


def hall_violation(inst: Instance, x, tol: float = 1e-9):
    """Deficient project set when ``x`` is not decomposable, else None.

    Returns ``(projects, agents)`` where ``projects`` demand more budget than the
    agents approving any of them can supply, i.e. x(projects) > |agents|/n.
    The set is read off the min cut of the max-flow residual graph.
    """
    x = as_distribution(x, inst.m)
    n, m = inst.n, inst.m
    value, arcs, flow = _max_flow(inst, x)
    if value >= 1.0 - tol:
        return None
    out = np.zeros(n)
    back: dict[int, list[int]] = {j: [] for j in range(m)}
    for (i, j), f in zip(arcs, flow):
        out[i] += f
        if f > 1e-12:
            back[j].append(i)
    seen_a = {i for i in range(n) if 1.0 / n - out[i] > 1e-12}
    seen_p: set[int] = set()
    queue = deque(seen_a)
    while queue:
        i = queue.popleft()
        for j in inst.approvals[i]:
            if j in seen_p:
                continue
            seen_p.add(j)
            for k in back[j]:
                if k not in seen_a:
                    seen_a.add(k)
                    queue.append(k)
    projects = sorted(set(range(m)) - seen_p)
    agents = sorted(i for i in range(n) if inst.approvals[i] & set(projects))
    return projects, agents

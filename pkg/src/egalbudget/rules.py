"""The seven budget-division rules: UTIL, CUT, NASH, EGAL, PV, ES and RP."""

from __future__ import annotations

from enum import Enum
from itertools import permutations
from math import factorial

import numpy as np

from .core import CapExceededError, Instance
from .solver import leximin, lexicographic_max, maximize_utility, nash_solve
from .solver.simplex import LinearProgram, solve_lp

#: Largest n for which RP is evaluated (n! orderings).
RP_MAX_N = 7


class Rule(str, Enum):
    UTIL = "util"
    CUT = "cut"
    NASH = "nash"
    EGAL = "egal"
    PV = "pv"
    ES = "es"
    RP = "rp"


def _uniform(m: int, support) -> np.ndarray:
    x = np.zeros(m)
    support = list(support)
    x[support] = 1.0 / len(support)
    return x


def util_rule(inst: Instance) -> np.ndarray:
    """Uniform over the projects of maximum approval score (one of the utilitarian optima)."""
    s = inst.scores
    return _uniform(inst.m, np.flatnonzero(s == s.max()))


def cut_rule(inst: Instance) -> np.ndarray:
    """Each agent spends 1/n uniformly on its approved projects of highest score."""
    s = inst.scores
    x = np.zeros(inst.m)
    for approved in inst.approvals:
        approved = sorted(approved)
        best = max(s[j] for j in approved)
        x += _uniform(inst.m, [j for j in approved if s[j] == best])
    return x / inst.n


def nash_rule(inst: Instance) -> np.ndarray:
    return nash_solve(inst)


def egal_rule(inst: Instance) -> np.ndarray:
    """Leximin refinement of the max-min optimum, so the utility profile is unique."""
    return leximin(inst)


def pv_rule(inst: Instance) -> np.ndarray:
    s = inst.scores.astype(float)
    return s / s.sum()


def es_rule(inst: Instance) -> np.ndarray:
    x = np.zeros(inst.m)
    for approved in inst.approvals:
        x += _uniform(inst.m, sorted(approved))
    return x / inst.n


def _joint_point(inst: Instance, floors: dict[int, float]):
    """A distribution meeting every floor, or None."""
    inc = inst.incidence
    A = [inc[i] for i in floors] + [np.ones(inst.m)]
    rel = [">="] * len(floors) + ["=="]
    rhs = list(floors.values()) + [1.0]
    res = solve_lp(LinearProgram(np.zeros(inst.m), A, rel, rhs))
    return res.x if res.optimal else None


def rp_rule(inst: Instance, max_n: int = RP_MAX_N, prune: bool = True) -> np.ndarray:
    """Random priority: average of the lexicographic optima over all n! agent orderings.

    Orderings are walked as a prefix tree.  At a node where one distribution
    already gives every remaining agent its best value given the prefix, every
    completion of the prefix has that distribution as a lexicographic optimum,
    so the whole subtree is credited at once.  ``prune=False`` solves each
    ordering separately with :func:`lexicographic_max`.
    """
    n, m = inst.n, inst.m
    if n > max_n:
        raise CapExceededError("n", n, max_n)
    if not prune:
        total = np.zeros(m)
        for order in permutations(range(n)):
            total += lexicographic_max(inst, order)
        return total / factorial(n)

    inc = inst.incidence
    total = np.zeros(m)

    def visit(floors: dict[int, float], remaining: list[int]) -> None:
        best, points = {}, {}
        for a in remaining:
            res = maximize_utility(inst, a, floors)
            best[a] = float(res.value)
            points[a] = np.clip(res.x, 0.0, None)
        if len(remaining) == 1:
            total[:] += points[remaining[0]]
            return
        joint = None
        for a in remaining:
            u = inc @ points[a]
            if all(u[b] >= best[b] - 1e-12 for b in remaining):
                joint = points[a]
                break
        if joint is None:
            joint = _joint_point(inst, {**floors, **best})
        if joint is not None:
            total[:] += factorial(len(remaining)) * np.clip(joint, 0.0, None)
            return
        for a in remaining:
            visit({**floors, a: best[a]}, [b for b in remaining if b != a])

    visit({}, list(range(n)))
    x = total / factorial(n)
    return x / x.sum()


RULES = {
    Rule.UTIL: util_rule,
    Rule.CUT: cut_rule,
    Rule.NASH: nash_rule,
    Rule.EGAL: egal_rule,
    Rule.PV: pv_rule,
    Rule.ES: es_rule,
    Rule.RP: rp_rule,
}


def run_rule(rule: Rule | str, inst: Instance, **options) -> np.ndarray:
    """Dispatch by rule id or its lowercase name; ``options`` go to RP only (``max_n``)."""
    rule = Rule(rule)
    if rule is Rule.RP:
        return rp_rule(inst, **options)
    return RULES[rule](inst)

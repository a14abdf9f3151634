"""Instances, distributions, utilities and the worst-case instance families.

Indices are 0-based throughout.  The generator docstrings give the mapping
to the usual 1-based names (agent ``i`` is ``i+1``, project ``j`` is
``p_{j+1}``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

#: Global comparison tolerance for utilities and welfare.
EPS = 1e-9
#: Largest n or m a family generator will build.
GEN_MAX_SIZE = 100_000


class InstanceError(ValueError):
    """Malformed instance, distribution, or serialized input."""


class CapExceededError(RuntimeError):
    """A brute-force enumeration would exceed its configured cap."""

    def __init__(self, what: str, value: int, cap: int):
        super().__init__(f"{what}={value} exceeds cap {cap}")
        self.what = what
        self.value = value
        self.cap = cap


@dataclass(frozen=True)
class Instance:
    """An approval profile: ``approvals[i]`` is the set of projects agent ``i`` likes."""

    m: int
    approvals: tuple[frozenset[int], ...]

    def __init__(self, m: int, approvals: Iterable[Iterable[int]]):
        approvals = tuple(frozenset(int(j) for j in a) for a in approvals)
        if int(m) < 1:
            raise InstanceError(f"need at least one project, got m={m}")
        if not approvals:
            raise InstanceError("need at least one agent")
        for i, a in enumerate(approvals):
            if not a:
                raise InstanceError(f"agent {i} has an empty approval set")
            bad = [j for j in a if not 0 <= j < m]
            if bad:
                raise InstanceError(f"agent {i} approves out-of-range project(s) {sorted(bad)} (m={m})")
        object.__setattr__(self, "m", int(m))
        object.__setattr__(self, "approvals", approvals)

    @property
    def n(self) -> int:
        return len(self.approvals)

    @cached_property
    def incidence(self) -> np.ndarray:
        """n x m 0/1 matrix, row i is the indicator of agent i's approval set."""
        a = np.zeros((self.n, self.m))
        for i, approved in enumerate(self.approvals):
            a[i, sorted(approved)] = 1.0
        a.setflags(write=False)
        return a

    @cached_property
    def scores(self) -> np.ndarray:
        s = self.incidence.sum(axis=0).astype(int)
        s.setflags(write=False)
        return s

    def supporters(self, j: int) -> list[int]:
        """Agents approving project ``j``, in index order."""
        return [i for i, a in enumerate(self.approvals) if j in a]

    def permuted(self, agent_order: Sequence[int] | None = None,
                 project_order: Sequence[int] | None = None) -> "Instance":
        """Relabel: new agent k is old agent ``agent_order[k]``; old project j becomes ``project_order[j]``."""
        agents = list(agent_order) if agent_order is not None else list(range(self.n))
        proj = list(project_order) if project_order is not None else list(range(self.m))
        return Instance(self.m, [[proj[j] for j in self.approvals[i]] for i in agents])

    def __repr__(self) -> str:
        return f"Instance(m={self.m}, approvals={[sorted(a) for a in self.approvals]})"


def as_distribution(x, m: int | None = None) -> np.ndarray:
    """Validate a budget vector and return it as a float array.

    Entries down to -1e-12 are clamped to zero; the sum must be 1 within ``EPS``.
    """
    arr = np.array(x, dtype=float).reshape(-1)
    if m is not None and arr.shape[0] != m:
        raise InstanceError(f"distribution has {arr.shape[0]} entries, instance has m={m}")
    if not np.all(np.isfinite(arr)):
        raise InstanceError("distribution contains non-finite entries")
    if np.any(arr < -1e-12):
        raise InstanceError(f"distribution has negative entry {arr.min()!r}")
    arr = np.clip(arr, 0.0, None)
    if abs(arr.sum() - 1.0) > EPS:
        raise InstanceError(f"distribution sums to {arr.sum()!r}, not 1")
    return arr


def utilities(inst: Instance, x) -> np.ndarray:
    """Utility profile: budget on each agent's approved projects."""
    x = as_distribution(x, inst.m)
    return inst.incidence @ x


def utility(inst: Instance, x, i: int) -> float:
    if not 0 <= i < inst.n:
        raise IndexError(f"agent {i} out of range for n={inst.n}")
    x = as_distribution(x, inst.m)
    return float(sum(x[j] for j in inst.approvals[i]))


def egalitarian_welfare(inst: Instance, x) -> float:
    return float(utilities(inst, x).min())


def normalized_welfare(inst: Instance, x, sw_star: float) -> float:
    if not sw_star > 0:
        raise ValueError(f"optimal welfare must be positive, got {sw_star}")
    return egalitarian_welfare(inst, x) / sw_star


def approval_score(inst: Instance, j: int) -> int:
    if not 0 <= j < inst.m:
        raise IndexError(f"project {j} out of range for m={inst.m}")
    return int(inst.scores[j])


# -- serialization ---------------------------------------------------------

def _load_json(text: bytes | str):
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise InstanceError(f"input is not UTF-8 (byte {e.start})") from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceError(f"malformed JSON at line {e.lineno} column {e.colno}: {e.msg}") from e


def parse_instance(text: bytes | str) -> Instance:
    """Parse ``{"m": <int>, "agents": [[j, ...], ...]}``."""
    data = _load_json(text)
    if not isinstance(data, dict) or "m" not in data or "agents" not in data:
        raise InstanceError('instance JSON must be an object with keys "m" and "agents"')
    m, agents = data["m"], data["agents"]
    if not isinstance(m, int) or isinstance(m, bool):
        raise InstanceError(f'"m" must be an integer, got {m!r}')
    if not isinstance(agents, list):
        raise InstanceError('"agents" must be a list of lists')
    for i, a in enumerate(agents):
        if not isinstance(a, list) or not all(isinstance(j, int) and not isinstance(j, bool) for j in a):
            raise InstanceError(f"agents[{i}] must be a list of integers")
        if len(set(a)) != len(a):
            raise InstanceError(f"agents[{i}] has duplicate project indices")
    return Instance(m, agents)


def serialize_instance(inst: Instance) -> bytes:
    agents = [sorted(a) for a in inst.approvals]
    return json.dumps({"m": inst.m, "agents": agents}).encode("utf-8")


def round12(v: float) -> float:
    """Round to 12 significant digits, the precision used in every emitted number."""
    return float(f"{float(v):.12g}")


def parse_distribution(text: bytes | str, m: int | None = None) -> np.ndarray:
    data = _load_json(text)
    if not isinstance(data, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in data):
        raise InstanceError("distribution JSON must be an array of numbers")
    return as_distribution(data, m)


def serialize_distribution(x) -> bytes:
    return json.dumps([round12(v) for v in np.asarray(x, dtype=float)]).encode("utf-8")


# -- instance families -----------------------------------------------------

def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise InstanceError(msg)


def _size_cap(n: int, m: int) -> None:
    if n > GEN_MAX_SIZE:
        raise CapExceededError("n", n, GEN_MAX_SIZE)
    if m > GEN_MAX_SIZE:
        raise CapExceededError("m", m, GEN_MAX_SIZE)


def ufs_gap_instance(n: int) -> Instance:
    """Agents 0..n-2 approve project 0, agent n-1 approves project 1.

    Optimal welfare is 1/2 while every UFS distribution has welfare 1/n.
    """
    _require(n >= 2, f"ufs_gap_instance needs n >= 2, got {n}")
    _size_cap(n, 2)
    return Instance(2, [[0]] * (n - 1) + [[1]])


def gfs_tight_instance(n: int) -> Instance:
    """m = 2n+1; agent a approves {2a, 2a+1, 2a+2, 2n}, wrapping 2n to 0 for the last agent.

    Project 2a+1 is agent a's private project, project 2n is approved by all.
    """
    _require(n >= 2, f"gfs_tight_instance needs n >= 2, got {n}")
    _size_cap(n, 2 * n + 1)
    m = 2 * n + 1
    approvals = [[2 * a, 2 * a + 1, 2 * a + 2, 2 * n] for a in range(n - 1)]
    approvals.append([2 * n - 2, 2 * n - 1, 0, 2 * n])
    return Instance(m, approvals)


def gfs_witness_distribution(n: int) -> np.ndarray:
    """Budget 1/n on every private project of :func:`gfs_tight_instance`."""
    _require(n >= 2, f"gfs_witness_distribution needs n >= 2, got {n}")
    x = np.zeros(2 * n + 1)
    x[1::2] = 1.0 / n
    return x


def es_instance(n: int, k: int) -> Instance:
    """m = n^(k+1) + 1; agent a approves its n^k private projects plus the last project."""
    _require(n >= 2, f"es_instance needs n >= 2, got {n}")
    _require(k >= 1, f"es_instance needs k >= 1, got {k}")
    _size_cap(n, n ** (k + 1) + 1)
    block = n ** k
    m = n * block + 1
    return Instance(m, [list(range(a * block, (a + 1) * block)) + [m - 1] for a in range(n)])


def pv_instance(n: int, m: int) -> Instance:
    """Agents 0..n-2 approve projects 0..m-2, agent n-1 approves project m-1."""
    _require(n >= 2, f"pv_instance needs n >= 2, got {n}")
    _require(m >= 2, f"pv_instance needs m >= 2, got {m}")
    _size_cap(n, m)
    return Instance(m, [list(range(m - 1))] * (n - 1) + [[m - 1]])


def cut_instance(n: int) -> Instance:
    """m = C(n-1, 2) + 1.

    Project j < m-1 is disapproved by the j-th pair (lexicographic order) of
    agents 0..n-2 and approved by everyone else, including agent n-1.  The last
    project is approved by agents 0..n-2 only.
    """
    _require(n >= 4, f"cut_instance needs n >= 4, got {n}")
    _size_cap(n, (n - 1) * (n - 2) // 2 + 1)
    pairs = list(combinations(range(n - 1), 2))
    m = len(pairs) + 1
    approvals = []
    for a in range(n - 1):
        approvals.append([j for j, pair in enumerate(pairs) if a not in pair] + [m - 1])
    approvals.append(list(range(m - 1)))
    return Instance(m, approvals)


def random_instance(n: int, m: int, rng: np.random.Generator, density: float = 0.4) -> Instance:
    """Each agent approves each project independently with probability ``density``; empty sets get one random project."""
    approvals = []
    for _ in range(n):
        row = np.flatnonzero(rng.random(m) < density).tolist()
        if not row:
            row = [int(rng.integers(m))]
        approvals.append(row)
    return Instance(m, approvals)


FAMILIES = {
    "ufs_gap": ufs_gap_instance,
    "gfs_tight": gfs_tight_instance,
    "es": es_instance,
    "pv": pv_instance,
    "cut": cut_instance,
}

"""Branch-and-cut for ``min -lambda x + omega f(a x)`` over ``sum(x) <= k``, ``x`` binary.

The relaxation carries ``x`` and an epigraph variable ``w`` (last column).
Feasibility of ``w >= f(a x)`` is enforced lazily at integer LP solutions;
the cut strategies add one user cut every few explored nodes. All cuts live
in one global pool, so nodes differ only in variable bounds.
"""
from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .core import Instance, InputError, StructureError, two_weight_profile
from .cuts import LinearCut, descending_order, epi_coefficients
from .lift_epi import lifted_epi_cut, ali_cut
from .lift_si import SiParams, best_i0, lower_si_cut
from .lp import Basis, LpProblem, LpStatus, SimplexSolver

INT_TOL = 1e-6
MIP_GAP = 1e-4
CUT_EVERY = 10
MIN_USER_VIOLATION = 1e-6


class Strategy(str, Enum):
    LEPI_LSI = "lepi-lsi"
    ALI = "ali"
    NOCUTS = "nocuts"

    @classmethod
    def parse(cls, s: "Strategy | str") -> "Strategy":
        if isinstance(s, cls):
            return s
        key = str(s).strip().lower().replace("_", "-")
        for member in cls:
            if member.value == key:
                return member
        raise InputError(f"unknown strategy {s!r}; choose from {[m.value for m in cls]}")


class SolveStatus(str, Enum):
    OPTIMAL = "Optimal"
    GAP_LIMIT = "GapLimit"
    NODE_LIMIT = "NodeLimit"
    TIME_LIMIT = "TimeLimit"


@dataclass(frozen=True)
class MeanRiskObjective:
    lam: tuple
    omega: float
    epsilon: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "lam", tuple(float(v) for v in self.lam))
        if not self.omega >= 0:
            raise InputError("omega must be nonnegative")
        if self.epsilon is not None:
            if not 0 < self.epsilon < 0.5:
                raise InputError("epsilon must lie in (0, 0.5)")
            if abs(self.omega - omega_from_epsilon(self.epsilon)) > 1e-12:
                raise InputError("omega does not match epsilon")

    @classmethod
    def from_epsilon(cls, lam: Sequence[float], epsilon: float) -> "MeanRiskObjective":
        if not 0 < epsilon < 0.5:
            raise InputError("epsilon must lie in (0, 0.5)")
        return cls(tuple(lam), omega_from_epsilon(epsilon), epsilon)

    def value(self, inst: Instance, x) -> float:
        x = np.asarray(x, dtype=float)
        return -float(np.dot(self.lam, x)) + self.omega * inst.f(float(np.dot(inst.a, x)))


def omega_from_epsilon(epsilon: float) -> float:
    return math.sqrt((1 - epsilon) / epsilon)


@dataclass(frozen=True)
class Limits:
    time_limit: float = math.inf
    node_limit: int | None = None
    mip_gap: float = MIP_GAP
    cut_every: int = CUT_EVERY


@dataclass
class NodeState:
    fixed0: frozenset = frozenset()
    fixed1: frozenset = frozenset()
    basis: Basis | None = None
    bound: float = -math.inf
    depth: int = 0

    def __post_init__(self):
        if self.fixed0 & self.fixed1:
            raise InputError("a variable cannot be fixed to both 0 and 1")


@dataclass(frozen=True)
class SolveReport:
    status: SolveStatus
    objective: float
    bound: float
    gap: float
    nodes: int
    cuts: dict
    time_s: float
    x: tuple
    strategy: Strategy
    pool: tuple = field(default=(), repr=False, compare=False)

    @property
    def user_cuts(self) -> int:
        return self.cuts.get("lepi", 0) + self.cuts.get("lsi", 0) + self.cuts.get("ali", 0)

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "strategy": self.strategy.value,
            "objective": self.objective,
            "bound": self.bound,
            "gap": self.gap,
            "nodes": self.nodes,
            "cuts": dict(self.cuts),
            "time_s": self.time_s,
            "support": [i + 1 for i in self.x],
        }

    def table(self) -> str:
        rows = [
            ("status", self.status.value),
            ("strategy", self.strategy.value),
            ("objective", f"{self.objective:.6f}"),
            ("bound", f"{self.bound:.6f}"),
            ("gap", f"{self.gap:.3e}"),
            ("nodes", str(self.nodes)),
            ("cuts", ", ".join(f"{k}={v}" for k, v in self.cuts.items())),
            ("time_s", f"{self.time_s:.3f}"),
            ("support", " ".join(str(i + 1) for i in self.x) or "-"),
        ]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def mip_gap(ub: float, lb: float) -> float:
    return (ub - lb) / max(abs(ub), 1e-12)


def initial_w_bound(inst: Instance) -> float:
    """Valid lower bound on ``f(a x)`` over the feasible set, capped at zero."""
    f = inst.f
    try:
        prof = two_weight_profile(inst)
    except StructureError:
        top = sum(sorted(inst.a, reverse=True)[: inst.k])
        return min(0.0, f(top))  # concave: the minimum over [0, top] sits at an end
    best = 0.0
    for t in range(min(inst.k, len(prof.IL)) + 1):
        for s in range(min(inst.k - t, len(prof.IH)) + 1):
            best = min(best, f(t * prof.aL + s * prof.aH))
    return best


def lazy_integer_cut(inst: Instance, x_star, w_star: float, tol: float = 1e-9) -> LinearCut:
    """Cut tight at ``(f(a x*), x*)`` that separates ``(w*, x*)``."""
    x_star = np.asarray(x_star, dtype=float)
    if np.any(np.abs(x_star - np.round(x_star)) > INT_TOL) or x_star.sum() > inst.k + INT_TOL:
        raise InputError("lazy cuts need an integer feasible point")
    xr = np.round(x_star)
    fx = inst.f(float(np.dot(inst.a, xr)))
    if w_star >= fx - tol:
        raise ValueError("point already satisfies w >= f(a x); no lazy cut needed")
    support = sorted(np.flatnonzero(xr > 0.5), key=lambda i: (-inst.a[i], i))
    rest = [i for i in range(inst.n) if xr[i] < 0.5]
    perm = tuple(int(i) for i in support) + tuple(rest)
    if len(inst.distinct_weights()) == 2:
        return lifted_epi_cut(inst, perm)
    return LinearCut(epi_coefficients(inst, perm), 0.0, "EPI", {"perm": perm})


def branch(node: NodeState, xbar) -> tuple[NodeState, NodeState, int]:
    """Children fixing the most fractional variable (ties to the lowest index) to 0 and 1."""
    x = np.asarray(xbar, dtype=float)
    frac = np.minimum(x - np.floor(x), np.ceil(x) - x)
    j = int(np.argmax(frac))
    if frac[j] <= INT_TOL:
        raise ValueError("cannot branch on an integral point")
    down = NodeState(node.fixed0 | {j}, node.fixed1, node.basis, node.bound, node.depth + 1)
    up = NodeState(node.fixed0, node.fixed1 | {j}, node.basis, node.bound, node.depth + 1)
    return down, up, j


def enumerate_optimum(inst: Instance, obj: MeanRiskObjective) -> tuple[float, tuple]:
    """Brute-force optimum over all supports of size <= k (test oracle)."""
    best, arg = math.inf, ()
    lam, a, f = obj.lam, inst.a, inst.f
    for S in inst.feasible_supports():
        v = -sum(lam[i] for i in S) + obj.omega * f(sum(a[i] for i in S))
        if v < best - 1e-15:
            best, arg = v, S
    return best, arg


class _Relaxation:
    """The global LP: cardinality row plus the cut pool, columns ``(x, w)``."""

    def __init__(self, inst: Instance, obj: MeanRiskObjective):
        n = inst.n
        self.n = n
        self.c = np.concatenate([-np.asarray(obj.lam), [obj.omega]])
        self.rows = [np.concatenate([np.ones(n), [0.0]])]
        self.senses = ["<="]
        self.rhs = [float(inst.k)]
        self.wlb = initial_w_bound(inst)
        self.pool: list[LinearCut] = []
        self.keys: set = set()
        self.solver = SimplexSolver()

    def add(self, cut: LinearCut) -> bool:
        key = cut.key(9)
        if key in self.keys:
            return False
        self.keys.add(key)
        self.pool.append(cut)
        self.rows.append(np.concatenate([-cut.pi, [1.0]]))
        self.senses.append(">=")
        self.rhs.append(cut.pi0)
        return True

    def solve(self, node: NodeState, warm: Basis | None):
        lb = np.zeros(self.n + 1)
        ub = np.ones(self.n + 1)
        lb[-1], ub[-1] = self.wlb, np.inf
        for j in node.fixed0:
            ub[j] = 0.0
        for j in node.fixed1:
            lb[j] = 1.0
        p = LpProblem(self.c, np.vstack(self.rows), tuple(self.senses), np.array(self.rhs), lb, ub)
        return self.solver.solve(p, warm)


def _user_cut(inst: Instance, strategy: Strategy, wbar: float, xbar: np.ndarray):
    """The strategy's candidate cut at a fractional point and its family tag."""
    perm = descending_order(xbar)
    if strategy is Strategy.ALI:
        return ali_cut(inst, perm), "ali"
    lepi = lifted_epi_cut(inst, perm)
    prof = two_weight_profile(inst)
    if len(prof.IL) < inst.k:
        return lepi, "lepi"
    within = descending_order(xbar, prof.IL)
    other = descending_order(xbar, prof.IH)
    i0 = best_i0(inst, wbar, xbar, other)
    lsi = lower_si_cut(inst, SiParams(i0, "lower", within, other))
    if lsi.violation(wbar, xbar) > lepi.violation(wbar, xbar):
        return lsi, "lsi"
    return lepi, "lepi"


def solve(inst: Instance, obj: MeanRiskObjective, strategy: Strategy | str = Strategy.LEPI_LSI,
          limits: Limits | None = None) -> SolveReport:
    strategy = Strategy.parse(strategy)
    limits = limits or Limits()
    if len(obj.lam) != inst.n:
        raise InputError(f"lambda has {len(obj.lam)} entries for n = {inst.n}")
    if strategy is not Strategy.NOCUTS:
        two_weight_profile(inst)  # raises StructureError otherwise
    start = time.perf_counter()
    rel = _Relaxation(inst, obj)
    cuts = {"lazy": 0}
    if strategy is Strategy.LEPI_LSI:
        cuts.update(lepi=0, lsi=0)
    elif strategy is Strategy.ALI:
        cuts["ali"] = 0

    best_x = np.zeros(inst.n)
    ub = 0.0  # x = 0 is feasible with objective 0
    seq = itertools.count()
    heap = [(-math.inf, next(seq), NodeState())]
    explored = 0
    node_cap = None if limits.node_limit is None else max(limits.node_limit, 1)
    status = SolveStatus.OPTIMAL
    lb = -math.inf

    while heap:
        if heap[0][0] >= ub - 1e-9:
            break  # every open node is dominated by the incumbent
        lb = heap[0][0]
        if mip_gap(ub, lb) <= limits.mip_gap:
            status = SolveStatus.GAP_LIMIT
            break
        if time.perf_counter() - start > limits.time_limit:
            status = SolveStatus.TIME_LIMIT
            break
        if node_cap is not None and explored >= node_cap:
            status = SolveStatus.NODE_LIMIT
            break
        bound, _, node = heapq.heappop(heap)
        if bound >= ub - 1e-9:
            continue
        explored += 1
        user_cut_due = strategy is not Strategy.NOCUTS and explored % limits.cut_every == 0
        sol = rel.solve(node, node.basis)
        while True:
            if sol.status is LpStatus.INFEASIBLE:
                break
            if sol.status is not LpStatus.OPTIMAL:
                raise RuntimeError(f"node LP ended with status {sol.status.value}")
            if sol.objective >= ub - 1e-9:
                break
            xbar, wbar = sol.x[:-1], float(sol.x[-1])
            if np.all(np.abs(xbar - np.round(xbar)) <= INT_TOL):
                xr = np.round(xbar)
                fx = inst.f(float(np.dot(inst.a, xr)))
                if wbar < fx - 1e-7 * max(1.0, abs(fx)):
                    cut = lazy_integer_cut(inst, xr, wbar)
                    if rel.add(cut):
                        cuts["lazy"] += 1
                        sol = rel.solve(node, sol.basis)
                        continue
                val = obj.value(inst, xr)
                if val < ub:
                    ub, best_x = val, xr
                break
            if user_cut_due:
                user_cut_due = False
                cut, fam = _user_cut(inst, strategy, wbar, xbar)
                if cut.violation(wbar, xbar) > MIN_USER_VIOLATION and rel.add(cut):
                    cuts[fam] += 1
                    sol = rel.solve(node, sol.basis)
                    continue
            node.basis, node.bound = sol.basis, sol.objective
            down, up, _ = branch(node, xbar)
            heapq.heappush(heap, (sol.objective, next(seq), down))
            heapq.heappush(heap, (sol.objective, next(seq), up))
            break
    if status is SolveStatus.OPTIMAL:
        lb = ub
    lb = min(lb, ub)
    support = tuple(int(i) for i in np.flatnonzero(best_x > 0.5))
    return SolveReport(status, float(ub), float(lb), mip_gap(ub, lb), explored, cuts,
                       time.perf_counter() - start, support, strategy, tuple(rel.pool))

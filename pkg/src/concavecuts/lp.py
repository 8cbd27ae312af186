"""Dense bounded-variable revised simplex.

Every row ``i`` gets a slack column ``n + i`` so that rows read ``A x + s = b``:
``<=`` rows have ``s >= 0``, ``>=`` rows have ``s <= 0`` and ``=`` rows fix ``s = 0``.
A :class:`Basis` names one basic column per row plus the nonbasic columns
parked at their upper bound, which is all a warm start needs.

Cold starts run a two-phase primal simplex with signed artificials. Warm
starts that are dual feasible but primal infeasible (added rows, tightened
bounds) go through the dual simplex first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np

from .core import InputError

FEAS_TOL = 1e-7
OPT_TOL = 1e-9
PIVOT_TOL = 1e-10
REFACTOR_EVERY = 100
BLAND_AFTER = 1000
ITER_CAP = 50_000

SENSES = ("<=", ">=", "=")
_BASIC, _LOWER, _UPPER, _FREE = 0, 1, 2, 3


class LpStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ITER_LIMIT = "IterLimit"


@dataclass(frozen=True)
class Basis:
    basic: tuple
    at_upper: tuple = ()


@dataclass(frozen=True, eq=False)
class LpProblem:
    """``min`` (or ``max``) ``c x`` subject to ``A x (sense) b`` and ``lb <= x <= ub``."""

    c: np.ndarray
    A: np.ndarray
    senses: tuple
    b: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    maximize: bool = False
    names: tuple | None = None

    def __post_init__(self):
        c = np.array(self.c, dtype=float).ravel()
        n = len(c)
        A = np.array(self.A, dtype=float)
        if A.size == 0:
            A = np.zeros((len(self.senses), n))
        elif A.ndim == 1:
            A = A.reshape(1, -1)
        b = np.array(self.b, dtype=float).ravel()
        lb = np.array(self.lb, dtype=float).ravel()
        ub = np.array(self.ub, dtype=float).ravel()
        senses = tuple(self.senses)
        m = len(senses)
        if A.shape != (m, n) or len(b) != m:
            raise InputError(f"dimension mismatch: A {A.shape}, {m} senses, {len(b)} rhs, {n} costs")
        if len(lb) != n or len(ub) != n:
            raise InputError("bounds must have one entry per column")
        if any(s not in SENSES for s in senses):
            raise InputError(f"senses must be drawn from {SENSES}")
        for name, arr in (("c", c), ("A", A), ("b", b), ("lb", lb), ("ub", ub)):
            if np.isnan(arr).any():
                raise InputError(f"NaN in {name}")
        if not (np.isfinite(c).all() and np.isfinite(A).all() and np.isfinite(b).all()):
            raise InputError("costs, matrix and rhs must be finite")
        if (lb > ub).any() or (lb == np.inf).any() or (ub == -np.inf).any():
            raise InputError("each column needs lb <= ub with lb < inf and ub > -inf")
        for name, arr in (("c", c), ("A", A), ("b", b), ("lb", lb), ("ub", ub)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "senses", senses)

    @property
    def n(self) -> int:
        return len(self.c)

    @property
    def m(self) -> int:
        return len(self.senses)

    def with_rows(self, A_rows, senses: Sequence[str], b_rows) -> "LpProblem":
        A_rows = np.asarray(A_rows, dtype=float).reshape(-1, self.n)
        return replace(self, A=np.vstack([self.A, A_rows]), senses=self.senses + tuple(senses),
                       b=np.concatenate([self.b, np.asarray(b_rows, dtype=float).ravel()]))

    def with_bounds(self, lb, ub) -> "LpProblem":
        return replace(self, lb=np.asarray(lb, dtype=float), ub=np.asarray(ub, dtype=float))

    def to_lp_text(self) -> str:
        """CPLEX LP format, for cross-checking with external solvers."""
        names = self.names or tuple(f"x{j + 1}" for j in range(self.n))

        def expr(coefs):
            parts = []
            for j, v in enumerate(coefs):
                if v == 0:
                    continue
                sign = "-" if v < 0 else "+"
                parts.append(f"{sign} {abs(v):.17g} {names[j]}")
            if not parts:
                return "0 " + names[0]
            s = " ".join(parts)
            return s[2:] if s.startswith("+ ") else s

        lines = ["Maximize" if self.maximize else "Minimize", f" obj: {expr(self.c)}", "Subject To"]
        for i in range(self.m):
            lines.append(f" r{i + 1}: {expr(self.A[i])} {self.senses[i]} {self.b[i]:.17g}")
        lines.append("Bounds")
        for j in range(self.n):
            lo, hi = self.lb[j], self.ub[j]
            if lo == -np.inf and hi == np.inf:
                lines.append(f" {names[j]} free")
            else:
                lo_s = "-inf" if lo == -np.inf else f"{lo:.17g}"
                hi_s = "+inf" if hi == np.inf else f"{hi:.17g}"
                lines.append(f" {lo_s} <= {names[j]} <= {hi_s}")
        lines.append("End")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: LpStatus
    x: np.ndarray | None
    duals: np.ndarray | None
    reduced_costs: np.ndarray | None
    objective: float
    basis: Basis | None
    iterations: int
    problem: LpProblem = field(repr=False)

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL

    def row_activity(self) -> np.ndarray:
        return self.problem.A @ self.x

    def primal_residual(self) -> float:
        """Largest violation of a row or a bound."""
        p, x = self.problem, self.x
        act = p.A @ x
        worst = 0.0
        for i, s in enumerate(p.senses):
            if s == "<=":
                worst = max(worst, act[i] - p.b[i])
            elif s == ">=":
                worst = max(worst, p.b[i] - act[i])
            else:
                worst = max(worst, abs(act[i] - p.b[i]))
        worst = max(worst, float(np.max(p.lb - x, initial=0.0)), float(np.max(x - p.ub, initial=0.0)))
        return worst

    def dual_objective(self) -> float:
        """``b y`` plus the bound terms carried by nonbasic reduced costs."""
        p = self.problem
        val = float(p.b @ self.duals)
        for j, d in enumerate(self.reduced_costs):
            if d != 0.0:
                val += d * self.x[j]
        return val

    def complementary_slackness_residual(self) -> float:
        p, x = self.problem, self.x
        act = p.A @ x
        worst = 0.0
        for i in range(p.m):
            worst = max(worst, abs(self.duals[i] * (p.b[i] - act[i])))
        for j in range(p.n):
            d = self.reduced_costs[j]
            if d == 0.0:
                continue
            gap = min(abs(x[j] - p.lb[j]), abs(p.ub[j] - x[j]))
            worst = max(worst, abs(d) * gap)
        return worst


class _Engine:
    """Mutable simplex state over the columns ``[A | I]`` of one problem (minimization form)."""

    def __init__(self, p: LpProblem, iter_cap: int):
        m, n = p.m, p.n
        self.m, self.n = m, n
        self.A = np.hstack([p.A, np.eye(m)])
        self.b = p.b.copy()
        self.c = np.concatenate([-p.c if p.maximize else p.c, np.zeros(m)])
        slo = np.array([0.0 if s == "<=" else (-np.inf if s == ">=" else 0.0) for s in p.senses])
        shi = np.array([np.inf if s == "<=" else 0.0 for s in p.senses])
        self.lo = np.concatenate([p.lb, slo])
        self.hi = np.concatenate([p.ub, shi])
        self.ncols = n + m
        self.iter_cap = iter_cap
        self.iters = 0
        self.since_refactor = 0
        self.basic = np.arange(n, n + m)
        self.state = np.zeros(self.ncols, dtype=np.int8)
        self.x = np.zeros(self.ncols)
        self.Binv = np.eye(m)

    # ---- basis bookkeeping

    def _park(self, j: int, upper: bool = False):
        lo, hi = self.lo[j], self.hi[j]
        if upper and np.isfinite(hi):
            self.state[j], self.x[j] = _UPPER, hi
        elif np.isfinite(lo):
            self.state[j], self.x[j] = _LOWER, lo
        elif np.isfinite(hi):
            self.state[j], self.x[j] = _UPPER, hi
        else:
            self.state[j], self.x[j] = _FREE, 0.0

    def load(self, basic: Sequence[int], at_upper: Sequence[int] = ()) -> bool:
        basic = np.asarray(basic, dtype=int)
        if len(basic) != self.m or len(set(basic.tolist())) != self.m or (basic < 0).any() or (basic >= self.ncols).any():
            return False
        up = set(int(j) for j in at_upper)
        self.basic = basic.copy()
        isb = np.zeros(self.ncols, dtype=bool)
        isb[basic] = True
        for j in range(self.ncols):
            if not isb[j]:
                self._park(j, j in up)
        self.state[basic] = _BASIC
        return self.refactor()

    def refactor(self) -> bool:
        B = self.A[:, self.basic]
        try:
            Binv = np.linalg.inv(B) if self.m else np.zeros((0, 0))
        except np.linalg.LinAlgError:
            return False
        if self.m and not (np.isfinite(Binv).all() and np.abs(Binv).max() < 1e12):
            return False
        self.Binv = Binv
        self.since_refactor = 0
        self.compute_xB()
        return True

    def compute_xB(self):
        xn = self.x.copy()
        xn[self.basic] = 0.0
        self.x[self.basic] = self.Binv @ (self.b - self.A @ xn)

    def reduced_costs(self, cost):
        y = cost[self.basic] @ self.Binv
        return y, cost - y @ self.A

    def basis(self) -> Basis:
        up = tuple(int(j) for j in np.flatnonzero(self.state == _UPPER))
        return Basis(tuple(int(j) for j in self.basic), up)

    def _pivot(self, r: int, j: int, alpha: np.ndarray):
        piv = alpha[r]
        row = self.Binv[r] / piv
        self.Binv -= np.outer(alpha, row)
        self.Binv[r] = row
        self.basic[r] = j
        self.state[j] = _BASIC
        self.iters += 1
        self.since_refactor += 1
        if self.since_refactor >= REFACTOR_EVERY:
            self.refactor()

    def primal_infeasibility(self) -> np.ndarray:
        xb = self.x[self.basic]
        lo, hi = self.lo[self.basic], self.hi[self.basic]
        return np.maximum(lo - xb, 0.0) + np.maximum(xb - hi, 0.0)

    def dual_feasible(self, cost, tol: float) -> bool:
        _, d = self.reduced_costs(cost)
        free_move = self.lo < self.hi
        st = self.state
        bad = ((st == _LOWER) & free_move & (d < -tol)) | ((st == _UPPER) & free_move & (d > tol)) | ((st == _FREE) & (np.abs(d) > tol))
        return not bad.any()

    # ---- primal simplex

    def primal(self, cost) -> LpStatus:
        degenerate = 0
        while True:
            if self.iters >= self.iter_cap:
                return LpStatus.ITER_LIMIT
            bland = degenerate >= BLAND_AFTER
            _, d = self.reduced_costs(cost)
            st = self.state
            movable = self.lo < self.hi
            inc = ((st == _LOWER) & movable & (d < -OPT_TOL)) | ((st == _FREE) & (d < -OPT_TOL))
            dec = ((st == _UPPER) & movable & (d > OPT_TOL)) | ((st == _FREE) & (d > OPT_TOL))
            elig = inc | dec
            if not elig.any():
                return LpStatus.OPTIMAL
            cand = np.flatnonzero(elig)
            j = int(cand[0]) if bland else int(cand[np.argmax(np.abs(d[cand]))])
            direction = 1.0 if inc[j] else -1.0
            alpha = self.Binv @ self.A[:, j]
            rate = -direction * alpha
            xb = self.x[self.basic]
            lo_b, hi_b = self.lo[self.basic], self.hi[self.basic]
            ratios = np.full(self.m, np.inf)
            down = (rate < -PIVOT_TOL) & np.isfinite(lo_b)
            up = (rate > PIVOT_TOL) & np.isfinite(hi_b)
            ratios[down] = np.maximum(xb[down] - lo_b[down], 0.0) / -rate[down]
            ratios[up] = np.maximum(hi_b[up] - xb[up], 0.0) / rate[up]
            t_row = ratios.min() if self.m else np.inf
            flip = self.hi[j] - self.lo[j] if st[j] != _FREE else np.inf
            if not np.isfinite(t_row) and not np.isfinite(flip):
                return LpStatus.UNBOUNDED
            if flip <= t_row:
                self.x[j] += direction * flip
                st[j] = _UPPER if direction > 0 else _LOWER
                self.x[self.basic] = xb + flip * rate
                self.iters += 1
                degenerate = 0
                continue
            t = t_row
            ties = np.flatnonzero(ratios <= t + 1e-12)
            if bland:
                r = int(ties[np.argmin(self.basic[ties])])
            else:
                r = int(ties[np.argmax(np.abs(alpha[ties]))])
            leaving = int(self.basic[r])
            self.x[self.basic] = xb + t * rate
            self.x[j] += direction * t
            if rate[r] < 0:
                st[leaving], self.x[leaving] = _LOWER, self.lo[leaving]
            else:
                st[leaving], self.x[leaving] = _UPPER, self.hi[leaving]
            self._pivot(r, j, alpha)
            degenerate = degenerate + 1 if t <= 1e-12 else 0

    def basify_free(self):
        """Pivot zero-cost free nonbasic columns into the basis so the optimum is a vertex."""
        for j in np.flatnonzero(self.state == _FREE):
            alpha = self.Binv @ self.A[:, j]
            xb = self.x[self.basic]
            lo_b, hi_b = self.lo[self.basic], self.hi[self.basic]
            for direction in (1.0, -1.0):
                rate = -direction * alpha
                ratios = np.full(self.m, np.inf)
                down = (rate < -PIVOT_TOL) & np.isfinite(lo_b)
                up = (rate > PIVOT_TOL) & np.isfinite(hi_b)
                ratios[down] = np.maximum(xb[down] - lo_b[down], 0.0) / -rate[down]
                ratios[up] = np.maximum(hi_b[up] - xb[up], 0.0) / rate[up]
                if not self.m or not np.isfinite(ratios.min()):
                    continue
                t = ratios.min()
                ties = np.flatnonzero(ratios <= t + 1e-12)
                r = int(ties[np.argmax(np.abs(alpha[ties]))])
                leaving = int(self.basic[r])
                self.x[self.basic] = xb + t * rate
                self.x[j] += direction * t
                if rate[r] < 0:
                    self.state[leaving], self.x[leaving] = _LOWER, self.lo[leaving]
                else:
                    self.state[leaving], self.x[leaving] = _UPPER, self.hi[leaving]
                self._pivot(int(r), int(j), alpha)
                break

    # ---- dual simplex

    def dual(self, cost) -> LpStatus:
        degenerate = 0
        while True:
            if self.iters >= self.iter_cap:
                return LpStatus.ITER_LIMIT
            infeas = self.primal_infeasibility()
            if not (infeas > FEAS_TOL).any():
                return LpStatus.OPTIMAL
            bland = degenerate >= BLAND_AFTER
            if bland:
                rows = np.flatnonzero(infeas > FEAS_TOL)
                r = int(rows[np.argmin(self.basic[rows])])
            else:
                r = int(np.argmax(infeas))
            leaving = int(self.basic[r])
            below = self.x[leaving] < self.lo[leaving]
            _, d = self.reduced_costs(cost)
            arow = self.Binv[r] @ self.A
            st = self.state
            movable = (self.lo < self.hi) & (st != _BASIC)
            if below:
                cand = movable & (((st == _LOWER) & (arow < -PIVOT_TOL)) | ((st == _UPPER) & (arow > PIVOT_TOL)) | ((st == _FREE) & (np.abs(arow) > PIVOT_TOL)))
            else:
                cand = movable & (((st == _LOWER) & (arow > PIVOT_TOL)) | ((st == _UPPER) & (arow < -PIVOT_TOL)) | ((st == _FREE) & (np.abs(arow) > PIVOT_TOL)))
            idx = np.flatnonzero(cand)
            if len(idx) == 0:
                return LpStatus.INFEASIBLE
            ratios = np.abs(d[idx]) / np.abs(arow[idx])
            best = ratios.min()
            ties = idx[ratios <= best + 1e-12]
            j = int(ties[0]) if bland else int(ties[np.argmax(np.abs(arow[ties]))])
            alpha = self.Binv @ self.A[:, j]
            if below:
                st[leaving], self.x[leaving] = _LOWER, self.lo[leaving]
            else:
                st[leaving], self.x[leaving] = _UPPER, self.hi[leaving]
            self._pivot(r, j, alpha)
            self.compute_xB()
            degenerate = degenerate + 1 if best <= 1e-12 else 0


class SimplexSolver:
    """Single-threaded solver; reusable across problems but not shareable across threads."""

    def __init__(self, iter_cap: int = ITER_CAP):
        self.iter_cap = iter_cap

    def solve(self, p: LpProblem, warm: Basis | None = None) -> LpSolution:
        eng = _Engine(p, self.iter_cap)
        status = None
        if warm is not None and self._load_warm(eng, warm):
            status = self._from_warm(eng)
        if status is None:
            eng = _Engine(p, self.iter_cap)
            status = self._cold(eng)
        if status is LpStatus.OPTIMAL and (eng.state == _FREE).any():
            eng.basify_free()
            status = eng.primal(eng.c)
        return self._package(p, eng, status)

    @staticmethod
    def _load_warm(eng: _Engine, warm: Basis) -> bool:
        basic = list(warm.basic)
        if len(basic) > eng.m:
            return False
        # rows added after the basis was taken enter with their slack basic
        basic += [eng.n + i for i in range(len(basic), eng.m)]
        return eng.load(basic, warm.at_upper)

    def _from_warm(self, eng: _Engine):
        if not (eng.primal_infeasibility() > FEAS_TOL).any():
            return eng.primal(eng.c)
        if eng.dual_feasible(eng.c, 1e-7):
            status = eng.dual(eng.c)
            if status is LpStatus.OPTIMAL:
                return eng.primal(eng.c)
            if status is LpStatus.INFEASIBLE:
                return status
        return None

    def _cold(self, eng: _Engine) -> LpStatus:
        m, n = eng.m, eng.n
        for j in range(n):
            eng._park(j)
        x_struct = eng.x[:n]
        resid = eng.b - eng.A[:, :n] @ x_struct
        art_rows, signs = [], []
        for i in range(m):
            s = n + i
            v = min(max(resid[i], eng.lo[s]), eng.hi[s])
            if abs(resid[i] - v) <= 0.0:
                continue
            art_rows.append(i)
            signs.append(1.0 if resid[i] > v else -1.0)
        if not art_rows:
            eng.load(np.arange(n, n + m))
            return eng.primal(eng.c)
        # phase 1 over [A | I | artificials]
        k = len(art_rows)
        art = np.zeros((m, k))
        for t, (i, sgn) in enumerate(zip(art_rows, signs)):
            art[i, t] = sgn
        orig = (eng.A, eng.c, eng.lo, eng.hi, eng.ncols)
        eng.A = np.hstack([eng.A, art])
        eng.c = np.concatenate([eng.c, np.zeros(k)])
        eng.lo = np.concatenate([eng.lo, np.zeros(k)])
        eng.hi = np.concatenate([eng.hi, np.full(k, np.inf)])
        eng.ncols += k
        eng.state = np.concatenate([eng.state, np.zeros(k, dtype=np.int8)])
        eng.x = np.concatenate([eng.x, np.zeros(k)])
        art_set = dict(zip(art_rows, range(k)))
        basic = [orig[4] + art_set[i] if i in art_set else n + i for i in range(m)]
        up = []
        for i in art_rows:
            s = n + i
            if eng.hi[s] == np.clip(resid[i], eng.lo[s], eng.hi[s]) and np.isfinite(eng.hi[s]) and eng.lo[s] != eng.hi[s]:
                up.append(s)
        struct_up = [j for j in range(n) if eng.state[j] == _UPPER]
        eng.load(basic, up + struct_up)
        cost1 = np.zeros(eng.ncols)
        cost1[orig[4]:] = 1.0
        status = eng.primal(cost1)
        if status is LpStatus.ITER_LIMIT:
            return status
        if float(eng.x[orig[4]:].sum()) > FEAS_TOL:
            return LpStatus.INFEASIBLE
        # drive basic artificials out, then drop their columns
        eng.hi[orig[4]:] = 0.0
        for r in range(m):
            if eng.basic[r] >= orig[4]:
                arow = eng.Binv[r] @ eng.A[:, : orig[4]]
                arow[eng.basic[eng.basic < orig[4]]] = 0.0
                j = int(np.argmax(np.abs(arow)))
                if abs(arow[j]) <= PIVOT_TOL:
                    continue
                alpha = eng.Binv @ eng.A[:, j]
                leaving = int(eng.basic[r])
                eng.state[leaving], eng.x[leaving] = _LOWER, 0.0
                eng._pivot(r, j, alpha)
        if (eng.basic >= orig[4]).any():
            return LpStatus.INFEASIBLE  # cannot happen with full-rank [A | I]
        basis = eng.basis()
        iters = eng.iters
        eng.A, eng.c, eng.lo, eng.hi, eng.ncols = orig
        eng.state = eng.state[: eng.ncols]
        eng.x = eng.x[: eng.ncols]
        eng.load(basis.basic, [j for j in basis.at_upper if j < eng.ncols])
        eng.iters = iters
        return eng.primal(eng.c)

    @staticmethod
    def _package(p: LpProblem, eng: _Engine, status: LpStatus) -> LpSolution:
        if status is not LpStatus.OPTIMAL:
            return LpSolution(status, None, None, None, math.nan, None, eng.iters, p)
        eng.refactor()
        y, d = eng.reduced_costs(eng.c)
        x = eng.x[: p.n].copy()
        # snap nonbasic columns exactly onto their bounds
        nb = eng.state[: p.n] != _BASIC
        x[nb] = eng.x[: p.n][nb]
        dx = d[: p.n].copy()
        dx[~nb] = 0.0
        sign = -1.0 if p.maximize else 1.0
        obj = float(p.c @ x)
        return LpSolution(status, x, sign * y, sign * dx, obj, eng.basis(), eng.iters, p)


def solve(p: LpProblem, warm: Basis | None = None, iter_cap: int = ITER_CAP) -> LpSolution:
    return SimplexSolver(iter_cap).solve(p, warm)


def resolve_with_added_rows(prev: LpSolution, A_rows, senses: Sequence[str], b_rows) -> LpSolution:
    """Append rows to an optimal problem and re-optimize from its basis (dual simplex)."""
    if not prev.optimal:
        raise InputError("warm re-solve needs an optimal parent solution")
    p = prev.problem.with_rows(A_rows, senses, b_rows)
    return solve(p, prev.basis)

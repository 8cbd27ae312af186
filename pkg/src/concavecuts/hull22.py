"""Cardinality-two, two-weight hull: explicit facets, categories and polar separation.

For ``k = 2`` the nontrivial facets are the two lifted-EPI patterns, the
super-average inequality and one averaged inequality per weight class. The
separation LP works for any ``k`` and backs both hull membership and the
facet enumeration used on instances outside that description.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import CapacityError, Instance, InputError, StructureError, TwoWeightProfile, two_weight_profile
from .cuts import LinearCut, feasible_points, tight_affine_dimension
from .lift_epi import lifted_epi_cut
from .lift_si import AssumptionError, SiParams, check_assumption, higher_si_cut, lower_si_cut
from .lp import Basis, LpProblem, LpStatus, SimplexSolver

LP_ROW_CAP = 100_000
MEMBERSHIP_TOL = 1e-7
DEDUP_TOL = 1e-7
PROBE_SEED = 20240917


class ScopeError(ValueError):
    """A k = 2 construction was requested outside its preconditions."""


class P22Family(str, Enum):
    EPI_L = "EPI_L"
    EPI_H = "EPI_H"
    LOWER_AVG = "LowerAvg"
    HIGHER_AVG = "HigherAvg"


class CategoryTag(str, Enum):
    C1 = "C1"
    C2 = "C2"
    C3 = "C3"
    C4 = "C4"
    C5 = "C5"


@dataclass(frozen=True)
class Category:
    tag: CategoryTag
    l: int | None
    h: int | None


@dataclass(frozen=True, eq=False)
class PolarRay:
    """``pi_w * w >= pi0 + pi x`` with ``pi_w`` normalized to one."""

    pi: np.ndarray
    pi0: float
    pi_w: float = 1.0
    value: float = math.nan  # separation objective at the probe that produced it

    def to_cut(self) -> LinearCut:
        return LinearCut(np.asarray(self.pi) / self.pi_w, self.pi0 / self.pi_w, "PolarRay")

    def normalized(self) -> np.ndarray:
        v = np.concatenate(([self.pi_w, self.pi0], self.pi))
        return v / np.max(np.abs(v))


# ---------------------------------------------------------------------------
# explicit inequalities


def _k2_profile(inst: Instance) -> TwoWeightProfile:
    if inst.k != 2:
        raise ScopeError(f"needs k = 2, got k = {inst.k}")
    return two_weight_profile(inst)


def super_average_cut(inst: Instance) -> LinearCut:
    prof = _k2_profile(inst)
    f = inst.f
    pi = np.where(prof.low_mask(), f(2 * prof.aL) / 2, f(2 * prof.aH) / 2)
    return LinearCut(pi, 0.0, "SuperAverage", {})


def p22_cut(inst: Instance, family: P22Family | str, index: int) -> LinearCut:
    """One of the four explicit ``k = 2`` patterns, distinguished by ``index``
    (a lower item for EPI_L and HigherAvg, a higher item otherwise)."""
    family = P22Family(family)
    prof = _k2_profile(inst)
    if not check_assumption(prof, inst.f, 2, 0):
        raise ScopeError("the explicit k = 2 patterns need the assumption at i0 = 0")
    f, aL, aH = inst.f, prof.aL, prof.aH
    low = prof.low_mask()
    wants_low = family in (P22Family.EPI_L, P22Family.HIGHER_AVG)
    if not 0 <= index < inst.n or wants_low != bool(low[index]):
        raise ScopeError(f"index {index} is not a {'lower' if wants_low else 'higher'}-weighted item")
    fL, fH, f2L, f2H, fLH = f(aL), f(aH), f(2 * aL), f(2 * aH), f(aL + aH)
    pi = np.zeros(inst.n)
    if family is P22Family.EPI_L:
        pi[low] = f2L - fL
        pi[~low] = fLH - fL
        pi[index] = fL
        fam = "LiftedEPI"
    elif family is P22Family.EPI_H:
        pi[low] = fLH - fH
        pi[~low] = f2H - fH
        pi[index] = fH
        fam = "LiftedEPI"
    elif family is P22Family.LOWER_AVG:
        if len(prof.IL) < 2:
            raise ScopeError("LowerAvg needs at least two lower-weighted items")
        pi[low] = f2L / 2
        pi[~low] = f2H - fLH + f2L / 2
        pi[index] = fLH - f2L / 2
        fam = "LowerSI"
    else:
        if len(prof.IH) < 2:
            raise ScopeError("HigherAvg needs at least two higher-weighted items")
        pi[~low] = f2H / 2
        pi[low] = f2L - fLH + f2H / 2
        pi[index] = fLH - f2H / 2
        fam = "HigherSI"
    return LinearCut(pi, 0.0, fam, {"pattern": family.value, "index": index})


def p22_system(inst: Instance, super_average: bool = True, lower_avg: bool = True, higher_avg: bool = True) -> list[LinearCut]:
    """Every nontrivial inequality of the ``k = 2`` description (symmetric within class)."""
    prof = _k2_profile(inst)
    cuts = [p22_cut(inst, P22Family.EPI_L, l) for l in prof.IL]
    cuts += [p22_cut(inst, P22Family.EPI_H, h) for h in prof.IH]
    if super_average:
        cuts.append(super_average_cut(inst))
    if lower_avg and len(prof.IL) >= 2:
        cuts += [p22_cut(inst, P22Family.LOWER_AVG, h) for h in prof.IH]
    if higher_avg and len(prof.IH) >= 2:
        cuts += [p22_cut(inst, P22Family.HIGHER_AVG, l) for l in prof.IL]
    return cuts


# ---------------------------------------------------------------------------
# categories


def _argmax_first(x: np.ndarray, items) -> int | None:
    best = None
    for i in items:
        if best is None or x[i] > x[best]:
            best = i
    return best


def classify(inst: Instance, xbar, tol: float = 1e-9) -> Category:
    """Category of ``xbar``; boundary points take the lowest-numbered category
    whose weak inequalities hold and whose designated cut exists."""
    prof = _k2_profile(inst)
    x = np.asarray(xbar, dtype=float)
    total = float(x.sum())
    if total > 2 + tol:
        raise InputError(f"sum of xbar is {total:.6g} > 2")
    l = _argmax_first(x, prof.IL)
    h = _argmax_first(x, prof.IH)
    sl, sh = float(x[list(prof.IL)].sum()), float(x[list(prof.IH)].sum())
    tl, th = 2 * x[l], 2 * x[h]

    def c1(strict):
        return tl > total + tol if strict else tl >= total - tol

    def c2(strict):
        return th > total + tol if strict else th >= total - tol

    def c3(strict):
        if strict:
            return tl < sl - tol and th < sh - tol
        return tl <= sl + tol and th <= sh + tol

    def c4():
        return (len(prof.IH) >= 2 and sl - tol <= tl <= total + tol and th <= total + tol
                and th - sh <= tl - sl + tol)

    def c5():
        return (len(prof.IL) >= 2 and sh - tol <= th <= total + tol and tl <= total + tol
                and tl - sl <= th - sh + tol)

    order = [
        (CategoryTag.C1, lambda: c1(True)),
        (CategoryTag.C2, lambda: c2(True)),
        (CategoryTag.C3, lambda: c3(True)),
        (CategoryTag.C4, c4),
        (CategoryTag.C5, c5),
        (CategoryTag.C1, lambda: c1(False)),
        (CategoryTag.C2, lambda: c2(False)),
        (CategoryTag.C3, lambda: c3(False)),
    ]
    for tag, test in order:
        if test():
            return Category(tag, l, h)
    raise InputError("point falls in no category (xbar outside [0, 1]^n?)")


def designated_cut(inst: Instance, cat: Category) -> LinearCut:
    if cat.tag is CategoryTag.C1:
        return p22_cut(inst, P22Family.EPI_L, cat.l)
    if cat.tag is CategoryTag.C2:
        return p22_cut(inst, P22Family.EPI_H, cat.h)
    if cat.tag is CategoryTag.C3:
        return super_average_cut(inst)
    if cat.tag is CategoryTag.C4:
        return p22_cut(inst, P22Family.HIGHER_AVG, cat.l)
    return p22_cut(inst, P22Family.LOWER_AVG, cat.h)


def most_violated_cut(inst: Instance, wbar: float, xbar, tol: float = 1e-9) -> LinearCut | None:
    """The category's designated cut, or ``None`` if it is not violated."""
    cut = designated_cut(inst, classify(inst, xbar, tol))
    return cut if cut.violation(wbar, xbar) > tol else None


# ---------------------------------------------------------------------------
# polar separation


class _SeparationModel:
    """Rows ``pi0 + pi(S) <= F(S)`` for every ``|S| <= k``; columns ``(pi0, pi)``."""

    def __init__(self, inst: Instance, k: int, row_cap: int = LP_ROW_CAP):
        n = inst.n
        if not 1 <= k <= n:
            raise InputError(f"k must lie in [1, {n}]")
        rows = sum(math.comb(n, j) for j in range(k + 1))
        if rows > row_cap:
            raise CapacityError(f"{rows} separation rows exceed the cap {row_cap}")
        self.inst, self.k = inst, k
        self.supports = [S for r in range(k + 1) for S in itertools.combinations(range(n), r)]
        A = np.zeros((rows, n + 1))
        A[:, 0] = 1.0
        for r, S in enumerate(self.supports):
            A[r, [i + 1 for i in S]] = 1.0
        self.A = A
        self.F = np.array([inst.f(sum(inst.a[i] for i in S)) for S in self.supports])
        self.solver = SimplexSolver()
        self.basis: Basis | None = None

    def solve(self, xbar) -> PolarRay:
        x = np.asarray(xbar, dtype=float)
        n = self.inst.n
        if x.shape != (n,):
            raise InputError(f"xbar must have length {n}")
        if (x < -1e-12).any() or (x > 1 + 1e-12).any() or x.sum() > self.k + 1e-9:
            raise InputError("xbar must lie in [0, 1]^n with sum at most k")
        p = LpProblem(np.concatenate(([1.0], x)), self.A, ("<=",) * len(self.F), self.F,
                      np.full(n + 1, -np.inf), np.full(n + 1, np.inf), maximize=True)
        sol = self.solver.solve(p, self.basis)
        if sol.status is not LpStatus.OPTIMAL:
            raise RuntimeError(f"separation LP ended with status {sol.status.value}")
        self.basis = sol.basis
        return PolarRay(sol.x[1:].copy(), float(sol.x[0]), 1.0, sol.objective)


def separation_lp(inst: Instance, xbar, k: int | None = None) -> PolarRay:
    """Most violated valid inequality at ``xbar`` (``w`` coefficient one)."""
    return _SeparationModel(inst, inst.k if k is None else k).solve(xbar)


def hull_membership(inst: Instance, wbar: float, xbar, k: int | None = None, tol: float = MEMBERSHIP_TOL) -> bool:
    ray = separation_lp(inst, xbar, k)
    return wbar >= ray.value - tol


def _probe_points(inst: Instance, k: int, point_budget: int, seed: int):
    rng = np.random.default_rng(seed)
    n = inst.n
    for r in range(k + 1):
        for S in itertools.combinations(range(n), r):
            u = rng.random(n)
            u *= min(1.0, k / u.sum())
            x = np.zeros(n)
            x[list(S)] = 1.0
            yield 0.9 * x + 0.1 * u
    for _ in range(point_budget):
        u = rng.random(n)
        s = rng.uniform(0, k)
        yield u * min(1.0, s / u.sum())


def enumerate_polar_facets(inst: Instance, k: int | None = None, point_budget: int = 500,
                           seed: int = PROBE_SEED, certify: bool = True) -> list[PolarRay]:
    """Distinct optimal vertices of the separation LP over a deterministic probe set.

    With ``certify`` only rays whose tight feasible points span affine
    dimension ``n`` are kept.
    """
    k = inst.k if k is None else k
    if inst.n > 10 or k > 4:
        raise CapacityError("polar enumeration is limited to n <= 10 and k <= 4")
    model = _SeparationModel(inst, k)
    sub = inst if k == inst.k else Instance(inst.a, k, inst.f)
    found: list[PolarRay] = []
    keys: list[np.ndarray] = []
    for x in _probe_points(inst, k, point_budget, seed):
        ray = model.solve(x)
        v = ray.normalized()
        if any(np.max(np.abs(v - u)) <= DEDUP_TOL for u in keys):
            continue
        if certify and tight_affine_dimension(ray.to_cut(), sub, tol=1e-9) != inst.n:
            continue
        keys.append(v)
        found.append(ray)
    return found


def _matches(pi: np.ndarray, pi0: float, cut: LinearCut, prof: TwoWeightProfile, tol: float) -> bool:
    if abs(pi0 - cut.pi0) > tol:
        return False
    low = prof.low_mask()
    for mask in (low, ~low):
        if not np.allclose(np.sort(pi[mask]), np.sort(cut.pi[mask]), atol=tol, rtol=0):
            return False
    return True


def classify_family(inst: Instance, ray: PolarRay | LinearCut, tol: float = 1e-6) -> str:
    """``known: <family>`` if the inequality matches a proposed family up to
    relabeling items within a weight class, otherwise ``unknown``."""
    cut = ray.to_cut() if isinstance(ray, PolarRay) else ray
    pi, pi0 = np.asarray(cut.pi), cut.pi0
    try:
        prof = two_weight_profile(inst)
    except StructureError:
        return "unknown"
    n, k = inst.n, inst.k
    IL, IH = list(prof.IL), list(prof.IH)
    for low_slots in itertools.combinations(range(n), len(IL)):
        perm = [0] * n
        lows, highs = iter(IL), iter(IH)
        slot_set = set(low_slots)
        for p in range(n):
            perm[p] = next(lows) if p in slot_set else next(highs)
        if _matches(pi, pi0, lifted_epi_cut(inst, perm), prof, tol):
            return "known: lifted-epi"
    for i0 in range(k):
        if len(IL) >= k and _matches(pi, pi0, lower_si_cut(inst, SiParams(i0, "lower")), prof, tol):
            return "known: lower-si"
        if len(IH) > k:
            try:
                cand = higher_si_cut(inst, SiParams(i0, "higher"))
            except AssumptionError:
                continue
            if _matches(pi, pi0, cand, prof, tol):
                return "known: higher-si"
    if k == 2 and _matches(pi, pi0, super_average_cut(inst), prof, tol):
        return "known: super-average"
    return "unknown"


def valid_everywhere(inst: Instance, cut: LinearCut, tol: float = 1e-9) -> bool:
    return all(cut.violation(w, x) <= tol for x, w in feasible_points(inst))


# ---------------------------------------------------------------------------
# hull verification over a probe grid


@dataclass
class HullReport:
    points: int = 0
    members: int = 0
    agree: int = 0
    designated_match: int = 0
    categories: dict = None
    mismatches: list = None

    def __post_init__(self):
        self.categories = {t.value: 0 for t in CategoryTag} if self.categories is None else self.categories
        self.mismatches = [] if self.mismatches is None else self.mismatches

    @property
    def equivalent(self) -> bool:
        return self.agree == self.points

    @property
    def all_designated(self) -> bool:
        return self.designated_match == self.points


def probe_grid(inst: Instance, count: int, seed: int, k: int = 2):
    """Seeded ``xbar`` probes in ``[0, 1]^n`` with ``sum <= k``: half dense, half sparse."""
    rng = np.random.default_rng(seed)
    n = inst.n
    for t in range(count):
        if t % 2 == 0:
            u = rng.random(n)
            x = u * min(1.0, rng.uniform(0, k) / u.sum())
        else:
            m = int(rng.integers(1, min(n, 4) + 1))
            idx = rng.choice(n, m, replace=False)
            x = np.zeros(n)
            x[idx] = rng.random(m)
            if x.sum() > k:
                x *= k / x.sum()
        yield np.minimum(x, 1.0), rng


def verify_hull(inst: Instance, grid: int, seed: int, super_average: bool = True, lower_avg: bool = True,
                higher_avg: bool = True, tol: float = MEMBERSHIP_TOL) -> HullReport:
    """Compare LP membership with the explicit ``k = 2`` system on ``grid`` probes.

    ``wbar`` is placed a random distance above or below the LP value so that
    both verdicts occur; the flags drop families for the reduced variants.
    """
    system = p22_system(inst, super_average, lower_avg, higher_avg)
    model = _SeparationModel(inst, 2)
    rep = HullReport()
    for x, rng in probe_grid(inst, grid, seed):
        ray = model.solve(x)
        scale = max(1.0, abs(ray.value))
        delta = rng.choice([-1.0, 1.0]) * 10 ** rng.uniform(-5, 0) * scale
        wbar = ray.value + delta
        in_hull = wbar >= ray.value - tol
        sys_rhs = max(c.rhs(x) for c in system)
        in_system = wbar >= sys_rhs - tol
        cat = classify(inst, x)
        rep.points += 1
        rep.categories[cat.tag.value] += 1
        rep.members += in_hull
        if in_hull == in_system:
            rep.agree += 1
        else:
            rep.mismatches.append((wbar, x.tolist(), ray.value, sys_rhs))
        if abs(designated_cut(inst, cat).rhs(x) - ray.value) <= tol * scale:
            rep.designated_match += 1
    return rep

"""Extended polymatroid inequalities and their exact lifting for two-weight instances.

A cut is built in permuted coordinates: position ``p`` of ``perm`` holds item
``perm[p]`` and the base set is the first ``k`` positions. Coefficients are
mapped back to original item order before returning.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import CapacityError, Instance, InputError, TwoWeightProfile, two_weight_profile
from .cuts import LinearCut, check_permutation, epi_coefficients

ENUMERATION_CAP = 2_000_000


def epi_cut(inst: Instance, perm: Sequence[int]) -> LinearCut:
    perm = check_permutation(perm, inst.n)
    return LinearCut(epi_coefficients(inst, perm), 0.0, "EPI", {"perm": perm})


@dataclass
class LiftingContext:
    """State of a sequential lifting run: coefficients fixed so far, keyed by item."""

    inst: Instance
    perm: tuple
    k: int
    coeffs: dict = field(default_factory=dict)
    profile: TwoWeightProfile | None = None

    def __post_init__(self):
        self.perm = check_permutation(self.perm, self.inst.n)
        self.position = {item: p for p, item in enumerate(self.perm)}
        if self.profile is None and len(self.inst.distinct_weights()) == 2:
            self.profile = two_weight_profile(self.inst)

    def lifted_before(self, j: int) -> list[int]:
        return list(self.perm[: self.position[j]])


def zeta_support_value(ctx: LiftingContext, j: int, X: Sequence[int]) -> float:
    """Objective of the lifting problem for item ``j`` at support ``X``."""
    X = list(X)
    before = set(ctx.lifted_before(j))
    if not set(X) <= before or len(set(X)) != len(X):
        raise InputError(f"support {X} must consist of distinct items lifted before {j}")
    if len(X) > ctx.k - 1:
        raise InputError(f"support size {len(X)} exceeds k - 1 = {ctx.k - 1}")
    missing = [i for i in X if i not in ctx.coeffs]
    if missing:
        raise InputError(f"coefficients not yet fixed for items {missing}")
    a = ctx.inst.a
    return ctx.inst.f(a[j] + sum(a[i] for i in X)) - sum(ctx.coeffs[i] for i in X)


def _oracle_min(ctx: LiftingContext, j: int, cap: int, want_argmins: bool, tol: float):
    before = ctx.lifted_before(j)
    top = min(ctx.k - 1, len(before))
    count = sum(math.comb(len(before), r) for r in range(top + 1))
    if count > cap:
        raise CapacityError(f"{count} supports exceed the enumeration cap {cap}")
    a = ctx.inst.a
    f = ctx.inst.f
    coef = ctx.coeffs
    best = math.inf
    values = []
    for r in range(top + 1):
        for X in itertools.combinations(before, r):
            v = f(a[j] + sum(a[i] for i in X)) - sum(coef[i] for i in X)
            if want_argmins:
                values.append((v, X))
            if v < best:
                best = v
    if not want_argmins:
        return best, None
    return best, [X for v, X in values if v <= best + tol]


def lift_oracle_epi(ctx: LiftingContext, j: int, cap: int = ENUMERATION_CAP) -> float:
    """Exact lifting value for item ``j`` by enumerating every support of size <= k - 1."""
    return _oracle_min(ctx, j, cap, False, 0.0)[0]


def lift_oracle_epi_argmins(ctx: LiftingContext, j: int, tol: float = 1e-9, cap: int = ENUMERATION_CAP):
    """Oracle value together with every minimizing support (lexicographic order)."""
    return _oracle_min(ctx, j, cap, True, tol)


def oracle_lifted_epi(inst: Instance, perm: Sequence[int], cap: int = ENUMERATION_CAP) -> np.ndarray:
    """Lift every coefficient in ``perm`` order with the brute-force oracle."""
    ctx = LiftingContext(inst, perm, inst.k)
    for j in ctx.perm:
        ctx.coeffs[j] = lift_oracle_epi(ctx, j, cap)
    return np.array([ctx.coeffs[i] for i in range(inst.n)])


def lifted_epi_cut(inst: Instance, perm: Sequence[int]) -> LinearCut:
    """Exactly lifted EPI built on the first ``k`` items of ``perm``."""
    perm = check_permutation(perm, inst.n)
    prof = two_weight_profile(inst)
    k = inst.k
    a = inst.a
    f = inst.f
    low = [prof.is_low(i) for i in perm]
    head = perm[: k - 1]
    head_sum = sum(a[i] for i in head)
    f_head = f(head_sum)
    zeta = {}

    acc, prev = 0.0, 0.0
    for i in head:
        acc += a[i]
        cur = f(acc)
        zeta[i] = cur - prev
        prev = cur

    head_low = [i for i in head if prof.is_low(i)]
    head_high = [i for i in head if not prof.is_low(i)]
    d_low = len(head_low)
    H = []  # higher items at positions >= k - 1, in order
    prev_high = None
    for p in range(k - 1, inst.n):
        j = perm[p]
        if low[p]:
            zeta[j] = f(a[j] + head_sum) - f_head
            continue
        H.append(j)
        i = len(H)
        support = H[: min(i - 1, d_low)] + head_low[: max(d_low - i + 1, 0)] + head_high
        cand = f(a[j] + sum(a[q] for q in support)) - sum(zeta[q] for q in support)
        if i == 1:
            # base value is the [k-1] support, which coincides with cand for i = 1
            zeta[j] = cand
        else:
            zeta[j] = min(zeta[prev_high], cand)
        prev_high = j

    pi = np.array([zeta[i] for i in range(inst.n)])
    return LinearCut(pi, 0.0, "LiftedEPI", {"perm": perm, "base_set": perm[:k]})


def ali_cut(inst: Instance, perm: Sequence[int]) -> LinearCut:
    """Approximate lifted inequality: EPI on the first ``k`` items, then a greedy
    marginal over the ``k - 1`` heaviest earlier items for each later item."""
    perm = check_permutation(perm, inst.n)
    prof = two_weight_profile(inst)
    k = inst.k
    a = inst.a
    f = inst.f
    pi = np.zeros(inst.n)
    base = epi_coefficients(inst, perm)
    for i in perm[:k]:
        pi[i] = base[i]
    for p in range(k, inst.n):
        earlier = perm[:p]
        highs = [i for i in earlier if not prof.is_low(i)]
        lows = [i for i in earlier if prof.is_low(i)]
        T = (highs + lows)[: k - 1]
        t_sum = sum(a[i] for i in T)
        j = perm[p]
        pi[j] = f(a[j] + t_sum) - f(t_sum)
    return LinearCut(pi, 0.0, "ALI", {"perm": perm, "base_set": perm[:k]})

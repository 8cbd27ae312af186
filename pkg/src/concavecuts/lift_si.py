"""Separation inequalities over one weight class, lifted onto the other class.

A lower-SI averages over the lower-weighted items and lifts the higher ones;
a higher-SI does the reverse and is only exact when :func:`check_assumption`
holds for its ``i0``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    CapacityError,
    ConcaveFunction,
    Instance,
    InputError,
    StructureError,
    TOL,
    TwoWeightProfile,
    two_weight_profile,
)
from .cuts import LinearCut, check_class_order
from .lift_epi import ENUMERATION_CAP


class AssumptionError(ValueError):
    """The weight/curvature condition needed for exact higher-SI lifting fails."""


@dataclass(frozen=True)
class SiParams:
    i0: int
    weight_class: str = "lower"
    perm_within_class: tuple | None = None
    perm_other_class: tuple | None = None

    def __post_init__(self):
        wc = self.weight_class.lower()
        if wc not in ("lower", "higher"):
            raise InputError(f"weight_class must be 'lower' or 'higher', got {self.weight_class!r}")
        object.__setattr__(self, "weight_class", wc)


def si_coefficients(count: int, alpha: float, k: int, i0: int, f: ConcaveFunction) -> np.ndarray:
    """SI coefficients in permutation order: EPI marginals for the first ``i0``
    positions, then the average slope ``psi`` over ``[i0 * alpha, k * alpha]``."""
    if not 0 <= i0 <= k - 1:
        raise InputError(f"i0 must lie in [0, {k - 1}], got {i0}")
    if count < k:
        raise InputError(f"need at least k={k} items, got {count}")
    psi = (f(k * alpha) - f(i0 * alpha)) / (k - i0)
    out = np.full(count, psi)
    for p in range(i0):
        out[p] = f((p + 1) * alpha) - f(p * alpha)
    return out


def si_cut(count: int, alpha: float, k: int, i0: int, f: ConcaveFunction, perm: Sequence[int] | None = None) -> LinearCut:
    """SI over a single-weight ground set of ``count`` items."""
    perm = tuple(range(count)) if perm is None else check_class_order(perm, range(count), "perm")
    coef = si_coefficients(count, alpha, k, i0, f)
    pi = np.zeros(count)
    pi[list(perm)] = coef
    return LinearCut(pi, 0.0, "SI", {"perm": perm, "i0": i0})


def check_assumption(profile: TwoWeightProfile, f: ConcaveFunction, k: int, i0: int, tol: float = TOL) -> bool:
    lhs, rhs = assumption_sides(profile, f, k, i0)
    return lhs <= rhs + tol


def assumption_sides(profile: TwoWeightProfile, f: ConcaveFunction, k: int, i0: int) -> tuple[float, float]:
    """Both sides of the condition ``lhs <= rhs``."""
    if not 0 <= i0 <= k - 1:
        raise InputError(f"i0 must lie in [0, {k - 1}], got {i0}")
    aL, aH = profile.aL, profile.aH
    lhs = f(aL + (i0 + 1) * aH) - f(aL + i0 * aH)
    rhs = (f(k * aH) - f(i0 * aH)) / (k - i0)
    return lhs, rhs


def _orders(prof: TwoWeightProfile, params: SiParams):
    base_items, other_items = (prof.IL, prof.IH) if params.weight_class == "lower" else (prof.IH, prof.IL)
    base = tuple(base_items) if params.perm_within_class is None else check_class_order(params.perm_within_class, base_items, "perm_within_class")
    other = tuple(other_items) if params.perm_other_class is None else check_class_order(params.perm_other_class, other_items, "perm_other_class")
    return base, other


def _lifted_si(inst: Instance, params: SiParams, family: str) -> LinearCut:
    prof = two_weight_profile(inst)
    base, other = _orders(prof, params)
    k, f, a = inst.k, inst.f, inst.a
    alpha = prof.aL if params.weight_class == "lower" else prof.aH
    coef = {}
    for item, c in zip(base, si_coefficients(len(base), alpha, k, params.i0, f)):
        coef[item] = c
    prev = None
    for s, j in enumerate(other):
        # candidate support: first k-1-s base items plus every earlier lifted item
        if s > k - 1:
            coef[j] = prev
            continue
        support = list(base[: k - 1 - s]) + list(other[:s])
        cand = f(a[j] + sum(a[i] for i in support)) - sum(coef[i] for i in support)
        coef[j] = cand if prev is None else min(prev, cand)
        prev = coef[j]
    pi = np.array([coef[i] for i in range(inst.n)])
    prov = {"i0": params.i0, "perm_within_class": base, "perm_other_class": other}
    return LinearCut(pi, 0.0, family, prov)


def lower_si_cut(inst: Instance, params: SiParams) -> LinearCut:
    """SI over the lower-weighted items, higher-weighted items lifted in order."""
    if params.weight_class != "lower":
        raise InputError("lower_si_cut needs weight_class='lower'")
    prof = two_weight_profile(inst)
    if len(prof.IL) < inst.k:
        raise StructureError(f"lower-SI needs |I_L| >= k={inst.k}, have {len(prof.IL)}")
    if not 0 <= params.i0 <= inst.k - 1:
        raise InputError(f"i0 must lie in [0, {inst.k - 1}], got {params.i0}")
    return _lifted_si(inst, params, "LowerSI")


def higher_si_cut(inst: Instance, params: SiParams) -> LinearCut:
    """SI over the higher-weighted items, lower-weighted items lifted in order.

    Refuses to build the cut when the assumption fails for ``params.i0``; the
    closed form can then overestimate the lifting coefficients.
    """
    if params.weight_class != "higher":
        raise InputError("higher_si_cut needs weight_class='higher'")
    prof = two_weight_profile(inst)
    if len(prof.IH) <= inst.k:
        raise StructureError(f"higher-SI needs |I_H| > k={inst.k}, have {len(prof.IH)}")
    if not 0 <= params.i0 <= inst.k - 1:
        raise InputError(f"i0 must lie in [0, {inst.k - 1}], got {params.i0}")
    if not check_assumption(prof, inst.f, inst.k, params.i0):
        lhs, rhs = assumption_sides(prof, inst.f, inst.k, params.i0)
        raise AssumptionError(f"assumption fails for i0={params.i0}: {lhs:.6g} > {rhs:.6g}")
    return _lifted_si(inst, params, "HigherSI")


def higher_si_closed_form(inst: Instance, params: SiParams) -> LinearCut:
    """The higher-SI recursion without the assumption guard (test use only)."""
    return _lifted_si(inst, SiParams(params.i0, "higher", params.perm_within_class, params.perm_other_class), "HigherSI")


def lift_oracle_si(inst: Instance, params: SiParams, j: int, coeffs: dict, cap: int = ENUMERATION_CAP) -> float:
    """Exact lifting value for item ``j`` of the non-base class.

    ``coeffs`` holds every coefficient fixed before ``j``: the whole base class
    and the lifted items preceding ``j``.
    """
    prof = two_weight_profile(inst)
    base, other = _orders(prof, params)
    if j not in other:
        raise InputError(f"item {j} is not in the lifted class")
    before = list(base) + list(other[: other.index(j)])
    missing = [i for i in before if i not in coeffs]
    if missing:
        raise InputError(f"coefficients not yet fixed for items {missing}")
    top = min(inst.k - 1, len(before))
    count = sum(math.comb(len(before), r) for r in range(top + 1))
    if count > cap:
        raise CapacityError(f"{count} supports exceed the enumeration cap {cap}")
    a, f = inst.a, inst.f
    best = math.inf
    for r in range(top + 1):
        for X in itertools.combinations(before, r):
            v = f(a[j] + sum(a[i] for i in X)) - sum(coeffs[i] for i in X)
            if v < best:
                best = v
    return best


def oracle_lifted_si(inst: Instance, params: SiParams, cap: int = ENUMERATION_CAP) -> np.ndarray:
    """SI on the base class, every other coefficient lifted with the oracle."""
    prof = two_weight_profile(inst)
    base, other = _orders(prof, params)
    alpha = prof.aL if params.weight_class == "lower" else prof.aH
    coeffs = dict(zip(base, si_coefficients(len(base), alpha, inst.k, params.i0, inst.f)))
    for j in other:
        coeffs[j] = lift_oracle_si(inst, params, j, coeffs, cap)
    return np.array([coeffs[i] for i in range(inst.n)])


def best_i0(inst: Instance, w: float, x, perm_other: Sequence[int] | None = None) -> int:
    """``i0`` whose lower-SI is most violated at ``(w, x)``; ties go to the smallest."""
    from .cuts import descending_order

    prof = two_weight_profile(inst)
    x = np.asarray(x, dtype=float)
    within = descending_order(x, prof.IL)
    other = descending_order(x, prof.IH) if perm_other is None else tuple(perm_other)
    best, best_v = 0, -math.inf
    for i0 in range(inst.k):
        cut = lower_si_cut(inst, SiParams(i0, "lower", within, other))
        v = cut.violation(w, x)
        if v > best_v + 1e-12:
            best, best_v = i0, v
    return best

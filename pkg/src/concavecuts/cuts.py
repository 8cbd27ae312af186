"""Linear inequalities ``w >= pi0 + pi^T x`` and helpers shared by the cut generators."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import Instance, InputError

FAMILIES = ("EPI", "LiftedEPI", "ALI", "SI", "LowerSI", "HigherSI", "SuperAverage", "PolarRay")


@dataclass(frozen=True)
class LinearCut:
    """The inequality ``w >= pi0 + pi . x``.

    ``provenance`` records what produced the cut (permutation, base set, ``i0``)
    so that a test can rebuild it.
    """

    pi: np.ndarray
    pi0: float = 0.0
    family: str = "EPI"
    provenance: dict = field(default_factory=dict, compare=False)
    w_coeff: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InputError(f"unknown cut family {self.family!r}")
        pi = np.array(self.pi, dtype=float)
        pi.setflags(write=False)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "pi0", float(self.pi0))

    @property
    def n(self) -> int:
        return len(self.pi)

    def rhs(self, x) -> float:
        return self.pi0 + float(np.dot(self.pi, np.asarray(x, dtype=float)))

    def violation(self, w: float, x) -> float:
        """Positive when ``(w, x)`` violates the cut."""
        return self.rhs(x) - w

    def key(self, digits: int = 9) -> tuple:
        """Hashable rounded coefficient tuple, used to skip duplicates."""
        return (round(self.pi0, digits),) + tuple(round(v, digits) for v in self.pi)

    def format(self, decimals: int = 6, one_based: bool = True) -> str:
        off = 1 if one_based else 0
        terms = [f"{self.pi0:.{decimals}f}"]
        for i, c in enumerate(self.pi):
            sign = "-" if c < 0 else "+"
            terms.append(f"{sign} {abs(c):.{decimals}f}*x{i + off}")
        return "w >= " + " ".join(terms)

    def to_dict(self) -> dict:
        prov = {}
        for key, val in self.provenance.items():
            if key in ("perm", "base_set", "perm_within_class", "perm_other_class"):
                prov[key] = [int(v) + 1 for v in val]
            else:
                prov[key] = val
        return {"family": self.family, "pi0": self.pi0, "pi": [float(v) for v in self.pi], "provenance": prov}


def check_permutation(perm: Sequence[int], n: int) -> tuple[int, ...]:
    perm = tuple(int(i) for i in perm)
    if sorted(perm) != list(range(n)):
        raise InputError(f"not a permutation of 0..{n - 1}: {perm}")
    return perm


def check_class_order(order: Sequence[int], members: Sequence[int], what: str) -> tuple[int, ...]:
    order = tuple(int(i) for i in order)
    if sorted(order) != sorted(members):
        raise InputError(f"{what} must order exactly the items {sorted(members)}, got {order}")
    return order


def epi_coefficients(inst: Instance, perm: Sequence[int]) -> np.ndarray:
    """Telescoping marginals along ``perm``; returned in original item order."""
    pi = np.zeros(inst.n)
    acc = 0.0
    prev = 0.0
    for i in perm:
        acc += inst.a[i]
        cur = inst.f(acc)
        pi[i] = cur - prev
        prev = cur
    return pi


def descending_order(values, items: Sequence[int] | None = None) -> tuple[int, ...]:
    """Items sorted by descending value; ties broken by lowest index."""
    values = np.asarray(values, dtype=float)
    if items is None:
        items = range(len(values))
    return tuple(sorted(items, key=lambda i: (-values[i], i)))


def feasible_points(inst: Instance):
    """Yield ``(x, f(a^T x))`` for every binary ``x`` with ``sum(x) <= k``."""
    for S in inst.feasible_supports():
        x = np.zeros(inst.n)
        x[list(S)] = 1.0
        yield x, inst.f(sum(inst.a[i] for i in S))


def max_violation(cut: LinearCut, inst: Instance) -> float:
    """Largest violation of ``cut`` over all integer feasible points (<= 0 means valid)."""
    return max(cut.violation(w, x) for x, w in feasible_points(inst))


def tight_affine_dimension(cut: LinearCut, inst: Instance, tol: float = 1e-9) -> int:
    """Affine dimension of the feasible points ``(f(a^T x), x)`` on which ``cut`` is tight."""
    pts = [np.concatenate(([w], x)) for x, w in feasible_points(inst) if abs(cut.violation(w, x)) <= tol * max(1.0, abs(w))]
    if not pts:
        return -1
    P = np.array(pts)
    if len(P) == 1:
        return 0
    return int(np.linalg.matrix_rank(P[1:] - P[0], tol=1e-8))

"""Instance model and set-function evaluation for ``f(a^T x)`` with ``sum(x) <= k``.

Indices are 0-based throughout the library. File formats and the CLI use
1-based indices and convert at the boundary.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

TOL = 1e-9
BRUTE_FORCE_CAP = 10
MONOTONE_SAMPLES = 1001


class InputError(ValueError):
    pass


class StructureError(ValueError):
    pass


class CapacityError(RuntimeError):
    pass


class MonotonicityError(ValueError):
    pass


# ---------------------------------------------------------------------------
# concave function families


@dataclass(frozen=True)
class ConcaveFunction:
    """A univariate concave function with ``f(0) = 0``.

    Use the constructors :meth:`sqrt`, :meth:`power`, :meth:`capped_quadratic`
    and :meth:`piecewise_linear` rather than building one directly.
    """

    family: str
    params: tuple = ()

    FAMILIES = ("sqrt", "power", "capped_quadratic", "piecewise_linear")

    def __post_init__(self):
        if self.family not in self.FAMILIES:
            raise InputError(f"unknown function family {self.family!r}")
        if self.family == "sqrt":
            (scale,) = self.params
            if not scale >= 0:
                raise InputError("sqrt scale must be nonnegative")
        elif self.family == "power":
            (p,) = self.params
            if not 0 < p < 1:
                raise InputError("power exponent must lie in (0, 1)")
        elif self.family == "capped_quadratic":
            (c,) = self.params
            if not c > 0:
                raise InputError("capped quadratic needs c > 0")
        else:
            bps, slopes = self.params
            if len(slopes) != len(bps) + 1:
                raise InputError("piecewise linear needs len(slopes) == len(breakpoints) + 1")
            if any(b <= 0 for b in bps) or any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
                raise InputError("breakpoints must be positive and strictly ascending")
            if any(s2 > s1 for s1, s2 in zip(slopes, slopes[1:])):
                raise InputError("slopes must be non-increasing (concavity)")

    @classmethod
    def sqrt(cls, scale: float = 1.0) -> "ConcaveFunction":
        return cls("sqrt", (float(scale),))

    @classmethod
    def power(cls, p: float) -> "ConcaveFunction":
        return cls("power", (float(p),))

    @classmethod
    def capped_quadratic(cls, c: float) -> "ConcaveFunction":
        """``f(y) = c^2 - (y - c)^2``; increasing on ``[0, c]``, decreasing after."""
        return cls("capped_quadratic", (float(c),))

    @classmethod
    def piecewise_linear(cls, breakpoints: Sequence[float], slopes: Sequence[float]) -> "ConcaveFunction":
        """Slope ``slopes[0]`` on ``[0, breakpoints[0]]``, ``slopes[i]`` after ``breakpoints[i-1]``."""
        return cls("piecewise_linear", (tuple(float(b) for b in breakpoints), tuple(float(s) for s in slopes)))

    def __call__(self, y: float) -> float:
        y = float(y)
        if self.family == "sqrt":
            return self.params[0] * math.sqrt(max(y, 0.0))
        if self.family == "power":
            return max(y, 0.0) ** self.params[0]
        if self.family == "capped_quadratic":
            c = self.params[0]
            return c * c - (y - c) * (y - c)
        bps, slopes = self.params
        total = 0.0
        lo = 0.0
        for b, s in zip(bps, slopes):
            if y <= b:
                return total + s * (y - lo)
            total += s * (b - lo)
            lo = b
        return total + slopes[-1] * (y - lo)

    def to_dict(self) -> dict:
        if self.family == "sqrt":
            return {"family": "sqrt", "scale": self.params[0]}
        if self.family == "power":
            return {"family": "power", "p": self.params[0]}
        if self.family == "capped_quadratic":
            return {"family": "capped_quadratic", "c": self.params[0]}
        return {"family": "piecewise_linear", "breakpoints": list(self.params[0]), "slopes": list(self.params[1])}

    @classmethod
    def from_dict(cls, d: dict) -> "ConcaveFunction":
        fam = d.get("family")
        try:
            if fam == "sqrt":
                return cls.sqrt(d.get("scale", 1.0))
            if fam == "power":
                return cls.power(d["p"])
            if fam == "capped_quadratic":
                return cls.capped_quadratic(d["c"])
            if fam == "piecewise_linear":
                return cls.piecewise_linear(d["breakpoints"], d["slopes"])
        except KeyError as exc:
            raise InputError(f"missing parameter {exc} for family {fam!r}") from None
        raise InputError(f"unknown function family {fam!r}")


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class Instance:
    a: tuple
    k: int
    f: ConcaveFunction = field(default_factory=ConcaveFunction.sqrt)

    def __post_init__(self):
        a = tuple(float(v) for v in self.a)
        object.__setattr__(self, "a", a)
        if len(a) == 0:
            raise InputError("instance needs at least one item")
        if any(not math.isfinite(v) or v < 0 for v in a):
            raise InputError("weights must be finite and nonnegative")
        if not isinstance(self.k, (int, np.integer)) or not 1 <= self.k <= len(a):
            raise InputError(f"k must be an integer in [1, {len(a)}], got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def weights(self) -> np.ndarray:
        return np.asarray(self.a)

    def distinct_weights(self) -> list[float]:
        return sorted(set(self.a))

    def with_weights(self, a: Sequence[float]) -> "Instance":
        return Instance(tuple(a), self.k, self.f)

    def feasible_supports(self, max_size: int | None = None) -> Iterable[tuple[int, ...]]:
        """All index sets of size at most ``k`` (or ``max_size``), smallest first."""
        top = self.k if max_size is None else max_size
        for r in range(top + 1):
            yield from itertools.combinations(range(self.n), r)


def _check_indices(inst: Instance, S: Iterable[int]) -> list[int]:
    S = list(S)
    for i in S:
        if not 0 <= i < inst.n:
            raise InputError(f"index {i} out of range for n={inst.n}")
    if len(set(S)) != len(S):
        raise InputError("index set has repeated entries")
    return S


def eval_F(inst: Instance, S: Iterable[int]) -> float:
    """Set function value ``f(sum_{i in S} a_i)``."""
    S = _check_indices(inst, S)
    return inst.f(sum(inst.a[i] for i in S))


def marginal(inst: Instance, i: int, X: Iterable[int]) -> float:
    X = _check_indices(inst, X)
    if i in X:
        raise InputError(f"item {i} already in the set")
    _check_indices(inst, [i])
    return eval_F(inst, X + [i]) - eval_F(inst, X)


def check_submodular(inst: Instance, cap: int = BRUTE_FORCE_CAP, tol: float = TOL) -> bool:
    """Diminishing-returns check over every ``X <= Y <= N \\ {i}``."""
    if inst.n > cap:
        raise CapacityError(f"n={inst.n} exceeds brute-force cap {cap}")
    n = inst.n
    for i in range(n):
        rest = [j for j in range(n) if j != i]
        m = len(rest)
        # enumerate Y as bitmask over rest, X as submask of Y
        for ymask in range(1 << m):
            Y = [rest[b] for b in range(m) if ymask >> b & 1]
            rho_y = marginal(inst, i, Y)
            sub = ymask
            while True:
                X = [rest[b] for b in range(m) if sub >> b & 1]
                if marginal(inst, i, X) < rho_y - tol:
                    return False
                if sub == 0:
                    break
                sub = (sub - 1) & ymask
    return True


def check_concave_differences(f: ConcaveFunction, samples: Iterable[Sequence[float]], tol: float = TOL) -> bool:
    """``f(y1 + d) - f(y1) >= f(y2 + d) - f(y2)`` for each ``(y1, y2, d)``."""
    for t in samples:
        if len(t) != 3:
            raise InputError(f"expected (y1, y2, d), got {t!r}")
        y1, y2, d = (float(v) for v in t)
        if d < 0 or y1 > y2:
            raise InputError(f"need d >= 0 and y1 <= y2, got {t!r}")
        if f(y1 + d) - f(y1) < f(y2 + d) - f(y2) - tol:
            return False
    return True


# ---------------------------------------------------------------------------
# two-weight view


@dataclass(frozen=True)
class TwoWeightProfile:
    aL: float
    aH: float
    IL: tuple
    IH: tuple
    n: int
    _low: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_low", frozenset(self.IL))

    def is_low(self, i: int) -> bool:
        return i in self._low

    def low_mask(self) -> np.ndarray:
        m = np.zeros(self.n, dtype=bool)
        m[list(self.IL)] = True
        return m

    def d_low(self, perm: Sequence[int], k: int) -> int:
        """Lower items among the first ``k - 1`` positions of ``perm``."""
        low = self._low
        return sum(1 for i in perm[: k - 1] if i in low)

    def d_high(self, perm: Sequence[int], k: int) -> int:
        """Higher items strictly after position ``k - 1`` of ``perm``."""
        low = self._low
        return sum(1 for i in perm[k - 1:] if i not in low)

    def low_prefix(self, perm: Sequence[int], t: int) -> list[int]:
        low = self._low
        return [i for i in perm if i in low][:t]

    def high_prefix(self, perm: Sequence[int], s: int) -> list[int]:
        low = self._low
        return [i for i in perm if i not in low][:s]


def two_weight_profile(inst: Instance) -> TwoWeightProfile:
    vals = inst.distinct_weights()
    if len(vals) != 2:
        raise StructureError(f"expected exactly 2 distinct weights, found {len(vals)}")
    aL, aH = vals
    IL = tuple(i for i, v in enumerate(inst.a) if v == aL)
    IH = tuple(i for i, v in enumerate(inst.a) if v == aH)
    return TwoWeightProfile(aL, aH, IL, IH, inst.n)


def is_monotone(f: ConcaveFunction, hi: float, direction: str, samples: int = MONOTONE_SAMPLES, tol: float = TOL) -> bool:
    ys = np.linspace(0.0, hi, samples)
    vals = np.array([f(y) for y in ys])
    steps = np.diff(vals)
    if direction == "increasing":
        return bool(np.all(steps >= -tol))
    return bool(np.all(steps <= tol))


def reduce_to_two_weights(inst: Instance, pivot: float, direction: str = "increasing") -> Instance:
    """Collapse a multi-weight instance to two weights so that two-weight cuts stay valid.

    ``increasing``: weights below ``pivot`` drop to the minimum weight, the rest to
    ``pivot`` (never above the original). ``decreasing``: weights above ``pivot``
    rise to the maximum weight, the rest to ``pivot`` (never below).
    """
    direction = direction.lower()
    if direction not in ("increasing", "decreasing"):
        raise InputError(f"direction must be 'increasing' or 'decreasing', got {direction!r}")
    vals = inst.distinct_weights()
    if len(vals) < 3:
        raise StructureError(f"reduction needs at least 3 distinct weights, found {len(vals)}")
    lo, hi = vals[0], vals[-1]
    if not lo < pivot < hi:
        raise InputError(f"pivot {pivot} must lie strictly between {lo} and {hi}")
    if not is_monotone(inst.f, sum(inst.a), direction):
        raise MonotonicityError(f"f is not {direction} on [0, {sum(inst.a)}]")
    if direction == "increasing":
        new = [lo if v < pivot else pivot for v in inst.a]
    else:
        new = [hi if v > pivot else pivot for v in inst.a]
    return inst.with_weights(new)

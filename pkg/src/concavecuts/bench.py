"""Random mean-risk instances and strategy comparisons.

Instances follow the usual two-weight recipe: returns ``lambda_i ~ U[50, 100]``,
``sqrt(a_H)`` uniform between ``min(lambda)`` and the lower median of lambda,
and ``sqrt(a_L) ~ N(sqrt(a_H) / q, 1)`` redrawn until ``0 <= sqrt(a_L) < sqrt(a_H)``.
Items with ``lambda_i`` at or below the median get the lower weight.

Each trial draws from its own PCG64 stream spawned from the seed, so trial
``t`` is the same instance however many trials are requested.
"""
from __future__ import annotations

import csv
import io
import statistics
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from .bnc import Limits, MeanRiskObjective, SolveReport, Strategy, omega_from_epsilon, solve
from .core import ConcaveFunction, Instance, InputError

MAX_DRAWS = 1_000_000
CSV_HEADER = ("n", "q", "k", "strategy", "trial", "seed", "status", "time_s", "gap", "nodes",
              "cuts_total", "cuts_lepi", "cuts_lsi", "objective", "bound")


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class GenConfig:
    n: int
    q: float
    k: int
    epsilon: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise InputError("n must be at least 2")
        if self.q < 2:
            raise InputError("q must be at least 2")
        if not 1 <= self.k <= self.n:
            raise InputError(f"k must lie in [1, {self.n}]")
        if not 0 < self.epsilon < 0.5:
            raise InputError("epsilon must lie in (0, 0.5)")


def lower_median(values: Sequence[float]) -> float:
    s = sorted(values)
    return s[(len(s) - 1) // 2]


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent PCG64 stream for one trial."""
    child = np.random.SeedSequence(seed).spawn(trial + 1)[trial]
    return np.random.Generator(np.random.PCG64(child))


def gen_instance(cfg: GenConfig, rng: np.random.Generator | None = None) -> tuple[Instance, MeanRiskObjective]:
    rng = trial_rng(cfg.seed, 0) if rng is None else rng
    lam = rng.uniform(50.0, 100.0, cfg.n)
    med = lower_median(lam)
    root_h = rng.uniform(lam.min(), med)
    for _ in range(MAX_DRAWS):
        root_l = rng.normal(root_h / cfg.q, 1.0)
        if 0.0 <= root_l < root_h:
            break
    else:
        raise GenerationError(f"no admissible sqrt(a_L) after {MAX_DRAWS} draws")
    aL, aH = root_l * root_l, root_h * root_h
    a = tuple(aL if v <= med else aH for v in lam)
    inst = Instance(a, cfg.k, ConcaveFunction.sqrt())
    obj = MeanRiskObjective(tuple(float(v) for v in lam), omega_from_epsilon(cfg.epsilon), cfg.epsilon)
    return inst, obj


@dataclass(frozen=True)
class TrialResult:
    n: int
    q: float
    k: int
    strategy: str
    trial: int
    seed: int
    status: str
    time_s: float
    gap: float
    nodes: int
    cuts_total: str
    cuts_lepi: str
    cuts_lsi: str
    objective: float
    bound: float

    @classmethod
    def from_report(cls, cfg: GenConfig, trial: int, rep: SolveReport) -> "TrialResult":
        if rep.strategy is Strategy.LEPI_LSI:
            total, lepi, lsi = str(rep.user_cuts), str(rep.cuts["lepi"]), str(rep.cuts["lsi"])
        elif rep.strategy is Strategy.ALI:
            total, lepi, lsi = str(rep.user_cuts), "N/A", "N/A"
        else:
            total = lepi = lsi = "N/A"
        return cls(cfg.n, cfg.q, cfg.k, rep.strategy.value, trial, cfg.seed, rep.status.value, rep.time_s,
                   rep.gap, rep.nodes, total, lepi, lsi, rep.objective, rep.bound)

    def row(self) -> list:
        d = asdict(self)
        return [d[c] for c in CSV_HEADER]


@dataclass(frozen=True)
class BenchRow:
    """Per (config, strategy) aggregate over trials."""

    n: int
    q: float
    k: int
    strategy: str
    trials: int
    mean_time: float
    mean_gap: float
    mean_nodes: float
    median_nodes: float
    mean_cuts: float | None
    mean_cuts_lepi: float | None
    mean_cuts_lsi: float | None
    solved: int
    timeout: int
    errors: int = 0


def run_trials(configs: Iterable[GenConfig], strategies: Sequence[Strategy | str], limits: Limits,
               trials: int) -> list[TrialResult]:
    if trials < 1:
        raise InputError("trials must be at least 1")
    strategies = [Strategy.parse(s) for s in strategies]
    out = []
    for cfg in configs:
        for t in range(trials):
            inst, obj = gen_instance(cfg, trial_rng(cfg.seed, t))
            for strat in strategies:
                rep = solve(inst, obj, strat, limits)
                out.append(TrialResult.from_report(cfg, t, rep))
    return out


def _mean_or_none(vals):
    vals = [float(v) for v in vals if v != "N/A"]
    return statistics.fmean(vals) if vals else None


def aggregate(results: Sequence[TrialResult]) -> list[BenchRow]:
    groups: dict = {}
    for r in results:
        groups.setdefault((r.n, r.q, r.k, r.strategy), []).append(r)
    rows = []
    for (n, q, k, strat), rs in groups.items():
        solved = sum(1 for r in rs if r.status in ("Optimal", "GapLimit"))
        rows.append(BenchRow(
            n, q, k, strat, len(rs),
            statistics.fmean(r.time_s for r in rs),
            statistics.fmean(r.gap for r in rs),
            statistics.fmean(r.nodes for r in rs),
            statistics.median(r.nodes for r in rs),
            _mean_or_none(r.cuts_total for r in rs),
            _mean_or_none(r.cuts_lepi for r in rs),
            _mean_or_none(r.cuts_lsi for r in rs),
            solved, len(rs) - solved,
        ))
    return rows


def run_benchmark(configs: Iterable[GenConfig], strategies: Sequence[Strategy | str], limits: Limits,
                  trials: int) -> tuple[list[BenchRow], list[TrialResult]]:
    results = run_trials(configs, strategies, limits, trials)
    return aggregate(results), results


def write_csv(results: Sequence[TrialResult], fh=None) -> str:
    buf = io.StringIO() if fh is None else fh
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in results:
        w.writerow(r.row())
    return buf.getvalue() if fh is None else ""


def format_table(rows: Sequence[BenchRow]) -> str:
    head = f"{'n':>4} {'q':>3} {'k':>2} {'strategy':<9} {'time':>8} {'gap':>9} {'nodes':>9} {'cuts':>14} {'ok/to':>6}"
    lines = [head, "-" * len(head)]
    for r in rows:
        if r.mean_cuts is None:
            cuts = "N/A"
        elif r.mean_cuts_lepi is not None:
            cuts = f"{r.mean_cuts:.1f}={r.mean_cuts_lepi:.1f}+{r.mean_cuts_lsi:.1f}"
        else:
            cuts = f"{r.mean_cuts:.1f}"
        gap = "--" if r.timeout == 0 else f"{100 * r.mean_gap:.2f}%"
        lines.append(f"{r.n:>4} {r.q:>3g} {r.k:>2} {r.strategy:<9} {r.mean_time:>8.2f} {gap:>9} "
                     f"{r.mean_nodes:>9.1f} {cuts:>14} {r.solved:>2}/{r.timeout:<3}")
    return "\n".join(lines)


def parse_grid(tokens: Sequence[str]) -> dict:
    """``["n=20,40", "k=3,5", "q=4,8"]`` to ``{"n": [20, 40], ...}``."""
    grid = {}
    for tok in tokens:
        for part in tok.split():
            if "=" not in part:
                raise InputError(f"grid entries look like name=v1,v2; got {part!r}")
            key, vals = part.split("=", 1)
            key = key.strip()
            if key not in ("n", "k", "q"):
                raise InputError(f"unknown grid key {key!r}")
            conv = float if key == "q" else int
            grid[key] = [conv(v) for v in vals.split(",") if v]
    missing = {"n", "k", "q"} - grid.keys()
    if missing:
        raise InputError(f"grid is missing {sorted(missing)}")
    return grid


def grid_configs(grid: dict, seed: int = 0, epsilon: float = 0.01) -> list[GenConfig]:
    """One config per grid cell; each gets its own seed derived from ``seed`` and its position."""
    cfgs = []
    for n in grid["n"]:
        for q in grid["q"]:
            for k in grid["k"]:
                cfgs.append(GenConfig(n, q, k, epsilon, config_seed(seed, n, q, k)))
    return cfgs


def config_seed(base: int, n: int, q: float, k: int) -> int:
    """Stable per-cell seed so that cells do not share instances."""
    ss = np.random.SeedSequence([base, n, int(round(q * 1000)), k])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


__all__ = [
    "CSV_HEADER", "BenchRow", "GenConfig", "GenerationError", "TrialResult", "aggregate", "config_seed",
    "format_table", "gen_instance", "grid_configs", "lower_median", "parse_grid", "run_benchmark",
    "run_trials", "trial_rng", "write_csv",
]

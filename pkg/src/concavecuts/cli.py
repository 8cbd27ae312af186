"""Command-line entry point: ``concavecuts <command> ...``.

Item indices on the command line and in printed output are 1-based.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import bench, bnc, hull22
from .core import InputError, StructureError, CapacityError, MonotonicityError, two_weight_profile
from .cuts import check_permutation
from .io import load_instance, save_instance
from .lift_epi import ali_cut, epi_cut, lifted_epi_cut
from .lift_si import AssumptionError, SiParams, assumption_sides, check_assumption, higher_si_cut, lower_si_cut


def _parse_perm(text: str | None, n: int) -> tuple[int, ...]:
    if text is None:
        return tuple(range(n))
    try:
        vals = [int(v) - 1 for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise InputError(f"permutation must be comma-separated integers, got {text!r}") from None
    if sorted(vals) != list(range(n)):
        raise InputError(f"--perm must list each of 1..{n} exactly once, got {text!r}")
    return check_permutation(vals, n)


def _parse_floats(text: str) -> list[float]:
    path = Path(text)
    if path.is_file():
        raw = path.read_text().strip()
        if raw.startswith("["):
            return [float(v) for v in json.loads(raw)]
        text = raw.replace("\n", ",")
    try:
        return [float(v) for v in text.replace(" ", ",").split(",") if v]
    except ValueError:
        raise InputError(f"expected numbers or a file of numbers, got {text!r}") from None


def _print_cut(cut) -> None:
    print(cut.format(6))
    print(json.dumps(cut.to_dict()))


def cmd_cuts(args) -> int:
    inst, _ = load_instance(args.instance)
    kind = args.kind
    if kind == "check-assumption":
        prof = two_weight_profile(inst)
        lhs, rhs = assumption_sides(prof, inst.f, inst.k, args.i0)
        ok = check_assumption(prof, inst.f, inst.k, args.i0)
        print(f"lhs = f(aL + (i0+1) aH) - f(aL + i0 aH) = {lhs:.6f}")
        print(f"rhs = (f(k aH) - f(i0 aH)) / (k - i0)   = {rhs:.6f}")
        print("holds" if ok else "fails")
        print(json.dumps({"i0": args.i0, "lhs": lhs, "rhs": rhs, "holds": ok}))
        return 0
    perm = _parse_perm(args.perm, inst.n)
    if kind == "epi":
        cut = epi_cut(inst, perm)
    elif kind == "lifted-epi":
        cut = lifted_epi_cut(inst, perm)
    elif kind == "ali":
        cut = ali_cut(inst, perm)
    else:
        prof = two_weight_profile(inst)
        low = [i for i in perm if prof.is_low(i)]
        high = [i for i in perm if not prof.is_low(i)]
        if kind == "lower-si":
            cut = lower_si_cut(inst, SiParams(args.i0, "lower", low, high))
        else:
            cut = higher_si_cut(inst, SiParams(args.i0, "higher", high, low))
    _print_cut(cut)
    return 0


def cmd_verify_hull(args) -> int:
    inst, _ = load_instance(args.instance)
    rep = hull22.verify_hull(inst, args.grid, args.seed)
    for tag, count in rep.categories.items():
        print(f"{tag}: {count}")
    print(f"points: {rep.points}  in hull: {rep.members}  agree: {rep.agree}  designated optimal: {rep.designated_match}")
    print("equivalence: " + ("PASS" if rep.equivalent else "FAIL"))
    return 0 if rep.equivalent else 1


def cmd_polar(args) -> int:
    inst, _ = load_instance(args.instance)
    k = inst.k if args.k is None else args.k
    rays = hull22.enumerate_polar_facets(inst, k, args.budget, args.seed)
    sub = inst if k == inst.k else type(inst)(inst.a, k, inst.f)
    for ray in rays:
        label = hull22.classify_family(sub, ray)
        print(f"{ray.to_cut().format(6)}    [{label}]")
    print(f"{len(rays)} facets")
    return 0


def cmd_solve(args) -> int:
    inst, extras = load_instance(args.instance)
    if args.lam is not None:
        lam = _parse_floats(args.lam)
    elif "lambda" in extras:
        lam = extras["lambda"]
    else:
        lam = list(np.random.default_rng(args.seed).uniform(50.0, 100.0, inst.n))
    obj = bnc.MeanRiskObjective.from_epsilon(lam, args.epsilon)
    limits = bnc.Limits(time_limit=args.time_limit, node_limit=args.node_limit, mip_gap=args.mip_gap)
    rep = bnc.solve(inst, obj, args.strategy, limits)
    print(rep.table())
    print(json.dumps(rep.to_dict()))
    return 0


def cmd_gen(args) -> int:
    cfg = bench.GenConfig(args.n, args.q, args.k, args.epsilon, args.seed)
    inst, obj = bench.gen_instance(cfg)
    extras = {"lambda": obj.lam, "epsilon": args.epsilon}
    if args.output:
        save_instance(args.output, inst, extras)
    else:
        from .io import dumps_instance

        sys.stdout.write(dumps_instance(inst, extras))
    return 0


def cmd_bench(args) -> int:
    grid = bench.parse_grid(args.grid)
    cfgs = bench.grid_configs(grid, args.seed, args.epsilon)
    strategies = [s for s in args.strategies.split(",") if s]
    limits = bnc.Limits(time_limit=args.time_limit, node_limit=args.node_limit)
    rows, results = bench.run_benchmark(cfgs, strategies, limits, args.trials)
    print(bench.format_table(rows))
    if args.output:
        with open(args.output, "w", newline="") as fh:
            bench.write_csv(results, fh)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="concavecuts", description="Cuts and branch-and-cut for concave cardinality-constrained minimization.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("cuts", help="generate one inequality")
    c.add_argument("kind", choices=["epi", "lifted-epi", "ali", "lower-si", "higher-si", "check-assumption"])
    c.add_argument("--instance", required=True)
    c.add_argument("--perm", help="1-based permutation, e.g. 5,2,3,1,4,6")
    c.add_argument("--i0", type=int, default=0)
    c.set_defaults(func=cmd_cuts)

    v = sub.add_parser("verify-hull", help="check the k = 2 description against LP membership")
    v.add_argument("--instance", required=True)
    v.add_argument("--grid", type=int, default=1000)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify_hull)

    pl = sub.add_parser("polar", help="enumerate facets through the separation LP")
    pl.add_argument("--instance", required=True)
    pl.add_argument("--k", type=int)
    pl.add_argument("--budget", type=int, default=500)
    pl.add_argument("--seed", type=int, default=hull22.PROBE_SEED)
    pl.set_defaults(func=cmd_polar)

    s = sub.add_parser("solve", help="branch-and-cut on a mean-risk instance")
    s.add_argument("--instance", required=True)
    s.add_argument("--lambda", dest="lam", help="file or comma-separated returns")
    s.add_argument("--epsilon", type=float, default=0.01)
    s.add_argument("--strategy", default="lepi-lsi", choices=[m.value for m in bnc.Strategy])
    s.add_argument("--time-limit", type=float, default=math.inf)
    s.add_argument("--node-limit", type=int)
    s.add_argument("--mip-gap", type=float, default=bnc.MIP_GAP)
    s.add_argument("--seed", type=int, default=0, help="draws lambda when neither --lambda nor the file provides it")
    s.set_defaults(func=cmd_solve)

    g = sub.add_parser("gen", help="generate a random instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--q", type=float, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--epsilon", type=float, default=0.01)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("bench", help="compare strategies on random instances")
    b.add_argument("--grid", nargs="+", required=True, help="e.g. n=20,40 k=3,5 q=4,8")
    b.add_argument("--trials", type=int, default=5)
    b.add_argument("--strategies", default="lepi-lsi,ali,nocuts")
    b.add_argument("--time-limit", type=float, default=60.0)
    b.add_argument("--node-limit", type=int)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--epsilon", type=float, default=0.01)
    b.add_argument("-o", "--output")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, StructureError, CapacityError, MonotonicityError, AssumptionError, hull22.ScopeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc.strerror}: {exc.filename}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

import math

import numpy as np
import pytest

from concavecuts.bench import GenConfig, gen_instance, trial_rng
from concavecuts.bnc import (
    Limits, MeanRiskObjective, NodeState, SolveStatus, Strategy, branch, enumerate_optimum, initial_w_bound,
    lazy_integer_cut, mip_gap, omega_from_epsilon, solve,
)
from concavecuts.core import ConcaveFunction, InputError, Instance, StructureError
from concavecuts.cuts import feasible_points, max_violation

SQRT = ConcaveFunction.sqrt()
SIX = Instance((4, 100, 100, 100, 4, 4), 2, SQRT)
SIX_OBJ = MeanRiskObjective.from_epsilon((60, 90, 80, 70, 55, 65), 0.01)
EXACT = Limits(mip_gap=0.0)


def test_omega():
    assert omega_from_epsilon(0.01) == pytest.approx(math.sqrt(99), abs=1e-12)
    with pytest.raises(InputError):
        MeanRiskObjective.from_epsilon((1.0,), 0.5)
    with pytest.raises(InputError):
        MeanRiskObjective((1.0,), 2.0, 0.01)


def test_strategy_parse():
    assert Strategy.parse("LEPI_LSI") is Strategy.LEPI_LSI
    assert Strategy.parse("ali") is Strategy.ALI
    with pytest.raises(InputError):
        Strategy.parse("gomory")


def test_six_item_instance_all_strategies_agree():
    best, support = enumerate_optimum(SIX, SIX_OBJ)
    # the two cheapest-risk items beat the two highest-return ones
    assert support == (0, 5)
    assert best == pytest.approx(-125 + math.sqrt(99) * math.sqrt(8))
    for strat in Strategy:
        rep = solve(SIX, SIX_OBJ, strat, EXACT)
        assert rep.status is SolveStatus.OPTIMAL
        assert rep.objective == pytest.approx(best, abs=1e-6)
        assert rep.x == support


def test_k_equals_n():
    inst = Instance((1, 1, 5, 5), 4, SQRT)
    obj = MeanRiskObjective.from_epsilon((60, 70, 80, 90), 0.2)
    best, _ = enumerate_optimum(inst, obj)
    for strat in Strategy:
        assert solve(inst, obj, strat, EXACT).objective == pytest.approx(best, abs=1e-6)


def test_lazy_cut_tight_and_separating():
    x = np.array([0, 1, 0, 0, 1, 0.0])
    fx = SQRT(104.0)
    cut = lazy_integer_cut(SIX, x, fx - 1.0)
    assert cut.rhs(x) == pytest.approx(fx)
    assert max_violation(cut, SIX) <= 1e-9
    with pytest.raises(ValueError):
        lazy_integer_cut(SIX, x, fx)
    with pytest.raises(InputError):
        lazy_integer_cut(SIX, np.full(6, 0.5), 0.0)


def test_lazy_cut_at_origin_and_unit_vectors():
    z = np.zeros(6)
    assert lazy_integer_cut(SIX, z, -1.0).rhs(z) == 0.0
    for j in range(6):
        e = np.zeros(6)
        e[j] = 1.0
        assert lazy_integer_cut(SIX, e, -1.0).rhs(e) == pytest.approx(SQRT(SIX.a[j]))


def test_lazy_cut_on_three_weights_is_plain_epi():
    inst = Instance((1, 2, 3, 4), 2, SQRT)
    cut = lazy_integer_cut(inst, [1, 0, 1, 0], -1.0)
    assert cut.family == "EPI"
    assert max_violation(cut, inst) <= 1e-9


def test_branch_picks_most_fractional_lowest_index():
    down, up, j = branch(NodeState(), [0.2, 0.5, 0.5, 1.0])
    assert j == 1
    assert down.fixed0 == {1} and up.fixed1 == {1}
    assert down.depth == up.depth == 1
    with pytest.raises(ValueError):
        branch(NodeState(), [0, 1, 1e-9])
    with pytest.raises(InputError):
        NodeState(frozenset({0}), frozenset({0}))


def test_initial_w_bound_is_valid():
    inst = Instance((2, 2, 5, 5, 5), 2, ConcaveFunction.capped_quadratic(4.0))
    lo = initial_w_bound(inst)
    assert lo <= 0 and all(w >= lo for _, w in feasible_points(inst))
    assert lo == pytest.approx(min(w for _, w in feasible_points(inst)))


def test_mip_gap():
    assert mip_gap(-10.0, -11.0) == pytest.approx(0.1)
    assert mip_gap(0.0, 0.0) == 0.0


def test_pool_cuts_hold_at_incumbent():
    inst, obj = gen_instance(GenConfig(12, 4, 3, seed=5))
    rep = solve(inst, obj, "lepi-lsi", EXACT)
    x = np.zeros(inst.n)
    x[list(rep.x)] = 1
    w = inst.f(float(np.dot(inst.a, x)))
    assert rep.pool
    for cut in rep.pool:
        assert cut.violation(w, x) <= 1e-9


def test_cut_strategies_need_two_weights():
    inst = Instance((1, 2, 3, 4), 2, SQRT)
    obj = MeanRiskObjective.from_epsilon((60, 70, 80, 90), 0.05)
    for strat in ("lepi-lsi", "ali"):
        with pytest.raises(StructureError):
            solve(inst, obj, strat)
    best, _ = enumerate_optimum(inst, obj)
    assert solve(inst, obj, "nocuts", EXACT).objective == pytest.approx(best, abs=1e-6)


def test_lambda_length_checked():
    with pytest.raises(InputError):
        solve(SIX, MeanRiskObjective.from_epsilon((1, 2), 0.01))


def test_node_limit_zero_reports_root():
    inst, obj = gen_instance(GenConfig(20, 4, 3, seed=6))
    rep = solve(inst, obj, "nocuts", Limits(node_limit=0))
    assert rep.status is SolveStatus.NODE_LIMIT
    assert rep.nodes == 1 and rep.bound <= rep.objective


def test_deterministic_reports():
    inst, obj = gen_instance(GenConfig(14, 8, 3, seed=7))
    for strat in Strategy:
        a, b = solve(inst, obj, strat, EXACT), solve(inst, obj, strat, EXACT)
        assert (a.objective, a.bound, a.nodes, a.cuts, a.x) == (b.objective, b.bound, b.nodes, b.cuts, b.x)


def test_random_instances_match_enumeration():
    for t in range(6):
        inst, obj = gen_instance(GenConfig(10, 4 + 4 * (t % 2), 2 + t % 3, seed=100), trial_rng(100, t))
        best, _ = enumerate_optimum(inst, obj)
        for strat in Strategy:
            assert solve(inst, obj, strat, EXACT).objective == pytest.approx(best, abs=1e-6)


def test_report_dict_uses_one_based_support():
    d = solve(SIX, SIX_OBJ, "ali", EXACT).to_dict()
    assert d["support"] == [1, 6] and d["status"] == "Optimal"
    assert set(d["cuts"]) == {"lazy", "ali"}

import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from concavecuts.core import CapacityError, ConcaveFunction, InputError, Instance, StructureError
from concavecuts.cuts import (
    LinearCut, check_permutation, descending_order, epi_coefficients, feasible_points, max_violation,
    tight_affine_dimension,
)
from concavecuts.lift_epi import (
    LiftingContext, ali_cut, epi_cut, lift_oracle_epi, lift_oracle_epi_argmins, lifted_epi_cut,
    oracle_lifted_epi, zeta_support_value,
)

from corpus import FUNCTIONS, two_weight_corpus

SIX = Instance((4, 100, 100, 100, 4, 4), 2, ConcaveFunction.sqrt())
DELTA = (4, 1, 2, 0, 3, 5)  # (5,2,3,1,4,6) in 1-based labels


def one_based(perm):
    return tuple(i - 1 for i in perm)


# --- LinearCut and helpers -------------------------------------------------


def test_linear_cut_basics():
    cut = LinearCut([1.0, -2.0, 0.5], -1.0, "PolarRay", {"perm": (2, 0, 1)})
    assert cut.rhs([1, 1, 0]) == -2.0
    assert cut.violation(-3.0, [1, 1, 0]) == 1.0
    assert cut.format(2) == "w >= -1.00 + 1.00*x1 - 2.00*x2 + 0.50*x3"
    d = cut.to_dict()
    assert d["provenance"]["perm"] == [3, 1, 2]
    assert json.loads(json.dumps(d))["pi"] == [1.0, -2.0, 0.5]
    with pytest.raises(ValueError):
        cut.pi[0] = 3.0
    with pytest.raises(InputError):
        LinearCut([1.0], 0.0, "Gomory")


def test_permutation_checks():
    assert check_permutation([2, 0, 1], 3) == (2, 0, 1)
    with pytest.raises(InputError):
        check_permutation([0, 0, 1], 3)
    with pytest.raises(InputError):
        check_permutation([0, 1], 3)


def test_descending_order_breaks_ties_by_index():
    assert descending_order([0.2, 0.5, 0.5, 0.1]) == (1, 2, 0, 3)
    assert descending_order([0.2, 0.5, 0.5, 0.1], items=[3, 2, 0]) == (2, 0, 3)


def test_tight_dimension_of_trivial_cut():
    inst = Instance((1.0, 2.0, 3.0), 3, ConcaveFunction.sqrt())
    # the zero cut is tight only at x = 0
    assert tight_affine_dimension(LinearCut(np.zeros(3)), inst) == 0


# --- EPI ------------------------------------------------------------------------


def test_epi_prefix_of_six_item_example():
    cut = epi_cut(SIX, DELTA)
    assert cut.pi[4] == 2.0
    assert cut.pi[1] == pytest.approx(8.198, abs=5e-4)
    assert cut.pi0 == 0.0 and cut.family == "EPI"


def test_epi_linear_function():
    f = ConcaveFunction.piecewise_linear([100.0], [2.5, 2.5])
    inst = Instance((1.0, 3.0, 0.5, 7.0), 2, f)
    assert np.allclose(epi_cut(inst, (3, 1, 0, 2)).pi, 2.5 * np.array(inst.a))


def test_epi_telescoping():
    inst = Instance((1, 2, 3, 4), 4, ConcaveFunction.sqrt())
    s = math.sqrt
    assert np.allclose(epi_cut(inst, range(4)).pi, [1, s(3) - 1, s(6) - s(3), s(10) - s(6)], atol=1e-12)


# --- lifting oracle -------------------------------------------------------------


def test_zeta_support_value_examples():
    ctx = LiftingContext(SIX, DELTA, 2, {4: 2.0, 1: math.sqrt(104) - 2})
    assert zeta_support_value(ctx, 2, [1]) == pytest.approx(5.944, abs=5e-4)
    assert zeta_support_value(ctx, 2, []) == 10.0
    with pytest.raises(InputError):
        zeta_support_value(ctx, 2, [1, 4])  # |X| > k - 1
    with pytest.raises(InputError):
        zeta_support_value(ctx, 2, [0])  # item 0 comes later


def test_zeta_support_value_matches_enumeration():
    rng = np.random.default_rng(8)
    inst = Instance((1, 3, 1, 3, 3, 1, 3), 3, ConcaveFunction.sqrt())
    perm = tuple(int(i) for i in rng.permutation(7))
    lifted = oracle_lifted_epi(inst, perm)
    ctx = LiftingContext(inst, perm, 3, {i: lifted[i] for i in range(7)})
    for pos in range(1, 7):
        j = perm[pos]
        for r in range(3):
            for X in itertools.combinations(perm[:pos], r):
                expected = inst.f(inst.a[j] + sum(inst.a[i] for i in X)) - sum(lifted[i] for i in X)
                assert zeta_support_value(ctx, j, X) == pytest.approx(expected, abs=1e-12)


def test_oracle_six_item_example():
    ctx = LiftingContext(SIX, DELTA, 2, {4: 2.0, 1: math.sqrt(104) - 2})
    assert lift_oracle_epi(ctx, 2) == pytest.approx(5.944, abs=5e-4)


def test_oracle_k1_is_f_of_weight():
    inst = Instance((1.0, 4.0, 1.0, 4.0), 1, ConcaveFunction.power(0.3))
    perm = (1, 0, 3, 2)
    assert np.allclose(oracle_lifted_epi(inst, perm), [inst.f(v) for v in inst.a])


def test_oracle_capacity():
    inst = Instance((1.0, 2.0) * 5, 4, ConcaveFunction.sqrt())
    ctx = LiftingContext(inst, range(10), 4, {i: 0.0 for i in range(9)})
    with pytest.raises(CapacityError):
        lift_oracle_epi(ctx, 9, cap=10)


def test_oracle_from_empty_base_reproduces_epi_prefix():
    for case in two_weight_corpus(40, seed=21, n_max=8):
        inst, perm = case.inst, case.perm
        oracle = oracle_lifted_epi(inst, perm)
        epi = epi_cut(inst, perm).pi
        head = list(perm[: inst.k])
        assert np.allclose(oracle[head], epi[head], atol=1e-9)


# --- closed form ----------------------------------------------------------------


def test_six_item_lifted_epi():
    cut = lifted_epi_cut(SIX, DELTA)
    assert np.allclose(cut.pi, [0.828, 8.198, 5.944, 5.944, 2, 0.828], atol=5e-4)
    assert cut.family == "LiftedEPI" and cut.pi0 == 0.0
    assert cut.provenance["perm"] == DELTA


def test_lifted_epi_k_equals_n_is_epi():
    inst = Instance((1.0, 1.0, 5.0, 5.0), 4, ConcaveFunction.sqrt())
    for perm in itertools.permutations(range(4)):
        assert np.allclose(lifted_epi_cut(inst, perm).pi, epi_cut(inst, perm).pi)


def test_lifted_epi_needs_two_weights():
    with pytest.raises(StructureError):
        lifted_epi_cut(Instance((1.0, 2.0, 3.0), 2, ConcaveFunction.sqrt()), (0, 1, 2))
    with pytest.raises(StructureError):
        ali_cut(Instance((1.0, 1.0, 1.0), 2, ConcaveFunction.sqrt()), (0, 1, 2))


def test_closed_form_matches_oracle_on_corpus():
    for case in two_weight_corpus(120, seed=22):
        cf = lifted_epi_cut(case.inst, case.perm).pi
        assert np.max(np.abs(cf - oracle_lifted_epi(case.inst, case.perm))) <= 1e-9


def test_zero_low_weight():
    f = ConcaveFunction.capped_quadratic(8.0)
    inst = Instance((0.0, 3.0, 0.0, 3.0, 3.0, 0.0), 3, f)
    rng = np.random.default_rng(4)
    for _ in range(30):
        perm = tuple(int(i) for i in rng.permutation(6))
        cut = lifted_epi_cut(inst, perm)
        assert np.allclose(cut.pi, oracle_lifted_epi(inst, perm), atol=1e-9)
        assert max_violation(cut, inst) <= 1e-9
        assert tight_affine_dimension(cut, inst) == 6


def test_equal_weight_monotone_along_perm():
    for case in two_weight_corpus(80, seed=23):
        pi = lifted_epi_cut(case.inst, case.perm).pi
        prof = case.profile
        for cls in (prof.IL, prof.IH):
            order = [i for i in case.perm if i in cls]
            for j1, j2 in zip(order, order[1:]):
                assert pi[j1] >= pi[j2] - 1e-9


def test_lower_coefficients_after_head_are_equal():
    for case in two_weight_corpus(80, seed=24):
        pi = lifted_epi_cut(case.inst, case.perm).pi
        tail_low = [i for i in case.perm[case.inst.k - 1:] if case.profile.is_low(i)]
        if tail_low:
            assert np.ptp(pi[tail_low]) <= 1e-9


def test_some_oracle_minimizer_has_prefix_support():
    for case in two_weight_corpus(50, seed=25, n_max=8):
        inst, perm = case.inst, case.perm
        prof = case.profile
        lifted = oracle_lifted_epi(inst, perm)
        ctx = LiftingContext(inst, perm, inst.k, {})
        for pos, j in enumerate(perm):
            _, argmins = lift_oracle_epi_argmins(ctx, j)
            before = perm[:pos]
            low_before = [i for i in before if prof.is_low(i)]
            high_before = [i for i in before if not prof.is_low(i)]

            def prefix_form(X):
                t = sum(1 for i in X if prof.is_low(i))
                return set(X) == set(low_before[:t]) | set(high_before[: len(X) - t])

            assert any(prefix_form(X) for X in argmins)
            ctx.coeffs[j] = lifted[j]


def test_ali_six_item_examples():
    first = ali_cut(SIX, one_based((2, 5, 1, 6, 4, 3)))
    assert np.allclose(first.pi, [0.198, 10, 4.142, 4.142, 0.198, 0.198], atol=5e-4)
    assert np.allclose(first.pi, lifted_epi_cut(SIX, one_based((2, 5, 1, 6, 4, 3))).pi)
    second = ali_cut(SIX, DELTA)
    assert np.allclose(second.pi, [0.198, 8.198, 4.142, 4.142, 2, 0.198], atol=5e-4)
    assert second.family == "ALI"


def test_ali_dominated_by_lifted_epi():
    for case in two_weight_corpus(120, seed=26):
        ali = ali_cut(case.inst, case.perm).pi
        lepi = lifted_epi_cut(case.inst, case.perm).pi
        assert np.all(ali <= lepi + 1e-9)


@settings(max_examples=60, deadline=None)
@given(
    fi=st.integers(0, 3),
    aL=st.sampled_from([0.0, 0.5, 1.0, 2.0]),
    gap=st.sampled_from([0.5, 1.0, 4.0]),
    data=st.data(),
)
def test_validity_property(fi, aL, gap, data):
    n = data.draw(st.integers(3, 9))
    low = data.draw(st.lists(st.booleans(), min_size=n, max_size=n).filter(lambda v: 0 < sum(v) < n))
    k = data.draw(st.integers(1, min(4, n)))
    perm = data.draw(st.permutations(range(n)))
    inst = Instance(tuple(aL if b else aL + gap for b in low), k, FUNCTIONS[fi])
    assert max_violation(lifted_epi_cut(inst, perm), inst) <= 1e-9
    assert max_violation(ali_cut(inst, perm), inst) <= 1e-9


def test_lifted_epi_is_facet_on_small_corpus():
    for case in two_weight_corpus(60, seed=27, n_max=8):
        cut = lifted_epi_cut(case.inst, case.perm)
        assert tight_affine_dimension(cut, case.inst) == case.inst.n


def test_feasible_points_count():
    inst = Instance((1.0, 2.0) * 3, 2, ConcaveFunction.sqrt())
    pts = list(feasible_points(inst))
    assert len(pts) == 1 + 6 + 15
    assert all(w == inst.f(float(np.dot(inst.a, x))) for x, w in pts)


def test_epi_coefficients_sum_to_F():
    inst = Instance((1.0, 3.0, 3.0, 1.0), 2, FUNCTIONS[3])
    for perm in itertools.permutations(range(4)):
        assert epi_coefficients(inst, perm).sum() == pytest.approx(inst.f(sum(inst.a)))

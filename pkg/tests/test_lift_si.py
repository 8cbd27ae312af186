import math

import numpy as np
import pytest

from concavecuts.core import ConcaveFunction, InputError, Instance, StructureError, two_weight_profile
from concavecuts.cuts import max_violation, tight_affine_dimension
from concavecuts.lift_epi import lifted_epi_cut
from concavecuts.lift_si import (
    AssumptionError, SiParams, assumption_sides, best_i0, check_assumption, higher_si_closed_form, higher_si_cut,
    lift_oracle_si, lower_si_cut, oracle_lifted_si, si_coefficients, si_cut,
)

from corpus import FUNCTIONS, assumption_corpus, two_weight_corpus

SQRT = ConcaveFunction.sqrt()
CQ8 = ConcaveFunction.capped_quadratic(8.0)


def test_si_i0_zero_is_average():
    f = ConcaveFunction.power(0.3)
    assert np.allclose(si_coefficients(5, 2.0, 3, 0, f), f(6.0) / 3)


def test_si_i0_last_is_epi_tail():
    coef = si_coefficients(4, 1.5, 3, 2, SQRT)
    s = math.sqrt
    assert np.allclose(coef, [s(1.5), s(3) - s(1.5), s(4.5) - s(3), s(4.5) - s(3)])


def test_si_small_example():
    cut = si_cut(3, 4.0, 2, 1, SQRT, perm=(2, 0, 1))
    assert cut.pi[2] == 2.0
    assert cut.pi[0] == pytest.approx(math.sqrt(8) - 2)
    assert cut.family == "SI"


def test_si_rejects_bad_i0():
    with pytest.raises(InputError):
        si_coefficients(4, 1.0, 2, 2, SQRT)
    with pytest.raises(InputError):
        si_coefficients(4, 1.0, 2, -1, SQRT)


def test_psi_never_exceeds_partial_averages():
    rng = np.random.default_rng(31)
    for _ in range(300):
        f = FUNCTIONS[int(rng.integers(4))]
        alpha = float(rng.uniform(0.1, 6))
        k = int(rng.integers(1, 7))
        i0 = int(rng.integers(0, k))
        psi = (f(k * alpha) - f(i0 * alpha)) / (k - i0)
        for r in range(1, k - i0 + 1):
            assert r * psi <= f((i0 + r) * alpha) - f(i0 * alpha) + 1e-9
        coef = si_coefficients(k + 2, alpha, k, i0, f)
        assert np.all(np.diff(coef) <= 1e-9)


def test_assumption_examples():
    # capped quadratic, c = 8: f(7) - f(2) = 63 - 28 = 35 against f(10) / 2 = 30
    prof = two_weight_profile(Instance((2, 2, 5, 5, 5), 2, CQ8))
    assert assumption_sides(prof, CQ8, 2, 0) == (35.0, 30.0)
    assert not check_assumption(prof, CQ8, 2, 0)
    # f(12) - f(2) = 48 - 28 = 20 against f(20) / 2 = -40
    prof = two_weight_profile(Instance((2, 2, 10, 10, 10), 2, CQ8))
    assert assumption_sides(prof, CQ8, 2, 0) == (20.0, -40.0)
    assert not check_assumption(prof, CQ8, 2, 0)
    # sqrt, a_L = 1, a_H = 8: sqrt(9) - 1 = 2 against sqrt(16) / 2 = 2; equality counts as holding
    prof = two_weight_profile(Instance((1, 1, 8, 8, 8), 2, SQRT))
    lhs, rhs = assumption_sides(prof, SQRT, 2, 0)
    assert lhs == rhs == 2.0
    assert check_assumption(prof, SQRT, 2, 0)


def test_assumption_always_holds_at_last_i0():
    for case in two_weight_corpus(150, seed=32):
        inst = case.inst
        assert check_assumption(case.profile, inst.f, inst.k, inst.k - 1)


def test_lower_si_k2_i0_0_pattern():
    inst = Instance((4, 100, 100, 100, 4, 4), 2, SQRT)
    prof = two_weight_profile(inst)
    cut = lower_si_cut(inst, SiParams(0, "lower", (0, 4, 5), (2, 1, 3)))
    f, aL, aH = SQRT, prof.aL, prof.aH
    assert np.allclose(cut.pi[[0, 4, 5]], f(2 * aL) / 2)
    assert cut.pi[2] == pytest.approx(f(aL + aH) - f(2 * aL) / 2)
    assert np.allclose(cut.pi[[1, 3]], f(2 * aH) - f(aL + aH) + f(2 * aL) / 2)


def test_k2_i0_1_coincides_with_lifted_epi():
    inst = Instance((2, 2, 5, 5, 5, 2), 2, CQ8)
    low, high = (5, 0, 1), (3, 2, 4)
    lower = lower_si_cut(inst, SiParams(1, "lower", low, high))
    assert np.allclose(lower.pi, lifted_epi_cut(inst, low + high).pi)
    higher = higher_si_cut(inst, SiParams(1, "higher", high, low))
    assert np.allclose(higher.pi, lifted_epi_cut(inst, high + low).pi)


def test_structure_errors():
    inst = Instance((1, 5, 5, 5), 2, SQRT)
    with pytest.raises(StructureError):
        lower_si_cut(inst, SiParams(0, "lower"))
    with pytest.raises(StructureError):
        higher_si_cut(Instance((1, 1, 5, 5), 2, SQRT), SiParams(0, "higher"))
    with pytest.raises(InputError):
        lower_si_cut(Instance((1, 1, 5), 2, SQRT), SiParams(2, "lower"))
    with pytest.raises(InputError):
        SiParams(0, "middle")


def test_higher_si_refuses_when_assumption_fails():
    inst = Instance((2, 2, 10, 10, 10), 2, CQ8)
    with pytest.raises(AssumptionError):
        higher_si_cut(inst, SiParams(0, "higher"))
    higher_si_cut(inst, SiParams(1, "higher"))  # i0 = k - 1 is always allowed


def test_oracle_first_lifted_item():
    inst = Instance((1, 1, 1, 1, 6, 6), 3, SQRT)
    params = SiParams(0, "lower", (0, 1, 2, 3), (4, 5))
    coeffs = {i: SQRT(3.0) / 3 for i in range(4)}
    expected = SQRT(6 + 2) - 2 * SQRT(3.0) / 3
    assert lift_oracle_si(inst, params, 4, coeffs) == pytest.approx(expected)


def test_oracle_k1():
    inst = Instance((1, 1, 6, 6, 6), 1, FUNCTIONS[3])
    params = SiParams(0, "lower")
    assert np.allclose(oracle_lifted_si(inst, params), [inst.f(v) for v in inst.a])


def test_oracle_input_checks():
    inst = Instance((1, 1, 1, 6, 6), 2, SQRT)
    params = SiParams(0, "lower")
    with pytest.raises(InputError):
        lift_oracle_si(inst, params, 0, {})
    with pytest.raises(InputError):
        lift_oracle_si(inst, params, 4, {0: 1.0})


def test_lower_si_matches_oracle():
    hits = 0
    for case in two_weight_corpus(150, seed=33):
        inst = case.inst
        if len(case.profile.IL) < inst.k:
            continue
        low, high = case.class_orders()
        params = SiParams(case.i0, "lower", low, high)
        assert np.max(np.abs(lower_si_cut(inst, params).pi - oracle_lifted_si(inst, params))) <= 1e-9
        hits += 1
    assert hits >= 80


def test_higher_si_matches_oracle_under_assumption():
    for case in assumption_corpus(40, seed=34):
        low, high = case.class_orders()
        params = SiParams(case.i0, "higher", high, low)
        assert np.max(np.abs(higher_si_cut(case.inst, params).pi - oracle_lifted_si(case.inst, params))) <= 1e-9


def test_without_assumption_oracle_never_exceeds_closed_form_step():
    """Lift one item at a time from the closed form's own earlier coefficients."""
    rng = np.random.default_rng(35)
    checked = strict = 0
    for case in two_weight_corpus(400, seed=36):
        inst, prof = case.inst, case.profile
        if len(prof.IH) <= inst.k or inst.k < 2:
            continue
        i0 = int(rng.integers(0, inst.k - 1))
        if check_assumption(prof, inst.f, inst.k, i0):
            continue
        low, high = case.class_orders()
        params = SiParams(i0, "higher", high, low)
        closed = higher_si_closed_form(inst, params).pi
        coeffs = {i: closed[i] for i in high}
        for j in low:
            value = lift_oracle_si(inst, params, j, coeffs)
            assert value <= closed[j] + 1e-9
            strict += value < closed[j] - 1e-9
            coeffs[j] = closed[j]
        checked += 1
    assert checked >= 10 and strict >= 1


def test_lifted_coefficients_non_increasing():
    for case in two_weight_corpus(150, seed=37):
        inst, prof = case.inst, case.profile
        low, high = case.class_orders()
        if len(prof.IL) >= inst.k:
            pi = lower_si_cut(inst, SiParams(case.i0, "lower", low, high)).pi
            assert np.all(np.diff(pi[list(high)]) <= 1e-9)
        if len(prof.IH) > inst.k and check_assumption(prof, inst.f, inst.k, case.i0):
            pi = higher_si_cut(inst, SiParams(case.i0, "higher", high, low)).pi
            assert np.all(np.diff(pi[list(low)]) <= 1e-9)


def test_si_cuts_valid_and_facet_defining():
    for case in assumption_corpus(30, seed=38, n_max=8):
        inst, prof = case.inst, case.profile
        low, high = case.class_orders()
        cut = higher_si_cut(inst, SiParams(case.i0, "higher", high, low))
        assert max_violation(cut, inst) <= 1e-9
        assert tight_affine_dimension(cut, inst) == inst.n
        if len(prof.IL) >= inst.k:
            cut = lower_si_cut(inst, SiParams(case.i0, "lower", low, high))
            assert max_violation(cut, inst) <= 1e-9
            assert tight_affine_dimension(cut, inst) == inst.n


def test_best_i0_is_argmax_with_low_ties():
    inst = Instance((1, 1, 1, 1, 1, 7, 7, 7), 3, SQRT)
    prof = two_weight_profile(inst)
    rng = np.random.default_rng(39)
    from concavecuts.cuts import descending_order

    for _ in range(50):
        x = rng.random(8)
        x *= min(1.0, 3 / x.sum())
        w = float(rng.uniform(0, 3))
        i0 = best_i0(inst, w, x)
        within, other = descending_order(x, prof.IL), descending_order(x, prof.IH)
        viol = [lower_si_cut(inst, SiParams(t, "lower", within, other)).violation(w, x) for t in range(3)]
        assert viol[i0] == max(viol)
        assert i0 == min(t for t in range(3) if viol[t] >= max(viol) - 1e-12)

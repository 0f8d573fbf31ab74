import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bernstein_sl2 import latticeft as lft
from bernstein_sl2.classes import ConvergenceError
from bernstein_sl2.projectors import sigma

LT = lft.LieTarget
third = Fraction(1, 3)


def test_indicator_examples():
    assert lft.indicator_g_r(LT.anti_diagonal(3, 1, 1), 0)
    assert not lft.indicator_g_r(LT.anti_diagonal(3, 1, 1), Fraction(1, 2))
    assert lft.indicator_g_r(LT.anti_diagonal(3, 1, 3), Fraction(1, 2))
    Z = LT(3, third, 0, 0)
    assert lft.indicator_g_r(Z, -1) and not lft.indicator_g_r(Z, 0)


def test_indicator_refuses_low_precision():
    with pytest.raises(lft.PrecisionError):
        lft.indicator_g_r(LT.anti_diagonal(3, 1, 3), 1, ell=1, s=1)


def test_vanishing_examples():
    for Y in (LT.anti_diagonal(3, 1, 1), LT.anti_diagonal(3, third, 1)):
        for ell in range(3):
            assert lft.ft_g0(Y, ell, method="full").is_zero()


@pytest.mark.parametrize(
    "p, B, C, value",
    [(3, 1, 3, Fraction(-1, 3)), (3, 3, 3, Fraction(5, 3)), (5, 5, 5, Fraction(9, 5)), (5, 5, 10, Fraction(-1, 5))],
)
def test_half_depth_fixtures(p, B, C, value):
    stab = lft.ft_stabilize(LT.anti_diagonal(p, B, C), 3, ell_min=0)
    assert stab.stabilized
    assert stab.value.to_rational() == value


@settings(max_examples=40, deadline=None)
@given(
    st.sampled_from([3, 5]),
    st.integers(-1, 2),
    st.integers(-1, 2),
    st.integers(1, 4),
    st.integers(1, 4),
    st.integers(0, 1),
    st.sampled_from([0, Fraction(1, 2)]),
)
def test_marginal_path_matches_full(p, vb, vc, u, w, ell, r):
    if u % p == 0 or w % p == 0:
        return
    Y = LT.anti_diagonal(p, u * Fraction(p) ** vb, w * Fraction(p) ** vc)
    assert lft.lattice_integral(Y, ell, r, method="marginal") == lft.lattice_integral(Y, ell, r, method="full")


@pytest.mark.parametrize("Y", [LT.anti_diagonal(3, 1, 3), LT(3, 1, 1, 3), LT(3, third, 1, 1)])
def test_extra_precision_does_not_change_value(Y):
    for ell in (0, 1):
        s = lft.required_precision(Y, ell)
        base = lft.ft_g0(Y, ell, s=s, method="full")
        assert lft.ft_g0(Y, ell, s=s + 1, method="full") == base
        assert lft.ft_g0(Y, ell, s=s + 2, method="full") == base


def test_precision_refusal():
    Y = LT.anti_diagonal(3, 1, 3)
    with pytest.raises(lft.PrecisionError):
        lft.ft_g0(Y, 2, s=lft.required_precision(Y, 2) - 1)


def test_budget_refusal(monkeypatch):
    Y = LT.anti_diagonal(3, 1, 3)
    with pytest.raises(lft.BudgetExceeded) as info:
        lft.ft_g0(Y, 2, method="full", budget=1000)
    assert info.value.required == 3**12
    monkeypatch.setenv(lft.BUDGET_ENV, "10")
    with pytest.raises(lft.BudgetExceeded):
        lft.ft_g0(Y, 1)
    # a refusal after the first level ends the sweep as inconclusive
    monkeypatch.setenv(lft.BUDGET_ENV, str(3**4))
    stab = lft.ft_stabilize(LT.anti_diagonal(3, 3, 3), 3, ell_min=0)
    assert not stab.stabilized and stab.budget_refusal is not None


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        lft.ft_g0(LT.anti_diagonal(3, 1, 0), 1)
    with pytest.raises(ValueError):
        LT.from_entries(3, 1, 0, 0, 1)
    with pytest.raises(ValueError):
        lft.lattice_integral(LT(3, 1, 1, 1), 0, method="marginal")


def test_adjoint_invariance():
    Y = LT.anti_diagonal(3, 1, 3)
    for g in ([[1, 1], [0, 1]], [[2, 1], [1, 1]], [[1, 0], [3, 1]]):
        Z = Y.conjugate(g)
        assert Z.det == Y.det
        for ell in (0, 1, 2):
            assert lft.ft_g0(Y, ell, method="full") == lft.ft_g0(Z, ell, method="full")


def test_scaling_k0_is_ft_g0():
    Y = LT.anti_diagonal(3, 1, 3)
    assert lft.ft_g_minus_k(0, Y, 1) == lft.ft_g0(Y, 1)


@pytest.mark.parametrize("k", [Fraction(1, 2), 1])
def test_scaling_two_paths(k):
    for B, C in ((1, 1), (1, 3), (3, 9)):
        Y = LT.anti_diagonal(3, B, C)
        for ell in (1, 2):
            # ceil(k) = 1: one scaling step shifts the truncation level by one
            assert lft.ft_g_minus_k_direct(k, Y, ell, method="full") == lft.ft_g_minus_k(k, Y, ell - 1, method="full")


def test_kim_constant_at_p5():
    cases = [
        lft.kim_check(1, LT.anti_diagonal(5, 25, 25), 3),
        lft.kim_check(1, LT.anti_diagonal(5, 25, 50), 3),
        lft.kim_check(1, LT.anti_diagonal(5, 5, 5), 3),
        lft.kim_check(1, LT.anti_diagonal(5, 5, 25), 3),
    ]
    summary = lft.kim_constant(cases)
    assert summary.passed
    assert summary.constant == 5 * (5 * 5 - 1)
    assert cases[0].ft_value == 225 and cases[0].sigma_value == 27000
    assert cases[2].both_zero


@pytest.mark.parametrize("p, d", [(3, 1), (3, 2), (5, Fraction(1, 2)), (7, 1)])
def test_kim_constant_is_q_times_q2_minus_1(p, d):
    P = Fraction(p)
    j = math.floor(d) + 1
    Y = LT.anti_diagonal(p, P**j, P**j)
    case = lft.kim_check(d, Y, 3)
    assert case.ratio == p * (p * p - 1)
    assert case.sigma_value == sigma(d, case.exp_class, p)


def test_kim_constant_flags_mismatch():
    good = lft.kim_check(1, LT.anti_diagonal(5, 25, 25), 3)
    bad = lft.kim_check(1, LT.anti_diagonal(5, 25, 25), 3)
    bad.ratio = good.ratio + 1
    assert not lft.kim_constant([good, bad]).passed


def test_exp_domain():
    assert LT.anti_diagonal(5, 5, 5).class_of_exp().canonical() == "split:+1:m=1"
    assert LT.anti_diagonal(5, 5, 10).class_of_exp().canonical() == "unram:+1:m=1"
    assert LT.anti_diagonal(5, 5, 25).class_of_exp().canonical() == "ram:+1:m=3/2"
    with pytest.raises(ConvergenceError):
        LT.anti_diagonal(3, 1, 3).class_of_exp()

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from dirqsp.besseltrunc import (
    EVOLUTION_SIGN, TruncationPlan, appendix_constants, appendix_tail_bound, bessel_j, build_truncated_pair, check_theorem3,
    choose_k, q_k_sq_direct, tail_majorant,
)
from dirqsp.errors import InputError
from dirqsp.poly import EVEN, ODD, eval_circle


def maclaurin_j(k, tau, dps=60):
    """J_k(tau) = sum_n (-1)^n (tau/2)^{2n+k} / (n! (n+k)!), summed with extra digits."""
    with mpmath.workdps(dps + int(tau)):
        x = mpmath.mpf(tau) / 2
        total, n = mpmath.mpf(0), 0
        while True:
            term = (-1) ** n * x ** (2 * n + k) / (mpmath.factorial(n) * mpmath.factorial(n + k))
            total += term
            if n > x and abs(term) < mpmath.mpf(10) ** (-dps) * abs(total):
                return total
            n += 1


def test_bessel_at_zero():
    assert np.array_equal(bessel_j(4, 0), [1, 0, 0, 0, 0])


def test_bessel_frozen_value():
    assert abs(bessel_j(1, 2.0)[1] - 0.576724807757) <= 1e-11
    assert abs(bessel_j(1, 2.0)[1] - float(maclaurin_j(1, 2.0))) <= 1e-15


def test_bessel_normalization_identity():
    j = bessel_j(40, 10.0)
    assert abs(j[0] + 2 * np.sum(j[2::2]) - 1) <= 1e-12


@pytest.mark.parametrize("tau", [0.5, 3.0, 12.5, 29.0, 30.0])
def test_bessel_matches_series(tau):
    j = bessel_j(60, tau)
    for k in range(61):
        ref = float(maclaurin_j(k, tau))
        assert abs(j[k] - ref) <= 1e-12 * abs(ref) + 1e-300, (k, j[k], ref)


def test_bessel_extended_matches_double():
    with mpmath.workdps(40):
        je = bessel_j(30, 7.0, "extended")
    assert np.max(np.abs(np.array([float(v) for v in je]) - bessel_j(30, 7.0))) <= 1e-16


def test_bessel_rejects_negative_tau():
    with pytest.raises(InputError):
        bessel_j(3, -1.0)


@pytest.mark.parametrize("tau,eps,K", [
    (0, 1e-3, 2), (1, 1e-8, 10), (5, 1e-8, 18), (10, 1e-8, 28), (20, 1e-6, 40), (20, 1e-8, 42), (30, 1e-6, 54),
])
def test_choose_k_frozen(tau, eps, K):
    plan = choose_k(tau, eps)
    assert plan.K == K and plan.degree == K + 1
    assert plan.tail_bound <= eps / 4
    # minimality: the next smaller admissible K misses the target
    if K - 2 >= max(2, math.ceil(tau)):
        assert tail_majorant(K - 2, tau) > eps / 4


def test_tail_majorant_formula():
    with mpmath.workdps(30):
        ref = 4 * (mpmath.mpf(10) / 2) ** 29 / mpmath.factorial(29) / (1 - mpmath.mpf(10) / (2 * 30))
    assert abs(tail_majorant(28, 10) - float(ref)) <= 1e-12 * float(ref)


def test_tail_majorant_bounds_true_tail():
    plan = choose_k(10, 1e-8)
    tail = 2 * sum(abs(float(maclaurin_j(k, 10))) for k in range(plan.K + 1, plan.K + 60))
    assert plan.tail_bound <= 2.5e-9
    assert tail <= plan.tail_bound


def test_k_grows_slowly_with_precision():
    ks = [choose_k(20, 10.0**-e).K for e in range(2, 15)]
    assert ks == sorted(ks)
    assert all(b - a <= 2 for a, b in zip(ks, ks[1:]))


def test_choose_k_rejects_bad_epsilon():
    with pytest.raises(InputError):
        choose_k(1.0, 1.5)


def test_truncated_pair_structure():
    pair = build_truncated_pair(choose_k(6, 1e-8))
    K = pair.plan.K
    assert pair.p_k.parity() == EVEN and pair.q_k.parity() == ODD
    assert pair.p_k.degree == K and pair.q_k.degree == K + 1
    dp, dq = pair.p_k.dense(-K, K), pair.q_k.dense(-K - 1, K + 1)
    assert np.array_equal(dp, dp[::-1]) and np.array_equal(dq, -dq[::-1])
    j = pair.plan.bessel
    assert pair.p_k.coeff(0) == j[0] and pair.q_k.coeff(1) == EVOLUTION_SIGN * j[1]
    theta = np.linspace(-np.pi, np.pi, 31)
    assert np.max(np.abs(eval_circle(pair.p_k, theta).imag)) <= 1e-13
    assert np.max(np.abs(eval_circle(pair.q_k, theta).real)) <= 1e-13
    assert abs(eval_circle(pair.p_k, 0.0) - 1) <= pair.plan.tail_bound + 1e-15
    assert abs(eval_circle(pair.q_k, 0.0)) <= 1e-16


def test_truncated_pair_approximates_evolution():
    plan = TruncationPlan(tau=1.0, epsilon=1e-3, K=4, bessel=bessel_j(5, 1.0), tail_bound=tail_majorant(4, 1.0))
    pair = build_truncated_pair(plan)
    assert abs(eval_circle(pair.p_k, np.pi / 2) - np.cos(1.0)) <= plan.tail_bound
    theta = np.linspace(0, 2 * np.pi, 50)
    target = np.exp(1j * EVOLUTION_SIGN * plan.tau * np.sin(theta))
    total = eval_circle(pair.p_k, theta) + eval_circle(pair.q_k, theta)
    assert np.max(np.abs(total - target)) <= plan.tail_bound


def test_q_squared_cross_representation(gen):
    pair = build_truncated_pair(choose_k(7, 1e-8))
    theta = gen.uniform(0, np.pi, 20)
    x = np.cos(theta)
    circle_sq = eval_circle(pair.q_k, theta) ** 2
    assert np.max(np.abs(circle_sq.imag)) <= 1e-13
    assert np.max(np.abs(pair.q_k_sq_x(x) - circle_sq.real)) <= 1e-12
    assert np.max(np.abs(q_k_sq_direct(x, pair.plan.bessel, pair.plan.K) - circle_sq.real)) <= 1e-12
    assert abs(pair.q_k_sq_x.degree - (2 * pair.plan.K + 2)) == 0


def test_unit_disc_bound():
    pair = build_truncated_pair(choose_k(12, 1e-10))
    theta = np.linspace(0, np.pi, 2001)
    mod = np.abs(eval_circle(pair.p_k, theta)) ** 2 + np.abs(eval_circle(pair.q_k, theta)) ** 2
    assert np.max(mod) <= 1 + 3 * pair.plan.tail_bound


def test_theorem3_examples():
    rep = check_theorem3(10, 10.0, [1.01, 1.1, 1.5, 2, 4])
    assert rep.passed and len(rep.rows) == 5
    edge = check_theorem3(10, 10.0, [1.0]).rows[0]
    assert edge.passed and 0 <= edge.p_plus_q_margin <= tail_majorant(10, 10.0)
    with pytest.raises(InputError):
        check_theorem3(3, 1.0, [1.0])
    with pytest.raises(InputError):
        check_theorem3(4, 5.0, [1.0])
    with pytest.raises(InputError):
        check_theorem3(4, 1.0, [0.5])


def test_appendix_constants():
    for K in range(2, 41, 2):
        j, c = appendix_constants(K)
        assert j <= 0.32 and c < 0.46
    assert abs(appendix_constants(2)[1] - math.e / 6) <= 1e-15


@pytest.mark.parametrize("K", [2, 6, 10, 20])
@pytest.mark.parametrize("y", [1.0, 1.5, 2.2, 3.0])
def test_appendix_total_tail_bound_half_range(K, y):
    for tau in (0.0, K / 2):
        lhs, rhs = appendix_tail_bound(K, tau, y)
        assert lhs <= rhs


@pytest.mark.parametrize("K,tau,y,lhs_ref,rhs_ref", [
    (6, 6.0, 1.5, 2.9520239, 2.8941804),
    (20, 20.0, 1.0, 0.18600324, 0.16209272),
])
def test_appendix_total_tail_bound_fails_at_tau_equal_k(K, tau, y, lhs_ref, rhs_ref):
    # the closed-form bound on the y^m tail does not hold near tau = K; the
    # weaker statement actually needed (tail below exp(tau (y - 1/y)/2)) does
    lhs, rhs = appendix_tail_bound(K, tau, y)
    assert abs(lhs - lhs_ref) <= 1e-7 * lhs_ref and abs(rhs - rhs_ref) <= 1e-7 * rhs_ref
    assert lhs > rhs
    assert lhs < math.exp(tau * (y - 1 / y) / 2)
    assert check_theorem3(K, tau, [y]).passed


@given(st.integers(1, 20).map(lambda h: 2 * h), st.floats(0, 1), st.floats(1, 4))
def test_theorem3_property(K, frac, y):
    assert check_theorem3(K, frac * K, [y]).passed


def test_bessel_relative_accuracy_near_zero():
    # a double recurrence would only be accurate to an ulp of max|J_k| here
    for k, n in ((15, 5), (3, 4), (40, 1)):
        z = float(mpmath.besseljzero(k, n))
        for tau in (z + 1e-9, z - 1e-6):
            if tau > 60:
                continue
            got = bessel_j(60, tau)[k]
            ref = mpmath.besselj(k, tau)
            assert abs(got - ref) <= 4e-16 * abs(ref)

import mpmath
import numpy as np
import pytest

from dirqsp.besseltrunc import build_truncated_pair, choose_k
from dirqsp.completion import (
    assemble_q, build_p_poly, choose_alpha, complete, completion_target, find_roots_even, finalize_pq,
    identity_residual, margin_delta, off_parity_mass, pair_roots, split_parity,
)
from dirqsp.errors import NumericError, VerificationFailure
from dirqsp.poly import EVEN, ODD, RealPoly, eval_circle, x_to_laurent
from numpy.polynomial import chebyshev as cheb


def pair_for(tau, eps):
    return build_truncated_pair(choose_k(tau, eps))


@pytest.fixture(scope="module")
def comp10():
    pair = pair_for(10, 1e-8)
    return pair, complete(pair)


def q_values(q, x):
    return cheb.chebval(x, q)


def test_alpha_constant_case():
    pair = pair_for(0, 1e-8)
    assert pair.plan.K == 2
    assert choose_alpha(pair) == 1 - margin_delta(1e-8)


def test_alpha_margin_at_tau_10(comp10):
    pair, comp = comp10
    delta = margin_delta(1e-8)
    assert 1 - comp.alpha <= 2.5e-9 + 1e-10
    x = np.linspace(-1, 1, 4001)
    assert np.min(comp.p_poly(x)) >= delta / 2


def test_alpha_gap_shrinks_with_epsilon():
    # the margin delta = eps/4 shrinks, so 1 - alpha is nonincreasing as eps decreases
    gaps = [1 - choose_alpha(pair_for(6, 10.0**-e)) for e in range(2, 13)]
    assert all(b <= a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] <= 1e-9


def test_p_poly_dual_path():
    pair = pair_for(1, 1e-3)
    alpha = choose_alpha(pair)
    p = build_p_poly(pair, alpha)
    K, j = pair.plan.K, pair.plan.bessel
    pk0 = j[0] + 2 * sum(j[2 * m] * (-1) ** m for m in range(1, K // 2 + 1))  # T_2m(0) = (-1)^m
    u = 2 * sum(j[2 * m + 1] * (-1) ** m for m in range(K // 2 + 1))          # U_2m(0) = (-1)^m
    direct = 1 - alpha**2 * (pk0**2 - (0 - 1) * u**2)
    assert abs(p(0.0) - direct) <= 1e-12


def test_p_poly_even_and_leading_coefficient(gen):
    pair = pair_for(5, 1e-8)
    alpha = choose_alpha(pair)
    p = build_p_poly(pair, alpha)
    K = pair.plan.K
    assert p.degree == 2 * K + 2 and p.parity() == EVEN
    x = gen.uniform(-1.5, 1.5, 20)
    assert np.max(np.abs(p(x) - p(-x))) <= 1e-12 * np.max(np.abs(p(x)))
    expected = alpha**2 * 4 * pair.plan.bessel[K + 1] ** 2 * 4.0**K
    assert abs(p.leading_coefficient - expected) <= 1e-10 * expected
    xs = gen.uniform(-1, 1, 50)
    ref = 1 - alpha**2 * (pair.p_k_x(xs) ** 2 - pair.q_k_sq_x(xs))
    assert np.max(np.abs(p(xs) - ref)) <= 1e-11 * max(1, np.max(np.abs(ref)))


def test_p_poly_nonnegative_on_wide_grid(comp10):
    _, comp = comp10
    x = np.linspace(-3, 3, 2000)
    assert np.min(comp.p_poly(x)) >= -1e-12


def test_roots_of_factored_input():
    r = find_roots_even(RealPoly.from_monomial([1, 0, 2, 0, 1]))
    assert len(r) == 2 and np.max(np.abs(r.roots + 1)) <= 1e-7
    assert [m for _, m in r.clusters] == [2]
    r = find_roots_even(RealPoly.from_monomial([1, 0, 0, 0, 1]))
    assert sorted(np.round(r.roots.imag, 12)) == [-1, 1]
    assert np.max(np.abs(r.roots.real)) <= 1e-12


def test_assemble_single_imaginary_pair():
    q = assemble_q(np.array([-1.0 + 0j]), 1.0)
    assert np.allclose(q, [-1j, 1], atol=1e-15)          # x - i
    p_prime, q_prime = split_parity(q)
    assert np.allclose(q_prime.cheb, [0, 1]) and np.allclose(p_prime.cheb, [-1])


def test_assemble_conjugate_pair(gen):
    q = assemble_q(np.array([1j, -1j]), 1.0)
    x = gen.uniform(-2, 2, 10)
    assert np.max(np.abs(np.abs(q_values(q, x)) ** 2 - (x**4 + 1))) <= 1e-12 * np.max(x**4 + 1)


def test_assemble_rejects_real_positive_root():
    with pytest.raises(VerificationFailure):
        assemble_q(np.array([0.5 + 0j]), 1.0)


def test_split_parity_rejects_wrong_parity():
    bad = cheb.poly2cheb(np.array([-3, 2j, 1]))  # (x^2 - 3) + 2ix: even real part
    assert off_parity_mass(bad) > 0.1
    with pytest.raises(NumericError):
        split_parity(bad)


def test_pipeline_roots_at_tau_5():
    pair = pair_for(5, 1e-8)
    comp = complete(pair)
    roots = comp.u_roots.roots
    lone, pairs = pair_roots(roots)
    assert all(u < 0 for u in lone)
    assert len(lone) % 2 == 1
    assert not any(abs(u.imag) <= 1e-10 * (1 + abs(u)) and u.real >= 0 for u in roots)
    # conjugate pairing of the complex roots
    cplx = [u for u in roots if abs(u.imag) > 1e-10 * (1 + abs(u))]
    for u in cplx:
        assert min(abs(v - np.conj(u)) for v in cplx) <= 1e-8 * (1 + abs(u))


def test_completion_at_tau_10(comp10):
    pair, comp = comp10
    K = pair.plan.K
    assert comp.residual <= 1e-9
    assert comp.off_parity <= 1e-10
    assert comp.P.degree == comp.Q.degree == K + 1
    assert comp.P.parity() == comp.Q.parity() == ODD == ("odd" if (K + 1) % 2 else "even")
    assert comp.p_prime.parity() == EVEN and comp.q_prime.parity() == ODD
    assert comp.p_prime.degree <= K and comp.q_prime.degree <= K + 1


def test_exact_completion_identity(comp10):
    pair, comp = comp10
    x = np.random.default_rng(3).uniform(-2, 2, 100)
    assert identity_residual(pair, comp.alpha, comp.p_prime, comp.q_prime, x) <= 1e-8


def test_circle_cross_terms_vanish(comp10):
    pair, comp = comp10
    theta = np.linspace(0, 2 * np.pi, 97)
    a = comp.alpha * eval_circle(pair.p_k, theta)
    b = 1j * comp.p_prime(np.cos(theta))
    c = comp.alpha * eval_circle(pair.q_k, theta)
    e = comp.q_prime(np.cos(theta))
    assert np.max(np.abs(np.real(np.conj(a) * b))) <= 1e-12
    assert np.max(np.abs(np.real(np.conj(c) * e))) <= 1e-12


def test_finalize_constant_case():
    pair = pair_for(0, 1e-6)
    comp = complete(pair)
    assert comp.residual <= 1e-12
    assert abs(comp.P.coeff(1).real - comp.alpha) <= 1e-15
    assert comp.Q.is_zero()


def test_finalize_rejects_unnormalized(comp10):
    pair, comp = comp10
    with pytest.raises(NumericError):
        finalize_pq(pair, comp.alpha * 1.001, comp.p_prime, comp.q_prime)


def test_extended_completion_matches_double():
    plan = choose_k(5, 1e-8)
    d = complete(build_truncated_pair(plan))
    with mpmath.workdps(40):
        e = complete(build_truncated_pair(plan, "extended"), precision="extended")
    assert e.precision == "extended" and e.residual <= 1e-15
    P, Q = e.to_double()
    assert np.max(np.abs(P.dense(-19, 19) - d.P.dense(-19, 19))) <= 1e-9
    assert np.max(np.abs(Q.dense(-19, 19) - d.Q.dense(-19, 19))) <= 1e-9


@pytest.mark.parametrize("tau", [1, 5, 10, 20])
@pytest.mark.parametrize("eps", [1e-4, 1e-8])
def test_completion_sweep(tau, eps):
    pair = pair_for(tau, eps)
    comp = complete(pair)
    assert comp.residual <= 1e-9
    x = np.random.default_rng(0).uniform(-2, 2, 100)
    assert identity_residual(pair, comp.alpha, comp.p_prime, comp.q_prime, x) <= 1e-8
    target = completion_target(pair)
    assert np.max(comp.alpha**2 * target(np.cos(np.linspace(0, np.pi, 500)))) <= 1

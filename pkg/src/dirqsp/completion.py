"""Exact normalization of the truncated pair.

Given P_K, Q_K the completion finds real polynomials P' (even) and Q' (odd)
in x = cos(theta) with

    alpha^2 (P_K^2 - Q_K^2) + P'^2 + Q'^2 = 1,

by factoring the nonnegative even polynomial p = 1 - alpha^2 (P_K^2 - Q_K^2)
as |q(x)|^2 with q built from one square root of each root of p(x) = g(x^2),
then splitting q into its real (odd) and imaginary (even) parts.
"""
import logging
from dataclasses import dataclass

import mpmath
import numpy as np
from numpy.polynomial import chebyshev as cheb

from ._precision import DOUBLE, EXTENDED, check_precision, is_extended, working_precision
from .besseltrunc import TruncatedPair, build_truncated_pair
from .errors import InputError, NumericError, VerificationFailure
from .poly import EVEN, LaurentPoly, RealPoly, chebval_any, circle_norm_residual, x_to_laurent
from .rootfind import aberth_cheb, cluster_roots, newton_polish

log = logging.getLogger(__name__)

REAL_TOL = 1e-10
CLUSTER_RADIUS = 1e-7
PAIR_TOL = 1e-8
PARITY_ZERO_TOL = 1e-10
RESIDUAL_TOL = 1e-9


def _sqrt(v):
    return mpmath.sqrt(v) if isinstance(v, (mpmath.mpf, mpmath.mpc)) else np.sqrt(v)


def _as_c(v):
    return mpmath.mpc(v) if isinstance(v, (mpmath.mpf, mpmath.mpc)) else complex(v)


# -- alpha -----------------------------------------------------------------------
def completion_target(pair):
    """P_K^2 - Q_K^2 as a polynomial in x (equals |p_k|^2 + |q_k|^2 on the circle)."""
    return pair.p_k_x * pair.p_k_x - pair.q_k_sq_x


def margin_delta(epsilon):
    return min(max(epsilon / 4, 1e-10), 1e-4)


def chebyshev_grid(n):
    """x_j = cos(j pi / n), j = 0..n."""
    return np.cos(np.pi * np.arange(n + 1) / n)


def choose_alpha(pair, epsilon=None, refinements=2):
    """Scale factor (1 - delta)/sqrt(M), M the grid maximum of max(1, P_K^2 - Q_K^2).

    The grid has 8(K+1) Chebyshev points; the choice is re-checked on a
    4x finer grid (up to ``refinements`` times) and must keep
    alpha^2 (P_K^2 - Q_K^2) <= 1 - delta there.
    """
    epsilon = pair.plan.epsilon if epsilon is None else epsilon
    delta = margin_delta(epsilon)
    # alpha only has to be accurate to double precision
    target = completion_target(pair).astype(DOUBLE)

    def grid_max(n):
        vals = np.asarray(target(chebyshev_grid(n)), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise NumericError("non-finite value of P_K^2 - Q_K^2 on the alpha grid", stage="choose_alpha")
        return max(1.0, float(vals.max()))

    n = 8 * (pair.plan.K + 1)
    alpha = (1 - delta) / np.sqrt(grid_max(n))
    for _ in range(refinements):
        n *= 4
        m = grid_max(n)
        if alpha * alpha * m <= 1 - delta:
            break
        alpha = (1 - delta) / np.sqrt(m)
    else:
        raise NumericError("alpha margin still violated after grid refinement", stage="choose_alpha")
    if pair.precision == EXTENDED:
        return mpmath.mpf(alpha)
    return float(alpha)


# -- the polynomial to factor ----------------------------------------------------
def build_p_poly(pair, alpha):
    """p(x) = 1 - alpha^2 (P_K^2 - Q_K^2), even of degree 2K + 2 for tau > 0."""
    p = 1 - (alpha * alpha) * completion_target(pair)
    if p.parity() != EVEN:
        raise NumericError("completion polynomial is not even", stage="build_p_poly")
    lead = p.cheb[-1]
    if p.degree > 0 and lead < 0:
        raise NumericError("completion polynomial has negative leading coefficient", stage="build_p_poly")
    cleaned = p.cheb.copy()
    cleaned[1::2] = 0
    return RealPoly(cleaned)


# -- roots -------------------------------------------------------------------------
@dataclass
class URoots:
    """Roots u_j of g, where p(x) = g(x^2), listed with multiplicity."""

    roots: np.ndarray
    lc: object                 # monomial leading coefficient of p in x
    clusters: list
    refit_residual: float
    iterations: int = 0

    def __len__(self):
        return len(self.roots)


def even_to_g(p):
    """Chebyshev coefficients of g(s), s = 2x^2 - 1, using T_{2m}(x) = T_m(2x^2 - 1)."""
    if p.parity() != EVEN:
        raise InputError("find_roots_even needs an even polynomial")
    return p.cheb[0::2]


def find_roots_even(p):
    """Roots in u = x^2 of an even polynomial, via Aberth-Ehrlich on g in s = 2u - 1."""
    a = even_to_g(p)
    n = len(a) - 1
    lc = p.leading_coefficient
    if n == 0:
        empty = np.array([], dtype=object if is_extended(a) else complex)
        return URoots(roots=empty, lc=lc, clusters=[], refit_residual=0.0)
    roots0 = None
    if is_extended(a):
        # double-precision roots are a close start for the mpmath iteration
        try:
            roots0, _ = aberth_cheb(np.array([complex(c) for c in a]))
        except NumericError:
            roots0 = None
    s_roots, iters = aberth_cheb(a, roots0)
    s_roots = newton_polish(a, s_roots)
    # refit: g(s) = a_n 2^{n-1} prod(s - s_j) at n+1 Chebyshev points
    pts = np.cos(np.pi * (np.arange(n + 1) + 0.5) / (n + 1))
    if is_extended(a):
        pts = np.array([mpmath.mpf(v) for v in pts], dtype=object)
    g_vals = chebval_any(pts, a)
    prod_vals = np.array([a[-1] * 2 ** (n - 1) * np.prod(s - s_roots) for s in pts])
    scale = max(abs(v) for v in g_vals)
    resid = float(max(abs(g - h) for g, h in zip(g_vals, prod_vals)) / scale)
    if resid > 1e-8:
        raise NumericError(f"root refit residual {resid:.2e} exceeds 1e-8", stage="find_roots_even")
    u = (1 + s_roots) / 2
    order = sorted(range(n), key=lambda i: (float(u[i].real), float(u[i].imag)))
    u = u[order]
    return URoots(roots=u, lc=lc, clusters=cluster_roots(u, CLUSTER_RADIUS), refit_residual=resid, iterations=iters)


def _is_real(u):
    return abs(u.imag) <= REAL_TOL * (1 + abs(u))


def _upper_sqrt(u):
    r = _sqrt(_as_c(u))
    return r if r.imag > 0 else -r


def pair_roots(u_roots):
    """Split u-roots into real-negative ones and conjugate pairs (upper member listed)."""
    u_roots = list(u_roots)
    lone, upper, lower = [], [], []
    for u in u_roots:
        if _is_real(u):
            if u.real >= 0:
                raise VerificationFailure(
                    f"real nonnegative u-root {complex(u):.3e}: p has a real root, alpha margin too small",
                    stage="assemble_q")
            lone.append(u.real)
        elif u.imag > 0:
            upper.append(u)
        else:
            lower.append(u)
    if len(upper) != len(lower):
        raise NumericError("complex u-roots do not come in conjugate pairs", stage="assemble_q")
    pairs = []
    for u in upper:
        j = min(range(len(lower)), key=lambda k: abs(lower[k] - u.conjugate()))
        v = lower.pop(j)
        if abs(v - u.conjugate()) > PAIR_TOL * (1 + abs(u)):
            raise NumericError(f"u-root {complex(u):.3e} has no conjugate partner", stage="assemble_q")
        pairs.append((u + v.conjugate()) / 2)
    return lone, pairs


def assemble_q(u_roots, lc):
    """Chebyshev coefficients of q(x) = sqrt(lc) prod_u (x - r(u)), Im r(u) > 0.

    A conjugate pair of u-roots gives the factor x^2 - 2i Im(r) x - |r|^2
    (even + i odd), a real-negative u-root the factor x - i sqrt(-u)
    (odd + i even). When the lone factors are even in number q is
    multiplied by i so that its real part is always the odd one.
    """
    roots = u_roots.roots if isinstance(u_roots, URoots) else u_roots
    extended = is_extended(np.asarray(roots)) or isinstance(lc, mpmath.mpf)
    lone, pairs = pair_roots(roots)
    one = mpmath.mpc(1) if extended else 1 + 0j
    q = np.array([one], dtype=object if extended else complex)
    for u in sorted(lone):
        b = _sqrt(-u)
        q = cheb.chebmul(q, np.array([-1j * b, one], dtype=q.dtype))
    for u in pairs:
        r = _upper_sqrt(u)
        quad = np.array([one / 2 - abs(r) ** 2, -2j * r.imag, one / 2], dtype=q.dtype)
        q = cheb.chebmul(q, quad)
    if len(lone) % 2 == 0:
        q = q * 1j
    if lc < 0:
        raise VerificationFailure("negative leading coefficient; p is not nonnegative", stage="assemble_q")
    return q * _sqrt(lc)


def off_parity_mass(q):
    """max over the off-parity part (Re on even T_k, Im on odd T_k), relative to max |coeff|."""
    q = np.asarray(q)
    scale = max(abs(c) for c in q)
    if scale == 0:
        return 0.0
    re_even = max((abs(c.real) for c in q[0::2]), default=0)
    im_odd = max((abs(c.imag) for c in q[1::2]), default=0)
    return float(max(re_even, im_odd) / scale)


def split_parity(q, p_poly=None, tol=PARITY_ZERO_TOL):
    """(P', Q') = (Im q, Re q) with Im q even and Re q odd; off-parity residue is zeroed."""
    q = np.asarray(q)
    off = off_parity_mass(q)
    if off > tol:
        raise NumericError(f"q has off-parity mass {off:.2e} > {tol:.0e}", stage="split_parity")
    if is_extended(q):
        re = np.array([c.real for c in q], dtype=object)
        im = np.array([c.imag for c in q], dtype=object)
    else:
        re, im = q.real.copy(), q.imag.copy()
    re[0::2] = 0
    im[1::2] = 0
    p_prime, q_prime = RealPoly(im), RealPoly(re)
    if p_poly is not None:
        err = sum_of_squares_error(p_prime, q_prime, p_poly)
        if err > 1e-8:
            raise NumericError(f"P'^2 + Q'^2 misses p by {err:.2e} (relative)", stage="split_parity")
    return p_prime, q_prime


def sum_of_squares_error(p_prime, q_prime, p_poly, n=100, seed=0):
    x = np.random.default_rng(seed).uniform(-2, 2, n)
    lhs = np.asarray(p_prime(x) ** 2 + q_prime(x) ** 2, dtype=float)
    rhs = np.asarray(p_poly(x), dtype=float)
    return float(np.max(np.abs(lhs - rhs) / np.maximum(1.0, np.abs(rhs))))


def finalize_pq(pair, alpha, p_prime, q_prime, tol=RESIDUAL_TOL):
    """P = z (alpha p_k + i P'), Q = alpha q_k + Q' as Laurent polynomials."""
    P = (pair.p_k * alpha + x_to_laurent(p_prime) * 1j).shift(1)
    Q = pair.q_k * alpha + x_to_laurent(q_prime)
    resid = circle_norm_residual(P, Q)
    if resid > tol:
        raise NumericError(
            f"circle-norm residual {resid:.2e} > {tol:.0e} (1 - alpha = {float(1 - alpha):.2e})",
            stage="finalize_pq")
    return P, Q


@dataclass
class CompletionResult:
    alpha: float
    delta: float
    p_poly: RealPoly
    u_roots: URoots
    q_complex: np.ndarray
    p_prime: RealPoly
    q_prime: RealPoly
    P: LaurentPoly
    Q: LaurentPoly
    residual: float
    off_parity: float
    precision: str = DOUBLE

    def to_double(self):
        """(P, Q) with double-precision coefficients."""
        return self.P.astype(DOUBLE), self.Q.astype(DOUBLE)


def identity_residual(pair, alpha, p_prime, q_prime, x):
    """|alpha^2 (P_K^2 - Q_K^2) + P'^2 + Q'^2 - 1| relative to max(1, size of the terms)."""
    x = np.asarray(x, dtype=float)
    t = np.asarray((alpha * alpha) * completion_target(pair)(x), dtype=float)
    pp = np.asarray(p_prime(x), dtype=float) ** 2
    qq = np.asarray(q_prime(x), dtype=float) ** 2
    scale = np.maximum(1.0, np.abs(t) + pp + qq)
    return float(np.max(np.abs(t + pp + qq - 1) / scale))


def _complete_once(pair, epsilon):
    alpha = choose_alpha(pair, epsilon)
    p_poly = build_p_poly(pair, alpha)
    u_roots = find_roots_even(p_poly)
    q = assemble_q(u_roots, u_roots.lc)
    off = off_parity_mass(q)
    p_prime, q_prime = split_parity(q, p_poly)
    P, Q = finalize_pq(pair, alpha, p_prime, q_prime)
    return CompletionResult(
        alpha=alpha, delta=margin_delta(epsilon), p_poly=p_poly, u_roots=u_roots,
        q_complex=q, p_prime=p_prime, q_prime=q_prime, P=P, Q=Q,
        residual=circle_norm_residual(P, Q), off_parity=off, precision=pair.precision,
    )


def complete(pair, epsilon=None, precision=DOUBLE, fallback=True):
    """Run the completion, retrying in extended precision on a numeric failure."""
    check_precision(precision)
    epsilon = pair.plan.epsilon if epsilon is None else epsilon
    if precision == DOUBLE:
        if pair.precision != DOUBLE:
            pair = build_truncated_pair(pair.plan, DOUBLE, pair.sign)
        try:
            return _complete_once(pair, epsilon)
        except NumericError as exc:
            if not fallback:
                raise
            log.warning("double-precision completion failed (%s); retrying in extended precision", exc)
    with working_precision(EXTENDED):
        ext = pair if pair.precision == EXTENDED else build_truncated_pair(pair.plan, EXTENDED, pair.sign)
        return _complete_once(ext, epsilon)


__all__ = [
    "CompletionResult", "TruncatedPair", "URoots", "assemble_q", "build_p_poly", "choose_alpha",
    "complete", "completion_target", "find_roots_even", "finalize_pq", "identity_residual",
    "split_parity",
]

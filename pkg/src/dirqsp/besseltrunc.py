"""Bessel coefficients, Jacobi-Anger truncation, and the |x| >= 1 positivity checks.

The truncated pair approximates e^{-i tau sin(theta)} on the unit circle:

    p_k(z) = J_0 + sum_{m=1}^{K/2} J_{2m} (z^{2m} + z^{-2m})            ~ cos(tau sin theta)
    q_k(z) = s * sum_{m=0}^{K/2} J_{2m+1} (z^{2m+1} - z^{-(2m+1)})      ~ s i sin(tau sin theta)

``q_k`` has real antisymmetric coefficients, so it is purely imaginary on
the circle, and the sign ``s = EVOLUTION_SIGN`` selects exp(-iHt).
"""
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from ._precision import DOUBLE, EXTENDED, EXTENDED_DPS, as_complex, check_precision, working_precision
from .errors import InputError
from .poly import LaurentPoly, RealPoly, chebyshev_U, laurent_to_real

#: sign on q_k; -1 makes p_k + q_k approximate exp(-i tau sin theta)
EVOLUTION_SIGN = -1

#: working digits behind the double-precision Bessel values
DOUBLE_BESSEL_DPS = 32


def _log_majorant(k, tau):
    """log of (tau/2)^k / k!, the standard bound on |J_k(tau)|."""
    if tau == 0:
        return -math.inf
    return k * math.log(tau / 2) - math.lgamma(k + 1)


def _start_index(kmax, tau, digits):
    n = kmax + 20 + math.ceil(tau)
    # push the start out until the neglected J_n is below working precision relative to J_kmax
    ref = min(0.0, _log_majorant(kmax, tau))
    while _log_majorant(n, tau) - ref > -digits * math.log(10) or n < tau:
        n += 10
    return n


def bessel_j(kmax, tau, precision=DOUBLE):
    """J_0(tau) .. J_kmax(tau) by Miller's backward recurrence.

    Normalized with the identity J_0 + 2 sum_{m>=1} J_{2m} = 1. The double
    result is computed with 32 digits and rounded: a double-precision
    recurrence is only accurate to an ulp of max|J_k|, which loses the
    relative accuracy of values near a zero of J_k.
    """
    check_precision(precision)
    if tau < 0:
        raise InputError(f"tau must be >= 0, got {tau}")
    if kmax < 0:
        raise InputError(f"kmax must be >= 0, got {kmax}")
    if precision == EXTENDED:
        with working_precision(EXTENDED):
            return _bessel_extended(kmax, mpmath.mpf(tau))
    with mpmath.workdps(DOUBLE_BESSEL_DPS):
        return np.array([float(v) for v in _bessel_extended(kmax, mpmath.mpf(tau))])


def _bessel_extended(kmax, tau):
    out = np.array([mpmath.mpf(0)] * (kmax + 1), dtype=object)
    if tau == 0:
        out[0] = mpmath.mpf(1)
        return out
    n = _start_index(kmax, float(tau), mpmath.mp.dps + 5)
    f = [mpmath.mpf(0)] * (n + 2)
    f[n] = mpmath.mpf(1)
    for k in range(n, 0, -1):
        f[k - 1] = 2 * k / tau * f[k] - f[k + 1]
    norm = f[0] + 2 * mpmath.fsum(f[2::2])
    for k in range(kmax + 1):
        out[k] = f[k] / norm
    return out


def tail_majorant(K, tau):
    """Rigorous bound on sum_{k>K} 2|J_k(tau)| (times the 2x safety factor): 4 (tau/2)^{K+1}/(K+1)! / (1 - tau/(2(K+2)))."""
    if tau == 0:
        return 0.0
    ratio = tau / (2 * (K + 2))
    if ratio >= 1:
        return math.inf
    return 4 * math.exp(_log_majorant(K + 1, tau)) / (1 - ratio)


@dataclass(frozen=True)
class TruncationPlan:
    tau: float
    epsilon: float
    K: int
    bessel: np.ndarray = field(repr=False)
    tail_bound: float

    @property
    def degree(self):
        """Number of directional controlled operations, K + 1."""
        return self.K + 1


def choose_k(tau, epsilon):
    """Smallest even K >= max(2, ceil(tau)) whose tail majorant is <= epsilon/4."""
    if not 0 < epsilon < 1:
        raise InputError(f"epsilon must lie in (0, 1), got {epsilon}")
    if tau < 0:
        raise InputError(f"tau must be >= 0, got {tau}")
    K = max(2, math.ceil(tau))
    K += K % 2
    while tail_majorant(K, tau) > epsilon / 4:
        K += 2
    return TruncationPlan(
        tau=float(tau), epsilon=float(epsilon), K=K,
        bessel=bessel_j(K + 1, tau), tail_bound=tail_majorant(K, tau),
    )


@dataclass(frozen=True)
class TruncatedPair:
    plan: TruncationPlan
    p_k: LaurentPoly
    q_k: LaurentPoly
    p_k_x: RealPoly
    q_k_sq_x: RealPoly
    sign: int = EVOLUTION_SIGN

    @property
    def precision(self):
        return self.p_k.precision


def truncated_laurent(K, bessel, sign=EVOLUTION_SIGN):
    """(p_k, q_k) Laurent coefficients from J_0..J_{K+1}."""
    K = int(K)
    p = np.zeros(2 * K + 1, dtype=bessel.dtype)
    q = np.zeros(2 * K + 3, dtype=bessel.dtype)
    p[K] = bessel[0]
    for m in range(1, K // 2 + 1):
        p[K + 2 * m] = p[K - 2 * m] = bessel[2 * m]
    c = K + 1
    for m in range(K // 2 + 1):
        k = 2 * m + 1
        q[c + k] = sign * bessel[k]
        q[c - k] = -sign * bessel[k]
    precision = EXTENDED if bessel.dtype == object else DOUBLE
    return LaurentPoly(as_complex(p, precision), -K), LaurentPoly(as_complex(q, precision), -(K + 1))


def build_truncated_pair(plan, precision=DOUBLE, sign=EVOLUTION_SIGN):
    check_precision(precision)
    if sign not in (1, -1):
        raise InputError("sign must be +1 or -1")
    with working_precision(precision):
        bessel = plan.bessel if precision == DOUBLE else bessel_j(plan.K + 1, plan.tau, EXTENDED)
        p_k, q_k = truncated_laurent(plan.K, bessel, sign)
        return TruncatedPair(
            plan=plan, p_k=p_k, q_k=q_k,
            p_k_x=laurent_to_real(p_k),
            q_k_sq_x=laurent_to_real(q_k * q_k),
            sign=sign,
        )


def q_k_sq_direct(x, bessel, K):
    """(x^2 - 1) (2 sum_m J_{2m+1} U_{2m}(x))^2 evaluated pointwise."""
    x = np.asarray(x, dtype=float)
    s = sum(bessel[2 * m + 1] * chebyshev_U(2 * m, x) for m in range(K // 2 + 1))
    return (x**2 - 1) * (2 * s) ** 2


# -- positivity outside [-1, 1] ------------------------------------------------
@dataclass
class Theorem3Row:
    y: float
    p_plus_q_margin: float       # exp(tau(y-1/y)/2) - (P+Q)
    p_minus_q_margin: float      # exp(-tau(y-1/y)/2) - (P-Q)
    p_plus_q: float              # must be >= 0
    diff_margin: float           # 1 - (P^2 - Q^2)
    passed: bool


@dataclass
class Theorem3Report:
    K: int
    tau: float
    rows: list
    tol: float = 1e-12

    @property
    def passed(self):
        return all(r.passed for r in self.rows)

    @property
    def min_diff_margin(self):
        return min(r.diff_margin for r in self.rows)

    def worst(self):
        return {
            "first": min(r.p_plus_q_margin for r in self.rows),
            "second": min(r.p_minus_q_margin for r in self.rows),
            "third": min(r.p_plus_q for r in self.rows),
            "product": self.min_diff_margin,
        }


def _y_form(K, bessel, y):
    """P_K and Q_K at x = (y + 1/y)/2 written as powers of y."""
    P = bessel[0] + mpmath.fsum(bessel[2 * m] * (y ** (2 * m) + y ** (-2 * m)) for m in range(1, K // 2 + 1))
    Q = mpmath.fsum(bessel[2 * m + 1] * (y ** (2 * m + 1) - y ** (-(2 * m + 1))) for m in range(K // 2 + 1))
    return P, Q


def _check_theorem3_preconditions(K, tau):
    if K < 2 or K % 2:
        raise InputError(f"K must be an even integer >= 2, got {K}")
    if not 0 <= tau <= K:
        raise InputError(f"need 0 <= tau <= K, got tau={tau}, K={K}")


def check_theorem3(K, tau, y_grid, tol=1e-12):
    """Evaluate the three sufficient inequalities and P_K^2 - Q_K^2 <= 1 on a grid of y >= 1.

    Arithmetic is carried out with enough mpmath digits to resolve the
    cancellation between y^K-sized terms.
    """
    _check_theorem3_preconditions(K, tau)
    y_grid = [float(y) for y in np.atleast_1d(y_grid)]
    if any(y < 1 for y in y_grid):
        raise InputError("all y must be >= 1")
    ymax = max(y_grid)
    dps = EXTENDED_DPS + int(math.ceil((K + 2) * math.log10(ymax))) + 10
    rows = []
    with mpmath.workdps(dps):
        bessel = _bessel_extended(K + 1, mpmath.mpf(tau))
        for y in y_grid:
            ym = mpmath.mpf(y)
            P, Q = _y_form(K, bessel, ym)
            half = mpmath.mpf(tau) * (ym - 1 / ym) / 2
            up, down = mpmath.exp(half), mpmath.exp(-half)
            m1 = up - (P + Q)
            m2 = down - (P - Q)
            m4 = 1 - (P * P - Q * Q)
            ok = (m1 >= -tol * up and m2 >= -tol * max(1, abs(P - Q))
                  and P + Q >= -tol and m4 >= -tol)
            rows.append(Theorem3Row(float(y), float(m1), float(m2), float(P + Q), float(m4), bool(ok)))
    return Theorem3Report(K=K, tau=float(tau), rows=rows, tol=tol)


def appendix_constants(K):
    """(J_{K+1}(K+1), e^{K/2}/(K+1)!), the two constants bounding the truncated tail."""
    with mpmath.workdps(30):
        j = mpmath.besselj(K + 1, K + 1)
        c = mpmath.exp(mpmath.mpf(K) / 2) / mpmath.factorial(K + 1)
        return float(j), float(c)


def appendix_tail_bound(K, tau, y, extra=80):
    """Left and right sides of the combined tail bound

        sum_{m=K+2}^{K+extra} J_m(tau) [y^m + (-y)^{-m}]
            <= (e^{K/2}/(K+1)! + J_{K+1}(K+1)) e^{tau(y-1/y)/2}.
    """
    _check_theorem3_preconditions(K, tau)
    M = K + extra
    dps = EXTENDED_DPS + int(math.ceil(M * math.log10(max(y, 1.0)))) + 10
    with mpmath.workdps(dps):
        bessel = _bessel_extended(M, mpmath.mpf(tau))
        ym = mpmath.mpf(y)
        lhs = mpmath.fsum(bessel[m] * (ym**m + (-ym) ** (-m)) for m in range(K + 2, M + 1))
        jk, ck = appendix_constants(K)
        rhs = (mpmath.mpf(ck) + mpmath.mpf(jk)) * mpmath.exp(mpmath.mpf(tau) * (ym - 1 / ym) / 2)
        return float(lhs), float(rhs)

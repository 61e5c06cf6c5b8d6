"""Aberth-Ehrlich simultaneous root finding for Chebyshev series.

Works on coefficient vectors of sum_k a_k T_k(s), in double or mpmath
arithmetic, and never converts to the monomial basis.
"""
import mpmath
import numpy as np
from numpy.polynomial import chebyshev as cheb

from ._precision import is_extended
from .poly import chebval_any
from .errors import InputError, NumericError

MAX_ITER = 500


def _clenshaw_with_derivative(a, s, da=None):
    """Values and first derivatives of the Chebyshev series ``a`` at points ``s``."""
    if da is None:
        da = cheb.chebder(a)
    return chebval_any(s, a), chebval_any(s, da)


def _error_bound(a_abs, s, eps):
    """Rounding-level bound on |g(s)|: a few ulps times sum |a_k| rho^k."""
    rho = np.abs(s + np.sqrt(s * s - 1 + 0j)) if not is_extended(s) else np.array(
        [abs(v + mpmath.sqrt(v * v - 1)) for v in s], dtype=object)
    rho = np.maximum(rho, 1 / rho) if not is_extended(s) else np.array([max(r, 1 / r) for r in rho], dtype=object)
    acc = 0 * rho
    for c in a_abs[::-1]:
        acc = acc * rho + c
    return 8 * len(a_abs) * eps * acc


def _initial_guesses(n, extended):
    """Points on a slightly inflated ellipse around [-1, 1], rotated off the real axis."""
    k = np.arange(n)
    ang = 2 * np.pi * (k + 0.25) / n + 0.4
    guesses = 1.3 * np.cos(ang) + 0.9j * np.sin(ang)
    if extended:
        return np.array([mpmath.mpc(g) for g in guesses], dtype=object)
    return guesses


def aberth_cheb(a, roots0=None, tol=None, max_iter=MAX_ITER):
    """All roots of the Chebyshev series ``a`` (length n+1, a[-1] != 0).

    Returns the roots and the number of iterations used. Roots that have
    reached the rounding-level bound of |g| are frozen; the iteration stops
    once every root is frozen or its last correction is below ``tol``
    relative to its magnitude.
    """
    a = np.asarray(a)
    extended = is_extended(a)
    if not extended:
        a = a.astype(np.complex128)
    n = len(a) - 1
    if n < 1:
        return (np.array([], dtype=object) if extended else np.array([], dtype=complex)), 0
    if abs(a[-1]) == 0:
        raise InputError("leading Chebyshev coefficient is zero")
    eps = mpmath.mpf(2) ** (-mpmath.mp.prec) if extended else np.finfo(float).eps
    if tol is None:
        tol = 64 * eps
    a_abs = np.array([abs(c) for c in a], dtype=object) if extended else np.abs(a)
    z = _initial_guesses(n, extended) if roots0 is None else np.array(roots0, dtype=object if extended else complex)
    active = np.ones(n, dtype=bool)
    da = cheb.chebder(a)
    for it in range(1, max_iter + 1):
        idx = np.nonzero(active)[0]
        g, dg = _clenshaw_with_derivative(a, z[idx], da)
        bound = _error_bound(a_abs, z[idx], eps)
        small = np.array([abs(v) <= b for v, b in zip(g, bound)], dtype=bool)
        corr = np.zeros(len(idx), dtype=object if extended else complex)
        for pos, i in enumerate(idx):
            if small[pos]:
                continue
            diff = z[i] - np.delete(z, i)
            ratio = g[pos] / dg[pos] if dg[pos] != 0 else g[pos]
            denom = 1 - ratio * np.sum(1 / diff)
            corr[pos] = ratio / denom if denom != 0 else ratio
        z[idx] = z[idx] - corr
        mags = np.array([abs(c) for c in corr], dtype=object) if extended else np.abs(corr)
        zmag = np.array([abs(v) for v in z[idx]], dtype=object) if extended else np.abs(z[idx])
        done = small | np.array([m <= tol * (1 + zm) for m, zm in zip(mags, zmag)], dtype=bool)
        active[idx[done]] = False
        if not active.any():
            return z, it
    raise NumericError(f"Aberth iteration did not converge in {max_iter} iterations")


def newton_polish(a, roots, steps=2):
    """A few Newton steps per root, each kept only if it lowers |g|."""
    roots = roots.copy()
    da = cheb.chebder(a)
    for _ in range(steps):
        g, dg = _clenshaw_with_derivative(a, roots, da)
        for i in range(len(roots)):
            if dg[i] == 0:
                continue
            cand = roots[i] - g[i] / dg[i]
            if abs(chebval_any(cand, a)) < abs(g[i]):
                roots[i] = cand
    return roots


def cluster_roots(roots, radius=1e-7):
    """Group roots closer than ``radius`` (relative); returns [(mean, multiplicity)]."""
    remaining = list(range(len(roots)))
    clusters = []
    while remaining:
        i = remaining.pop(0)
        members = [i]
        for j in list(remaining):
            if abs(roots[j] - roots[i]) <= radius * (1 + abs(roots[i])):
                members.append(j)
                remaining.remove(j)
        mean = sum(roots[m] for m in members) / len(members)
        clusters.append((mean, len(members)))
    return clusters

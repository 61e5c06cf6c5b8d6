"""Laurent polynomials on the unit circle and real polynomials in x = cos(theta).

``LaurentPoly`` stores the coefficients of z^min_power ... z^max_power.
``RealPoly`` stores coefficients in the Chebyshev-T basis; with
x = (z + 1/z)/2 a Chebyshev series maps one-to-one onto a Laurent
polynomial with symmetric coefficients, which keeps every conversion free
of the cancellation that the monomial basis suffers at high degree.
"""
import numpy as np
from numpy.polynomial import chebyshev as cheb

from ._precision import DOUBLE, as_complex, as_real, is_extended, precision_of
from .errors import InputError

#: coefficients at or below this are structural zeros
TRIM_TOL = 1e-300
#: relative size below which off-parity coefficients count as absent
PARITY_TOL = 1e-12

EVEN, ODD, MIXED = "even", "odd", "mixed"


def _abs(arr):
    return np.array([abs(v) for v in arr], dtype=object) if is_extended(arr) else np.abs(arr)


def _maxabs(arr):
    if len(arr) == 0:
        return 0.0
    return max(abs(v) for v in arr) if is_extended(arr) else float(np.max(np.abs(arr)))


def _conj(arr):
    return np.array([v.conjugate() for v in arr], dtype=object) if is_extended(arr) else np.conj(arr)


def _parity_of(coeffs, first_power, tol):
    """Parity of a coefficient run whose first entry multiplies power ``first_power``."""
    scale = _maxabs(coeffs)
    if scale == 0:
        return EVEN
    mags = _abs(coeffs)
    even_first = first_power % 2 == 0
    even_mass = max(mags[0 if even_first else 1::2], default=0)
    odd_mass = max(mags[1 if even_first else 0::2], default=0)
    if odd_mass <= tol * scale:
        return EVEN
    if even_mass <= tol * scale:
        return ODD
    return MIXED


class LaurentPoly:
    """Complex Laurent polynomial sum_k c_k z^k."""

    __slots__ = ("min_power", "coeffs")

    def __init__(self, coeffs, min_power=0):
        coeffs = np.asarray(coeffs)
        if coeffs.ndim != 1:
            raise InputError("Laurent coefficients must be a 1-d sequence")
        if not is_extended(coeffs):
            coeffs = coeffs.astype(np.complex128)
        mags = _abs(coeffs)
        nz = np.nonzero(mags > TRIM_TOL)[0]
        if len(nz) == 0:
            self.coeffs = coeffs[:1] * 0 if len(coeffs) else np.zeros(1, dtype=np.complex128)
            self.min_power = 0
        else:
            self.coeffs = coeffs[nz[0]: nz[-1] + 1].copy()
            self.min_power = int(min_power) + int(nz[0])

    @classmethod
    def from_dict(cls, terms, precision=DOUBLE):
        if not terms:
            return cls([0.0])
        lo, hi = min(terms), max(terms)
        c = as_complex(np.zeros(hi - lo + 1), precision)
        for k, v in terms.items():
            c[k - lo] = c[k - lo] + v
        return cls(c, lo)

    @classmethod
    def monomial(cls, power, coeff=1.0):
        return cls([coeff], power)

    # -- structure ---------------------------------------------------------
    @property
    def max_power(self):
        return self.min_power + len(self.coeffs) - 1

    @property
    def degree(self):
        return max(abs(self.min_power), abs(self.max_power))

    @property
    def powers(self):
        return np.arange(self.min_power, self.max_power + 1)

    @property
    def precision(self):
        return precision_of(self.coeffs)

    def is_zero(self):
        return _maxabs(self.coeffs) <= TRIM_TOL

    def coeff(self, power):
        i = power - self.min_power
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return 0.0

    def to_dict(self):
        return {int(k): c for k, c in zip(self.powers, self.coeffs)}

    def dense(self, lo, hi):
        """Coefficient vector for powers lo..hi (must cover the support)."""
        if not self.is_zero() and (self.min_power < lo or self.max_power > hi):
            raise InputError(f"support [{self.min_power}, {self.max_power}] exceeds [{lo}, {hi}]")
        out = np.zeros(hi - lo + 1, dtype=self.coeffs.dtype)
        if self.is_zero():
            return out
        i = self.min_power - lo
        out[i: i + len(self.coeffs)] = self.coeffs
        return out

    def parity(self, tol=PARITY_TOL):
        return _parity_of(self.coeffs, self.min_power, tol)

    def has_parity(self, parity, tol=PARITY_TOL):
        """True if the polynomial is zero or has the given parity."""
        if isinstance(parity, int):
            parity = EVEN if parity % 2 == 0 else ODD
        return self.is_zero() or self.parity(tol) == parity

    def astype(self, precision):
        return LaurentPoly(as_complex(self.coeffs, precision), self.min_power)

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, LaurentPoly):
            other = LaurentPoly([other])
        lo = min(self.min_power, other.min_power)
        hi = max(self.max_power, other.max_power)
        return LaurentPoly(self.dense(lo, hi) + other.dense(lo, hi), lo)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly(-self.coeffs, self.min_power)

    def __sub__(self, other):
        return self + (-other if isinstance(other, LaurentPoly) else LaurentPoly([-other]))

    def __mul__(self, other):
        if isinstance(other, LaurentPoly):
            return LaurentPoly(np.convolve(self.coeffs, other.coeffs), self.min_power + other.min_power)
        return LaurentPoly(self.coeffs * other, self.min_power)

    __rmul__ = __mul__

    def shift(self, k):
        """Multiply by z^k."""
        return LaurentPoly(self.coeffs, self.min_power + k)

    def adjoint(self):
        """Conjugate coefficients and negate powers: L^dagger(z) = conj(L(1/conj z))."""
        return LaurentPoly(_conj(self.coeffs)[::-1], -self.max_power)

    def __call__(self, theta):
        return eval_circle(self, theta)

    def __repr__(self):
        terms = ", ".join(f"{k}: {complex(c):.6g}" for k, c in self.to_dict().items())
        return f"LaurentPoly({{{terms}}})"


def eval_circle(l, theta):
    """Evaluate sum_k c_k e^{ik theta} (Horner in e^{i theta} and e^{-i theta})."""
    theta = np.asarray(theta)
    if is_extended(l.coeffs):
        import mpmath

        flat = [eval_z(l, mpmath.expj(t)) for t in np.ravel(theta)]
        out = np.array(flat, dtype=object).reshape(theta.shape)
        return out[()] if out.ndim == 0 else out
    z = np.exp(1j * theta.astype(float))
    return eval_z(l, z)


def eval_z(l, z):
    """Evaluate at arbitrary nonzero complex z."""
    pos = [c for k, c in zip(l.powers, l.coeffs) if k >= 0]
    neg = [c for k, c in zip(l.powers, l.coeffs) if k < 0]
    acc = 0
    lo_pos = max(l.min_power, 0)
    for c in reversed(pos):
        acc = acc * z + c
    total = acc * z**lo_pos if pos else 0
    if neg:
        zinv = 1 / z
        hi_neg = min(l.max_power, -1)
        acc = 0
        for c in neg:  # most negative first
            acc = acc * zinv + c
        total = total + acc * zinv ** (-hi_neg)
    return total


def add(a, b):
    return a + b


def scale(l, s):
    return l * s


def product(a, b):
    return a * b


def adjoint(l):
    return l.adjoint()


def circle_grid(d):
    n = 4 * (d + 1)
    return 2 * np.pi * np.arange(n) / n


def circle_norm_residual(p, q):
    """max over a 4(d+1)-point circle grid of | |P|^2 + |Q|^2 - 1 |."""
    d = max(p.degree, q.degree)
    theta = circle_grid(d)
    # a double-precision check is enough for every tolerance it is compared with
    p, q = p.astype(DOUBLE), q.astype(DOUBLE)
    pv, qv = eval_circle(p, theta), eval_circle(q, theta)
    return float(np.max(np.abs(np.abs(pv) ** 2 + np.abs(qv) ** 2 - 1)))


# -- real polynomials in x ---------------------------------------------------
class RealPoly:
    """Polynomial in x held as Chebyshev-T coefficients ``cheb``."""

    __slots__ = ("cheb",)

    def __init__(self, cheb_coeffs):
        c = np.asarray(cheb_coeffs)
        if c.ndim != 1 or len(c) == 0:
            raise InputError("RealPoly needs a non-empty 1-d coefficient vector")
        if not is_extended(c):
            c = c.astype(np.float64)
        mags = _abs(c)
        nz = np.nonzero(mags > TRIM_TOL)[0]
        self.cheb = c[: nz[-1] + 1].copy() if len(nz) else c[:1] * 0

    @classmethod
    def from_monomial(cls, coeffs):
        """From monomial coefficients, lowest power first."""
        c = np.asarray(coeffs)
        if is_extended(c):
            return cls(cheb.poly2cheb(c))
        return cls(cheb.poly2cheb(np.asarray(c, dtype=float)))

    @property
    def degree(self):
        return len(self.cheb) - 1

    @property
    def monomial(self):
        """Monomial coefficients, lowest power first (ill-conditioned at high degree)."""
        return cheb.cheb2poly(self.cheb)

    @property
    def leading_coefficient(self):
        """Leading coefficient in the monomial basis."""
        n = self.degree
        return self.cheb[-1] * (2 ** (n - 1) if n >= 1 else 1)

    def parity(self, tol=PARITY_TOL):
        return _parity_of(self.cheb, 0, tol)

    def __call__(self, x):
        return chebval_any(x, self.cheb)

    def __add__(self, other):
        if isinstance(other, RealPoly):
            return RealPoly(cheb.chebadd(self.cheb, other.cheb))
        c = self.cheb.copy()
        c[0] = c[0] + other
        return RealPoly(c)

    __radd__ = __add__

    def __neg__(self):
        return RealPoly(-self.cheb)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, RealPoly):
            return RealPoly(cheb.chebmul(self.cheb, other.cheb))
        return RealPoly(self.cheb * other)

    __rmul__ = __mul__

    def astype(self, precision):
        return RealPoly(as_real(self.cheb, precision))

    def __repr__(self):
        return f"RealPoly(cheb={np.asarray(self.cheb, dtype=float)!r})"


def _clenshaw(a, x):
    b1 = b2 = 0
    x2 = 2 * x
    for c in a[:0:-1]:
        b1, b2 = c + x2 * b1 - b2, b1
    return a[0] + x * b1 - b2


def chebval_any(x, a):
    """Chebyshev series at x; mpmath inputs are evaluated point by point.

    numpy broadcasting of mpmath scalars against arrays goes through slow
    per-call conversions, so the extended path avoids it.
    """
    if not (is_extended(np.asarray(a)) or is_extended(np.asarray(x))):
        return cheb.chebval(x, a)
    if np.ndim(x) == 0:
        return _clenshaw(a, x[()] if isinstance(x, np.ndarray) else x)
    x = np.asarray(x)
    return np.array([_clenshaw(a, v) for v in x.ravel()], dtype=object).reshape(x.shape)


def x_to_laurent(r):
    """Substitute x = (z + 1/z)/2: T_k(x) -> (z^k + z^-k)/2."""
    c = np.asarray(r.cheb if isinstance(r, RealPoly) else r)
    n = len(c) - 1
    if n == 0:
        return LaurentPoly(as_complex(c, precision_of(c)))
    half = c[1:] / 2
    full = np.concatenate([half[::-1], c[:1], half])
    return LaurentPoly(as_complex(full, precision_of(c)), -n)


def laurent_to_real(l, tol=1e-12):
    """Inverse of :func:`x_to_laurent` for a Laurent polynomial with real symmetric coefficients."""
    n = l.degree
    dense = l.dense(-n, n)
    sym_err = _maxabs(dense - dense[::-1])
    scale_ = max(_maxabs(dense), 1e-300)
    imag = max((abs(v.imag) for v in dense), default=0)
    if sym_err > tol * scale_ or imag > tol * scale_:
        raise InputError("Laurent polynomial is not real-symmetric; no polynomial in x represents it")
    if is_extended(dense):
        real = np.array([v.real for v in dense], dtype=object)
    else:
        real = dense.real.copy()
    out = real[n:].copy()
    out[1:] = real[n + 1:] + real[:n][::-1]
    return RealPoly(out)


def chebyshev_T(n, x):
    """T_n(x) by the three-term recurrence."""
    if n < 0:
        raise InputError("n must be >= 0")
    x = np.asarray(x, dtype=float) if not isinstance(x, (np.ndarray,)) or x.dtype != object else x
    t0, t1 = np.ones_like(x), x
    if n == 0:
        return t0
    for _ in range(n - 1):
        t0, t1 = t1, 2 * x * t1 - t0
    return t1


def chebyshev_U(n, x):
    """U_n(x) by the three-term recurrence."""
    if n < 0:
        raise InputError("n must be >= 0")
    x = np.asarray(x, dtype=float) if not isinstance(x, (np.ndarray,)) or x.dtype != object else x
    u0, u1 = np.ones_like(x), 2 * x
    if n == 0:
        return u0
    for _ in range(n - 1):
        u0, u1 = u1, 2 * x * u1 - u0
    return u1


def sample_circle(l, m):
    """Values of ``l`` at the m-th roots of unity e^{2 pi i j/m}."""
    return eval_circle(l, 2 * np.pi * np.arange(m) / m)


def fit_laurent(samples, d):
    """Recover powers -d..d from samples at e^{2 pi i j/M}, j = 0..M-1 (inverse DFT)."""
    samples = np.asarray(samples, dtype=np.complex128)
    m = len(samples)
    if d < 0 or m < 2 * d + 1:
        raise InputError(f"need at least {2 * d + 1} samples for degree {d}, got {m}")
    spectrum = np.fft.fft(samples) / m
    idx = np.arange(-d, d + 1) % m
    return LaurentPoly(spectrum[idx], -d)


def refit_residual(l, samples):
    """max |l(e^{2 pi i j/M}) - samples_j|."""
    samples = np.asarray(samples)
    return float(np.max(np.abs(sample_circle(l, len(samples)) - samples)))

"""Working-precision switch between IEEE double and mpmath arithmetic.

Extended mode keeps numpy containers but with ``dtype=object`` holding
``mpmath.mpf``/``mpc`` scalars, so the same array code runs in both modes.
"""
import cmath
import contextlib
import math

import mpmath
import numpy as np

from .errors import InputError

DOUBLE = "double"
EXTENDED = "extended"
PRECISIONS = (DOUBLE, EXTENDED)

#: decimal digits used in extended mode
EXTENDED_DPS = 40


def check_precision(precision):
    if precision not in PRECISIONS:
        raise InputError(f"precision must be one of {PRECISIONS}, got {precision!r}")
    return precision


def is_extended(arr):
    return isinstance(arr, np.ndarray) and arr.dtype == object


@contextlib.contextmanager
def working_precision(precision):
    """Raise mpmath's working precision for the duration of an extended run."""
    check_precision(precision)
    if precision == EXTENDED and mpmath.mp.dps < EXTENDED_DPS:
        with mpmath.workdps(EXTENDED_DPS):
            yield
    else:
        yield


def as_complex(values, precision=DOUBLE):
    if precision == DOUBLE:
        if is_extended(np.asarray(values)):
            return np.array([complex(v) for v in np.ravel(values)]).reshape(np.shape(values))
        return np.asarray(values, dtype=np.complex128)
    arr = np.asarray(values)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = mpmath.mpc(v)
    return out


def as_real(values, precision=DOUBLE):
    if precision == DOUBLE:
        if is_extended(np.asarray(values)):
            return np.array([float(v) for v in np.ravel(values)]).reshape(np.shape(values))
        return np.asarray(values, dtype=np.float64)
    arr = np.asarray(values)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = mpmath.mpf(v)
    return out


def precision_of(arr):
    return EXTENDED if is_extended(arr) else DOUBLE


class _Ops:
    """Scalar math for one precision."""

    def __init__(self, extended):
        self.extended = extended
        if extended:
            self.pi = mpmath.pi
            self.eps = mpmath.mpf(2) ** (-mpmath.mp.prec)
        else:
            self.pi = math.pi
            self.eps = np.finfo(float).eps

    def real(self, x):
        return mpmath.mpf(x) if self.extended else float(x)

    def complex(self, x):
        return mpmath.mpc(x) if self.extended else complex(x)

    def cos(self, x):
        return mpmath.cos(x) if self.extended else math.cos(x)

    def sin(self, x):
        return mpmath.sin(x) if self.extended else math.sin(x)

    def sqrt(self, x):
        return mpmath.sqrt(x) if self.extended else cmath.sqrt(x) if isinstance(x, complex) else math.sqrt(x)

    def atan2(self, y, x):
        return mpmath.atan2(y, x) if self.extended else math.atan2(y, x)

    def phase(self, z):
        return mpmath.arg(z) if self.extended else cmath.phase(z)

    def expj(self, x):
        """e^{i x} for real x."""
        return mpmath.expj(x) if self.extended else cmath.exp(1j * x)


def ops(precision):
    check_precision(precision)
    return _Ops(precision == EXTENDED)


def ops_for(arr):
    return _Ops(is_extended(arr))

"""Input checks for the estimator API.

sklearn's ``check_array`` refuses complex data, so states and Hamiltonians
are validated here instead.
"""
import numbers

import numpy as np

from .densela import is_hermitian
from .errors import InputError


def check_hermitian_matrix(h, name="H"):
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1] or h.shape[0] == 0:
        raise InputError(f"{name} must be a nonempty square matrix, got shape {h.shape}")
    if not np.issubdtype(h.dtype, np.number):
        raise InputError(f"{name} must be numeric, got dtype {h.dtype}")
    h = h.astype(np.complex128)
    if not np.all(np.isfinite(h)):
        raise InputError(f"{name} has non-finite entries")
    if not is_hermitian(h):
        raise InputError(f"{name} is not Hermitian")
    return h


def check_states(x, dim):
    """2-d array of row state vectors of length ``dim`` (a single 1-d vector is promoted)."""
    x = np.asarray(x)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2:
        raise InputError(f"states must be 1-d or 2-d, got shape {x.shape}")
    if x.shape[1] != dim:
        raise InputError(f"states have {x.shape[1]} components, the fitted system has {dim}")
    if not np.issubdtype(x.dtype, np.number):
        raise InputError(f"states must be numeric, got dtype {x.dtype}")
    x = x.astype(np.complex128)
    if not np.all(np.isfinite(x)):
        raise InputError("states have non-finite entries")
    return x


def check_positive(value, name, upper=None):
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise InputError(f"{name} must be a positive real number, got {value!r}")
    if upper is not None and value >= upper:
        raise InputError(f"{name} must be < {upper}, got {value!r}")
    return float(value)

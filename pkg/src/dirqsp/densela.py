"""Dense complex linear algebra used by the simulator.

Matrices are plain ``numpy`` arrays of ``complex128``. The Hermitian
eigensolver is LAPACK's (via :func:`numpy.linalg.eigh`), which is
deterministic for a fixed input and build.
"""
from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericError

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-12

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class EigDecomp:
    """Eigenvalues in ascending order and orthonormal eigenvectors (columns)."""

    values: np.ndarray
    vectors: np.ndarray


def as_cmatrix(m):
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2:
        raise InputError(f"expected a 2-d matrix, got shape {m.shape}")
    return m


def adjoint(m):
    return np.conj(np.asarray(m)).T


def matmul(a, b):
    a, b = as_cmatrix(a), as_cmatrix(b)
    if a.shape[1] != b.shape[0]:
        raise InputError(f"dimension mismatch: {a.shape} @ {b.shape}")
    return a @ b


def max_abs(m):
    m = np.asarray(m)
    return float(np.max(np.abs(m))) if m.size else 0.0


def hermiticity_residual(h):
    h = as_cmatrix(h)
    return max_abs(h - adjoint(h))


def unitarity_residual(m):
    m = as_cmatrix(m)
    if m.shape[0] != m.shape[1]:
        return np.inf
    return max_abs(adjoint(m) @ m - np.eye(m.shape[0]))


def is_unitary(m, tol=UNITARY_TOL):
    return unitarity_residual(m) <= tol


def is_hermitian(h, tol=HERMITIAN_TOL):
    h = as_cmatrix(h)
    return h.shape[0] == h.shape[1] and hermiticity_residual(h) <= tol * max(1.0, max_abs(h))


def eig_hermitian(h):
    h = as_cmatrix(h)
    if h.shape[0] != h.shape[1]:
        raise InputError(f"Hermitian eigensolver needs a square matrix, got {h.shape}")
    if not is_hermitian(h):
        raise InputError(f"matrix is not Hermitian (residual {hermiticity_residual(h):.3e})")
    # symmetrize so the solver sees an exactly Hermitian input
    h = 0.5 * (h + adjoint(h))
    try:
        values, vectors = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"Hermitian eigensolver did not converge: {exc}") from exc
    return EigDecomp(values=values, vectors=vectors)


def hermitian_function(h, fn):
    """Apply a scalar function through the spectral decomposition of ``h``."""
    eig = eig_hermitian(h)
    vals = fn(eig.values)
    return (eig.vectors * vals) @ adjoint(eig.vectors)


def exp_minus_iht(h, t):
    """The evolution operator exp(-iHt)."""
    return hermitian_function(h, lambda e: np.exp(-1j * e * t))


def spectral_norm(m):
    """Largest singular value, from the spectrum of m^dagger m."""
    m = as_cmatrix(m)
    if m.size == 0:
        return 0.0
    gram = adjoint(m) @ m
    top = eig_hermitian(0.5 * (gram + adjoint(gram))).values[-1]
    return float(np.sqrt(max(top, 0.0)))


def rng(seed):
    """PCG64 generator for an integer seed (or a spawned ``SeedSequence``)."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def spawn_seeds(seed, n):
    """Split one seed into ``n`` independent child seed sequences."""
    return np.random.SeedSequence(seed).spawn(n)


def random_unitary(dim, seed):
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    if dim < 1:
        raise InputError("dim must be >= 1")
    gen = rng(seed)
    z = (gen.standard_normal((dim, dim)) + 1j * gen.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(dim, seed):
    if dim < 1:
        raise InputError("dim must be >= 1")
    gen = rng(seed)
    a = gen.standard_normal((dim, dim)) + 1j * gen.standard_normal((dim, dim))
    return (a + adjoint(a)) / 2


def pauli_string(label):
    """Dense matrix of a Pauli string; the first letter acts on the most significant qubit."""
    out = np.ones((1, 1), dtype=complex)
    for ch in label:
        try:
            out = np.kron(out, PAULI[ch])
        except KeyError:
            raise InputError(f"invalid Pauli letter {ch!r} in {label!r}") from None
    return out

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dirqsp import densela as dl
from dirqsp.errors import InputError

X, Z = dl.PAULI["X"], dl.PAULI["Z"]


def taylor_expm(a, terms=30):
    """Scaling-and-squaring Taylor series, independent of the eigensolver."""
    s = max(0, int(np.ceil(np.log2(max(np.linalg.norm(a, 1), 1e-300)))) + 1)
    b = a / 2**s
    out = np.eye(len(a), dtype=complex)
    term = np.eye(len(a), dtype=complex)
    for k in range(1, terms):
        term = term @ b / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


def power_iteration_norm(m, iters=3000, seed=0):
    v = np.random.default_rng(seed).standard_normal(m.shape[1]) + 0j
    g = dl.adjoint(m) @ m
    for _ in range(iters):
        v = g @ v
        v /= np.linalg.norm(v)
    return np.sqrt(np.real(np.vdot(v, g @ v)))


def test_matmul_identities():
    assert np.array_equal(dl.matmul(np.eye(2), np.eye(2)), np.eye(2))
    assert np.allclose(dl.matmul(X, X), np.eye(2), atol=0)
    a, b = dl.random_unitary(8, 1), dl.random_hermitian(8, 2)
    assert dl.max_abs(dl.adjoint(dl.matmul(a, b)) - dl.matmul(dl.adjoint(b), dl.adjoint(a))) <= 1e-14


def test_matmul_dimension_mismatch():
    with pytest.raises(InputError):
        dl.matmul(np.eye(2), np.eye(3))


def test_eig_known_spectra():
    assert np.allclose(dl.eig_hermitian(Z).values, [-1, 1], atol=1e-15)
    e = dl.eig_hermitian(X)
    assert np.allclose(e.values, [-1, 1], atol=1e-15)
    for k, sign in enumerate((-1, 1)):
        v = e.vectors[:, k]
        target = np.array([1, sign]) / np.sqrt(2)
        assert abs(abs(np.vdot(target, v)) - 1) <= 1e-14


def test_eig_random_residuals():
    h = dl.random_hermitian(16, 7)
    e = dl.eig_hermitian(h)
    assert np.all(np.diff(e.values) >= 0)
    assert dl.max_abs(h @ e.vectors - e.vectors * e.values) <= 1e-11 * dl.spectral_norm(h)
    assert dl.max_abs(dl.adjoint(e.vectors) @ e.vectors - np.eye(16)) <= 1e-12


def test_eig_rejects_non_hermitian():
    with pytest.raises(InputError):
        dl.eig_hermitian(np.array([[0, 1], [0, 0]]))
    with pytest.raises(InputError):
        dl.eig_hermitian(np.ones((2, 3)))


def test_exp_known_cases():
    h = dl.random_hermitian(4, 3)
    assert dl.max_abs(dl.exp_minus_iht(h, 0.0) - np.eye(4)) <= 1e-14
    assert dl.max_abs(dl.exp_minus_iht(Z, np.pi) + np.eye(2)) <= 1e-15


def test_exp_matches_taylor_oracle():
    h = dl.random_hermitian(4, 11)
    u = dl.exp_minus_iht(h, 0.7)
    assert dl.spectral_norm(u - taylor_expm(-0.7j * h)) <= 1e-12
    assert dl.is_unitary(u)


def test_spectral_norm():
    assert abs(dl.spectral_norm(np.eye(4)) - 1) <= 1e-15
    assert abs(dl.spectral_norm(np.diag([3.0, -2.0])) - 3) <= 1e-14
    gen = np.random.default_rng(5)
    m = gen.standard_normal((8, 8)) + 1j * gen.standard_normal((8, 8))
    ref = power_iteration_norm(m)
    assert abs(dl.spectral_norm(m) - ref) <= 1e-8 * ref


def test_random_unitary_and_hermitian():
    u1 = dl.random_unitary(1, 3)
    assert abs(abs(u1[0, 0]) - 1) <= 1e-14
    assert np.array_equal(dl.random_unitary(6, 9), dl.random_unitary(6, 9))
    assert np.array_equal(dl.random_hermitian(6, 9), dl.random_hermitian(6, 9))
    assert dl.is_unitary(dl.random_unitary(16, 2))
    assert dl.hermiticity_residual(dl.random_hermitian(16, 2)) <= 1e-13
    with pytest.raises(InputError):
        dl.random_unitary(0, 1)


def test_spawned_seeds_are_reproducible():
    a = [dl.rng(s).standard_normal(3) for s in dl.spawn_seeds(4, 3)]
    b = [dl.rng(s).standard_normal(3) for s in dl.spawn_seeds(4, 3)]
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not np.array_equal(a[0], a[1])


def test_pauli_string_ordering():
    assert np.array_equal(dl.pauli_string("ZI"), np.kron(Z, np.eye(2)))
    with pytest.raises(InputError):
        dl.pauli_string("XQ")


@given(st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1))
def test_unitarity_closure(s1, s2):
    a, b = dl.random_unitary(4, s1), dl.random_unitary(4, s2)
    assert dl.unitarity_residual(a @ b) <= 2e-12
    assert dl.unitarity_residual(dl.adjoint(a)) <= 1e-12


@given(st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_exp_group_law(seed, t1, t2):
    h = dl.random_hermitian(4, seed)
    lhs = dl.exp_minus_iht(h, t1) @ dl.exp_minus_iht(h, t2)
    assert dl.max_abs(lhs - dl.exp_minus_iht(h, t1 + t2)) <= 1e-11 * max(1.0, dl.spectral_norm(h))


@given(st.integers(0, 2**32 - 1))
def test_spectrum_invariant_under_conjugation(seed):
    h = dl.random_hermitian(6, seed)
    u = dl.random_unitary(6, seed + 1)
    e1 = dl.eig_hermitian(h).values
    e2 = dl.eig_hermitian(u @ h @ dl.adjoint(u)).values
    assert np.max(np.abs(e1 - e2)) <= 1e-11 * max(1.0, np.max(np.abs(e1)))

import numpy as np
import pytest
from sklearn.base import clone

from dirqsp.densela import exp_minus_iht, random_hermitian
from dirqsp.errors import InputError
from dirqsp.estimator import HamiltonianEvolution
from dirqsp.walk import HamiltonianSpec


def test_fit_transform_matches_exact_evolution():
    h = random_hermitian(4, 2)
    est = HamiltonianEvolution(time=0.8, epsilon=1e-8).fit(h)
    X = np.eye(4)[:2]
    out = est.transform(X)
    ref = X @ exp_minus_iht(h, 0.8).T
    assert np.max(np.abs(out - ref)) <= 1e-7
    assert est.n_features_in_ == 4 and est.score() == -est.report_.error_2norm
    assert est.angles_.d == est.report_.K + 1


def test_accepts_spec_and_single_vector():
    spec = HamiltonianSpec.pauli_lcu(1, [("X", 0.5), ("Z", 0.5)])
    est = HamiltonianEvolution(time=1.0).fit(spec)
    assert est.spec_ is spec
    assert est.transform(np.array([1.0, 0.0])).shape == (1, 2)


def test_params_and_clone():
    est = HamiltonianEvolution(time=2.0, epsilon=1e-6)
    assert est.get_params()["time"] == 2.0
    c = clone(est.set_params(enc_scale=1.5))
    assert c.enc_scale == 1.5 and not hasattr(c, "evolution_")


def test_unfitted_and_bad_input():
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        HamiltonianEvolution().transform(np.eye(2))
    with pytest.raises(ValueError):
        HamiltonianEvolution().fit(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        HamiltonianEvolution(epsilon=2.0).fit(np.eye(2))
    est = HamiltonianEvolution().fit(np.diag([1.0, -1.0]))
    with pytest.raises(ValueError):
        est.transform(np.ones((2, 3)))
    with pytest.raises(InputError):
        HamiltonianEvolution(time=100.0).fit(np.diag([1.0, -1.0]))


def test_zero_hamiltonian():
    est = HamiltonianEvolution(time=3.0).fit(np.zeros((2, 2)))
    assert np.max(np.abs(est.evolution_ - np.eye(2))) <= 1e-8

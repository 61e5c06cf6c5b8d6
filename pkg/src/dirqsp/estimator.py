"""scikit-learn style wrapper: fit a Hamiltonian, transform state vectors."""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._precision import check_precision
from ._validation import check_hermitian_matrix, check_positive, check_states
from .densela import spectral_norm
from .pipeline import simulate
from .walk import HamiltonianSpec


class HamiltonianEvolution(TransformerMixin, BaseEstimator):
    """Approximate exp(-iHt) with the directional QSP circuit.

    Parameters
    ----------
    time : float
        Evolution time t.
    epsilon : float
        Target accuracy; the fitted operator is within 10 epsilon of exp(-iHt).
    enc_scale : float
        For a plain matrix H the block-encoding normalization is
        ``enc_scale * ||H||`` (ignored when a HamiltonianSpec is passed).
    precision : {"double", "extended"}
    force : bool
        Allow tau above the default cap.

    Attributes
    ----------
    spec_ : HamiltonianSpec
    report_ : SimulationReport
    angles_ : AngleSequence
    evolution_ : ndarray
        The system block of the circuit divided by alpha.
    n_features_in_ : int
        System dimension.
    """

    def __init__(self, time=1.0, epsilon=1e-8, enc_scale=1.2, precision="double", force=False):
        self.time = time
        self.epsilon = epsilon
        self.enc_scale = enc_scale
        self.precision = precision
        self.force = force

    def _spec(self, H):
        if isinstance(H, HamiltonianSpec):
            return H
        h = check_hermitian_matrix(H)
        scale = check_positive(self.enc_scale, "enc_scale")
        if scale < 1 + 1e-6:
            raise ValueError(f"enc_scale must exceed 1, got {scale}")
        norm = spectral_norm(h)
        # a zero Hamiltonian still needs a positive normalization
        return HamiltonianSpec.direct(h, scale * norm if norm > 0 else 1.0)

    def fit(self, H, y=None):
        check_positive(self.epsilon, "epsilon", upper=1)
        check_precision(self.precision)
        if not np.isfinite(self.time):
            raise ValueError(f"time must be finite, got {self.time!r}")
        self.spec_ = self._spec(H)
        result = simulate(self.spec_, float(self.time), float(self.epsilon), precision=self.precision,
                          force=self.force)
        self.report_ = result.report
        self.angles_ = result.angles
        self.walk_ = result.walk
        sys = result.walk.sys_dim
        self.evolution_ = result.block[:sys, :sys] / result.report.alpha
        self.n_features_in_ = sys
        return self

    def transform(self, X):
        """Evolve each row of X (a state vector)."""
        check_is_fitted(self, "evolution_")
        X = check_states(X, self.n_features_in_)
        return X @ self.evolution_.T

    def score(self, X=None, y=None):
        """Negative operator-norm error against the exact evolution."""
        check_is_fitted(self, "evolution_")
        return -self.report_.error_2norm

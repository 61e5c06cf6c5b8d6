"""Hamiltonian specifications, self-inverse block encodings and the walk operator.

Index order is (encoding ancilla) (x) (system) with the ancilla most
significant, so ``v[:sys_dim, :sys_dim]`` is the encoded block H/lambda.
The walk operator is u = i (2|0><0| (x) I - I) v; its restriction to the
plane spanned by |0>|psi_k> and u|0>|psi_k> has eigenphases
arcsin(E_k/lambda) and pi - arcsin(E_k/lambda).
"""
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .densela import (
    adjoint, as_cmatrix, eig_hermitian, hermitian_function, hermiticity_residual, is_hermitian, max_abs,
    pauli_string, random_hermitian, rng, spectral_norm, unitarity_residual,
)
from .errors import InputError, VerificationFailure

DIRECT = "direct"
PAULI_LCU = "pauli_lcu"
VARIANTS = (DIRECT, PAULI_LCU)

NORM_MARGIN = 1e-6
ENCODING_TOL = 1e-11
SPECTRUM_MARGIN = 1e-8
SPECTRUM_TOL = 1e-10


@dataclass
class HamiltonianSpec:
    """Either a dense Hermitian matrix with its normalization, or a weighted sum of Pauli strings."""

    variant: str
    matrix: np.ndarray = None
    enc_lambda: float = None
    n_qubits: int = None
    terms: list = field(default_factory=list)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InputError(f"unknown Hamiltonian variant {self.variant!r}; expected one of {VARIANTS}")
        if self.variant == DIRECT:
            self._check_direct()
        else:
            self._check_pauli()

    def _check_direct(self):
        if self.matrix is None or self.enc_lambda is None:
            raise InputError("direct variant needs 'matrix' and 'enc_lambda'")
        m = as_cmatrix(self.matrix)
        if m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise InputError(f"matrix must be square and nonempty, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InputError("matrix has non-finite entries")
        if not is_hermitian(m):
            raise InputError(f"matrix is not Hermitian (residual {hermiticity_residual(m):.2e})")
        self.matrix = 0.5 * (m + adjoint(m))
        self.enc_lambda = float(self.enc_lambda)
        norm = spectral_norm(self.matrix)
        if not math.isfinite(self.enc_lambda) or self.enc_lambda <= 0 or self.enc_lambda < (1 + NORM_MARGIN) * norm:
            raise InputError(f"enc_lambda = {self.enc_lambda} must be >= (1 + {NORM_MARGIN:g}) * ||H|| = "
                             f"{(1 + NORM_MARGIN) * norm:.6g}")

    def _check_pauli(self):
        if self.n_qubits is None or int(self.n_qubits) < 1:
            raise InputError("pauli_lcu variant needs n_qubits >= 1")
        self.n_qubits = int(self.n_qubits)
        if not self.terms:
            raise InputError("pauli_lcu variant needs at least one term")
        clean = []
        for label, coeff in self.terms:
            if len(label) != self.n_qubits or any(ch not in "IXYZ" for ch in label):
                raise InputError(f"Pauli string {label!r} must have {self.n_qubits} letters from IXYZ")
            if isinstance(coeff, complex) or not math.isfinite(float(coeff)) or float(coeff) == 0:
                raise InputError(f"coefficient of {label!r} must be real, finite and nonzero, got {coeff!r}")
            clean.append((label, float(coeff)))
        self.terms = clean
        self.enc_lambda = float(sum(abs(c) for _, c in clean))

    # -- constructors ------------------------------------------------------------
    @classmethod
    def direct(cls, matrix, enc_lambda):
        return cls(DIRECT, matrix=matrix, enc_lambda=enc_lambda)

    @classmethod
    def pauli_lcu(cls, n_qubits, terms):
        return cls(PAULI_LCU, n_qubits=n_qubits, terms=list(terms))

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise InputError("Hamiltonian spec must be a JSON object")
        variant = data.get("variant")
        try:
            if variant == DIRECT:
                mat = data["matrix"]
                dim = int(mat["dim"])
                re = np.asarray(mat["re"], dtype=float)
                im = np.asarray(mat.get("im", [0.0] * dim * dim), dtype=float)
                if re.size != dim * dim or im.size != dim * dim:
                    raise InputError(f"matrix 're'/'im' must each hold dim^2 = {dim * dim} numbers")
                return cls.direct((re + 1j * im).reshape(dim, dim), data["enc_lambda"])
            if variant == PAULI_LCU:
                terms = [(str(t["pauli"]), t["coeff"]) for t in data["terms"]]
                return cls.pauli_lcu(data["n_qubits"], terms)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"malformed Hamiltonian spec: {exc!r}") from exc
        raise InputError(f"unknown Hamiltonian variant {variant!r}; expected one of {VARIANTS}")

    @classmethod
    def from_json(cls, text):
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise InputError(f"spec is not valid JSON: {exc}") from exc

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                return cls.from_json(fh.read())
        except OSError as exc:
            raise InputError(f"cannot read spec file {path}: {exc}") from exc

    def to_dict(self):
        if self.variant == DIRECT:
            m = self.matrix
            return {"variant": DIRECT, "enc_lambda": self.enc_lambda,
                    "matrix": {"dim": int(m.shape[0]), "re": m.real.ravel().tolist(), "im": m.imag.ravel().tolist()}}
        return {"variant": PAULI_LCU, "n_qubits": self.n_qubits,
                "terms": [{"pauli": p, "coeff": c} for p, c in self.terms]}

    # -- derived ---------------------------------------------------------------
    @property
    def sys_dim(self):
        return self.matrix.shape[0] if self.variant == DIRECT else 2 ** self.n_qubits

    def hamiltonian(self):
        if self.variant == DIRECT:
            return self.matrix.copy()
        return sum(c * pauli_string(p) for p, c in self.terms)


@dataclass
class WalkOperator:
    u: np.ndarray
    v: np.ndarray
    enc_dim: int
    sys_dim: int
    enc_lambda: float
    hamiltonian: np.ndarray = field(repr=False, default=None)

    @property
    def dim(self):
        return self.enc_dim * self.sys_dim

    def reflection(self):
        """2|0><0| (x) I_s - I."""
        r = -np.eye(self.dim, dtype=complex)
        r[: self.sys_dim, : self.sys_dim] = np.eye(self.sys_dim)
        return r

    def encoded_block(self):
        return self.v[: self.sys_dim, : self.sys_dim]

    def u_dagger_via_reflection(self):
        """-i v (2|0><0| (x) I - I): the inverse step with the reflection moved after v."""
        return -1j * self.v @ self.reflection()

    def residuals(self):
        eye = np.eye(self.dim)
        return {
            "self_inverse": max_abs(self.v @ self.v - eye),
            "block_encoding": max_abs(self.encoded_block() - self.hamiltonian / self.enc_lambda),
            "unitarity": unitarity_residual(self.u),
        }

    def check(self, tol=ENCODING_TOL):
        res = self.residuals()
        bad = {k: v for k, v in res.items() if v > tol}
        if bad:
            detail = ", ".join(f"{k} {v:.2e}" for k, v in bad.items())
            raise VerificationFailure(f"walk operator invariants violated: {detail}", stage="encode")
        return res


def _walk_from_v(v, enc_dim, sys_dim, enc_lambda, h):
    w = WalkOperator(u=None, v=v, enc_dim=enc_dim, sys_dim=sys_dim, enc_lambda=enc_lambda, hamiltonian=h)
    w.u = 1j * w.reflection() @ v
    w.check()
    return w


def encode_direct(spec):
    """v = [[A, S], [S, -A]] with A = H/lambda, S = sqrt(I - A^2)."""
    if spec.variant != DIRECT:
        raise InputError("encode_direct needs a direct spec")
    h = spec.matrix
    a = h / spec.enc_lambda
    eig = eig_hermitian(a)
    if np.any(np.abs(eig.values) > 1 + 1e-12):
        raise InputError(f"||H||/enc_lambda = {np.max(np.abs(eig.values)):.6g} > 1; sqrt(I - A^2) is not real")
    s = hermitian_function(a, lambda e: np.sqrt(np.clip(1 - e * e, 0.0, None)))
    n = h.shape[0]
    v = np.zeros((2 * n, 2 * n), dtype=complex)
    v[:n, :n], v[:n, n:], v[n:, :n], v[n:, n:] = a, s, s, -a
    return _walk_from_v(v, 2, n, spec.enc_lambda, h)


def prepare_reflection(amplitudes):
    """Real orthogonal (Householder) map sending e_0 to ``amplitudes`` (unit norm, real)."""
    a = np.asarray(amplitudes, dtype=float)
    e0 = np.zeros_like(a)
    e0[0] = 1.0
    w = a - e0
    nw = w @ w
    if nw < 1e-30:
        return np.eye(len(a))
    return np.eye(len(a)) - 2 * np.outer(w, w) / nw


def encode_pauli_lcu(spec):
    """PREP/SELECT encoding v = (PREP^dagger (x) I) SELECT (PREP (x) I)."""
    if spec.variant != PAULI_LCU:
        raise InputError("encode_pauli_lcu needs a pauli_lcu spec")
    L = len(spec.terms)
    if L == 0:
        raise InputError("no terms to encode")
    enc_dim = 1 << max(0, math.ceil(math.log2(L)))
    sys_dim = spec.sys_dim
    amps = np.zeros(enc_dim)
    amps[:L] = [math.sqrt(abs(c) / spec.enc_lambda) for _, c in spec.terms]
    amps /= np.linalg.norm(amps)
    prep = np.kron(prepare_reflection(amps), np.eye(sys_dim))
    select = np.zeros((enc_dim * sys_dim,) * 2, dtype=complex)
    for j in range(enc_dim):
        block = np.sign(spec.terms[j][1]) * pauli_string(spec.terms[j][0]) if j < L else np.eye(sys_dim)
        select[j * sys_dim:(j + 1) * sys_dim, j * sys_dim:(j + 1) * sys_dim] = block
    v = adjoint(prep) @ select @ prep
    return _walk_from_v(v, enc_dim, sys_dim, spec.enc_lambda, spec.hamiltonian())


def encode(spec):
    return encode_direct(spec) if spec.variant == DIRECT else encode_pauli_lcu(spec)


def directional_controlled(w):
    """|0><0| (x) u + |1><1| (x) u^dagger on control (x) walk space."""
    u = w.u if isinstance(w, WalkOperator) else as_cmatrix(w)
    n = u.shape[0]
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[:n, :n] = u
    out[n:, n:] = adjoint(u)
    return out


# -- spectral check ----------------------------------------------------------------
def _phase_distance(a, b):
    return abs(math.remainder(a - b, 2 * math.pi))


@dataclass
class SpectrumRow:
    energy: float
    expected: tuple
    found: tuple
    error: float
    invariance: float


@dataclass
class WalkSpectrumReport:
    rows: list
    tol: float = SPECTRUM_TOL

    @property
    def max_error(self):
        return max((max(r.error, r.invariance) for r in self.rows), default=0.0)

    @property
    def passed(self):
        return self.max_error <= self.tol


def walk_spectrum_check(w, tol=SPECTRUM_TOL, raise_on_failure=True):
    """Compare the eigenphases of u on each qubitized plane with arcsin(E/lambda), pi - arcsin(E/lambda)."""
    eig = eig_hermitian(w.hamiltonian)
    ratios = eig.values / w.enc_lambda
    if np.any(np.abs(ratios) > 1 - SPECTRUM_MARGIN):
        raise InputError(f"|E|/enc_lambda = {np.max(np.abs(ratios)):.10f} exceeds 1 - {SPECTRUM_MARGIN:g}")
    rows = []
    for energy, psi in zip(eig.values, eig.vectors.T):
        x = np.zeros(w.dim, dtype=complex)
        x[: w.sys_dim] = psi
        y = w.u @ x
        y = y - (np.vdot(x, y)) * x
        basis = np.stack([x, y / np.linalg.norm(y)], axis=1)
        ub = w.u @ basis
        m = adjoint(basis) @ ub
        invariance = max_abs(ub - basis @ m)
        found = sorted(float(np.angle(ev)) for ev in np.linalg.eigvals(m))
        a = math.asin(energy / w.enc_lambda)
        expected = (a, math.pi - a)
        err = min(
            max(_phase_distance(found[0], expected[0]), _phase_distance(found[1], expected[1])),
            max(_phase_distance(found[0], expected[1]), _phase_distance(found[1], expected[0])),
        )
        rows.append(SpectrumRow(float(energy), expected, tuple(found), err, invariance))
    report = WalkSpectrumReport(rows=rows, tol=tol)
    if raise_on_failure and not report.passed:
        raise VerificationFailure(f"walk spectrum mismatch {report.max_error:.2e} > {tol:g}", stage="walk")
    return report


# -- random specs for sweeps ---------------------------------------------------------
def random_direct_spec(seed, n_qubits=2, scale=1.2):
    h = random_hermitian(2 ** n_qubits, seed)
    return HamiltonianSpec.direct(h, scale * spectral_norm(h))


def random_pauli_spec(seed, n_qubits=2, n_terms=None):
    """Random Pauli sum whose spectrum stays inside the arcsin margin (redrawn until it does)."""
    gen = rng(seed)
    while True:
        count = n_terms or int(gen.integers(2, 7))
        labels = ["".join(gen.choice(list("IXYZ"), n_qubits)) for _ in range(count)]
        coeffs = gen.uniform(0.1, 1.0, count) * gen.choice([-1, 1], count)
        spec = HamiltonianSpec.pauli_lcu(n_qubits, list(zip(labels, coeffs)))
        if spectral_norm(spec.hamiltonian()) < (1 - 1e-3) * spec.enc_lambda:
            return spec

"""Angle synthesis and circuits for directionally controlled GQSP.

A layer is ``R(theta, phi) . D(U)`` with D(U) = |0><0| (x) U + |1><1| (x) U^dagger,
and the whole sequence is

    G_d ... G_1 . R(theta_0, phi_0, lambda)

acting on (control qubit) (x) (system), control most significant. With the
phase-modified rotations used here every product has the block form
[[P, -Q^dagger], [Q, P^dagger]] for Laurent polynomials P, Q in U.

Since D(z) = z^{-1} diag(z^2, 1), the sequence is ordinary GQSP in w = z^2
up to a factor z^{-d}; angles are found by peeling layers off the
w-polynomials z^d P(z), z^d Q(z).
"""
import json
import logging
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from ._precision import DOUBLE, EXTENDED, as_complex, check_precision, ops, working_precision
from .densela import adjoint, as_cmatrix, max_abs
from .errors import InputError, NumericError
from .poly import LaurentPoly, circle_norm_residual, fit_laurent

log = logging.getLogger(__name__)

CONVENTION = "appendix-B-modified"
DEGENERATE_TOL = 1e-13
TRUNCATE_TOL = 1e-12
ABORT_TOL = 1e-8
CONSISTENCY_TOL = 1e-10


@dataclass
class AngleSequence:
    """Rotation angles; ``theta[j]``/``phi[j]`` belong to layer j (j = 0 is the initial rotation)."""

    d: int
    theta: np.ndarray
    phi: np.ndarray
    rot_lambda: float
    phase_fix_delta: float = 0.0

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        self.phi = np.asarray(self.phi, dtype=float)
        if len(self.theta) != self.d + 1 or len(self.phi) != self.d + 1:
            raise InputError(f"need d+1 = {self.d + 1} angles, got {len(self.theta)} and {len(self.phi)}")
        if not (np.all(np.isfinite(self.theta)) and np.all(np.isfinite(self.phi))):
            raise InputError("angles must be finite")

    @property
    def final_lambda(self):
        """lambda actually used in the initial rotation."""
        return self.rot_lambda + self.phase_fix_delta

    def to_dict(self):
        return {
            "d": int(self.d),
            "theta": [float(t) for t in self.theta],
            "phi": [float(p) for p in self.phi],
            "rot_lambda": float(self.rot_lambda),
            "phase_fix_delta": float(self.phase_fix_delta),
            "convention": CONVENTION,
        }

    @classmethod
    def from_dict(cls, data):
        try:
            if data.get("convention", CONVENTION) != CONVENTION:
                raise InputError(f"unsupported angle convention {data['convention']!r}")
            return cls(
                d=int(data["d"]), theta=data["theta"], phi=data["phi"],
                rot_lambda=float(data["rot_lambda"]),
                phase_fix_delta=float(data.get("phase_fix_delta", 0.0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed angle file: {exc}") from exc

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"angle file is not valid JSON: {exc}") from exc
        return cls.from_dict(data)


# -- w-space ---------------------------------------------------------------------
def laurent_to_w(l, d):
    """Coefficients of z^d L(z) as a polynomial in w = z^2; index m holds power 2m - d."""
    if l.degree > d and not l.is_zero():
        raise InputError(f"degree {l.degree} exceeds d = {d}")
    if not l.has_parity(d % 2):
        raise InputError(f"parity {l.parity()} does not match d mod 2 = {d % 2}")
    dense = l.dense(-d, d)
    return dense[0::2].copy()


def w_to_laurent(v, d):
    v = np.asarray(v)
    if len(v) != d + 1:
        raise InputError(f"need {d + 1} w-coefficients, got {len(v)}")
    dense = np.zeros(2 * d + 1, dtype=v.dtype)
    dense[0::2] = v
    return LaurentPoly(dense, -d)


# -- rotations -------------------------------------------------------------------
def rotation(theta, phi, lam=0.0):
    """Unmodified GQSP rotation [[e^{i(l+p)} c, e^{ip} s], [e^{il} s, -c]]."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([
        [np.exp(1j * (lam + phi)) * c, np.exp(1j * phi) * s],
        [np.exp(1j * lam) * s, -c],
    ])


def modified_rotation(theta, phi, lam=0.0):
    """Phase-modified rotation in SU(2) block form; equals i e^{-i(l+p)/2} rotation(theta, phi, l)."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([
        [1j * np.exp(0.5j * (lam + phi)) * c, 1j * np.exp(0.5j * (phi - lam)) * s],
        [1j * np.exp(-0.5j * (phi - lam)) * s, -1j * np.exp(-0.5j * (lam + phi)) * c],
    ])


def _wrap(angle, pi):
    """Map to (-pi, pi]."""
    two_pi = 2 * pi
    a = angle - two_pi * round(float(angle / two_pi))
    if a <= -pi:
        a += two_pi
    elif a > pi:
        a -= two_pi
    return a


# -- synthesis -------------------------------------------------------------------
def _layer_angles(pd, qd, p0, q0, tiny, o):
    """theta, phi that clear the top of Q and the bottom of P for one layer.

    Both the leading pair and the constant pair determine the layer; the
    larger one is used since it carries less relative rounding error.
    """
    lead = max(abs(pd), abs(qd))
    const = max(abs(p0), abs(q0))
    if lead <= tiny and const <= tiny:
        return o.real(0), o.real(0)
    if lead >= const:
        if abs(qd) <= tiny:
            return o.real(0), o.real(0)
        if abs(pd) <= tiny:
            return o.pi / 2, o.real(0)
        return o.atan2(abs(qd), abs(pd)), o.phase(pd) - o.phase(qd)
    if abs(q0) <= tiny:
        return o.pi / 2, o.real(0)
    if abs(p0) <= tiny:
        return o.real(0), o.real(0)
    return o.atan2(abs(p0), abs(q0)), o.phase(p0) - o.phase(q0) - o.pi


def solve_angles(P, Q, d=None, precision=DOUBLE):
    """Angles whose directional sequence has first column (P, Q).

    Parameters
    ----------
    P, Q : LaurentPoly
        Equal-parity Laurent polynomials with |P|^2 + |Q|^2 = 1 on the circle.
    d : int, optional
        Number of directional operations; defaults to the larger degree.
    precision : {"double", "extended"}
        Arithmetic used for the layer peel.
    """
    check_precision(precision)
    if d is None:
        d = max(P.degree, Q.degree)
    resid = circle_norm_residual(P, Q)
    if resid > 1e-8:
        raise InputError(f"|P|^2 + |Q|^2 deviates from 1 by {resid:.2e} on the circle")
    with working_precision(precision):
        o = ops(precision)
        # the zero test shrinks with the unit roundoff of exact inputs; acceptance thresholds do not
        unit = o.eps / np.finfo(float).eps if P.precision == Q.precision == precision != DOUBLE else 1
        p = as_complex(laurent_to_w(P, d), precision)
        q = as_complex(laurent_to_w(Q, d), precision)
        theta = [o.real(0)] * (d + 1)
        phi = [o.real(0)] * (d + 1)
        scale = max(max(abs(v) for v in p), max(abs(v) for v in q))
        tiny = DEGENERATE_TOL * unit * scale
        for j in range(d, 0, -1):
            pd, qd, p0, q0 = p[j], q[j], p[0], q[0]
            consistency = abs(pd * p0.conjugate() + qd * q0.conjugate())
            if consistency > CONSISTENCY_TOL * scale:
                raise NumericError(f"peel step {j}: normalization relation violated by {float(consistency):.2e}",
                                   stage="solve_angles")
            th, ph = _layer_angles(pd, qd, p0, q0, tiny, o)
            c, s, e = o.cos(th), o.sin(th), o.expj(-ph)
            new_p = e * c * p + s * q
            new_q = e * s * p - c * q
            dropped = max(abs(new_p[0]), abs(new_q[-1]))
            if dropped > ABORT_TOL * scale:
                raise NumericError(f"peel step {j}: discarded coefficient {float(dropped):.2e} is not zero",
                                   stage="solve_angles")
            if dropped > TRUNCATE_TOL * scale:
                log.debug("peel step %d truncates %.2e", j, float(dropped))
            p, q = new_p[1:], new_q[:-1]
            theta[j], phi[j] = th, _wrap(ph, o.pi)
        p0, q0 = p[0], q[0]
        theta[0] = o.atan2(abs(q0), abs(p0))
        lam = o.phase(q0) if abs(q0) > tiny else o.real(0)
        phi[0] = _wrap((o.phase(p0) if abs(p0) > tiny else lam) - lam, o.pi)
        total = lam + sum(phi)
        Phi = o.complex(1j) ** (d + 1) * o.expj(-total / 2)
        delta = -2 * o.phase(Phi)
    return AngleSequence(
        d=d, theta=[float(t) for t in theta], phi=[float(f) for f in phi],
        rot_lambda=float(lam), phase_fix_delta=float(delta),
    )


def solve_angles_extended(P, Q, d=None, digits=(40, 80, 160, 320), tol=1e-10):
    """Extended-precision peel with increasing mpmath digits until the round trip is within ``tol``.

    Only helps when (P, Q) themselves carry extended-precision coefficients;
    the peel amplifies any rounding already present in its input.
    Returns ``(angles, dps, error)``.
    """
    import mpmath

    last = None
    for dps in digits:
        with mpmath.workdps(dps):
            try:
                angles = solve_angles(P, Q, d, EXTENDED)
            except NumericError as exc:
                last = exc
                continue
            P_rt, Q_rt = sequence_polys(angles, EXTENDED)
            err = max(coefficient_error(P_rt, P), coefficient_error(Q_rt, Q))
        if err <= tol:
            return angles, dps, err
        last = NumericError(f"round-trip error {err:.2e} at {dps} digits", stage="solve_angles")
    raise last


# -- circuits --------------------------------------------------------------------
def directional(U):
    """|0><0| (x) U + |1><1| (x) U^dagger."""
    U = as_cmatrix(U)
    n = U.shape[0]
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[:n, :n] = U
    out[n:, n:] = adjoint(U)
    return out


@dataclass
class DirectionalCircuit:
    """Ordered gate factors; the circuit unitary is gates[0] @ gates[1] @ ... ."""

    gates: list = field(repr=False)
    d: int
    query_count: int
    corrected: bool = False

    def matrix(self):
        return reduce(np.matmul, self.gates)

    @property
    def dim(self):
        return self.gates[0].shape[0]


def assemble_circuit(angles, U):
    """Gate list [R(theta_d, phi_d) D(U), ..., R(theta_1, phi_1) D(U), R(theta_0, phi_0, lambda + delta)]."""
    U = as_cmatrix(U)
    n = U.shape[0]
    if U.shape[0] != U.shape[1]:
        raise InputError("U must be square")
    eye = np.eye(n)
    D = directional(U)
    gates = []
    for j in range(angles.d, 0, -1):
        gates.append(np.kron(modified_rotation(angles.theta[j], angles.phi[j]), eye) @ D)
    gates.append(np.kron(modified_rotation(angles.theta[0], angles.phi[0], angles.final_lambda), eye))
    return DirectionalCircuit(gates=gates, d=angles.d, query_count=angles.d)


def apply_correction(circuit, U):
    """Wrap with diag(U^dagger, 1) on the left and diag(1, U) on the right."""
    U = as_cmatrix(U)
    n = U.shape[0]
    left = np.eye(2 * n, dtype=complex)
    left[:n, :n] = adjoint(U)
    right = np.eye(2 * n, dtype=complex)
    right[n:, n:] = U
    return DirectionalCircuit(gates=[left, *circuit.gates, right], d=circuit.d,
                              query_count=circuit.query_count + 2, corrected=True)


def extract_plus_block(circuit):
    """(<+| (x) I) W (|+> (x) I)."""
    W = circuit.matrix() if isinstance(circuit, DirectionalCircuit) else np.asarray(circuit)
    n = W.shape[0] // 2
    return (W[:n, :n] + W[:n, n:] + W[n:, :n] + W[n:, n:]) / 2


def eval_unitary(l, U):
    """sum_k c_k U^k for a Laurent polynomial and a unitary U (negative powers via U^dagger)."""
    U = as_cmatrix(U)
    n = U.shape[0]
    out = np.zeros((n, n), dtype=complex)
    Ud = adjoint(U)
    pos = np.eye(n, dtype=complex)
    for k in range(0, max(l.max_power, 0) + 1):
        if k >= l.min_power:
            out += complex(l.coeff(k)) * pos
        pos = pos @ U
    neg = Ud.copy()
    for k in range(-1, min(l.min_power, 0) - 1, -1):
        if k <= l.max_power:
            out += complex(l.coeff(k)) * neg
        neg = neg @ Ud
    return out


# -- scalar sampling and verification ---------------------------------------------
def scalar_response(angles, z):
    """The 2x2 sequence matrix at scalar U = z for each z; shape (len(z), 2, 2)."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    M = np.broadcast_to(modified_rotation(angles.theta[0], angles.phi[0], angles.final_lambda),
                        (len(z), 2, 2)).copy()
    for j in range(1, angles.d + 1):
        R = modified_rotation(angles.theta[j], angles.phi[j])
        # R @ diag(z, 1/z) @ M
        top = z[:, None] * M[:, 0, :]
        bot = M[:, 1, :] / z[:, None]
        M = np.stack([R[0, 0] * top + R[0, 1] * bot, R[1, 0] * top + R[1, 1] * bot], axis=1)
    return M


def _fit_blocks(angles, m=None):
    d = angles.d
    m = m or 2 * d + 2
    z = np.exp(2j * np.pi * np.arange(m) / m)
    M = scalar_response(angles, z)
    return [[fit_laurent(M[:, r, c], d) for c in range(2)] for r in range(2)]


def _rotation_entries(theta, phi, lam, o):
    c, s = o.cos(theta), o.sin(theta)
    i = o.complex(1j)
    return (i * o.expj((lam + phi) / 2) * c, i * o.expj((phi - lam) / 2) * s,
            i * o.expj((lam - phi) / 2) * s, -i * o.expj(-(lam + phi) / 2) * c)


def sequence_polys(angles, precision=DOUBLE):
    """(P, Q) of the sequence by exact coefficient recursion (no sampling).

    In extended mode the angles are taken as exact, which makes this the
    reference forward map for high-degree round trips.
    """
    check_precision(precision)
    with working_precision(precision):
        o = ops(precision)
        d = angles.d
        a, _, c, _ = _rotation_entries(o.real(angles.theta[0]), o.real(angles.phi[0]),
                                       o.real(angles.rot_lambda) + o.real(angles.phase_fix_delta), o)
        # dense coefficients over powers -d..d
        p = as_complex(np.zeros(2 * d + 1), precision)
        q = as_complex(np.zeros(2 * d + 1), precision)
        p[d], q[d] = a, c
        for j in range(1, d + 1):
            r00, r01, r10, r11 = _rotation_entries(o.real(angles.theta[j]), o.real(angles.phi[j]), o.real(0), o)
            zp = np.roll(p, 1)   # z P
            zq = np.roll(q, -1)  # z^{-1} Q
            p, q = r00 * zp + r01 * zq, r10 * zp + r11 * zq
        return LaurentPoly(p, -d), LaurentPoly(q, -d)


def reconstruct(angles):
    """(P, Q) read off the first column of the sequence."""
    blocks = _fit_blocks(angles)
    return blocks[0][0], blocks[1][0]


def coefficient_error(a, b):
    lo = min(a.min_power, b.min_power)
    hi = max(a.max_power, b.max_power)
    return max_abs(a.astype(DOUBLE).dense(lo, hi) - b.astype(DOUBLE).dense(lo, hi))


def reconstruction_error(angles, P, Q):
    """Coefficient-wise max error between the circuit's first column and (P, Q)."""
    P_fit, Q_fit = reconstruct(angles)
    return max(coefficient_error(P_fit, P), coefficient_error(Q_fit, Q))


@dataclass
class BlockStructureReport:
    d: int
    top_right_error: float
    bottom_right_error: float
    parity_ok: bool
    normalization_error: float
    refit_error: float
    tol: float = 1e-11

    @property
    def passed(self):
        return (self.parity_ok and self.top_right_error <= self.tol and self.bottom_right_error <= self.tol
                and self.normalization_error <= self.tol and self.refit_error <= self.tol)


def verify_block_structure(angles, trials=32, seed=0, tol=1e-11):
    """Check the [[P, -Q^dagger], [Q, P^dagger]] form, parity d mod 2 and normalization."""
    d = angles.d
    (tl, tr), (bl, br) = _fit_blocks(angles)
    tr_err = coefficient_error(tr, -bl.adjoint())
    br_err = coefficient_error(br, tl.adjoint())
    parity_ok = all(b.has_parity(d % 2, tol) for b in (tl, tr, bl, br))
    z = np.exp(2j * np.pi * np.random.default_rng(seed).uniform(size=trials))
    M = scalar_response(angles, z)
    from .poly import eval_z

    fitted = np.stack([[eval_z(tl, z), eval_z(tr, z)], [eval_z(bl, z), eval_z(br, z)]]).transpose(2, 0, 1)
    refit = float(np.max(np.abs(fitted - M)))
    norm = float(np.max(np.abs(np.abs(M[:, 0, 0]) ** 2 + np.abs(M[:, 1, 0]) ** 2 - 1)))
    m = 2 * d + 2
    zs = np.exp(2j * np.pi * np.arange(m) / m)
    Ms = scalar_response(angles, zs)
    norm = max(norm, float(np.max(np.abs(np.abs(Ms[:, 0, 0]) ** 2 + np.abs(Ms[:, 1, 0]) ** 2 - 1))))
    return BlockStructureReport(d=d, top_right_error=tr_err, bottom_right_error=br_err, parity_ok=parity_ok,
                                normalization_error=norm, refit_error=refit, tol=tol)


def random_angles(d, seed):
    """Uniformly random angles for tests and verification sweeps."""
    gen = np.random.default_rng(seed)
    return AngleSequence(d=d, theta=gen.uniform(0, np.pi / 2, d + 1), phi=gen.uniform(-np.pi, np.pi, d + 1),
                         rot_lambda=float(gen.uniform(-np.pi, np.pi)))

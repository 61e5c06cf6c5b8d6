"""End-to-end simulation, verification suites and the query-count benchmark."""
import csv
import io
import json
import logging
import math
import time
from dataclasses import dataclass, field

import mpmath
import numpy as np

from ._precision import DOUBLE, EXTENDED, check_precision
from .besseltrunc import (
    EVOLUTION_SIGN, appendix_constants, build_truncated_pair, check_theorem3, choose_k,
)
from .completion import complete, identity_residual
from .densela import exp_minus_iht, spectral_norm
from .errors import DirQSPError, InputError, NumericError, VerificationFailure
from .gqsp import (
    AngleSequence, apply_correction, assemble_circuit, eval_unitary, extract_plus_block, random_angles,
    reconstruction_error, solve_angles, verify_block_structure,
)
from .walk import encode, random_direct_spec, random_pauli_spec, walk_spectrum_check

log = logging.getLogger(__name__)

TAU_CAP = {DOUBLE: 30.0, EXTENDED: 60.0}
#: mpmath digits tried in turn when double-precision synthesis is not accurate enough
DIGIT_LADDER = (40, 80, 160, 320)
RECONSTRUCTION_TOL = 1e-10
ASSUMPTIONS = [
    "directional control |0><0| (x) U + |1><1| (x) U^dagger is counted at the cost of one controlled U",
    "baseline query count 2K+2 is analytic, not simulated",
]


def _stage(name, fn, *args, **kwargs):
    """Run one pipeline stage, tagging library errors with the stage name."""
    try:
        return fn(*args, **kwargs)
    except DirQSPError as exc:
        if exc.stage is None:
            exc.stage = name
        raise


# -- angle synthesis with precision escalation ------------------------------------------
@dataclass
class Synthesis:
    plan: object
    pair: object
    completion: object
    angles: AngleSequence
    reconstruction: float
    precision_used: str

    @property
    def P(self):
        return self.completion.P

    @property
    def Q(self):
        return self.completion.Q


def _attempt(plan, epsilon, sign, dps):
    if dps is None:
        pair = build_truncated_pair(plan, DOUBLE, sign)
        comp = complete(pair, epsilon, DOUBLE, fallback=False)
        angles = solve_angles(comp.P, comp.Q, plan.degree, DOUBLE)
    else:
        with mpmath.workdps(dps):
            pair = build_truncated_pair(plan, EXTENDED, sign)
            comp = complete(pair, epsilon, EXTENDED, fallback=False)
            angles = solve_angles(comp.P, comp.Q, plan.degree, EXTENDED)
    P, Q = comp.to_double()
    return pair, comp, angles, reconstruction_error(angles, P, Q)


def synthesize(tau, epsilon, precision=DOUBLE, sign=EVOLUTION_SIGN, tol=RECONSTRUCTION_TOL):
    """Truncation, completion and angles for e^{-i sign tau sin theta}.

    Double precision is tried first (unless ``precision`` is extended); when
    the completion or the layer peel loses too many digits the whole chain is
    rerun with increasing mpmath precision.
    """
    check_precision(precision)
    plan = _stage("choose_k", choose_k, tau, epsilon)
    ladder = ((None,) if precision == DOUBLE else ()) + DIGIT_LADDER
    last = None
    for dps in ladder:
        label = DOUBLE if dps is None else f"{EXTENDED}:{dps}"
        try:
            pair, comp, angles, recon = _attempt(plan, epsilon, sign, dps)
        except NumericError as exc:
            log.info("synthesis at %s failed: %s", label, exc)
            last = exc
            continue
        if recon <= tol:
            return Synthesis(plan, pair, comp, angles, recon, label)
        log.info("synthesis at %s: reconstruction error %.2e", label, recon)
        last = NumericError(f"reconstruction error {recon:.2e} > {tol:g}", stage="solve_angles")
    raise last


# -- simulate ---------------------------------------------------------------------------
@dataclass
class SimulationReport:
    tau: float
    t: float
    epsilon: float
    seed: int
    K: int
    d: int
    alpha: float
    precision: str
    precision_used: str
    residuals: dict
    error_2norm: float
    error_budget: float
    queries: dict
    assumptions: list = field(default_factory=lambda: list(ASSUMPTIONS))
    timing_ms: dict = field(default_factory=dict)

    def to_dict(self, include_timing=True):
        out = {
            "tau": self.tau, "t": self.t, "epsilon": self.epsilon, "seed": self.seed,
            "K": self.K, "d": self.d, "alpha": self.alpha,
            "precision": self.precision, "precision_used": self.precision_used,
            "residuals": dict(self.residuals), "error_2norm": self.error_2norm,
            "error_budget": self.error_budget, "queries": dict(self.queries), "assumptions": list(self.assumptions),
        }
        if include_timing:
            out["timing_ms"] = dict(self.timing_ms)
        return out

    def to_json(self, include_timing=True):
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=True)


@dataclass
class SimulationResult:
    report: SimulationReport
    synthesis: Synthesis
    walk: object
    block: np.ndarray = field(repr=False)
    evolution: np.ndarray = field(repr=False)

    @property
    def angles(self):
        return self.synthesis.angles


def query_counts(K):
    directional, baseline = K + 3, 2 * K + 2
    return {"directional": directional, "baseline_standard": baseline, "ratio": directional / baseline}


def simulate(spec, t, epsilon, precision=DOUBLE, force=False, tau_cap=None, seed=0):
    """Run the whole pipeline for one Hamiltonian spec and time ``t``.

    ``seed`` only selects the sample points of the completion-identity check.
    """
    check_precision(precision)
    if not (isinstance(t, (int, float)) and math.isfinite(t)):
        raise InputError(f"time must be a finite real number, got {t!r}")
    if not 0 < epsilon < 1:
        raise InputError(f"epsilon must lie in (0, 1), got {epsilon}")
    timing = {}
    clock = time.perf_counter()

    def tick(name):
        nonlocal clock
        now = time.perf_counter()
        timing[name] = round(1000 * (now - clock), 3)
        clock = now

    walk = _stage("encode", encode, spec)
    tick("encode")
    tau = walk.enc_lambda * abs(t)
    cap = TAU_CAP[precision] if tau_cap is None else tau_cap
    if tau > cap and not force:
        raise InputError(f"tau = {tau:.4g} exceeds the {precision} cap {cap:g} (use force to override)",
                         stage="simulate")
    sign = EVOLUTION_SIGN if t >= 0 else -EVOLUTION_SIGN
    syn = synthesize(tau, epsilon, precision, sign)
    tick("synthesis")

    circuit = _stage("assemble_circuit", assemble_circuit, syn.angles, walk.u)
    corrected = _stage("apply_correction", apply_correction, circuit, walk.u)
    block = extract_plus_block(corrected)
    tick("circuit")

    alpha = float(syn.completion.alpha)
    pair = build_truncated_pair(syn.plan, DOUBLE, sign)
    target = alpha * (eval_unitary(pair.p_k, walk.u) + eval_unitary(pair.q_k, walk.u))
    structural = spectral_norm(block - target)
    sys = walk.sys_dim
    exact = exp_minus_iht(walk.hamiltonian, t)
    error = spectral_norm(block[:sys, :sys] / alpha - exact)
    tick("compare")

    x = np.random.default_rng(seed).uniform(-2, 2, 100)
    comp = syn.completion
    residuals = {
        "circle_norm": float(comp.residual),
        "completion": identity_residual(syn.pair, comp.alpha, comp.p_prime, comp.q_prime, x),
        "reconstruction": float(syn.reconstruction),
        "plus_block_structural": float(structural),
    }
    budget = (syn.plan.tail_bound + abs(1 - alpha) + 10 * residuals["circle_norm"]
              + 10 * residuals["reconstruction"] + 1e-12)
    report = SimulationReport(
        tau=float(tau), t=float(t), epsilon=float(epsilon), seed=int(seed), K=syn.plan.K, d=syn.angles.d, alpha=alpha,
        precision=precision, precision_used=syn.precision_used, residuals=residuals,
        error_2norm=float(error), error_budget=float(budget), queries=query_counts(syn.plan.K), timing_ms=timing,
    )
    if structural > 1e-10 * max(1.0, alpha):
        raise VerificationFailure(f"<+| block differs from alpha (P_K + Q_K)(U) by {structural:.2e}",
                                  stage="extract_plus_block")
    if error > budget:
        raise VerificationFailure(f"error {error:.2e} exceeds its budget {budget:.2e}", stage="error_budget")
    if error > 10 * epsilon:
        raise VerificationFailure(f"error {error:.2e} exceeds 10 epsilon = {10 * epsilon:.2e}", stage="compare")
    return SimulationResult(report=report, synthesis=syn, walk=walk, block=block, evolution=exact)


# -- angle files -------------------------------------------------------------------------
def export_angles(angles, path):
    with open(path, "w") as fh:
        fh.write(angles.to_json() + "\n")


def load_angles(path):
    try:
        with open(path) as fh:
            return AngleSequence.from_json(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read angle file {path}: {exc}") from exc


# -- verification suites -----------------------------------------------------------------
SUITES = ("theorem2", "theorem3", "walk", "completion")
THEOREM3_Y = (1.0, 1.01, 1.1, 1.5, 2.0, 4.0)


@dataclass
class SuiteResult:
    name: str
    passed: bool
    checks: int
    worst: dict

    def to_dict(self):
        return {"passed": self.passed, "checks": self.checks, "worst": self.worst}


def verify_theorem2(seed=0, trials=50, degrees=range(1, 13), extra_angles=None):
    seeds = np.random.SeedSequence(seed).generate_state(len(degrees) * trials)
    worst = {"top_right": 0.0, "bottom_right": 0.0, "normalization": 0.0, "refit": 0.0}
    passed, checks = True, 0
    sets = [random_angles(d, int(seeds[i * trials + k])) for i, d in enumerate(degrees) for k in range(trials)]
    if extra_angles is not None:
        sets.append(extra_angles)
    for angles in sets:
        r = verify_block_structure(angles)
        checks += 1
        passed &= r.passed
        worst["top_right"] = max(worst["top_right"], r.top_right_error)
        worst["bottom_right"] = max(worst["bottom_right"], r.bottom_right_error)
        worst["normalization"] = max(worst["normalization"], r.normalization_error)
        worst["refit"] = max(worst["refit"], r.refit_error)
        if not r.parity_ok:
            worst["parity_failures"] = worst.get("parity_failures", 0) + 1
    return SuiteResult("theorem2", bool(passed), checks, worst)


def verify_theorem3(Ks=range(2, 41, 2), y_grid=THEOREM3_Y, tol=1e-12):
    passed, checks = True, 0
    worst = {"first": math.inf, "second": math.inf, "third": math.inf, "product": math.inf,
             "max_J": 0.0, "max_tail_constant": 0.0}
    for K in Ks:
        for tau in (0.0, K / 2, float(K)):
            rep = check_theorem3(K, tau, y_grid, tol)
            checks += len(rep.rows)
            passed &= rep.passed
            for key, val in rep.worst().items():
                worst[key] = min(worst[key], val)
        j, c = appendix_constants(K)
        worst["max_J"] = max(worst["max_J"], j)
        worst["max_tail_constant"] = max(worst["max_tail_constant"], c)
        passed &= j <= 0.32 and c < 0.46
    return SuiteResult("theorem3", bool(passed), checks, worst)


def verify_walk(seed=0, count=10):
    passed, checks, worst = True, 0, {"direct": 0.0, "pauli_lcu": 0.0}
    seeds = np.random.SeedSequence(seed).generate_state(2 * count)
    for k in range(count):
        for name, maker in (("direct", random_direct_spec), ("pauli_lcu", random_pauli_spec)):
            spec = maker(int(seeds[2 * k + (name == "pauli_lcu")]))
            rep = walk_spectrum_check(encode(spec), raise_on_failure=False)
            checks += 1
            passed &= rep.passed
            worst[name] = max(worst[name], rep.max_error)
    return SuiteResult("walk", bool(passed), checks, worst)


def verify_completion(taus=(1, 5, 10, 20), epsilons=(1e-4, 1e-8)):
    passed, checks, worst = True, 0, {"circle_norm": 0.0, "identity": 0.0}
    x = np.random.default_rng(0).uniform(-2, 2, 100)
    for tau in taus:
        for eps in epsilons:
            pair = build_truncated_pair(choose_k(tau, eps))
            comp = complete(pair, eps)
            ident = identity_residual(pair, comp.alpha, comp.p_prime, comp.q_prime, x)
            checks += 1
            passed &= comp.residual <= 1e-9 and ident <= 1e-8
            worst["circle_norm"] = max(worst["circle_norm"], comp.residual)
            worst["identity"] = max(worst["identity"], ident)
    return SuiteResult("completion", bool(passed), checks, worst)


def verify(suite="all", seed=0, angles=None):
    """Run one named suite (or all); returns {name: SuiteResult}."""
    names = SUITES if suite == "all" else (suite,)
    if any(n not in SUITES for n in names):
        raise InputError(f"unknown suite {suite!r}; expected one of {SUITES + ('all',)}")
    out = {}
    for name in names:
        if name == "theorem2":
            out[name] = verify_theorem2(seed, extra_angles=angles)
        elif name == "theorem3":
            out[name] = verify_theorem3()
        elif name == "walk":
            out[name] = verify_walk(seed)
        else:
            out[name] = verify_completion()
    return out


# -- benchmark ---------------------------------------------------------------------------
BENCH_COLUMNS = ("tau", "epsilon", "K", "queries_dir", "queries_std", "ratio")


def bench(tau_list, epsilon_list):
    if not len(tau_list) or not len(epsilon_list):
        raise InputError("bench needs at least one tau and one epsilon")
    rows = []
    for eps in epsilon_list:
        for tau in tau_list:
            K = choose_k(tau, eps).K
            q = query_counts(K)
            rows.append({"tau": tau, "epsilon": eps, "K": K, "queries_dir": q["directional"],
                         "queries_std": q["baseline_standard"], "ratio": q["ratio"]})
    return rows


def bench_csv(rows):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()

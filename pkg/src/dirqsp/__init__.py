"""Hamiltonian simulation with directionally controlled quantum signal processing."""
from .besseltrunc import (
    EVOLUTION_SIGN, TruncatedPair, TruncationPlan, bessel_j, build_truncated_pair, check_theorem3, choose_k,
)
from .completion import CompletionResult, complete
from .errors import DirQSPError, InputError, NumericError, VerificationFailure
from .estimator import HamiltonianEvolution
from .gqsp import (
    AngleSequence, DirectionalCircuit, apply_correction, assemble_circuit, extract_plus_block, solve_angles,
    verify_block_structure,
)
from .pipeline import SimulationReport, bench, simulate, synthesize, verify
from .poly import LaurentPoly, RealPoly
from .walk import HamiltonianSpec, WalkOperator, encode, encode_direct, encode_pauli_lcu, walk_spectrum_check

__version__ = "0.1.0"

__all__ = [
    "AngleSequence", "CompletionResult", "DirQSPError", "DirectionalCircuit", "EVOLUTION_SIGN",
    "HamiltonianEvolution", "HamiltonianSpec", "InputError", "LaurentPoly", "NumericError", "RealPoly",
    "SimulationReport", "TruncatedPair", "TruncationPlan", "VerificationFailure", "WalkOperator",
    "apply_correction", "assemble_circuit", "bench", "bessel_j", "build_truncated_pair", "check_theorem3",
    "choose_k", "complete", "encode", "encode_direct", "encode_pauli_lcu", "extract_plus_block", "simulate",
    "solve_angles", "synthesize", "verify", "verify_block_structure", "walk_spectrum_check",
]

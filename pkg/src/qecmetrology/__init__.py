"""Quantum metrology with error-corrected probes.

Pauli and Clifford algebra, dense density-matrix tools, Pauli-noise channels,
small stabilizer codes, quantum Fisher information and interrogation-time
optimisation, plus end-to-end pipelines that cross-check closed forms against
exact simulation.
"""

__version__ = "0.1.0"

from .pauli import PauliString, CliffordCircuit, CliffordGate, build_block_mapper, conjugate_by_circuit
from .channels import LindbladSpec, PauliChannel
from .codes import CodeSpec, logical_flip_retention, five_qubit_logical_q
from .qfi import qfi_spectral, qfi_dephased_ghz_phase, qfi_depolarized_ghz
from .estimation import optimize_interrogation_time, scaling_sweep, SweepConfig
from .scenario import ScenarioSpec, run_scenario

__all__ = [
    "__version__",
    "PauliString",
    "CliffordCircuit",
    "CliffordGate",
    "build_block_mapper",
    "conjugate_by_circuit",
    "LindbladSpec",
    "PauliChannel",
    "CodeSpec",
    "logical_flip_retention",
    "five_qubit_logical_q",
    "qfi_spectral",
    "qfi_dephased_ghz_phase",
    "qfi_depolarized_ghz",
    "optimize_interrogation_time",
    "scaling_sweep",
    "SweepConfig",
    "ScenarioSpec",
    "run_scenario",
]

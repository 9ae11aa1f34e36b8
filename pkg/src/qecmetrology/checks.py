"""Oracle cross-check suite behind ``qecmetro verify``."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, asdict
from typing import Callable, Sequence

import numpy as np

from .channels import PauliChannel, apply_channel_all, block_hamiltonian
from .codes import (
    CodeSpec,
    encoder_isometry,
    enumerate_corrected_weight,
    five_qubit_logical_q,
    five_qubit_threshold,
    logical_flip_retention,
    syndrome_correct,
)
from .linalg import ghz_state, pure_density
from .pauli import PauliString, verify_scenario2_mapping
from .qfi import qfi_dephased_ghz_phase, qfi_depolarized_ghz, qfi_spectral
from .scenario import ScenarioSpec, inject_and_correct, run_scenario1_dephasing, run_two_qubit_demo

__all__ = ["CheckResult", "CHECKS", "run_checks", "logical_channel_error"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    case: str
    passed: bool
    error: float
    tolerance: float

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))
        object.__setattr__(self, "error", float(self.error))
        object.__setattr__(self, "tolerance", float(self.tolerance))

    def as_dict(self) -> dict:
        return asdict(self)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def _check_mapping(scale: float, ms: Sequence[int] | None) -> list[CheckResult]:
    out = []
    for m in ms or (1, 3, 5):
        rep = verify_scenario2_mapping(m, dense=True)
        err = rep.dense_max_error if rep.dense_max_error is not None else 0.0
        tol = 1e-12 * scale
        ham = [c for c in rep.checks if c.name == "hamiltonian"]
        noise = [c for c in rep.checks if c.name != "hamiltonian"]
        # one row per identity: the coupling image and the fixed noise operators
        for label, group in (("hamiltonian", ham), ("x_noise", noise)):
            ok = all(c.passed for c in group) and err <= tol
            out.append(CheckResult("mapping", f"m={m} {label}", ok, err, tol))
    return out


def logical_channel_error(m: int, p: float) -> float:
    """Max-entry distance between the enumerated logical channel and ``E_z(p_L)``.

    All ``2^m`` phase-flip patterns are pushed through encode, error and
    correction, then projected back to the logical qubit, for each operator
    ``|a><b|`` of the logical basis.
    """
    code = CodeSpec.repetition(m)
    iso = encoder_isometry(code)
    p_l = logical_flip_retention(p, m)
    z_l = np.diag([1.0, -1.0]).astype(complex)
    worst = 0.0
    for a, b in itertools.product(range(2), repeat=2):
        basis = np.zeros((2, 2), dtype=complex)
        basis[a, b] = 1.0
        enc = iso @ basis @ iso.conj().T
        acc = np.zeros_like(enc)
        for pattern in itertools.product((0, 1), repeat=m):
            k = sum(pattern)
            prob = p ** (m - k) * (1 - p) ** k
            err = PauliString.from_letters("".join("Z" if s else "I" for s in pattern))
            src, ph = err.action()
            acc += prob * (ph[:, None] * np.conj(ph)[None, :]) * enc[np.ix_(src, src)]
        acc = syndrome_correct(acc, code)
        dec = iso.conj().T @ acc @ iso
        want = p_l * basis + (1 - p_l) * z_l @ basis @ z_l
        worst = max(worst, float(np.max(np.abs(dec - want))))
    return worst


def _check_logical_channel(scale: float, ms: Sequence[int] | None) -> list[CheckResult]:
    out = []
    for m in ms or (3, 5):
        for p in (0.9, 0.99):
            err = logical_channel_error(m, p)
            tol = 1e-10 * scale
            out.append(CheckResult("logical_channel", f"m={m} p={p}", err <= tol, err, tol))
    return out


def _check_qfi(scale: float, ms) -> list[CheckResult]:
    out = []
    tol = 1e-9 * scale
    for n in (1, 2, 3):
        h = block_hamiltonian(n, 1)
        rho0 = pure_density(ghz_state(n))
        for p in (0.8, 0.95):
            dep = apply_channel_all(rho0, PauliChannel.depolarizing(p))
            e = _rel(qfi_spectral(dep, h).value, qfi_depolarized_ghz(p, n).value)
            out.append(CheckResult("qfi_depolarized", f"N={n} p={p}", e <= tol, e, tol))
            deph = apply_channel_all(rho0, PauliChannel.dephasing(p))
            e = _rel(qfi_spectral(deph, h).value, qfi_dephased_ghz_phase(p, n).value)
            out.append(CheckResult("qfi_dephased", f"N={n} p={p}", e <= tol, e, tol))
    return out


def _check_pipeline(scale: float, ms) -> list[CheckResult]:
    out = []
    tol = 1e-8 * scale
    for m in ms or (1, 3):
        for p in (0.9, 0.99):
            r = run_scenario1_dephasing(ScenarioSpec.with_retention("I", 2, m, p))
            out.append(CheckResult("pipeline_dephasing", f"N=2 m={m} p={p}", r.discrepancy <= tol, r.discrepancy, tol))
    return out


def _check_threshold(scale: float, ms) -> list[CheckResult]:
    out = []
    tol = 1e-12 * scale
    code = CodeSpec.five_qubit()
    for q in (0.8, 0.9, 0.99):
        ch = PauliChannel.depolarizing((4 * q - 1) / 3)
        e = _rel(enumerate_corrected_weight(code, ch, 1), five_qubit_logical_q(q))
        out.append(CheckResult("five_qubit_q_L", f"q={q}", e <= tol, e, tol))
    qs = five_qubit_threshold()
    resid = abs(five_qubit_logical_q(qs) - qs)
    out.append(CheckResult("threshold", f"q*={qs:.15f}", 0.5 < qs < 1 and resid <= tol, resid, tol))
    return out


def _check_demo(scale: float, ms) -> list[CheckResult]:
    code = CodeSpec.two_qubit_demo()
    tol = 1e-12 * scale
    f = inject_and_correct(code, PauliString.from_letters("XI"), (0.6, 0.8))
    out = [CheckResult("demo_injected_x", "fidelity", abs(1 - f) <= tol, abs(1 - f), tol)]
    r = run_two_qubit_demo(ScenarioSpec.with_retention("demo", 2, 2, 0.95, "transversal", noise_qubits="first"))
    e = _rel(r.qfi_oracle.value, 4.0)
    out.append(CheckResult("demo_qfi", "N=2 p=0.95", e <= 1e-8 * scale, e, 1e-8 * scale))
    return out


CHECKS: dict[str, Callable[[float, Sequence[int] | None], list[CheckResult]]] = {
    "mapping": _check_mapping,
    "logical_channel": _check_logical_channel,
    "qfi": _check_qfi,
    "pipeline": _check_pipeline,
    "threshold": _check_threshold,
    "demo": _check_demo,
}


def run_checks(names: Sequence[str] | None = None, *, tolerance_scale: float = 1.0, m: Sequence[int] | None = None):
    """Run the named checks (all by default) and return their results in order."""
    names = list(names or CHECKS)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ValueError(f"unknown checks: {unknown}")
    if not tolerance_scale >= 0 or not math.isfinite(tolerance_scale):
        raise ValueError("tolerance scale must be finite and >= 0")
    results: list[CheckResult] = []
    for n in names:
        results.extend(CHECKS[n](tolerance_scale, m))
    return results

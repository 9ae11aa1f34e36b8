"""End-to-end pipelines on dense density matrices.

Scenario I: blocks encoded in a code whose logical Z is the block
Hamiltonian, local noise, per-block correction.  Scenario II: a single-qubit
Hamiltonian with noise transversal to it, mapped onto scenario I by a
Clifford frame change.  The two-qubit demo is the smallest instance of II.
Encoding and decoding gates are perfect.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Optional

import numpy as np

from .channels import (
    LindbladSpec,
    MasterEquationSpec,
    PauliChannel,
    apply_pauli_channel,
    block_hamiltonian,
    dephasing_flip_probability,
    depolarizing_parameter,
    lindblad_channel,
    trotter_solve,
)
from .codes import (
    CodeKind,
    CodeSpec,
    concatenated_q,
    correct_blocks,
    depolarizing_from_q,
    encode_codewords,
    encoder_isometry,
    logical_flip_retention,
    q_from_depolarizing,
    syndrome_correct,
)
from .linalg import MAX_QUBITS, apply_local_operator, evolve_unitary, pure_density
from .pauli import (
    CliffordCircuit,
    CliffordGate,
    GateKind,
    PauliString,
    build_block_mapper,
    conjugate_by_circuit,
    gate_local_matrix,
    verify_scenario2_mapping,
)
from .qfi import (
    QfiResult,
    qfi_dephased_ghz_phase,
    qfi_depolarized_ghz,
    qfi_from_derivative,
    qfi_spectral,
)

__all__ = [
    "ScenarioKind",
    "ScenarioSpec",
    "ScenarioResult",
    "DEFAULT_THETA",
    "logical_ghz",
    "logical_overlap",
    "frame_circuit",
    "apply_circuit",
    "conjugated_noise",
    "run_scenario1_dephasing",
    "run_scenario1_local_noise",
    "run_scenario2",
    "run_two_qubit_demo",
    "inject_and_correct",
    "run_scenario",
]

DEFAULT_THETA = 0.1


class ScenarioKind(str, enum.Enum):
    I = "I"
    II = "II"
    TWO_QUBIT_DEMO = "demo"


@dataclass(frozen=True)
class ScenarioSpec:
    """One pipeline run.

    ``noise`` acts for time ``t``.  With ``lam`` set the run is in frequency
    mode (``theta = lam * t``, QFI in units of time squared); otherwise the
    phase ``theta`` is used directly.  ``noise_qubits`` is ``"all"`` or
    ``"first"`` (first qubit of every block).
    """

    kind: ScenarioKind
    n_blocks: int
    m: int
    noise: Optional[LindbladSpec] = None
    t: float = 1.0
    theta: float = DEFAULT_THETA
    lam: Optional[float] = None
    code: Optional[CodeSpec] = None
    trotter_steps: int = 20
    noise_qubits: str = "all"

    def __post_init__(self):
        object.__setattr__(self, "kind", ScenarioKind(self.kind))
        if self.n_blocks < 1 or self.m < 1:
            raise ValueError("N and m must be >= 1")
        if self.t < 0:
            raise ValueError("t must be >= 0")
        if self.trotter_steps < 1:
            raise ValueError("trotter_steps must be >= 1")
        if self.noise_qubits not in ("all", "first"):
            raise ValueError(f"noise_qubits must be 'all' or 'first', got {self.noise_qubits!r}")
        if self.code is None:
            if self.kind is ScenarioKind.TWO_QUBIT_DEMO or (self.kind is ScenarioKind.II and self.m == 2):
                code = CodeSpec.two_qubit_demo()
            else:
                code = CodeSpec.repetition(self.m)
            object.__setattr__(self, "code", code)
        if self.code.canonical().block_size != self.m:
            raise ValueError(f"code block size {self.code.canonical().block_size} != m = {self.m}")

    @classmethod
    def with_retention(cls, kind, n_blocks: int, m: int, p: float, noise: str = "dephasing", **kw) -> "ScenarioSpec":
        """Spec whose per-qubit channel over ``t`` (default 1) has retention ``p``.

        ``noise`` is ``dephasing`` or ``transversal`` (``p = (1 + e^(-gamma t))/2``)
        or ``depolarizing`` (``p = e^(-2 gamma t / 3)``).
        """
        t = kw.pop("t", 1.0)
        if noise == "depolarizing":
            if not 0 < p <= 1:
                raise ValueError("depolarizing p must lie in (0, 1]")
            spec = LindbladSpec.depolarizing(-1.5 * math.log(p) / t)
        elif noise in ("dephasing", "transversal"):
            if not 0.5 < p <= 1:
                raise ValueError("retention p must lie in (1/2, 1]")
            gamma = -math.log(2 * p - 1) / t
            spec = LindbladSpec.dephasing(gamma) if noise == "dephasing" else LindbladSpec.transversal(gamma)
        else:
            raise ValueError(f"unknown noise {noise!r}")
        return cls(kind, n_blocks, m, spec, t=t, **kw)

    @property
    def frequency_mode(self) -> bool:
        return self.lam is not None

    @property
    def phase(self) -> float:
        return self.lam * self.t if self.lam is not None else self.theta

    @property
    def n_qubits(self) -> int:
        return self.n_blocks * self.m

    @property
    def gamma(self) -> float:
        return 0.0 if self.noise is None else self.noise.gamma


@dataclass
class ScenarioResult:
    qfi_closed: QfiResult
    qfi_oracle: Optional[QfiResult] = None
    final_state: Optional[np.ndarray] = field(default=None, repr=False)
    metadata: dict = field(default_factory=dict)

    @property
    def discrepancy(self) -> Optional[float]:
        if self.qfi_oracle is None:
            return None
        o = self.qfi_oracle.value
        return abs(self.qfi_closed.value - o) / max(o, np.finfo(float).eps)


def _require_oracle(spec: ScenarioSpec) -> None:
    if spec.n_qubits > MAX_QUBITS:
        raise ValueError(f"N*m = {spec.n_qubits} exceeds the dense limit of {MAX_QUBITS} qubits")


def logical_ghz(code: CodeSpec, n_blocks: int) -> np.ndarray:
    """``(|0_L>^N + |1_L>^N) / sqrt(2)``."""
    zero, one = encode_codewords(code)
    z = reduce(np.kron, [zero] * n_blocks)
    o = reduce(np.kron, [one] * n_blocks)
    return (z + o) / np.sqrt(2)


def logical_overlap(rho: np.ndarray, code: CodeSpec, n_blocks: int) -> float:
    """``tr(P rho)`` with ``P`` the projector onto the ``N``-block code space."""
    iso = encoder_isometry(code)
    proj = iso @ iso.conj().T
    m = code.canonical().block_size
    out = rho
    for b in range(n_blocks):
        out = apply_local_operator(out, proj, range(b * m, (b + 1) * m), side="left")
    return float(np.trace(out).real)


def frame_circuit(code: CodeSpec) -> CliffordCircuit:
    """Block circuit taking the physical frame to the code frame.

    The block mapper first; for repetition codes Hadamards on qubits ``1..m-1``
    follow, turning the ancilla ``X`` letters into ``Z``.
    """
    code = code.canonical()
    m = code.block_size
    circ = build_block_mapper(m)
    if code.kind is CodeKind.REPETITION_PHASE:
        circ = circ + CliffordCircuit(m, tuple(CliffordGate(GateKind.HADAMARD, (j,)) for j in range(1, m)))
    elif code.kind is not CodeKind.TWO_QUBIT_DEMO:
        raise ValueError("scenario II needs a repetition or two-qubit demo code")
    return circ


def apply_circuit(rho: np.ndarray, circuit: CliffordCircuit, offset: int = 0) -> np.ndarray:
    """``U rho U^dagger`` (or ``U psi``) gate by gate on qubits ``offset + targets``."""
    for g in circuit.gates:
        rho = apply_local_operator(rho, gate_local_matrix(g), [offset + q for q in g.targets])
    return rho


def _apply_frames(rho: np.ndarray, circuit: CliffordCircuit, n_blocks: int) -> np.ndarray:
    for b in range(n_blocks):
        rho = apply_circuit(rho, circuit, b * circuit.width)
    return rho


def conjugated_noise(code: CodeSpec, noise_qubits: str = "all") -> tuple[PauliString, tuple[str, ...]]:
    """Code-frame images of the block Hamiltonian ``Z_1`` and of each ``X_j`` noise operator.

    Returns the Hamiltonian image and, per qubit, the single letter its noise
    becomes (``"I"`` for noiseless qubits).
    """
    circ = frame_circuit(code)
    m = circ.width
    h = conjugate_by_circuit(PauliString.single("Z", 0, m), circ)
    letters = []
    for j in range(m):
        if noise_qubits == "first" and j > 0:
            letters.append("I")
            continue
        img = conjugate_by_circuit(PauliString.single("X", j, m), circ)
        if img.weight != 1 or img.letters[j] == "I" or img.sign != 1:
            raise RuntimeError(f"X on qubit {j} does not map to a local Pauli: {img}")
        letters.append(img.letters[j])
    return h, tuple(letters)


def _letter_spec(letter: str, gamma: float) -> Optional[LindbladSpec]:
    if letter == "I" or gamma == 0:
        return None
    return LindbladSpec(gamma, *(1.0 if letter == a else 0.0 for a in "XYZ"))


def run_scenario1_dephasing(spec: ScenarioSpec) -> ScenarioResult:
    """Exact dephasing pipeline with the repetition-phase code."""
    if spec.kind is not ScenarioKind.I:
        raise ValueError("not a scenario I spec")
    if spec.m % 2 == 0:
        raise ValueError("scenario I needs odd m")
    if spec.code.canonical().kind is not CodeKind.REPETITION_PHASE:
        raise ValueError("dephasing pipeline uses the repetition-phase code")
    noise = spec.noise or LindbladSpec.dephasing(0.0)
    if noise.mu_z != 1.0:
        raise ValueError("dephasing pipeline needs pure dephasing noise (mu_z = 1)")
    _require_oracle(spec)
    n, m = spec.n_blocks, spec.m
    h = block_hamiltonian(n, m)
    p = dephasing_flip_probability(noise.gamma, spec.t)
    rho = evolve_unitary(pure_density(logical_ghz(spec.code, n)), h, spec.phase)
    overlap = logical_overlap(rho, spec.code, n)
    if p < 1:
        ch = PauliChannel.dephasing(p)
        for q in range(n * m):
            rho = apply_pauli_channel(rho, ch, q)
    dtheta = spec.t if spec.frequency_mode else 1.0
    before = qfi_spectral(rho, h, dtheta)
    rho = correct_blocks(rho, spec.code, n)
    oracle = qfi_spectral(rho, h, dtheta)
    p_l = logical_flip_retention(p, m)
    closed = qfi_dephased_ghz_phase(p_l, n)
    if spec.frequency_mode:
        closed = QfiResult(closed.value * spec.t**2, closed.method, spec.t)
    meta = {
        "p": p,
        "p_L": p_l,
        "logical_overlap": overlap,
        "qfi_before_correction": before.value,
        "perfect_gates": True,
    }
    return ScenarioResult(closed, oracle, rho, meta)


def run_scenario1_local_noise(spec: ScenarioSpec) -> ScenarioResult:
    """Trotterised pipeline for general local Pauli noise with the five-qubit family.

    The closed form treats the logical channel as depolarizing with
    ``p_L = (4 q_L - 1) / 3``; the oracle differentiates the Trotter map.
    """
    if spec.kind is not ScenarioKind.I:
        raise ValueError("not a scenario I spec")
    code = spec.code.canonical()
    if code.kind not in (CodeKind.FIVE_QUBIT_GRAPH, CodeKind.CONCATENATED):
        raise ValueError("local-noise pipeline needs the five-qubit graph code or a concatenation of it")
    _require_oracle(spec)
    n, m = spec.n_blocks, spec.m
    t = spec.t
    h = block_hamiltonian(n, m)
    noise = spec.noise or LindbladSpec.depolarizing(0.0)
    lam = spec.lam if spec.lam is not None else (spec.theta / t if t > 0 else 0.0)
    me = MasterEquationSpec(h, noise, n * m, lam=lam, n_probes=n)
    rho0 = pure_density(logical_ghz(code, n))
    res = trotter_solve(me, rho0, t, spec.trotter_steps, tangent=True)
    rho = correct_blocks(res.rho, code, n)
    drho = correct_blocks(res.drho, code, n)
    oracle = qfi_from_derivative(rho, drho)
    ch = lindblad_channel(noise, t)
    q = ch.p_i
    levels = 1 if code.kind is CodeKind.FIVE_QUBIT_GRAPH else code.levels
    q_l = concatenated_q(q, levels)
    p_l = max(depolarizing_from_q(q_l), 0.0)
    closed = QfiResult(t * t * qfi_depolarized_ghz(p_l, n).value, "closed_form_depolarizing", t)
    if not spec.frequency_mode:
        # report phase-mode numbers, dividing the time factor back out
        scale = 1.0 / (t * t) if t > 0 else 0.0
        oracle = QfiResult(oracle.value * scale, oracle.method, None, oracle.terms_kept)
        closed = QfiResult(closed.value * scale, closed.method, None)
    gamma = noise.gamma
    meta = {
        "q": q,
        "q_L": q_l,
        "p_L": p_l,
        "depolarizing_equivalent": q == q_from_depolarizing(depolarizing_parameter(gamma, t)) if gamma else True,
        "short_time_parameter": res.metadata["short_time_parameter"],
        "short_time_warning": res.short_time_warning,
        "suggested_t": math.sqrt(0.01 / n) / gamma if gamma > 0 else None,
        "trotter_steps": res.steps,
        "perfect_gates": True,
    }
    return ScenarioResult(closed, oracle, rho, meta)


def _scenario2_core(spec: ScenarioSpec, frame_check: bool):
    code = spec.code.canonical()
    n, m = spec.n_blocks, spec.m
    circ = frame_circuit(code)
    noise = spec.noise or LindbladSpec.transversal(0.0)
    gamma = noise.gamma
    psi_code = logical_ghz(code, n)
    rho0 = _apply_frames(pure_density(psi_code), circ.inverse(), n)
    h_phys = block_hamiltonian(n, m, "Z" + "I" * (m - 1))
    per_qubit = []
    for _ in range(n):
        for j in range(m):
            per_qubit.append(None if (spec.noise_qubits == "first" and j > 0) or gamma == 0 else noise)
    lam = spec.lam if spec.lam is not None else (spec.theta / spec.t if spec.t > 0 else 0.0)
    me = MasterEquationSpec(h_phys, per_qubit, n * m, lam=lam, n_probes=n)
    res = trotter_solve(me, rho0, spec.t, spec.trotter_steps, tangent=True)
    rho = _apply_frames(res.rho, circ, n)
    drho = _apply_frames(res.drho, circ, n)
    meta = {"trotter_steps": res.steps, "short_time_parameter": res.metadata["short_time_parameter"],
            "perfect_gates": True}
    if frame_check:
        h_img, letters = conjugated_noise(code, spec.noise_qubits)
        h_code = tuple((0.5, PauliString.from_letters("I" * (b * m) + h_img.letters + "I" * ((n - b - 1) * m)))
                       for b in range(n))
        noise_code = [_letter_spec(letters[j], gamma) for _ in range(n) for j in range(m)]
        me_code = MasterEquationSpec(h_code, noise_code, n * m, lam=lam, n_probes=n)
        ref = trotter_solve(me_code, pure_density(psi_code), spec.t, spec.trotter_steps)
        meta["code_frame_noise"] = "".join(letters)
        meta["code_frame_hamiltonian"] = h_img.letters
        meta["frame_max_error"] = float(np.max(np.abs(ref.rho - rho)))
    return rho, drho, meta


def run_scenario2(spec: ScenarioSpec, *, frame_check: bool = True) -> ScenarioResult:
    """Transversal-noise pipeline: encode, map to the physical frame, evolve, map back, correct.

    The closed-form entry is the Heisenberg target ``t^2 N^2``; how far the
    oracle falls short of it is the reported discrepancy.
    """
    if spec.kind not in (ScenarioKind.II, ScenarioKind.TWO_QUBIT_DEMO):
        raise ValueError("not a scenario II spec")
    if spec.noise is not None and spec.noise.gamma > 0 and spec.noise.mu_x != 1.0:
        raise ValueError("scenario II needs transversal noise (mu_x = 1)")
    _require_oracle(spec)
    code = spec.code.canonical()
    for mm in {spec.m} & {1, 3, 5}:
        if not verify_scenario2_mapping(mm, dense=False).passed:
            raise RuntimeError("block mapper identities failed")
    rho, drho, meta = _scenario2_core(spec, frame_check)
    rho = correct_blocks(rho, code, spec.n_blocks)
    drho = correct_blocks(drho, code, spec.n_blocks)
    oracle = qfi_from_derivative(rho, drho)
    n, t = spec.n_blocks, spec.t
    closed = QfiResult(float(n * n) * t * t, "heisenberg_target", t)
    if not spec.frequency_mode:
        scale = 1.0 / (t * t) if t > 0 else 0.0
        oracle = QfiResult(oracle.value * scale, oracle.method, None, oracle.terms_kept)
        closed = QfiResult(float(n * n), "heisenberg_target")
    return ScenarioResult(closed, oracle, rho, meta)


def inject_and_correct(code: CodeSpec, error: PauliString, psi_logical=(1.0, 0.0)) -> float:
    """Fidelity of a logical state after ``error`` and one round of correction."""
    zero, one = encode_codewords(code)
    a, b = psi_logical
    psi = a * zero + b * one
    psi = psi / np.linalg.norm(psi)
    rho = pure_density(error.to_matrix() @ psi)
    rho = syndrome_correct(rho, code)
    return float(np.real(psi.conj() @ rho @ psi))


def run_two_qubit_demo(spec: ScenarioSpec) -> ScenarioResult:
    """Two-qubit blocks, noise as a discrete ``X`` channel on each block's first qubit.

    The code frame is reached with the block mapper alone; there the coupling
    acts as ``Z X`` and the noise stays ``X`` on qubit 1, which the code corrects.
    """
    if spec.kind is not ScenarioKind.TWO_QUBIT_DEMO:
        raise ValueError("not a two-qubit demo spec")
    if spec.m != 2:
        raise ValueError("the demo uses blocks of two qubits")
    if spec.noise_qubits != "first":
        raise ValueError("demo noise model acts on the first qubit of each block only")
    if spec.noise is not None and spec.noise.gamma > 0 and spec.noise.mu_x != 1.0:
        raise ValueError("demo noise must be sigma_x")
    if spec.n_blocks > 4:
        raise ValueError("demo is limited to N <= 4")
    n = spec.n_blocks
    code = CodeSpec.two_qubit_demo()
    circ = frame_circuit(code)
    psi_code = logical_ghz(code, n)
    rho = _apply_frames(pure_density(psi_code), circ.inverse(), n)
    rho = evolve_unitary(rho, block_hamiltonian(n, 2, "ZI"), spec.phase)
    p = dephasing_flip_probability(spec.gamma, spec.t)
    if p < 1:
        ch = PauliChannel.bit_flip(p)
        for b in range(n):
            rho = apply_pauli_channel(rho, ch, 2 * b)
    rho = _apply_frames(rho, circ, n)
    rho = correct_blocks(rho, code, n)
    h_code = block_hamiltonian(n, 2, "ZX")
    dtheta = spec.t if spec.frequency_mode else 1.0
    oracle = qfi_spectral(rho, h_code, dtheta)
    closed = QfiResult(float(n * n) * dtheta**2, "heisenberg_target", spec.t if spec.frequency_mode else None)
    target = evolve_unitary(pure_density(psi_code), h_code, spec.phase)
    fidelity = float(np.real(np.vdot(target.reshape(-1), rho.reshape(-1))))
    meta = {"p": p, "logical_fidelity": fidelity, "perfect_gates": True}
    return ScenarioResult(closed, oracle, rho, meta)


def run_scenario(spec: ScenarioSpec) -> ScenarioResult:
    """Dispatch on kind and code."""
    if spec.kind is ScenarioKind.TWO_QUBIT_DEMO:
        return run_two_qubit_demo(spec)
    if spec.kind is ScenarioKind.II:
        return run_scenario2(spec)
    if spec.code.canonical().kind is CodeKind.REPETITION_PHASE:
        return run_scenario1_dephasing(spec)
    return run_scenario1_local_noise(spec)

"""Single-qubit Pauli noise: Lindblad description, induced channels, Trotter solver."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .linalg import conjugate_pauli, evolve_unitary, apply_pauli, n_qubits_of
from .pauli import PauliString

__all__ = [
    "LindbladSpec",
    "PauliChannel",
    "MasterEquationSpec",
    "TrotterResult",
    "dephasing_flip_probability",
    "depolarizing_parameter",
    "lindblad_channel",
    "apply_pauli_channel",
    "apply_channel_all",
    "trotter_solve",
    "block_hamiltonian",
]


@dataclass(frozen=True)
class LindbladSpec:
    """Rate ``gamma`` and Pauli weights of ``L rho = gamma/2 (-rho + sum_a mu_a s_a rho s_a)``."""

    gamma: float
    mu_x: float = 0.0
    mu_y: float = 0.0
    mu_z: float = 1.0

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError("gamma must be >= 0")
        mus = (self.mu_x, self.mu_y, self.mu_z)
        if min(mus) < 0 or abs(sum(mus) - 1.0) > 1e-12:
            raise ValueError(f"noise weights must be >= 0 and sum to 1, got {mus}")

    @classmethod
    def dephasing(cls, gamma: float) -> "LindbladSpec":
        return cls(gamma, 0.0, 0.0, 1.0)

    @classmethod
    def depolarizing(cls, gamma: float) -> "LindbladSpec":
        return cls(gamma, 1 / 3, 1 / 3, 1 / 3)

    @classmethod
    def transversal(cls, gamma: float) -> "LindbladSpec":
        return cls(gamma, 1.0, 0.0, 0.0)

    def decay_rates(self) -> tuple[float, float, float]:
        # each Pauli component decays at gamma times the weight of the anticommuting letters
        g = self.gamma
        return (g * (self.mu_y + self.mu_z), g * (self.mu_x + self.mu_z), g * (self.mu_x + self.mu_y))


@dataclass(frozen=True)
class PauliChannel:
    p_i: float
    p_x: float = 0.0
    p_y: float = 0.0
    p_z: float = 0.0

    def __post_init__(self):
        ps = (self.p_i, self.p_x, self.p_y, self.p_z)
        if min(ps) < -1e-15 or abs(sum(ps) - 1.0) > 1e-12:
            raise ValueError(f"Pauli channel probabilities invalid: {ps}")

    @classmethod
    def dephasing(cls, p: float) -> "PauliChannel":
        """``E_z(p) rho = p rho + (1-p) Z rho Z``."""
        return cls(p, 0.0, 0.0, 1.0 - p)

    @classmethod
    def bit_flip(cls, p: float) -> "PauliChannel":
        return cls(p, 1.0 - p, 0.0, 0.0)

    @classmethod
    def depolarizing(cls, p: float) -> "PauliChannel":
        """``D(p) rho = p rho + (1-p) I/2``."""
        e = (1.0 - p) / 4.0
        return cls(p + e, e, e, e)

    @classmethod
    def from_fidelities(cls, fx: float, fy: float, fz: float) -> "PauliChannel":
        """Channel with Pauli-transfer diagonal ``(1, fx, fy, fz)``."""
        return cls(
            (1 + fx + fy + fz) / 4,
            (1 + fx - fy - fz) / 4,
            (1 - fx + fy - fz) / 4,
            (1 - fx - fy + fz) / 4,
        )

    def items(self):
        return (("I", self.p_i), ("X", self.p_x), ("Y", self.p_y), ("Z", self.p_z))

    @property
    def is_identity(self) -> bool:
        return self.p_i == 1.0


def _check_rate_time(gamma: float, t: float) -> None:
    if gamma < 0 or t < 0:
        raise ValueError("gamma and t must be non-negative")


def dephasing_flip_probability(gamma: float, t: float) -> float:
    """Retention ``p = (1 + exp(-gamma t)) / 2`` of local dephasing."""
    _check_rate_time(gamma, t)
    return 0.5 * (1.0 + math.exp(-gamma * t))


def depolarizing_parameter(gamma: float, t: float) -> float:
    """Depolarizing retention ``p = exp(-2 gamma t / 3)``."""
    _check_rate_time(gamma, t)
    return math.exp(-2.0 * gamma * t / 3.0)


def lindblad_channel(spec: LindbladSpec, duration: float) -> PauliChannel:
    """Exact Pauli channel generated by ``spec`` over ``duration``."""
    if duration < 0:
        raise ValueError("duration must be non-negative")
    fx, fy, fz = (math.exp(-r * duration) for r in spec.decay_rates())
    return PauliChannel.from_fidelities(fx, fy, fz)


def apply_pauli_channel(rho: np.ndarray, ch: PauliChannel, qubit: int) -> np.ndarray:
    """``sum_s p_s s rho s`` with ``s`` acting on ``qubit``."""
    n = n_qubits_of(rho)
    if not 0 <= qubit < n:
        raise ValueError(f"qubit {qubit} out of range for {n} qubits")
    out = ch.p_i * rho
    for letter, prob in ch.items()[1:]:
        if prob:
            out = out + prob * conjugate_pauli(PauliString.single(letter, qubit, n), rho)
    return out


def apply_channel_all(rho: np.ndarray, ch: PauliChannel, qubits: Sequence[int] | None = None) -> np.ndarray:
    n = n_qubits_of(rho)
    for q in range(n) if qubits is None else qubits:
        rho = apply_pauli_channel(rho, ch, q)
    return rho


def block_hamiltonian(n_blocks: int, m: int, letters: str | None = None, coef: float = 0.5):
    """Terms of ``coef * sum_k H_k`` with ``H_k`` acting on block ``k``.

    ``letters`` gives ``H_k`` on one block (default ``Z * m``, the many-body
    block Hamiltonian); for example ``"Z" + "I" * (m - 1)`` is the local one.
    """
    letters = letters or "Z" * m
    if len(letters) != m:
        raise ValueError("block letters must have length m")
    width = n_blocks * m
    terms = []
    for k in range(n_blocks):
        full = "I" * (k * m) + letters + "I" * (width - (k + 1) * m)
        terms.append((coef, PauliString.from_letters(full)))
    return tuple(terms)


@dataclass(frozen=True)
class MasterEquationSpec:
    """``drho/dt = -i lam [H, rho] + sum_j L_j(rho)``.

    ``noise`` is either one :class:`LindbladSpec` shared by every qubit or a
    per-qubit sequence (``None`` entries are noiseless qubits).
    """

    hamiltonian: tuple[tuple[float, PauliString], ...]
    noise: object
    n_qubits: int
    lam: float = 1.0
    n_probes: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "hamiltonian", tuple((float(c), p) for c, p in self.hamiltonian))
        for _, p in self.hamiltonian:
            if p.width != self.n_qubits:
                raise ValueError("Hamiltonian term width does not match n_qubits")
            if not p.is_hermitian:
                raise ValueError("Hamiltonian terms must be Hermitian")
        if isinstance(self.noise, LindbladSpec) or self.noise is None:
            per = (self.noise,) * self.n_qubits
        else:
            per = tuple(self.noise)
            if len(per) != self.n_qubits:
                raise ValueError("per-qubit noise list has wrong length")
        object.__setattr__(self, "noise", per)

    @property
    def max_gamma(self) -> float:
        return max((s.gamma for s in self.noise if s is not None), default=0.0)

    def short_time_parameter(self, t: float) -> float:
        n = self.n_probes if self.n_probes is not None else self.n_qubits
        return (self.max_gamma * t) ** 2 * n


@dataclass
class TrotterResult:
    rho: np.ndarray
    steps: int
    dt: float
    short_time_warning: bool
    drho: Optional[np.ndarray] = None
    metadata: dict = field(default_factory=dict)


SHORT_TIME_LIMIT = 0.01


def _commutator_term(terms, sigma: np.ndarray) -> np.ndarray:
    # -i [H, sigma]
    out = np.zeros_like(sigma)
    for c, p in terms:
        ps = apply_pauli(p, sigma)
        sp = apply_pauli(p, sigma.conj().T).conj().T
        out += c * (ps - sp)
    return -1j * out


def trotter_solve(
    spec: MasterEquationSpec, rho0: np.ndarray, t: float, steps: int, *, tangent: bool = False
) -> TrotterResult:
    """First-order Lie-Trotter solution of the master equation.

    Each step applies ``exp(-i lam H dt)`` and then, qubit by qubit, the exact
    Pauli channel of the local Lindbladian over ``dt``.  With ``tangent=True``
    the derivative ``d rho / d lam`` is propagated alongside, exactly for the
    discretised map.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if t < 0:
        raise ValueError("t must be non-negative")
    if n_qubits_of(rho0) != spec.n_qubits:
        raise ValueError("initial state does not match n_qubits")
    dt = t / steps
    channels = [None if s is None or s.gamma == 0 else lindblad_channel(s, dt) for s in spec.noise]
    rho = np.array(rho0, dtype=complex)
    drho = np.zeros_like(rho) if tangent else None
    terms = spec.hamiltonian
    theta = spec.lam * dt
    for _ in range(steps):
        if terms:
            rho = evolve_unitary(rho, terms, theta)
            if tangent:
                drho = evolve_unitary(drho, terms, theta) + dt * _commutator_term(terms, rho)
        for q, ch in enumerate(channels):
            if ch is None:
                continue
            rho = apply_pauli_channel(rho, ch, q)
            if tangent:
                drho = apply_pauli_channel(drho, ch, q)
    param = spec.short_time_parameter(t)
    return TrotterResult(
        rho=rho,
        steps=steps,
        dt=dt,
        short_time_warning=param > SHORT_TIME_LIMIT,
        drho=drho,
        metadata={"splitting": "lie", "order": 1, "short_time_parameter": param},
    )

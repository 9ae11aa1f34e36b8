"""Phase-tracked Pauli strings and their conjugation by small Clifford circuits.

A Pauli string on ``n`` qubits is stored symplectically: an x-bitmask, a
z-bitmask and a phase exponent ``k`` so that the operator is
``i**k * L_0 (x) L_1 (x) ... (x) L_{n-1}`` with ``L_q`` in {I, X, Y, Z}
given by the bit pair ``(x_q, z_q)``.  Qubit ``q`` lives in bit ``q`` of
the masks; in dense matrices qubit 0 is the leftmost tensor factor.

The gate set is {Hadamard, ControlledPhase, ControlledX}.  ``ControlledX``
follows the definition ``CX = (Had (x) Had) CP (Had (x) Had)``; this gate
is diagonal in the X basis and symmetric in its two qubits, so it fixes
every ``X_j`` and sends ``Z_a -> Z_a X_b``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

__all__ = [
    "PauliString",
    "GateKind",
    "CliffordGate",
    "CliffordCircuit",
    "MappingCheck",
    "MappingReport",
    "pauli_multiply",
    "conjugate_by_circuit",
    "build_block_mapper",
    "verify_scenario2_mapping",
    "gate_matrix",
    "gate_local_matrix",
    "circuit_matrix",
    "parse_circuit",
    "format_circuit",
]

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_BITS_LETTER = {v: k for k, v in _LETTER_BITS.items()}
_PHASE_TEXT = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_TEXT_PHASE = {"+": 0, "": 0, "+i": 1, "i": 1, "-": 2, "-i": 3}

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class PauliString:
    """Immutable phase-tracked Pauli string.

    Build one from text with :meth:`from_str` (``"+ZXX"``, ``"-iYI"``) or from
    letters with :meth:`from_letters`.
    """

    x: int
    z: int
    width: int
    phase: int = 0

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("PauliString width must be >= 1")
        limit = 1 << self.width
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise ValueError("bitmask exceeds string width")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def from_letters(cls, letters: str, phase: int = 0) -> "PauliString":
        x = z = 0
        for q, ch in enumerate(letters.upper()):
            if ch not in _LETTER_BITS:
                raise ValueError(f"unknown Pauli letter {ch!r}")
            xb, zb = _LETTER_BITS[ch]
            x |= xb << q
            z |= zb << q
        return cls(x, z, len(letters), phase)

    @classmethod
    def from_str(cls, text: str) -> "PauliString":
        text = text.strip()
        i = 0
        while i < len(text) and text[i] in "+-i":
            i += 1
        prefix, letters = text[:i], text[i:]
        if prefix not in _TEXT_PHASE or not letters:
            raise ValueError(f"cannot parse Pauli string {text!r}")
        return cls.from_letters(letters, _TEXT_PHASE[prefix])

    @classmethod
    def identity(cls, width: int) -> "PauliString":
        return cls(0, 0, width)

    @classmethod
    def single(cls, letter: str, qubit: int, width: int) -> "PauliString":
        if not 0 <= qubit < width:
            raise ValueError(f"qubit {qubit} outside width {width}")
        xb, zb = _LETTER_BITS[letter.upper()]
        return cls(xb << qubit, zb << qubit, width)

    @property
    def letters(self) -> str:
        return "".join(
            _BITS_LETTER[((self.x >> q) & 1, (self.z >> q) & 1)] for q in range(self.width)
        )

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    @property
    def is_hermitian(self) -> bool:
        return self.phase in (0, 2)

    @property
    def is_diagonal(self) -> bool:
        return self.x == 0

    @property
    def sign(self) -> complex:
        return 1j ** self.phase

    def support(self) -> tuple[int, ...]:
        mask = self.x | self.z
        return tuple(q for q in range(self.width) if (mask >> q) & 1)

    def without_phase(self) -> "PauliString":
        return PauliString(self.x, self.z, self.width, 0)

    def inverse(self) -> "PauliString":
        # letters are involutions; only the phase needs undoing
        return PauliString(self.x, self.z, self.width, -self.phase)

    def commutes_with(self, other: "PauliString") -> bool:
        _check_width(self, other)
        return (_popcount(self.x & other.z) + _popcount(self.z & other.x)) % 2 == 0

    def __mul__(self, other: "PauliString") -> "PauliString":
        return pauli_multiply(self, other)

    def __neg__(self) -> "PauliString":
        return PauliString(self.x, self.z, self.width, self.phase + 2)

    def __str__(self) -> str:
        return _PHASE_TEXT[self.phase] + self.letters

    def to_matrix(self) -> np.ndarray:
        """Dense ``2**n x 2**n`` matrix (kron ordering, qubit 0 leftmost)."""
        mats = [_SINGLE[ch] for ch in self.letters]
        return self.sign * reduce(np.kron, mats)

    def action(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(src, phases)`` with ``P|src[i]> = phases[i] |i>`` in basis-index form.

        The dense matrix is ``P[i, src[i]] = phases[i]``.  This avoids
        building ``2**n x 2**n`` matrices when applying the string.
        """
        n = self.width
        idx = np.arange(1 << n)
        xi = _mask_to_index(self.x, n)
        zi = _mask_to_index(self.z, n)
        src = idx ^ xi
        # X^x Z^z |j> = (-1)^{|z & j|} |j ^ x>, evaluated at j = src
        parity = _parity_array(src & zi)
        base = 1j ** ((self.phase + _popcount(self.x & self.z)) % 4)
        phases = base * np.where(parity, -1.0, 1.0)
        return src, phases


def _mask_to_index(mask: int, n: int) -> int:
    # bit q of the mask -> bit (n-1-q) of the computational-basis index
    out = 0
    for q in range(n):
        if (mask >> q) & 1:
            out |= 1 << (n - 1 - q)
    return out


def _parity_array(v: np.ndarray) -> np.ndarray:
    v = v.copy()
    out = np.zeros(v.shape, dtype=bool)
    while np.any(v):
        out ^= (v & 1).astype(bool)
        v >>= 1
    return out


def _check_width(a: PauliString, b: PauliString) -> None:
    if a.width != b.width:
        raise ValueError(f"width mismatch: {a.width} vs {b.width}")


def pauli_multiply(a: PauliString, b: PauliString) -> PauliString:
    """Group product ``a * b`` with the accumulated phase."""
    _check_width(a, b)
    # write each factor as i^(k + |x&z|) X^x Z^z, then move Z^z1 past X^x2
    x3, z3 = a.x ^ b.x, a.z ^ b.z
    k = (
        a.phase
        + b.phase
        + _popcount(a.x & a.z)
        + _popcount(b.x & b.z)
        + 2 * _popcount(a.z & b.x)
        - _popcount(x3 & z3)
    )
    return PauliString(x3, z3, a.width, k)


class GateKind(str, enum.Enum):
    HADAMARD = "H"
    CONTROLLED_PHASE = "CP"
    CONTROLLED_X = "CX"


_ARITY = {GateKind.HADAMARD: 1, GateKind.CONTROLLED_PHASE: 2, GateKind.CONTROLLED_X: 2}


@dataclass(frozen=True)
class CliffordGate:
    kind: GateKind
    targets: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if len(self.targets) != _ARITY[self.kind]:
            raise ValueError(f"{self.kind.value} takes {_ARITY[self.kind]} target(s)")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError("gate targets must be distinct")
        if min(self.targets) < 0:
            raise ValueError("negative qubit index")

    def generator_images(self, width: int) -> dict[tuple[str, int], PauliString]:
        """Images of ``X_q`` and ``Z_q`` for the qubits this gate touches."""
        if self.kind is GateKind.HADAMARD:
            (q,) = self.targets
            return {
                ("X", q): PauliString.single("Z", q, width),
                ("Z", q): PauliString.single("X", q, width),
            }
        a, b = self.targets
        xa, xb = PauliString.single("X", a, width), PauliString.single("X", b, width)
        za, zb = PauliString.single("Z", a, width), PauliString.single("Z", b, width)
        if self.kind is GateKind.CONTROLLED_PHASE:
            return {("X", a): xa * zb, ("X", b): za * xb, ("Z", a): za, ("Z", b): zb}
        return {("X", a): xa, ("X", b): xb, ("Z", a): za * xb, ("Z", b): xa * zb}


@dataclass(frozen=True)
class CliffordCircuit:
    """Ordered gate list; ``gates[0]`` acts first."""

    width: int
    gates: tuple[CliffordGate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.width < 1:
            raise ValueError("circuit width must be >= 1")
        for g in self.gates:
            if max(g.targets) >= self.width:
                raise ValueError(f"gate {g} exceeds circuit width {self.width}")

    def __add__(self, other: "CliffordCircuit") -> "CliffordCircuit":
        if other.width != self.width:
            raise ValueError("cannot concatenate circuits of different width")
        return CliffordCircuit(self.width, self.gates + other.gates)

    def inverse(self) -> "CliffordCircuit":
        # every gate in the set is an involution
        return CliffordCircuit(self.width, tuple(reversed(self.gates)))

    def embed(self, width: int, offset: int) -> "CliffordCircuit":
        """Same circuit relabelled onto qubits ``offset..offset+self.width-1`` of a wider register."""
        gates = tuple(CliffordGate(g.kind, tuple(t + offset for t in g.targets)) for g in self.gates)
        return CliffordCircuit(width, gates)


def _conjugate_by_gate(p: PauliString, gate: CliffordGate) -> PauliString:
    images = gate.generator_images(p.width)
    touched = set(gate.targets)
    out = PauliString(0, 0, p.width, p.phase + _popcount(p.x & p.z))
    rest_x = rest_z = 0
    for q in range(p.width):
        xb, zb = (p.x >> q) & 1, (p.z >> q) & 1
        if q not in touched:
            rest_x |= xb << q
            rest_z |= zb << q
            continue
        if xb:
            out = out * images[("X", q)]
        if zb:
            out = out * images[("Z", q)]
    # untouched qubits carry X^x Z^z unchanged; multiply them back in as a bare product
    k_rest = -_popcount(rest_x & rest_z)
    return out * PauliString(rest_x, rest_z, p.width, k_rest)


def conjugate_by_circuit(p: PauliString, circuit: CliffordCircuit) -> PauliString:
    """Return ``U p U^dagger`` where ``U`` is the circuit unitary."""
    if p.width != circuit.width:
        raise ValueError(f"width mismatch: Pauli {p.width} vs circuit {circuit.width}")
    for gate in circuit.gates:
        p = _conjugate_by_gate(p, gate)
    return p


def build_block_mapper(m: int) -> CliffordCircuit:
    """The block map ``V = prod_{j=2..m} CX(1, j)`` on ``m`` qubits (0-based targets ``(0, j)``)."""
    if m < 1:
        raise ValueError("block size m must be >= 1")
    return CliffordCircuit(m, tuple(CliffordGate(GateKind.CONTROLLED_X, (0, j)) for j in range(1, m)))


_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_CP = np.diag([1, 1, 1, -1]).astype(complex)
_CX = np.kron(_H, _H) @ _CP @ np.kron(_H, _H).conj().T


def _embed_two(op: np.ndarray, a: int, b: int, width: int) -> np.ndarray:
    dim = 1 << width
    t = op.reshape(2, 2, 2, 2)
    out = np.zeros((dim, dim), dtype=complex)
    eye = np.eye(dim, dtype=complex).reshape((2,) * (2 * width))
    # contract op onto axes (a, b) of the row index of the identity
    res = np.tensordot(t, eye, axes=([2, 3], [a, b]))
    res = np.moveaxis(res, [0, 1], [a, b])
    out[:] = res.reshape(dim, dim)
    return out


def gate_local_matrix(gate: CliffordGate) -> np.ndarray:
    """``2x2`` or ``4x4`` unitary on the gate's own targets, first target leftmost."""
    if gate.kind is GateKind.HADAMARD:
        return _H.copy()
    return (_CP if gate.kind is GateKind.CONTROLLED_PHASE else _CX).copy()


def gate_matrix(gate: CliffordGate, width: int) -> np.ndarray:
    """Dense unitary of ``gate`` embedded in a ``width``-qubit register."""
    if max(gate.targets) >= width:
        raise ValueError("gate exceeds register width")
    if gate.kind is GateKind.HADAMARD:
        (q,) = gate.targets
        mats = [_H if k == q else np.eye(2) for k in range(width)]
        return reduce(np.kron, mats).astype(complex)
    op = _CP if gate.kind is GateKind.CONTROLLED_PHASE else _CX
    return _embed_two(op, gate.targets[0], gate.targets[1], width)


def circuit_matrix(circuit: CliffordCircuit) -> np.ndarray:
    u = np.eye(1 << circuit.width, dtype=complex)
    for gate in circuit.gates:
        u = gate_matrix(gate, circuit.width) @ u
    return u


def parse_circuit(text: str, width: int) -> CliffordCircuit:
    """Parse newline-separated gate lines such as ``CX 1 2`` (1-based qubit labels)."""
    gates = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name, *args = line.split()
        try:
            kind = GateKind(name.upper())
            targets = tuple(int(a) - 1 for a in args)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: cannot parse {raw!r}") from exc
        gates.append(CliffordGate(kind, targets))
    return CliffordCircuit(width, tuple(gates))


def format_circuit(circuit: CliffordCircuit) -> str:
    return "\n".join(
        f"{g.kind.value} " + " ".join(str(t + 1) for t in g.targets) for g in circuit.gates
    )


@dataclass(frozen=True)
class MappingCheck:
    name: str
    expected: str
    obtained: str
    passed: bool


@dataclass(frozen=True)
class MappingReport:
    m: int
    checks: tuple[MappingCheck, ...]
    dense_max_error: float | None = None

    @property
    def passed(self) -> bool:
        dense_ok = self.dense_max_error is None or self.dense_max_error <= 1e-12
        return dense_ok and all(c.passed for c in self.checks)


def verify_scenario2_mapping(m: int, dense: bool | None = None) -> MappingReport:
    """Check that the block map sends ``Z_1`` to ``Z (x) X^(m-1)`` and fixes every ``X_j``.

    With ``dense`` (default: ``m <= 6``) the same identities are also checked
    with explicit ``2**m`` matrices and the worst entry error is reported.
    """
    if m < 1:
        raise ValueError("block size m must be >= 1")
    v = build_block_mapper(m)
    checks = []
    z1 = PauliString.single("Z", 0, m)
    want = PauliString.from_letters("Z" + "X" * (m - 1))
    got = conjugate_by_circuit(z1, v)
    checks.append(MappingCheck("hamiltonian", str(want), str(got), got == want))
    for j in range(m):
        xj = PauliString.single("X", j, m)
        got = conjugate_by_circuit(xj, v)
        checks.append(MappingCheck(f"x_noise_{j + 1}", str(xj), str(got), got == xj))

    if dense is None:
        dense = m <= 6
    err = None
    if dense:
        u = circuit_matrix(v)
        err = 0.0
        for c in checks:
            lhs = PauliString.from_str(c.expected)
            src = z1 if c.name == "hamiltonian" else lhs
            conj = u @ src.to_matrix() @ u.conj().T
            err = max(err, float(np.max(np.abs(conj - lhs.to_matrix()))))
    return MappingReport(m, tuple(checks), err)

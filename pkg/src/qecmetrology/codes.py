"""Correcting codes and the logical noise they induce.

Analytic side: the repetition-phase retention ``p_L``, its leading-order
expansion, the logical rate ``gamma_L``, and the five-qubit no-error
probability ``q_L`` with concatenation.

Dense side (blocks of at most 12 qubits): codewords, stabilizers, the
syndrome lookup table and the recovery map ``sum_s C_s P_s rho P_s C_s``.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .channels import PauliChannel
from .linalg import apply_local_operator, n_qubits_of
from .pauli import PauliString

__all__ = [
    "CodeKind",
    "CodeSpec",
    "LogicalNoiseReport",
    "SyndromeOutcome",
    "logical_flip_tail",
    "logical_flip_retention",
    "logical_retention_leading_order",
    "logical_noise_rate",
    "five_qubit_logical_q",
    "concatenated_q",
    "five_qubit_threshold",
    "concatenation_regime",
    "q_from_depolarizing",
    "depolarizing_from_q",
    "logical_noise_report",
    "encode_codewords",
    "encoder_isometry",
    "stabilizer_generators",
    "logical_operators",
    "correctable_errors",
    "syndrome_of",
    "syndrome_table",
    "syndrome_outcomes",
    "recovery_kraus",
    "syndrome_correct",
    "correct_blocks",
    "logical_class",
    "enumerate_logical_errors",
    "enumerate_corrected_weight",
    "RING_EDGES",
]

MAX_DENSE_BLOCK = 12
RING_EDGES = ((0, 1), (1, 2), (2, 3), (3, 4), (4, 0))


class CodeKind(str, enum.Enum):
    REPETITION_PHASE = "repetition_phase"
    FIVE_QUBIT_GRAPH = "five_qubit_graph"
    CONCATENATED = "concatenated"
    TWO_QUBIT_DEMO = "two_qubit_demo"


@dataclass(frozen=True)
class CodeSpec:
    kind: CodeKind
    m: Optional[int] = None
    levels: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", CodeKind(self.kind))
        if self.kind is CodeKind.REPETITION_PHASE:
            if self.m is None or self.m < 1 or self.m % 2 == 0:
                raise ValueError(f"repetition-phase code needs odd m >= 1, got {self.m}")
        elif self.kind is CodeKind.CONCATENATED:
            if self.levels is None or self.levels < 0:
                raise ValueError("concatenated code needs levels >= 0")

    @classmethod
    def repetition(cls, m: int) -> "CodeSpec":
        return cls(CodeKind.REPETITION_PHASE, m=m)

    @classmethod
    def five_qubit(cls) -> "CodeSpec":
        return cls(CodeKind.FIVE_QUBIT_GRAPH)

    @classmethod
    def concatenated(cls, levels: int) -> "CodeSpec":
        return cls(CodeKind.CONCATENATED, levels=levels)

    @classmethod
    def two_qubit_demo(cls) -> "CodeSpec":
        return cls(CodeKind.TWO_QUBIT_DEMO)

    @property
    def block_size(self) -> int:
        if self.kind is CodeKind.REPETITION_PHASE:
            return self.m
        if self.kind is CodeKind.FIVE_QUBIT_GRAPH:
            return 5
        if self.kind is CodeKind.CONCATENATED:
            return 5 ** self.levels
        return 2

    def canonical(self) -> "CodeSpec":
        # one level of concatenation is the ring code itself
        if self.kind is CodeKind.CONCATENATED and self.levels == 1:
            return CodeSpec.five_qubit()
        return self

    def to_dict(self) -> dict:
        d = {"kind": self.kind.value}
        if self.m is not None:
            d["m"] = self.m
        if self.levels is not None:
            d["levels"] = self.levels
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CodeSpec":
        unknown = set(d) - {"kind", "m", "levels"}
        if unknown:
            raise ValueError(f"unknown code keys: {sorted(unknown)}")
        return cls(d["kind"], d.get("m"), d.get("levels"))


@dataclass(frozen=True)
class LogicalNoiseReport:
    p_logical: float
    gamma_logical: Optional[float] = None
    regime: str = "exact"


@dataclass(frozen=True)
class SyndromeOutcome:
    k_vector: tuple[int, ...]
    correction: PauliString


# -- analytic logical noise -------------------------------------------------


def _check_prob(p: float, name: str = "p") -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {p}")


def _check_odd(m: int) -> None:
    if m < 1 or m % 2 == 0:
        raise ValueError(f"m must be an odd integer >= 1, got {m}")


def _majority_tail(err: float, m: int) -> float:
    """Probability that more than (m-1)/2 of m independent flips (prob ``err``) occur."""
    keep = 1.0 - err
    return math.fsum(
        math.comb(m, k) * keep ** (m - k) * err**k for k in range((m + 1) // 2, m + 1)
    )


def logical_flip_tail(p: float, m: int) -> float:
    """``1 - p_L``, summed over the failing error counts directly."""
    _check_prob(p)
    _check_odd(m)
    return _majority_tail(1.0 - p, m)


def logical_flip_retention(p: float, m: int) -> float:
    """``p_L = sum_{k <= (m-1)/2} C(m,k) p^(m-k) (1-p)^k``.

    For ``p > 0.9`` the complementary tail is summed instead so that
    ``1 - p_L`` keeps full relative precision.
    """
    _check_prob(p)
    _check_odd(m)
    if p > 0.9:
        return 1.0 - _majority_tail(1.0 - p, m)
    return math.fsum(math.comb(m, k) * p ** (m - k) * (1 - p) ** k for k in range((m - 1) // 2 + 1))


def logical_retention_leading_order(p: float, m: int) -> float:
    """``1 - C(m, (m+1)/2) (1-p)^((m+1)/2)``; only for ``1 - p <= 0.1``."""
    _check_prob(p)
    _check_odd(m)
    if 1.0 - p > 0.1:
        raise ValueError("leading-order expansion needs 1 - p <= 0.1")
    h = (m + 1) // 2
    return 1.0 - math.comb(m, h) * (1.0 - p) ** h


def logical_noise_rate(gamma: float, m: int, t: float) -> float:
    """Logical dephasing rate defined by ``2 p_L(t) - 1 = exp(-gamma_L t)``."""
    _check_odd(m)
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    if t <= 0:
        raise ValueError("t must be > 0")
    flip = -math.expm1(-gamma * t) / 2.0
    tail = _majority_tail(flip, m)
    if tail >= 0.5:
        raise ValueError("logical retention <= 1/2: rate undefined")
    return -math.log1p(-2.0 * tail) / t


def five_qubit_logical_q(q: float) -> float:
    """``q_L = q^5 + 5 q^4 (1 - q)``."""
    _check_prob(q, "q")
    return q**5 + 5 * q**4 * (1 - q)


def concatenated_q(q: float, levels: int) -> float:
    if levels < 0:
        raise ValueError("levels must be >= 0")
    for _ in range(levels):
        q = five_qubit_logical_q(q)
    return q


def five_qubit_threshold(grid: int = 2001) -> float:
    """Non-trivial fixed point ``q*`` of ``q -> q_L`` in ``(0.5, 1)``.

    Located by scanning the sign of ``q_L(q) - q`` and refining by bisection.
    """
    qs = np.linspace(0.5, 1.0, grid)[1:-1]
    g = np.array([five_qubit_logical_q(q) - q for q in qs])
    idx = np.nonzero(np.sign(g[:-1]) != np.sign(g[1:]))[0]
    if len(idx) != 1:
        raise RuntimeError(f"expected one fixed point in (0.5, 1), found {len(idx)}")
    lo, hi = qs[idx[0]], qs[idx[0] + 1]
    flo = five_qubit_logical_q(lo) - lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = five_qubit_logical_q(mid) - mid
        if fm == 0 or hi - lo < 1e-16:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def concatenation_regime(q: float) -> str:
    """``"above"`` threshold (concatenation helps), ``"below"``, or ``"fixed"`` point."""
    _check_prob(q, "q")
    d = five_qubit_logical_q(q) - q
    if abs(d) <= 1e-15 or q in (0.0, 1.0):
        return "fixed"
    return "above" if d > 0 else "below"


def q_from_depolarizing(p: float) -> float:
    """No-error probability ``q = (1 + 3p) / 4`` of ``D(p)``."""
    _check_prob(p)
    return (1.0 + 3.0 * p) / 4.0


def depolarizing_from_q(q: float) -> float:
    return (4.0 * q - 1.0) / 3.0


def logical_noise_report(
    code: CodeSpec, p: float, *, gamma: float | None = None, t: float | None = None, leading_order: bool = False
) -> LogicalNoiseReport:
    """Logical retention for ``code`` given physical retention ``p``.

    Repetition-phase codes use ``p_L`` (dephasing retention); the five-qubit
    family uses ``q_L`` with ``p`` read as the depolarizing parameter.
    """
    code = code.canonical()
    if code.kind is CodeKind.REPETITION_PHASE:
        if leading_order:
            pl = logical_retention_leading_order(p, code.m)
        else:
            pl = logical_flip_retention(p, code.m)
        rate = None
        if gamma is not None and t is not None and t > 0:
            rate = logical_noise_rate(gamma, code.m, t)
        return LogicalNoiseReport(pl, rate, "leading_order" if leading_order else "exact")
    if code.kind is CodeKind.TWO_QUBIT_DEMO:
        # only bit flips on qubit 1 are modelled, and all of them are corrected
        return LogicalNoiseReport(1.0, 0.0 if gamma is not None else None, "exact")
    levels = 1 if code.kind is CodeKind.FIVE_QUBIT_GRAPH else code.levels
    ql = concatenated_q(q_from_depolarizing(p), levels)
    rate = None
    pl = depolarizing_from_q(ql)
    if t is not None and t > 0 and pl > 0:
        rate = -1.5 * math.log(pl) / t
    return LogicalNoiseReport(ql, rate, "exact" if levels <= 1 else "leading_order")


# -- dense codes ------------------------------------------------------------


def _require_dense(code: CodeSpec) -> CodeSpec:
    code = code.canonical()
    if code.block_size > MAX_DENSE_BLOCK:
        raise ValueError(f"block of {code.block_size} qubits is too large for dense representation")
    return code


def _graph_state(m: int, edges) -> np.ndarray:
    idx = np.arange(1 << m)
    bits = [(idx >> (m - 1 - q)) & 1 for q in range(m)]
    par = np.zeros(1 << m, dtype=int)
    for a, b in edges:
        par ^= bits[a] & bits[b]
    return np.where(par, -1.0, 1.0).astype(complex) / np.sqrt(1 << m)


def encode_codewords(code: CodeSpec) -> tuple[np.ndarray, np.ndarray]:
    """``(|0_L>, |1_L>)`` as dense state vectors."""
    code = _require_dense(code)
    m = code.block_size
    if code.kind is CodeKind.REPETITION_PHASE:
        plus = np.full(1 << m, 1.0, dtype=complex) / np.sqrt(1 << m)
        idx = np.arange(1 << m)
        parity = np.array([bin(i).count("1") % 2 for i in idx])
        minus = np.where(parity, -1.0, 1.0) * plus
        return (plus + minus) / np.sqrt(2), (plus - minus) / np.sqrt(2)
    if code.kind is CodeKind.FIVE_QUBIT_GRAPH:
        g = _graph_state(5, RING_EDGES)
        zg = PauliString.from_letters("ZZZZZ")
        src, ph = zg.action()
        zg_state = ph * g[src]
        return (g + zg_state) / np.sqrt(2), (g - zg_state) / np.sqrt(2)
    if code.kind is CodeKind.TWO_QUBIT_DEMO:
        s = 1 / np.sqrt(2)
        return np.array([s, s, 0, 0], dtype=complex), np.array([s, -s, 0, 0], dtype=complex)
    # zero levels of concatenation: a bare qubit
    return np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)


def encoder_isometry(code: CodeSpec) -> np.ndarray:
    """``2**m x 2`` matrix with the codewords as columns."""
    zero, one = encode_codewords(code)
    return np.stack([zero, one], axis=1)


def _graph_generator(j: int, m: int, edges) -> PauliString:
    letters = ["I"] * m
    letters[j] = "X"
    for a, b in edges:
        if a == j:
            letters[b] = "Z"
        elif b == j:
            letters[a] = "Z"
    return PauliString.from_letters("".join(letters))


@lru_cache(maxsize=None)
def stabilizer_generators(code: CodeSpec) -> tuple[PauliString, ...]:
    code = _require_dense(code)
    m = code.block_size
    if code.kind is CodeKind.REPETITION_PHASE:
        return tuple(
            PauliString.from_letters("I" * i + "XX" + "I" * (m - i - 2)) for i in range(m - 1)
        )
    if code.kind is CodeKind.FIVE_QUBIT_GRAPH:
        k = [_graph_generator(j, 5, RING_EDGES) for j in range(5)]
        return tuple(k[i] * k[i + 1] for i in range(4))
    if code.kind is CodeKind.TWO_QUBIT_DEMO:
        return (PauliString.from_letters("ZI"),)
    return ()


@lru_cache(maxsize=None)
def logical_operators(code: CodeSpec) -> tuple[PauliString, PauliString]:
    """``(Z_L, X_L)``; ``Z_L`` is the block Hamiltonian's action on the codewords."""
    code = _require_dense(code)
    m = code.block_size
    if code.kind is CodeKind.REPETITION_PHASE:
        return PauliString.from_letters("Z" * m), PauliString.single("X", 0, m)
    if code.kind is CodeKind.FIVE_QUBIT_GRAPH:
        return PauliString.from_letters("ZZZZZ"), _graph_generator(0, 5, RING_EDGES)
    if code.kind is CodeKind.TWO_QUBIT_DEMO:
        return PauliString.from_letters("ZX"), PauliString.from_letters("IZ")
    return PauliString.from_letters("Z"), PauliString.from_letters("X")


@lru_cache(maxsize=None)
def correctable_errors(code: CodeSpec) -> tuple[PauliString, ...]:
    """Errors the decoder corrects, lowest weight first."""
    code = _require_dense(code)
    m = code.block_size
    if code.kind is CodeKind.REPETITION_PHASE:
        out = []
        for w in range((m - 1) // 2 + 1):
            for support in itertools.combinations(range(m), w):
                letters = ["Z" if q in support else "I" for q in range(m)]
                out.append(PauliString.from_letters("".join(letters)))
        return tuple(out)
    if code.kind is CodeKind.FIVE_QUBIT_GRAPH:
        out = [PauliString.identity(5)]
        out += [PauliString.single(ch, q, 5) for q in range(5) for ch in "XYZ"]
        return tuple(out)
    if code.kind is CodeKind.TWO_QUBIT_DEMO:
        return (PauliString.identity(2), PauliString.from_letters("XI"))
    return (PauliString.identity(1),)


def syndrome_of(code: CodeSpec, error: PauliString) -> tuple[int, ...]:
    return tuple(0 if error.commutes_with(s) else 1 for s in stabilizer_generators(code))


@lru_cache(maxsize=None)
def syndrome_table(code: CodeSpec) -> dict[tuple[int, ...], PauliString]:
    table: dict[tuple[int, ...], PauliString] = {}
    for e in correctable_errors(code):
        table.setdefault(syndrome_of(code, e), e)
    return table


def syndrome_outcomes(code: CodeSpec) -> tuple[SyndromeOutcome, ...]:
    """One outcome per syndrome class.

    For the repetition-phase code ``k_vector`` is the minimal-weight phase-flip
    pattern of the class (so the correction is ``Z^k``); for the other codes
    it is the stabilizer syndrome.
    """
    code = _require_dense(code)
    out = []
    for syn, corr in sorted(syndrome_table(code).items()):
        if code.kind is CodeKind.REPETITION_PHASE:
            k = tuple((corr.z >> q) & 1 for q in range(corr.width))
        else:
            k = syn
        out.append(SyndromeOutcome(k, corr))
    return tuple(out)


@lru_cache(maxsize=None)
def _recovery_kraus_cached(code: CodeSpec) -> tuple[np.ndarray, ...]:
    gens = stabilizer_generators(code)
    m = code.block_size
    dim = 1 << m
    if not gens:
        return (np.eye(dim, dtype=complex),)
    mats = [g.to_matrix() for g in gens]
    kraus = []
    for syn, corr in sorted(syndrome_table(code).items()):
        proj = np.eye(dim, dtype=complex)
        for bit, s in zip(syn, mats):
            proj = proj @ (np.eye(dim) + (-1) ** bit * s) / 2
        kraus.append(corr.to_matrix() @ proj)
    return tuple(kraus)


def recovery_kraus(code: CodeSpec) -> tuple[np.ndarray, ...]:
    """Kraus operators ``C_s P_s`` of the recovery map on one block."""
    return _recovery_kraus_cached(_require_dense(code))


def syndrome_correct(rho: np.ndarray, code: CodeSpec, block_start: int = 0) -> np.ndarray:
    """Apply the recovery ``sum_s C_s P_s rho P_s C_s^dagger`` to one block.

    ``rho`` may describe more qubits than the block; the block occupies qubits
    ``block_start .. block_start + m - 1``.
    """
    code = _require_dense(code)
    m = code.block_size
    n = n_qubits_of(rho)
    if block_start < 0 or block_start + m > n:
        raise ValueError(f"block of {m} qubits at {block_start} does not fit a {n}-qubit state")
    qubits = list(range(block_start, block_start + m))
    kraus = recovery_kraus(code)
    if len(kraus) == 1 and np.array_equal(kraus[0], np.eye(1 << m)):
        return rho.copy()
    out = np.zeros_like(rho)
    for k in kraus:
        out += apply_local_operator(rho, k, qubits, n)
    return out


def correct_blocks(rho: np.ndarray, code: CodeSpec, n_blocks: int) -> np.ndarray:
    m = code.canonical().block_size
    for b in range(n_blocks):
        rho = syndrome_correct(rho, code, b * m)
    return rho


def logical_class(code: CodeSpec, residual: PauliString) -> str:
    """Logical Pauli (``"I"``, ``"X"``, ``"Y"``, ``"Z"``) of a residual in the normaliser."""
    if any(not residual.commutes_with(s) for s in stabilizer_generators(code)):
        raise ValueError("residual does not commute with the stabilizers")
    zl, xl = logical_operators(code)
    a_z = not residual.commutes_with(zl)
    a_x = not residual.commutes_with(xl)
    return {(False, False): "I", (True, False): "X", (False, True): "Z", (True, True): "Y"}[(a_z, a_x)]


def enumerate_logical_errors(code: CodeSpec, channel: PauliChannel) -> dict[str, float]:
    """Exhaustive i.i.d. Pauli error patterns pushed through the decoder.

    Returns the probability of each logical Pauli after correction.
    """
    code = _require_dense(code)
    m = code.block_size
    letters = [(ch, p) for ch, p in channel.items() if p > 0]
    table = syndrome_table(code)
    totals = {"I": [], "X": [], "Y": [], "Z": []}
    for combo in itertools.product(letters, repeat=m):
        prob = math.prod(p for _, p in combo)
        err = PauliString.from_letters("".join(ch for ch, _ in combo))
        corr = table.get(syndrome_of(code, err))
        if corr is None:
            raise RuntimeError("syndrome without a correction")
        totals[logical_class(code, corr * err)].append(prob)
    return {k: math.fsum(v) for k, v in totals.items()}



def enumerate_corrected_weight(code: CodeSpec, channel: PauliChannel, max_weight: int = 1) -> float:
    """Probability of error patterns of weight ``<= max_weight`` that decode to logical ``I``.

    With ``max_weight = 1`` on the ring code this is the no-error probability
    ``q_L`` counted over the correctable set only; degenerate successes from
    heavier patterns are excluded.
    """
    code = _require_dense(code)
    m = code.block_size
    probs = dict(channel.items())
    table = syndrome_table(code)
    total = []
    for w in range(max_weight + 1):
        for support in itertools.combinations(range(m), w):
            for letters in itertools.product("XYZ", repeat=w):
                chars = ["I"] * m
                for q, ch in zip(support, letters):
                    chars[q] = ch
                err = PauliString.from_letters("".join(chars))
                corr = table.get(syndrome_of(code, err))
                if corr is None or logical_class(code, corr * err) != "I":
                    continue
                total.append(math.prod(probs[ch] for ch in chars))
    return math.fsum(total)

"""Quantum Fisher information: spectral (SLD) evaluation and GHZ closed forms."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .linalg import Hamiltonian, clip_probabilities, hamiltonian_matrix, hermitian_eig, n_qubits_of

__all__ = [
    "QfiResult",
    "SPECTRAL_CUTOFF",
    "qfi_spectral",
    "qfi_from_derivative",
    "qfi_dephased_ghz_phase",
    "qfi_dephased_ghz_frequency",
    "qfi_depolarized_ghz",
    "depolarized_ghz_approx",
]

SPECTRAL_CUTOFF = 1e-12


@dataclass(frozen=True)
class QfiResult:
    value: float
    method: str
    t: Optional[float] = None
    terms_kept: Optional[int] = None


def _pair_sum(w: np.ndarray, mat_abs2: np.ndarray, numer: np.ndarray, cutoff: float) -> tuple[float, int]:
    denom = w[:, None] + w[None, :]
    keep = denom > cutoff
    terms = np.where(keep, numer * mat_abs2 / np.where(keep, denom, 1.0), 0.0)
    # compensated sum keeps the result independent of summation order
    return 2.0 * math.fsum(terms[keep].tolist()), int(np.count_nonzero(keep))


def qfi_spectral(
    rho: np.ndarray,
    h: Hamiltonian,
    dtheta_dlambda: float = 1.0,
    *,
    cutoff: float = SPECTRAL_CUTOFF,
    method: str = "auto",
) -> QfiResult:
    """``F = (dtheta/dlambda)^2 * 2 sum_{jk} (p_j - p_k)^2 / (p_j + p_k) |<j|H|k>|^2``.

    Valid for ``rho_lambda = U rho U^dagger`` with ``U = exp(-i theta H)``.
    Pairs with ``p_j + p_k <= cutoff`` are skipped.  Pass ``dtheta_dlambda=t``
    for frequency estimation.
    """
    rho = np.asarray(rho, dtype=complex)
    n = n_qubits_of(rho)
    hm = np.asarray(hamiltonian_matrix(h, n), dtype=complex)
    if hm.shape != rho.shape:
        raise ValueError(f"Hamiltonian shape {hm.shape} does not match state {rho.shape}")
    spec = hermitian_eig(rho, method=method)
    w = clip_probabilities(spec.eigenvalues)
    v = spec.eigenvectors
    hv = v.conj().T @ hm @ v
    value, kept = _pair_sum(w, np.abs(hv) ** 2, (w[:, None] - w[None, :]) ** 2, cutoff)
    t = None if dtheta_dlambda == 1.0 else float(dtheta_dlambda)
    return QfiResult(value * dtheta_dlambda**2, "spectral", t, kept)


def qfi_from_derivative(
    rho: np.ndarray, drho: np.ndarray, *, cutoff: float = SPECTRAL_CUTOFF, method: str = "auto"
) -> QfiResult:
    """``F = 2 sum_{jk} |<j|rho'|k>|^2 / (p_j + p_k)`` for an explicit derivative ``rho'``.

    Needed when the parameter does not enter through a single unitary, e.g.
    after a Trotterised evolution whose noise does not commute with ``H``.
    """
    rho = np.asarray(rho, dtype=complex)
    drho = np.asarray(drho, dtype=complex)
    if rho.shape != drho.shape:
        raise ValueError("rho and its derivative differ in shape")
    spec = hermitian_eig(rho, method=method)
    w = clip_probabilities(spec.eigenvalues)
    v = spec.eigenvectors
    dv = v.conj().T @ drho @ v
    value, kept = _pair_sum(w, np.abs(dv) ** 2, np.ones((w.size, w.size)), cutoff)
    return QfiResult(value, "spectral_derivative", None, kept)


def qfi_dephased_ghz_phase(p: float, n: int) -> QfiResult:
    """``(2p - 1)^(2N) N^2``: locally dephased GHZ state (rank 2).

    ``p`` may be the physical retention or a logical ``p_L``.
    """
    if not 0.5 <= p <= 1.0:
        raise ValueError(f"p must lie in [1/2, 1], got {p}")
    if n < 1:
        raise ValueError("N must be >= 1")
    return QfiResult((2 * p - 1) ** (2 * n) * n * n, "closed_form_rank2")


def qfi_dephased_ghz_frequency(
    n: int,
    t: float,
    *,
    retention: Callable[[float], float] | None = None,
    gamma_logical: float | None = None,
) -> QfiResult:
    """``t^2 (2 p_L(t) - 1)^(2N) N^2``.

    Give either ``retention`` (a function ``t -> p_L(t)``) or the logical rate
    ``gamma_logical`` with ``2 p_L - 1 = exp(-gamma_L t)``.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if (retention is None) == (gamma_logical is None):
        raise ValueError("pass exactly one of retention or gamma_logical")
    if t == 0:
        return QfiResult(0.0, "closed_form_rank2", 0.0)
    if gamma_logical is not None:
        contrast_pow = math.exp(-2 * n * gamma_logical * t)
    else:
        contrast_pow = (2 * retention(t) - 1) ** (2 * n)
    return QfiResult(t * t * contrast_pow * n * n, "closed_form_rank2", t)


def qfi_depolarized_ghz(p: float, n: int) -> QfiResult:
    """``p^(2N) N^2 / [((1+p)/2)^N + ((1-p)/2)^N]`` for a locally depolarised GHZ state."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if n < 1:
        raise ValueError("N must be >= 1")
    denom = ((1 + p) / 2) ** n + ((1 - p) / 2) ** n
    return QfiResult(p ** (2 * n) * n * n / denom, "closed_form_depolarizing")


def depolarized_ghz_approx(p: float, n: int) -> tuple[float, bool]:
    """``p^(3N/2) N^2`` and whether it is trustworthy.

    The flag is set when ``N (1-p)^2 <= 0.08``, where the relative error of the
    approximation stays near or below one percent.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return p ** (1.5 * n) * n * n, n * (1 - p) ** 2 <= 0.08

"""Small dense Hermitian linear algebra for density matrices up to 12 qubits.

Matrices are plain complex ``numpy`` arrays.  Qubit 0 is the leftmost tensor
factor, matching :mod:`qecmetrology.pauli`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .pauli import PauliString

__all__ = [
    "MAX_QUBITS",
    "ConvergenceError",
    "HermitianSpectrum",
    "hermitian_eig",
    "jacobi_eig",
    "check_density_matrix",
    "clip_probabilities",
    "evolve_unitary",
    "apply_pauli",
    "conjugate_pauli",
    "apply_local_operator",
    "pure_density",
    "ghz_state",
    "product_state",
    "n_qubits_of",
    "hamiltonian_matrix",
]

MAX_QUBITS = 12
JACOBI_MAX_DIM = 64

Hamiltonian = Union[np.ndarray, PauliString, Sequence[tuple[float, PauliString]]]


class ConvergenceError(RuntimeError):
    """Raised when the Jacobi sweep budget runs out."""


@dataclass(frozen=True)
class HermitianSpectrum:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # orthonormal columns

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _require_hermitian(m: np.ndarray, tol: float) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    dev = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if dev > tol:
        raise ValueError(f"matrix is not Hermitian (max deviation {dev:.3e})")
    return m


def jacobi_eig(m: np.ndarray, tol: float = 1e-14, max_sweeps: int = 60) -> HermitianSpectrum:
    """Cyclic Jacobi diagonalisation of a complex Hermitian matrix.

    Each rotation first removes the phase of the pivot ``a[p, q]`` and then
    applies the real symmetric Jacobi rotation, so the accumulated transform
    stays unitary.
    """
    a = _require_hermitian(m, 1e-10).copy()
    a = 0.5 * (a + a.conj().T)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    offmask = ~np.eye(n, dtype=bool)
    scale = max(float(np.linalg.norm(a)), 1e-300)

    def off_norm() -> float:
        return float(np.linalg.norm(a[offmask]))

    for _ in range(max_sweeps):
        if off_norm() <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-3 * np.finfo(float).eps * scale:
                    a[p, q] = a[q, p] = 0.0
                    continue
                phase = apq / mag
                phase /= abs(phase)
                app, aqq = a[p, p].real, a[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # R = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp - s * np.conj(phase) * cq
                a[:, q] = s * cp + c * np.conj(phase) * cq
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * phase * rq
                a[q, :] = s * rp + c * phase * rq
                a[p, q] = a[q, p] = 0.0
                a[p, p], a[q, q] = a[p, p].real, a[q, q].real
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * np.conj(phase) * vq
                v[:, q] = s * vp + c * np.conj(phase) * vq
    else:
        if off_norm() > tol * scale:
            raise ConvergenceError(
                f"Jacobi did not converge in {max_sweeps} sweeps (off-diagonal norm {off_norm():.3e})"
            )
    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return HermitianSpectrum(w[order], v[:, order])


def hermitian_eig(m: np.ndarray, method: str = "auto") -> HermitianSpectrum:
    """Full spectrum of a Hermitian matrix, eigenvalues ascending.

    ``method`` is ``"jacobi"``, ``"lapack"`` or ``"auto"`` (Jacobi up to
    dimension 64, LAPACK ``zheevd`` above).
    """
    m = _require_hermitian(m, 1e-10)
    if method == "auto":
        method = "jacobi" if m.shape[0] <= JACOBI_MAX_DIM else "lapack"
    if method == "jacobi":
        return jacobi_eig(m)
    if method == "lapack":
        w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
        return HermitianSpectrum(w, v)
    raise ValueError(f"unknown eigensolver {method!r}")


def check_density_matrix(rho: np.ndarray, *, spectrum: bool = False) -> np.ndarray:
    """Validate Hermiticity, unit trace and (optionally) positivity."""
    rho = _require_hermitian(rho, 1e-12)
    dim = rho.shape[0]
    if dim & (dim - 1) or dim == 0:
        raise ValueError(f"dimension {dim} is not a power of two")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > 1e-10:
        raise ValueError(f"trace {tr!r} differs from 1")
    if spectrum:
        w = np.linalg.eigvalsh(rho)
        if w[0] < -1e-10:
            raise ValueError(f"negative eigenvalue {w[0]:.3e}")
    return rho


def clip_probabilities(w: np.ndarray) -> np.ndarray:
    """Clip eigenvalues in ``[-1e-10, 0)`` to zero; anything lower is an error."""
    w = np.asarray(w, dtype=float)
    if w.size and w.min() < -1e-10:
        raise ValueError(f"eigenvalue {w.min():.3e} is below -1e-10")
    return np.where(w < 0, 0.0, w)


def n_qubits_of(rho: np.ndarray) -> int:
    dim = rho.shape[0]
    n = dim.bit_length() - 1
    if 1 << n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def apply_pauli(p: PauliString, psi: np.ndarray) -> np.ndarray:
    """``P |psi>`` for a state vector, or ``P A`` for a matrix (acts on rows)."""
    src, ph = p.action()
    if psi.shape[0] != src.size:
        raise ValueError("Pauli width does not match operand dimension")
    if psi.ndim == 1:
        return ph * psi[src]
    return ph[:, None] * psi[src, :]


def conjugate_pauli(p: PauliString, rho: np.ndarray) -> np.ndarray:
    """``P rho P^dagger`` without forming the dense Pauli matrix."""
    src, ph = p.action()
    if rho.shape[0] != src.size:
        raise ValueError("Pauli width does not match operand dimension")
    return (ph[:, None] * np.conj(ph)[None, :]) * rho[np.ix_(src, src)]


def apply_local_operator(
    rho: np.ndarray, op: np.ndarray, qubits: Sequence[int], n: int | None = None, *, side: str = "both"
) -> np.ndarray:
    """Apply a ``2**k x 2**k`` operator ``K`` acting on ``qubits``.

    ``side="both"`` returns ``K rho K^dagger``; ``"left"`` returns ``K rho``.
    ``rho`` may also be a state vector, in which case ``K |psi>`` is returned.
    """
    qubits = list(qubits)
    k = len(qubits)
    if op.shape != (1 << k, 1 << k):
        raise ValueError("operator size does not match the qubit list")
    if n is None:
        n = n_qubits_of(rho) if rho.ndim == 2 else rho.shape[0].bit_length() - 1
    if max(qubits, default=-1) >= n or len(set(qubits)) != k:
        raise ValueError("invalid qubit list")
    t = op.reshape((2,) * (2 * k))
    in_axes = list(range(k, 2 * k))

    def left(arr, offset):
        res = np.tensordot(t, arr, axes=(in_axes, [offset + q for q in qubits]))
        return np.moveaxis(res, list(range(k)), [offset + q for q in qubits])

    if rho.ndim == 1:
        return left(rho.reshape((2,) * n), 0).reshape(-1)
    dim = 1 << n
    arr = rho.reshape((2,) * (2 * n))
    arr = left(arr, 0)
    if side == "both":
        tc = op.conj().reshape((2,) * (2 * k))
        res = np.tensordot(tc, arr, axes=(in_axes, [n + q for q in qubits]))
        arr = np.moveaxis(res, list(range(k)), [n + q for q in qubits])
    elif side != "left":
        raise ValueError(f"unknown side {side!r}")
    return arr.reshape(dim, dim)


def hamiltonian_matrix(h: Hamiltonian, n: int) -> np.ndarray:
    if isinstance(h, PauliString):
        return h.to_matrix()
    if isinstance(h, np.ndarray):
        return h
    out = np.zeros((1 << n, 1 << n), dtype=complex)
    for coef, p in h:
        out += coef * p.to_matrix()
    return out


def _terms(h) -> list[tuple[float, PauliString]] | None:
    if isinstance(h, PauliString):
        if not h.is_hermitian:
            raise ValueError("Hamiltonian Pauli string must have real sign")
        return [(1.0, h)]
    if isinstance(h, np.ndarray):
        return None
    terms = [(float(c), p) for c, p in h]
    for _, p in terms:
        if not p.is_hermitian:
            raise ValueError("Hamiltonian Pauli string must have real sign")
    return terms


def _diagonal(terms, n) -> np.ndarray:
    diag = np.zeros(1 << n)
    for coef, p in terms:
        src, ph = p.action()
        diag += coef * ph.real
    return diag


def evolve_unitary(rho: np.ndarray, h: Hamiltonian, theta: float) -> np.ndarray:
    """Return ``exp(-i theta H) rho exp(+i theta H)``.

    ``h`` may be a dense Hermitian matrix, a Hermitian Pauli string, or a list
    of ``(coefficient, PauliString)`` terms.  Diagonal Pauli sums are applied as
    elementwise phases; commuting non-diagonal sums as exact Pauli rotations;
    anything else through the spectral decomposition.  A 1-D ``rho`` is
    treated as a state vector.
    """
    rho = np.asarray(rho, dtype=complex)
    dim = rho.shape[0]
    n = dim.bit_length() - 1
    if 1 << n != dim:
        raise ValueError("operand dimension is not a power of two")
    if theta == 0:
        return rho.copy()
    terms = _terms(h)
    if terms is not None:
        if any(p.width != n for _, p in terms):
            raise ValueError("Hamiltonian width does not match the state")
        if all(p.is_diagonal for _, p in terms):
            phase = np.exp(-1j * theta * _diagonal(terms, n))
            if rho.ndim == 1:
                return phase * rho
            return phase[:, None] * rho * np.conj(phase)[None, :]
        if all(a.commutes_with(b) for i, (_, a) in enumerate(terms) for _, b in terms[i + 1:]):
            out = rho
            for coef, p in terms:
                c, s = np.cos(theta * coef), np.sin(theta * coef)
                # exp(-i a P) = cos a - i sin a P for P^2 = I
                if out.ndim == 1:
                    out = c * out - 1j * s * apply_pauli(p, out)
                else:
                    pr = apply_pauli(p, out)
                    rp = apply_pauli(p, out.conj().T).conj().T
                    out = c * c * out + s * s * conjugate_pauli(p, out) + 1j * c * s * (rp - pr)
            return out
        hm = hamiltonian_matrix(terms, n)
    else:
        hm = _require_hermitian(h, 1e-10)
        if hm.shape[0] != dim:
            raise ValueError("Hamiltonian dimension does not match the state")
    spec = hermitian_eig(hm, method="lapack" if dim > JACOBI_MAX_DIM else "auto")
    v = spec.eigenvectors
    u = (v * np.exp(-1j * theta * spec.eigenvalues)) @ v.conj().T
    if rho.ndim == 1:
        return u @ rho
    return u @ rho @ u.conj().T


def pure_density(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def ghz_state(n: int) -> np.ndarray:
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = psi[-1] = 1 / np.sqrt(2)
    return psi


def product_state(single: np.ndarray, n: int) -> np.ndarray:
    out = np.array([1.0 + 0j])
    for _ in range(n):
        out = np.kron(out, single)
    return out

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qecmetrology.channels import PauliChannel, apply_channel_all, block_hamiltonian
from qecmetrology.codes import logical_flip_retention
from qecmetrology.linalg import evolve_unitary, ghz_state, hamiltonian_matrix, pure_density
from qecmetrology.qfi import (
    depolarized_ghz_approx,
    qfi_dephased_ghz_frequency,
    qfi_dephased_ghz_phase,
    qfi_depolarized_ghz,
    qfi_from_derivative,
    qfi_spectral,
)


def ghz_rho(n):
    return pure_density(ghz_state(n))


def dephased(n, p):
    return apply_channel_all(ghz_rho(n), PauliChannel.dephasing(p))


def depolarized(n, p):
    return apply_channel_all(ghz_rho(n), PauliChannel.depolarizing(p))


def random_density(rng, n):
    d = 1 << n
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def test_pure_ghz():
    assert qfi_spectral(ghz_rho(3), block_hamiltonian(3, 1)).value == pytest.approx(9.0, rel=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_product_state_gives_n(n):
    plus = np.ones(1 << n) / math.sqrt(1 << n)
    assert qfi_spectral(pure_density(plus), block_hamiltonian(n, 1)).value == pytest.approx(n, rel=1e-12)


def test_pure_state_is_four_variance():
    rng = np.random.default_rng(5)
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi /= np.linalg.norm(psi)
    hm = hamiltonian_matrix(block_hamiltonian(3, 1), 3)
    var = np.vdot(psi, hm @ hm @ psi).real - np.vdot(psi, hm @ psi).real ** 2
    assert qfi_spectral(pure_density(psi), block_hamiltonian(3, 1)).value == pytest.approx(4 * var, rel=1e-10)


def test_dephased_two_qubits():
    f = qfi_spectral(dephased(2, 0.9), block_hamiltonian(2, 1)).value
    assert f == pytest.approx(1.6384, rel=1e-12)
    assert qfi_dephased_ghz_phase(0.9, 2).value == pytest.approx(1.6384, rel=1e-14)


def test_closed_form_edges():
    assert qfi_dephased_ghz_phase(1.0, 7).value == 49
    assert qfi_dephased_ghz_phase(0.5, 7).value == 0
    assert qfi_depolarized_ghz(1.0, 5).value == 25
    assert qfi_depolarized_ghz(0.7, 1).value == pytest.approx(0.49, rel=1e-15)
    with pytest.raises(ValueError):
        qfi_dephased_ghz_phase(0.3, 2)
    with pytest.raises(ValueError):
        qfi_depolarized_ghz(1.2, 2)


def test_frequency_forms():
    assert qfi_dephased_ghz_frequency(3, 0.0, gamma_logical=1.0).value == 0.0
    n, g, t = 4, 0.3, 0.7
    want = t * t * math.exp(-2 * n * g * t) * n * n
    assert qfi_dephased_ghz_frequency(n, t, gamma_logical=g).value == pytest.approx(want, rel=1e-14)
    # encoded, cross-checked on a 2-level logical GHZ
    g, t, n = 1.0, 0.05, 4
    pl = logical_flip_retention((1 + math.exp(-g * t)) / 2, 3)
    closed = qfi_dephased_ghz_frequency(n, t, retention=lambda s: logical_flip_retention((1 + math.exp(-g * s)) / 2, 3))
    spectral = qfi_spectral(dephased(n, pl), block_hamiltonian(n, 1), dtheta_dlambda=t)
    assert closed.value == pytest.approx(t * t * (2 * pl - 1) ** (2 * n) * n * n, rel=1e-14)
    assert spectral.value == pytest.approx(closed.value, rel=1e-9)
    with pytest.raises(ValueError):
        qfi_dephased_ghz_frequency(2, 1.0)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("p", [0.6, 0.8, 0.95, 1.0])
def test_oracle_equivalence(n, p):
    h = block_hamiltonian(n, 1)
    assert qfi_spectral(dephased(n, p), h).value == pytest.approx(qfi_dephased_ghz_phase(p, n).value, rel=1e-9)
    assert qfi_spectral(depolarized(n, p), h).value == pytest.approx(qfi_depolarized_ghz(p, n).value, rel=1e-9)


def test_depolarized_two_qubit_tight():
    f = qfi_spectral(depolarized(2, 0.95), block_hamiltonian(2, 1)).value
    assert f == pytest.approx(qfi_depolarized_ghz(0.95, 2).value, rel=1e-10)


def test_depolarized_eigenvalues():
    n, p = 3, 0.8
    w = np.sort(np.linalg.eigvalsh(depolarized(n, p)))[::-1]
    a, b = ((1 + p) / 2) ** n, ((1 - p) / 2) ** n
    assert w[0] == pytest.approx(0.5 * (a + b + p**n), rel=1e-12)
    assert np.min(np.abs(w - 0.5 * (a + b - p**n))) <= 1e-14


def test_depolarized_approx_flag():
    v, ok = depolarized_ghz_approx(0.99, 10)
    assert ok and v == pytest.approx(qfi_depolarized_ghz(0.99, 10).value, rel=0.02)
    assert not depolarized_ghz_approx(0.8, 10)[1]


def test_monotonicity():
    ps = np.linspace(0.5, 1.0, 41)
    for n in (1, 2, 5, 20):
        deph = [qfi_dephased_ghz_phase(p, n).value for p in ps]
        dep = [qfi_depolarized_ghz(p, n).value for p in ps]
        assert np.all(np.diff(deph) >= 0) and np.all(np.diff(dep) >= 0)
    p = 0.9
    vals = np.array([qfi_dephased_ghz_phase(p, n).value for n in range(1, 60)])
    peak = int(np.argmax(vals))
    assert np.all(np.diff(vals[peak:]) <= 0)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_heisenberg_cap(n):
    rng = np.random.default_rng(n)
    for _ in range(5):
        rho = random_density(rng, n)
        f = qfi_spectral(rho, block_hamiltonian(n, 1)).value
        assert 0 <= f <= n * n + 1e-10
        assert qfi_spectral(rho, block_hamiltonian(n, 1), dtheta_dlambda=0.3).value == pytest.approx(0.09 * f, rel=1e-12)


def test_unitary_invariance():
    rng = np.random.default_rng(2)
    rho = random_density(rng, 2)
    h = block_hamiltonian(2, 1)
    vals = [qfi_spectral(evolve_unitary(rho, h, lam), h).value for lam in (0.0, 0.4, 2.1)]
    assert max(vals) - min(vals) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(0, 1))
def test_convexity(seed, lam):
    rng = np.random.default_rng(seed)
    r1, r2 = random_density(rng, 2), random_density(rng, 2)
    h = block_hamiltonian(2, 1)
    mix = qfi_spectral(lam * r1 + (1 - lam) * r2, h).value
    assert mix <= lam * qfi_spectral(r1, h).value + (1 - lam) * qfi_spectral(r2, h).value + 1e-9


@pytest.mark.parametrize("n", [1, 2, 3])
def test_product_additivity(n):
    rng = np.random.default_rng(10 + n)
    sigma = random_density(rng, 1)
    single = qfi_spectral(sigma, block_hamiltonian(1, 1)).value
    rho = sigma
    for _ in range(n - 1):
        rho = np.kron(rho, sigma)
    assert qfi_spectral(rho, block_hamiltonian(n, 1)).value == pytest.approx(n * single, rel=1e-9)


def test_derivative_form_agrees_with_spectral():
    rng = np.random.default_rng(4)
    rho = random_density(rng, 2)
    h = block_hamiltonian(2, 1)
    hm = hamiltonian_matrix(h, 2)
    drho = -1j * (hm @ rho - rho @ hm)
    assert qfi_from_derivative(rho, drho).value == pytest.approx(qfi_spectral(rho, h).value, rel=1e-10)


def test_cutoff_handles_rank_deficient():
    res = qfi_spectral(dephased(3, 0.9), block_hamiltonian(3, 1))
    # rank 2 on 8 levels: pairs with at least one nonzero eigenvalue
    assert res.terms_kept == 2 * 2 * 8 - 4
    assert math.isfinite(res.value)

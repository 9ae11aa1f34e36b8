import pytest

from qecmetrology.channels import LindbladSpec, PauliChannel
from qecmetrology.codes import CodeSpec, enumerate_corrected_weight, five_qubit_logical_q, logical_flip_retention
from qecmetrology.linalg import pure_density
from qecmetrology.pauli import PauliString
from qecmetrology.qfi import qfi_depolarized_ghz
from qecmetrology.scenario import (
    ScenarioKind,
    ScenarioSpec,
    conjugated_noise,
    inject_and_correct,
    logical_ghz,
    logical_overlap,
    run_scenario,
    run_scenario1_dephasing,
    run_scenario1_local_noise,
    run_scenario2,
    run_two_qubit_demo,
)


def dephasing_spec(n, m, p, **kw):
    return ScenarioSpec.with_retention(ScenarioKind.I, n, m, p, **kw)


def demo_spec(n, p, **kw):
    return ScenarioSpec.with_retention(ScenarioKind.TWO_QUBIT_DEMO, n, 2, p, noise="transversal",
                                       noise_qubits="first", **kw)


@pytest.mark.parametrize("m", [1, 3])
@pytest.mark.parametrize("p", [0.9, 0.99])
def test_dephasing_pipeline_matches_closed_form(m, p):
    r = run_scenario1_dephasing(dephasing_spec(2, m, p))
    pl = logical_flip_retention(p, m)
    assert r.qfi_closed.value == pytest.approx((2 * pl - 1) ** 4 * 4, rel=1e-14)
    assert r.qfi_oracle.value == pytest.approx(r.qfi_closed.value, rel=1e-8)
    assert r.discrepancy <= 1e-8


@pytest.mark.parametrize("m", [1, 3, 5])
def test_noiseless_heisenberg(m):
    n = 2 if m < 5 else 1
    r = run_scenario1_dephasing(ScenarioSpec(ScenarioKind.I, n, m))
    assert r.qfi_oracle.value == pytest.approx(n * n, rel=1e-10)
    assert r.qfi_closed.value == n * n


def test_logical_subspace_preserved():
    for m in (1, 3):
        r = run_scenario1_dephasing(dephasing_spec(2, m, 0.9))
        assert abs(r.metadata["logical_overlap"] - 1) <= 1e-12
    rho = pure_density(logical_ghz(CodeSpec.five_qubit(), 1))
    assert abs(logical_overlap(rho, CodeSpec.five_qubit(), 1) - 1) <= 1e-12


@pytest.mark.parametrize("m,p", [(3, 0.9), (3, 0.99), (5, 0.9)])
def test_correction_does_not_lower_qfi(m, p):
    r = run_scenario1_dephasing(dephasing_spec(2, m, p))
    assert r.qfi_oracle.value >= r.metadata["qfi_before_correction"] - 1e-10


@pytest.mark.parametrize("p", [0.9, 0.99])
def test_correction_is_data_processing(p):
    # recovery is a channel commuting with the encoded phase, so QFI cannot grow
    r = run_scenario1_dephasing(dephasing_spec(2, 3, p))
    assert r.qfi_oracle.value <= r.metadata["qfi_before_correction"] + 1e-10
    unencoded = run_scenario1_dephasing(dephasing_spec(2, 1, p))
    assert r.qfi_oracle.value > unencoded.qfi_oracle.value


def test_phase_frequency_consistency():
    lam, t = 0.7, 0.4
    gamma = 0.3
    phase = run_scenario1_dephasing(ScenarioSpec(ScenarioKind.I, 2, 3, LindbladSpec.dephasing(gamma), t=t, theta=lam * t))
    freq = run_scenario1_dephasing(ScenarioSpec(ScenarioKind.I, 2, 3, LindbladSpec.dephasing(gamma), t=t, lam=lam))
    assert abs(freq.qfi_oracle.value - t * t * phase.qfi_oracle.value) <= 1e-10
    assert freq.qfi_closed.value == pytest.approx(t * t * phase.qfi_closed.value, rel=1e-14)


def test_qfi_independent_of_theta():
    vals = [run_scenario1_dephasing(dephasing_spec(2, 3, 0.95, theta=th)).qfi_oracle.value for th in (0.0, 0.1, 1.3)]
    assert max(vals) - min(vals) <= 1e-10


def test_local_noise_unencoded_depolarizing():
    spec = ScenarioSpec.with_retention(ScenarioKind.I, 2, 1, 0.95, noise="depolarizing",
                                       code=CodeSpec.concatenated(0), trotter_steps=10)
    r = run_scenario1_local_noise(spec)
    assert r.qfi_oracle.value == pytest.approx(qfi_depolarized_ghz(0.95, 2).value, rel=1e-8)
    assert r.qfi_closed.value == pytest.approx(qfi_depolarized_ghz(0.95, 2).value, rel=1e-12)


def test_local_noise_five_qubit_noiseless():
    r = run_scenario1_local_noise(ScenarioSpec(ScenarioKind.I, 1, 5, code=CodeSpec.five_qubit(), t=0.5, trotter_steps=2))
    assert r.qfi_oracle.value == pytest.approx(1.0, rel=1e-10)


def test_local_noise_five_qubit_reports_logical_q():
    gaps = []
    for p in (0.97, 0.99, 0.999):
        spec = ScenarioSpec.with_retention(ScenarioKind.I, 1, 5, p, noise="depolarizing", code=CodeSpec.five_qubit(),
                                           t=0.1, trotter_steps=4)
        r = run_scenario1_local_noise(spec)
        q = (1 + 3 * p) / 4
        assert r.metadata["q"] == pytest.approx(q, rel=1e-12)
        assert r.metadata["q_L"] == pytest.approx(five_qubit_logical_q(q), rel=1e-12)
        ch = PauliChannel.depolarizing(p)
        assert enumerate_corrected_weight(CodeSpec.five_qubit(), ch, 1) == pytest.approx(r.metadata["q_L"], rel=1e-12)
        assert 0 < r.qfi_oracle.value <= r.qfi_closed.value
        gaps.append(r.discrepancy / (1 - p))
    # single errors striking mid-evolution cost phase information at first
    # order in 1-p, which the end-of-run logical channel does not see
    assert all(g <= 4 for g in gaps)


def test_scenario2_frame_consistency():
    spec = ScenarioSpec.with_retention(ScenarioKind.II, 2, 3, 0.99, noise="transversal", t=0.1)
    r = run_scenario2(spec)
    assert r.metadata["frame_max_error"] <= 1e-6
    assert r.metadata["code_frame_hamiltonian"] == "ZZZ"
    assert r.metadata["code_frame_noise"] == "XZZ"
    assert r.qfi_closed.value == 4
    assert 0 < r.qfi_oracle.value <= 4 + 1e-10


def test_conjugated_noise_demo():
    h, letters = conjugated_noise(CodeSpec.two_qubit_demo(), "first")
    assert h.letters == "ZX" and letters == ("X", "I")


def test_scenario2_noiseless():
    for m in (2, 3):
        spec = ScenarioSpec(ScenarioKind.II, 2, m, None, t=0.3, trotter_steps=2,
                            noise_qubits="first" if m == 2 else "all")
        assert run_scenario2(spec).qfi_oracle.value == pytest.approx(4.0, rel=1e-10)


def test_demo_trotter_approaches_heisenberg():
    ratios = []
    for t in (0.1, 0.01, 0.001):
        spec = ScenarioSpec(ScenarioKind.II, 2, 2, LindbladSpec.transversal(1.0), t=t, lam=1.0,
                            noise_qubits="first", trotter_steps=20)
        r = run_scenario2(spec)
        ratios.append(r.qfi_oracle.value / r.qfi_closed.value)
        assert r.metadata["frame_max_error"] <= 1e-6
    assert ratios[0] < ratios[1] < ratios[2] <= 1 + 1e-10
    assert 1 - ratios[2] < 1e-3


@pytest.mark.parametrize("psi", [(1.0, 0.0), (0.0, 1.0), (0.6, 0.8j)])
def test_demo_injected_error(psi):
    code = CodeSpec.two_qubit_demo()
    assert abs(inject_and_correct(code, PauliString.single("X", 0, 2), psi) - 1) <= 1e-12


def test_demo_pipeline_full_correction():
    r = run_two_qubit_demo(demo_spec(2, 0.95))
    assert r.qfi_oracle.value == pytest.approx(4.0, rel=1e-8)
    assert r.metadata["logical_fidelity"] == pytest.approx(1.0, abs=1e-12)
    assert run_two_qubit_demo(ScenarioSpec(ScenarioKind.TWO_QUBIT_DEMO, 3, 2, noise_qubits="first")).qfi_oracle.value == pytest.approx(9.0, rel=1e-10)


def test_dispatch():
    assert run_scenario(dephasing_spec(1, 3, 0.9)).qfi_oracle.value == pytest.approx(
        run_scenario1_dephasing(dephasing_spec(1, 3, 0.9)).qfi_oracle.value, rel=1e-14)
    assert run_scenario(demo_spec(1, 0.9)).qfi_oracle.value == pytest.approx(1.0, rel=1e-10)


def test_rejections():
    with pytest.raises(ValueError):
        run_scenario1_dephasing(ScenarioSpec(ScenarioKind.I, 1, 2))
    with pytest.raises(ValueError):
        run_scenario1_dephasing(ScenarioSpec(ScenarioKind.I, 1, 3, LindbladSpec.depolarizing(0.1)))
    with pytest.raises(ValueError):
        run_two_qubit_demo(ScenarioSpec(ScenarioKind.TWO_QUBIT_DEMO, 1, 2, LindbladSpec.transversal(0.1)))
    with pytest.raises(ValueError):
        run_two_qubit_demo(ScenarioSpec(ScenarioKind.TWO_QUBIT_DEMO, 1, 2, LindbladSpec.dephasing(0.1),
                                        noise_qubits="first"))
    with pytest.raises(ValueError):
        run_scenario1_dephasing(ScenarioSpec(ScenarioKind.I, 3, 5))
    with pytest.raises(ValueError):
        run_scenario2(ScenarioSpec(ScenarioKind.II, 2, 3, LindbladSpec.dephasing(0.1)))
    with pytest.raises(ValueError):
        ScenarioSpec.with_retention(ScenarioKind.I, 1, 3, 0.4)
    with pytest.raises(ValueError):
        ScenarioSpec(ScenarioKind.I, 1, 3, code=CodeSpec.five_qubit())

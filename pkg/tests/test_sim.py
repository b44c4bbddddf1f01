import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from flagpcm.pauli import PauliString
from flagpcm.sim import (
    StateVector,
    apply_entangling_gate,
    apply_local_rotation,
    apply_pairwise_rotation,
    apply_zz,
    equal_up_to_phase,
    expectation_pauli,
    measure_qubit,
    rotation_matrix,
    sample_bitstring,
    unitary_of,
)

angles = st.floats(-2 * np.pi, 2 * np.pi, allow_nan=False, allow_infinity=False)


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return StateVector(n, v / np.linalg.norm(v))


def test_rotation_pi_on_zero():
    out = apply_local_rotation(StateVector.zeros(1), 0, np.pi, 0.0)
    assert np.allclose(out.amplitudes, [0, -1j])


def test_rotation_matrix_closed_form():
    th, ph = 0.7, 1.3
    x = np.array([[0, 1], [1, 0]])
    y = np.array([[0, -1j], [1j, 0]])
    gen = np.cos(ph) * x + np.sin(ph) * y
    want = np.cos(th / 2) * np.eye(2) - 1j * np.sin(th / 2) * gen
    assert np.allclose(rotation_matrix(th, ph), want)


def test_zz_phase_on_ground_state():
    out = apply_zz(StateVector.zeros(2), 0, 1, np.pi)
    assert np.allclose(out.amplitudes[0], 1j)


def test_hardware_gate_equals_yy_times_ideal():
    hw = unitary_of(apply_entangling_gate, 2, 0, 1, mode="hardware")
    ideal = unitary_of(apply_entangling_gate, 2, 0, 1, mode="ideal")
    yy = PauliString("YY").matrix()
    assert np.allclose(hw, -yy @ ideal)


def test_ideal_gate_kicks_syndrome_phase():
    # data |0>, syndrome |->: ZZ(pi/2) leaves exp(i pi/4 Z_s) on s
    minus = np.array([1, -1]) / np.sqrt(2)
    st0 = StateVector.product([np.array([1, 0]), minus])
    out = apply_entangling_gate(st0, 0, 1)
    rz = np.diag([np.exp(1j * np.pi / 4), np.exp(-1j * np.pi / 4)])
    assert equal_up_to_phase(out.amplitudes, np.kron(rz @ minus, [1, 0]))


def test_bad_inputs():
    with pytest.raises(ValueError):
        StateVector(2, np.ones(3))
    with pytest.raises(ValueError):
        apply_zz(StateVector.zeros(2), 0, 0, 1.0)
    with pytest.raises(ValueError):
        apply_local_rotation(StateVector.zeros(1), 0, float("nan"), 0.0)
    with pytest.raises(ValueError):
        apply_entangling_gate(StateVector.zeros(2), 0, 1, mode="other")


def test_measurement_conventions():
    rng = np.random.default_rng(0)
    m, _ = measure_qubit(StateVector.zeros(1), 0, "Z", rng)
    assert m == 1
    m, _ = measure_qubit(StateVector.basis(1, [1]), 0, "Z", rng)
    assert m == -1
    plus = StateVector(1, np.array([1, 1]) / np.sqrt(2))
    assert measure_qubit(plus, 0, "X", rng)[0] == 1
    plus_i = StateVector(1, np.array([1, 1j]) / np.sqrt(2))
    assert measure_qubit(plus_i, 0, "Y", rng)[0] == 1


def test_measurement_collapse_renormalizes_and_bell_correlates():
    bell = StateVector(2, np.array([1, 0, 0, 1]) / np.sqrt(2))
    rng = np.random.default_rng(3)
    for _ in range(20):
        a, b = sample_bitstring(bell, ["Z", "Z"], rng)
        assert a == b
    _, post = measure_qubit(bell, 0, "Z", rng)
    assert post.norm() == pytest.approx(1.0)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31), angles, angles, st.integers(0, 2))
def test_rotation_preserves_norm(seed, th, ph, q):
    s = apply_local_rotation(random_state(3, seed), q, th, ph)
    assert s.norm() == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31), angles, st.sampled_from(["ideal", "hardware"]))
def test_two_qubit_gates_preserve_norm(seed, phi, mode):
    s = random_state(3, seed)
    assert apply_zz(s, 0, 2, phi).norm() == pytest.approx(1.0, abs=1e-12)
    assert apply_entangling_gate(s, 1, 2, mode).norm() == pytest.approx(1.0, abs=1e-12)


@given(angles, angles, angles)
def test_rotations_about_one_axis_compose(a, b, ph):
    assert np.allclose(rotation_matrix(a, ph) @ rotation_matrix(b, ph), rotation_matrix(a + b, ph))


@given(angles)
def test_rotation_inverse(th):
    assert np.allclose(rotation_matrix(th, 0.4) @ rotation_matrix(-th, 0.4), np.eye(2))


@given(angles, angles)
def test_zz_composes(a, b):
    u = unitary_of(apply_zz, 2, 0, 1, a) @ unitary_of(apply_zz, 2, 0, 1, b)
    assert np.allclose(u, unitary_of(apply_zz, 2, 0, 1, a + b))


@given(angles, angles)
def test_pairwise_rotation_is_product_of_locals(th, ph):
    pair = unitary_of(apply_pairwise_rotation, 2, 0, 1, th, ph)
    r = rotation_matrix(th, ph)
    assert np.allclose(pair, np.kron(r, r))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.text(alphabet="IXYZ", min_size=3, max_size=3))
def test_expectation_matches_dense(seed, letters):
    s = random_state(3, seed)
    p = PauliString(letters)
    dense = np.vdot(s.amplitudes, p.matrix() @ s.amplitudes).real
    assert expectation_pauli(s, p) == pytest.approx(dense, abs=1e-12)

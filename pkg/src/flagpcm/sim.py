"""Exact state-vector simulation of the native trapped-ion gate set.

Qubit 0 is the least-significant bit of the basis-state index. Kernels act
on the last axis of an array, so the same functions serve a single state of
shape ``(2**n,)`` and a batch of trajectories of shape ``(shots, 2**n)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .pauli import PauliString

MAX_QUBITS = 8
NORM_TOL = 1e-12

QUBIT_NAMES = ("d1", "d2", "d3", "d4", "s", "f")
QUBIT_INDEX = {name: i for i, name in enumerate(QUBIT_NAMES)}
D1, D2, D3, D4, S, F = range(6)
DATA = (D1, D2, D3, D4)

BASES = ("X", "Y", "Z")
# analysis rotation phase that maps the basis onto the Z readout
ANALYSIS_PHASE = {"X": -np.pi / 2, "Y": 0.0}


class SimulationError(RuntimeError):
    pass


def qubit_id(q: int | str) -> int:
    if isinstance(q, str):
        try:
            return QUBIT_INDEX[q]
        except KeyError:
            raise ValueError(f"unknown qubit name {q!r}") from None
    return int(q)


def rotation_matrix(theta: float, phi: float) -> np.ndarray:
    """exp[-i theta/2 (cos(phi) X + sin(phi) Y)]."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [[c, -1j * s * np.exp(-1j * phi)], [-1j * s * np.exp(1j * phi), c]], dtype=complex
    )


def _check_qubit(q: int, n: int) -> None:
    if not 0 <= q < n:
        raise IndexError(f"qubit {q} out of range for a {n}-qubit register")


def _check_pair(i: int, j: int, n: int) -> None:
    _check_qubit(i, n)
    _check_qubit(j, n)
    if i == j:
        raise ValueError(f"two-qubit operation needs distinct qubits, got {i} twice")


def _bits(n: int, q: int) -> np.ndarray:
    return (np.arange(2**n) >> q) & 1


def z_signs(n: int, q: int) -> np.ndarray:
    """Eigenvalue of Z_q on each basis state."""
    return 1 - 2 * _bits(n, q)


# ---------------------------------------------------------------------------
# kernels on arrays of shape (..., 2**n)


def apply_1q(amps: np.ndarray, n: int, q: int, u: np.ndarray) -> np.ndarray:
    lead = amps.shape[:-1]
    view = amps.reshape(lead + (2 ** (n - 1 - q), 2, 2**q))
    out = np.einsum("ij,...ajb->...aib", u, view)
    return out.reshape(amps.shape)


def zz_phases(n: int, i: int, j: int, phi: float) -> np.ndarray:
    """Diagonal of exp[(i/2) Phi Z_i Z_j]."""
    parity = z_signs(n, i) * z_signs(n, j)
    return np.exp(0.5j * phi * parity)


def apply_pauli_kernel(amps: np.ndarray, pauli: PauliString) -> np.ndarray:
    n = pauli.num_qubits
    idx = np.arange(2**n)
    flip = 0
    phase = np.full(2**n, pauli.phase, dtype=complex)
    # P|b> = phase(b) |b ^ flip>; build the result as out[b ^ flip] = phase(b) amps[b]
    for q, c in enumerate(pauli.letters):
        bit = (idx >> q) & 1
        if c in "XY":
            flip |= 1 << q
        if c == "Z":
            phase *= 1 - 2 * bit
        elif c == "Y":
            phase *= 1j * (1 - 2 * bit)  # Y|0> = i|1>, Y|1> = -i|0>
    out = np.empty_like(amps)
    out[..., idx ^ flip] = amps * phase
    return out


def probabilities(amps: np.ndarray) -> np.ndarray:
    return np.abs(amps) ** 2


# ---------------------------------------------------------------------------
# value-semantic state


@dataclass(frozen=True)
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise ValueError(f"register size must be 1..{MAX_QUBITS}, got {self.num_qubits}")
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (2**self.num_qubits,):
            raise ValueError(f"expected {2**self.num_qubits} amplitudes, got shape {amps.shape}")
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zeros(cls, n: int) -> "StateVector":
        amps = np.zeros(2**n, dtype=complex)
        amps[0] = 1.0
        return cls(n, amps)

    @classmethod
    def basis(cls, n: int, bits: Sequence[int]) -> "StateVector":
        """Computational basis state with ``bits[q]`` on qubit q."""
        index = sum(int(b) << q for q, b in enumerate(bits))
        amps = np.zeros(2**n, dtype=complex)
        amps[index] = 1.0
        return cls(n, amps)

    @classmethod
    def product(cls, single_qubit_states: Sequence[np.ndarray]) -> "StateVector":
        amps = np.array([1.0 + 0j])
        for v in reversed(single_qubit_states):
            amps = np.kron(amps, np.asarray(v, dtype=complex))
        return cls(len(single_qubit_states), amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def _new(self, amps: np.ndarray) -> "StateVector":
        return StateVector(self.num_qubits, amps)

    def probabilities(self) -> np.ndarray:
        return probabilities(self.amplitudes)

    def overlap(self, other: "StateVector") -> float:
        """|<self|other>|, insensitive to global phase."""
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)))


# ---------------------------------------------------------------------------
# gate operations


def apply_local_rotation(state: StateVector, q: int, theta: float, phi: float) -> StateVector:
    _check_qubit(q, state.num_qubits)
    if not (np.isfinite(theta) and np.isfinite(phi)):
        raise ValueError("rotation angles must be finite")
    return state._new(apply_1q(state.amplitudes, state.num_qubits, q, rotation_matrix(theta, phi)))


def apply_pairwise_rotation(
    state: StateVector, q1: int, q2: int, theta: float, phi: float
) -> StateVector:
    """Common rotation of two co-trapped ions (tensor-sum generator)."""
    _check_pair(q1, q2, state.num_qubits)
    u = rotation_matrix(theta, phi)
    amps = apply_1q(state.amplitudes, state.num_qubits, q1, u)
    return state._new(apply_1q(amps, state.num_qubits, q2, u))


def apply_zz(state: StateVector, i: int, j: int, phi: float) -> StateVector:
    _check_pair(i, j, state.num_qubits)
    return state._new(state.amplitudes * zz_phases(state.num_qubits, i, j, phi))


GATE_MODES = ("ideal", "hardware")


def apply_entangling_gate(state: StateVector, i: int, j: int, mode: str = "ideal") -> StateVector:
    """Maximally entangling gate.

    ``ideal`` is ZZ(pi/2). ``hardware`` is the echoed pulse pair
    ZZ(pi/4) R(pi,-pi/2) ZZ(pi/4) with the pi pulse on both ions, which
    equals -(Y_i Y_j) ZZ(pi/2).
    """
    if mode == "ideal":
        return apply_zz(state, i, j, np.pi / 2)
    if mode != "hardware":
        raise ValueError(f"unknown gate mode {mode!r}")
    state = apply_zz(state, i, j, np.pi / 4)
    state = apply_pairwise_rotation(state, i, j, np.pi, -np.pi / 2)
    return apply_zz(state, i, j, np.pi / 4)


def apply_pauli(state: StateVector, pauli: PauliString) -> StateVector:
    if pauli.num_qubits != state.num_qubits:
        raise ValueError("Pauli string does not match register size")
    return state._new(apply_pauli_kernel(state.amplitudes, pauli))


def unitary_of(fn, n: int, *args, **kwargs) -> np.ndarray:
    """Dense matrix of a state operation, built column by column."""
    cols = []
    for k in range(2**n):
        e = np.zeros(2**n, dtype=complex)
        e[k] = 1
        cols.append(fn(StateVector(n, e), *args, **kwargs).amplitudes)
    return np.array(cols).T


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-12) -> bool:
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    k = int(np.argmax(np.abs(b)))
    if abs(b[k]) < atol:
        return bool(np.allclose(a, b, atol=atol))
    phase = a[k] / b[k]
    if abs(abs(phase) - 1) > 1e-9:
        return False
    return bool(np.allclose(a, phase * b, atol=atol))


# ---------------------------------------------------------------------------
# measurement


def _rotate_to_z(amps: np.ndarray, n: int, q: int, basis: str) -> np.ndarray:
    if basis == "Z":
        return amps
    if basis not in ANALYSIS_PHASE:
        raise ValueError(f"unknown measurement basis {basis!r}")
    return apply_1q(amps, n, q, rotation_matrix(np.pi / 2, ANALYSIS_PHASE[basis]))


def measure_qubit(
    state: StateVector, q: int, basis: str, rng: np.random.Generator
) -> tuple[int, StateVector]:
    """Projective readout; +1 is 'dark' (|0>), -1 is 'bright' (|1>).

    X and Y readout first apply the analysis rotations R(pi/2,-pi/2) and
    R(pi/2,0). The collapsed state is returned in the rotated frame, as it is
    on hardware.
    """
    n = state.num_qubits
    _check_qubit(q, n)
    amps = _rotate_to_z(state.amplitudes, n, q, basis)
    bright = _bits(n, q).astype(bool)
    p_bright = float(np.sum(np.abs(amps[bright]) ** 2))
    outcome = -1 if rng.random() < p_bright else 1
    keep = bright if outcome == -1 else ~bright
    weight = p_bright if outcome == -1 else 1 - p_bright
    if weight <= 0:
        raise SimulationError("selected a zero-probability measurement branch")
    collapsed = np.where(keep, amps, 0) / np.sqrt(weight)
    return outcome, state._new(collapsed)


def sample_bitstring(
    state: StateVector, bases: Sequence[str], rng: np.random.Generator
) -> tuple[int, ...]:
    if len(bases) != state.num_qubits:
        raise ValueError("need one basis per qubit")
    outcomes = []
    for q, b in enumerate(bases):
        m, state = measure_qubit(state, q, b, rng)
        outcomes.append(m)
    return tuple(outcomes)


def expectation_pauli(state: StateVector, pauli: PauliString) -> float:
    if pauli.num_qubits != state.num_qubits:
        raise ValueError("Pauli string does not match register size")
    if not pauli.is_hermitian:
        raise ValueError(f"{pauli} is not Hermitian")
    value = np.vdot(state.amplitudes, apply_pauli_kernel(state.amplitudes, pauli))
    return float(value.real)


def bases_for(pauli: PauliString) -> list[str]:
    """Readout basis per qubit for estimating ``pauli`` (identity slots read Z)."""
    return [c if c != "I" else "Z" for c in pauli.letters]


def outcome_product(outcomes: Iterable[int], pauli: PauliString) -> int:
    value = pauli.sign
    for c, m in zip(pauli.letters, outcomes):
        if c != "I":
            value *= m
    return value

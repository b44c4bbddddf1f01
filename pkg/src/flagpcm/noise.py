"""Stochastic Pauli noise channels, sampled per trajectory.

Single-state helpers take a :class:`StateVector`; the ``*_batch`` variants
act on a ``(shots, 2**n)`` amplitude array with one random draw per row and
are what the shot runner uses.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .pauli import PauliString
from .sim import QUBIT_NAMES, StateVector, apply_pauli, apply_pauli_kernel

NUM_QUBITS = len(QUBIT_NAMES)
GATE_ERROR_MODELS = ("depolarizing", "zz_overrotation")

# the 15 non-identity two-qubit Paulis, first letter on the lower qubit of the pair
TWO_QUBIT_PAULIS = [a + b for a in "IXYZ" for b in "IXYZ"][1:]


@dataclass(frozen=True)
class SpamRates:
    p_dark_err: float = 0.0    # P(read bright | prepared dark = |0>)
    p_bright_err: float = 0.0  # P(read dark | prepared bright = |1>)

    def __post_init__(self):
        for v in (self.p_dark_err, self.p_bright_err):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"SPAM probability {v} outside [0, 1]")


@dataclass(frozen=True)
class NoiseParams:
    p2: float = 0.0
    p1: float = 0.0
    p_z_idle: float = 0.0
    spam: tuple[SpamRates, ...] = field(default_factory=lambda: (SpamRates(),) * NUM_QUBITS)
    z_offsets: tuple[float, ...] = (0.0,) * NUM_QUBITS
    gate_error_model: str = "depolarizing"
    sigma_phi: float = 0.0  # std dev of the ZZ phase for the overrotation model

    def __post_init__(self):
        for name in ("p2", "p1", "p_z_idle"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.p_z_idle > 0.5:
            raise ValueError("p_z_idle above 1/2 is not a dephasing channel")
        if self.gate_error_model not in GATE_ERROR_MODELS:
            raise ValueError(f"unknown gate error model {self.gate_error_model!r}")
        if self.sigma_phi < 0:
            raise ValueError("sigma_phi must be non-negative")
        spam = tuple(s if isinstance(s, SpamRates) else SpamRates(**s) for s in self.spam)
        object.__setattr__(self, "spam", spam)
        object.__setattr__(self, "z_offsets", tuple(float(z) for z in self.z_offsets))
        if len(self.spam) != NUM_QUBITS or len(self.z_offsets) != NUM_QUBITS:
            raise ValueError(f"spam and z_offsets need {NUM_QUBITS} entries")

    @property
    def is_noiseless(self) -> bool:
        return (
            self.p2 == 0
            and self.p1 == 0
            and self.p_z_idle == 0
            and all(s.p_dark_err == 0 and s.p_bright_err == 0 for s in self.spam)
            and all(z == 0 for z in self.z_offsets)
            and (self.gate_error_model == "depolarizing" or self.sigma_phi == 0)
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["spam"] = {QUBIT_NAMES[q]: asdict(s) for q, s in enumerate(self.spam)}
        d["z_offsets"] = {QUBIT_NAMES[q]: z for q, z in enumerate(self.z_offsets)}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseParams":
        d = dict(d)
        if isinstance(d.get("spam"), dict):
            d["spam"] = tuple(SpamRates(**d["spam"].get(name, {})) for name in QUBIT_NAMES)
        if isinstance(d.get("z_offsets"), dict):
            d["z_offsets"] = tuple(float(d["z_offsets"].get(name, 0.0)) for name in QUBIT_NAMES)
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown noise parameters: {sorted(unknown)}")
        return cls(**d)

    def with_(self, **changes) -> "NoiseParams":
        return replace(self, **changes)


def noiseless() -> NoiseParams:
    return NoiseParams()


# readout fidelities including the shuttling sequence, (bright, dark)
_PCM_SPAM = {"s": (0.988, 0.986), "f": (0.988, 0.981)}
_GME_SPAM = {
    "d1": (0.997, 0.982),
    "d2": (0.996, 0.987),
    "d3": (0.992, 0.990),
    "d4": (0.986, 0.986),
    "s": (0.996, 0.971),
    "f": (0.996, 0.984),
}
TWO_QUBIT_GATE_FIDELITY = 0.996
SINGLE_QUBIT_ERROR = 1e-4
SYNDROME_CONTRAST = 0.93


def _spam_table(sequence: str) -> tuple[SpamRates, ...]:
    table = dict(_GME_SPAM)
    if sequence == "pcm":
        table.update(_PCM_SPAM)
    elif sequence != "gme":
        raise ValueError(f"unknown sequence {sequence!r}; expected 'pcm' or 'gme'")
    return tuple(
        SpamRates(p_dark_err=round(1 - dark, 6), p_bright_err=round(1 - bright, 6))
        for bright, dark in (table[name] for name in QUBIT_NAMES)
    )


def paper_default_params(sequence: str = "pcm", contrast: float = SYNDROME_CONTRAST) -> NoiseParams:
    """Calibrated defaults.

    ``sequence='pcm'`` takes the syndrome/flag readout errors measured with the
    parity-check sequence; data qubits (and everything for ``'gme'``) use the
    GME-sequence table.
    """
    return NoiseParams(
        p2=round(1 - TWO_QUBIT_GATE_FIDELITY, 6),
        p1=SINGLE_QUBIT_ERROR,
        p_z_idle=round((1 - contrast) / 2, 6),
        spam=_spam_table(sequence),
    )


def load_noise(path: str | Path) -> NoiseParams:
    with open(path, encoding="utf-8") as fh:
        return NoiseParams.from_dict(json.load(fh))


def resolve_noise(spec: str | None, sequence: str = "pcm") -> NoiseParams:
    """'none', 'paper-defaults' or a path to a JSON file."""
    if spec in (None, "none"):
        return noiseless()
    if spec == "paper-defaults":
        return paper_default_params(sequence)
    return load_noise(spec)


# ---------------------------------------------------------------------------
# single-state channels


def _two_qubit_pauli(n: int, pair: tuple[int, int], index: int) -> PauliString:
    letters = TWO_QUBIT_PAULIS[index]
    return PauliString.from_map(n, {pair[0]: letters[0], pair[1]: letters[1]})


def apply_two_qubit_noise(
    state: StateVector, pair: tuple[int, int], p2: float, rng: np.random.Generator
) -> StateVector:
    if rng.random() >= p2:
        return state
    return apply_pauli(state, _two_qubit_pauli(state.num_qubits, pair, int(rng.integers(15))))


def apply_single_qubit_noise(
    state: StateVector, q: int, p1: float, rng: np.random.Generator
) -> StateVector:
    if rng.random() >= p1:
        return state
    letter = "XYZ"[int(rng.integers(3))]
    return apply_pauli(state, PauliString.single(state.num_qubits, q, letter))


def apply_dephasing(
    state: StateVector, qubit: int, p_z: float, rng: np.random.Generator
) -> StateVector:
    if not 0 <= p_z <= 0.5:
        raise ValueError("dephasing probability must lie in [0, 1/2]")
    if rng.random() >= p_z:
        return state
    return apply_pauli(state, PauliString.single(state.num_qubits, qubit, "Z"))


def apply_spam_flip(outcome: int, qubit: int, spam, rng: np.random.Generator) -> int:
    """Classical readout error; ``spam`` is a SpamRates or a per-qubit sequence."""
    rates = spam if isinstance(spam, SpamRates) else spam[qubit]
    p = rates.p_dark_err if outcome == 1 else rates.p_bright_err
    return -outcome if rng.random() < p else outcome


# ---------------------------------------------------------------------------
# batched channels


def _apply_to_rows(amps: np.ndarray, rows: np.ndarray, pauli: PauliString) -> None:
    if rows.size:
        amps[rows] = apply_pauli_kernel(amps[rows], pauli)


def depolarize_pair_batch(
    amps: np.ndarray, n: int, pair: tuple[int, int], p2: float, rng: np.random.Generator
) -> None:
    if p2 <= 0:
        return
    hit = rng.random(amps.shape[0]) < p2
    which = rng.integers(15, size=amps.shape[0])
    for k in range(15):
        _apply_to_rows(amps, np.flatnonzero(hit & (which == k)), _two_qubit_pauli(n, pair, k))


def depolarize_single_batch(
    amps: np.ndarray, n: int, q: int, p1: float, rng: np.random.Generator
) -> None:
    if p1 <= 0:
        return
    hit = rng.random(amps.shape[0]) < p1
    which = rng.integers(3, size=amps.shape[0])
    for k, letter in enumerate("XYZ"):
        _apply_to_rows(amps, np.flatnonzero(hit & (which == k)), PauliString.single(n, q, letter))


def dephase_batch(amps: np.ndarray, n: int, q: int, p_z: float, rng: np.random.Generator) -> None:
    if p_z <= 0:
        return
    rows = np.flatnonzero(rng.random(amps.shape[0]) < p_z)
    _apply_to_rows(amps, rows, PauliString.single(n, q, "Z"))


def spam_flip_batch(
    outcomes: np.ndarray, q: int, rates: SpamRates, rng: np.random.Generator
) -> None:
    """Flip column ``q`` of a (shots, n) array of +-1 outcomes in place."""
    if rates.p_dark_err <= 0 and rates.p_bright_err <= 0:
        return
    col = outcomes[:, q]
    p = np.where(col == 1, rates.p_dark_err, rates.p_bright_err)
    flip = rng.random(col.shape[0]) < p
    outcomes[flip, q] *= -1

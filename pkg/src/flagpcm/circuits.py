"""Circuit builders and the Monte Carlo shot runner for the flag-based PCM.

Rotations issued after the first entangling gate on a qubit carry a phase
correction for the Z-frame the gates imprint on it (each ZZ(pi/2) is a CZ
dressed with local Z rotations). The builder tracks that frame per qubit and
adds it to every subsequent drive phase, analysis pulses included.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .frame import FrameGate, InjectionSite
from .noise import (
    NoiseParams,
    depolarize_pair_batch,
    depolarize_single_batch,
    dephase_batch,
    noiseless,
    spam_flip_batch,
)
from .pauli import PauliString, anticommutes
from .sim import (
    ANALYSIS_PHASE,
    D1,
    D2,
    D3,
    D4,
    DATA,
    F,
    GATE_MODES,
    QUBIT_NAMES,
    S,
    StateVector,
    apply_1q,
    apply_pauli_kernel,
    rotation_matrix,
    z_signs,
    zz_phases,
)

NUM_QUBITS = 6
HALF_PI = np.pi / 2

# composite-gate slots of the parity check, in execution order
SLOT_PAIRS = ((D1, S), (S, F), (D2, S), (D3, S), (S, F), (D4, S))
ALLOWED_PAIRS = {frozenset(p) for p in SLOT_PAIRS}
NUM_POSITIONS = len(SLOT_PAIRS) + 1  # injection sites between (and around) the slots

VARIANTS = ("pcm_logical", "pcm_inject", "gme4", "gme6")
OP_KINDS = ("PrepZero", "Rotation", "PairRotation", "Entangle", "Inject", "Dephase", "Measure")

# Fixed Pauli frame of the calibrated readout, per circuit family and gate
# mode: the echo pulses and the tracked Z-frame leave a deterministic Pauli on
# the register, which is undone by relabelling the affected outcomes.
READOUT_FRAME: dict[tuple[str, str], dict[int, str]] = {
    ("pcm", "ideal"): {},
    ("pcm", "hardware"): {D1: "X", D2: "X", D3: "X", D4: "X", S: "Z", F: "Z"},
    ("gme4", "ideal"): {D2: "Z", D4: "Y"},
    ("gme4", "hardware"): {S: "Z"},
    ("gme6", "ideal"): {D3: "Z", D4: "Z"},
    ("gme6", "hardware"): {S: "X", F: "Z"},
}


def _wrap(phi: float) -> float:
    """Phase folded into (-pi, pi]."""
    w = math.remainder(phi, 2 * math.pi)
    return math.pi if math.isclose(w, -math.pi) else w + 0.0


@dataclass(frozen=True)
class CircuitOp:
    kind: str
    qubits: tuple[int, ...] = ()
    theta: float = 0.0
    phi: float = 0.0
    mode: str = ""
    basis: str = ""
    pauli: str = ""
    tag: str = ""
    invert: bool = False

    def __post_init__(self):
        if self.kind not in OP_KINDS:
            raise ValueError(f"unknown op kind {self.kind!r}")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.kind == "Entangle" and frozenset(self.qubits) not in ALLOWED_PAIRS:
            names = [QUBIT_NAMES[q] for q in self.qubits]
            raise ValueError(f"entangling pair {names} is not one of d_i-s or s-f")

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "qubits": [QUBIT_NAMES[q] for q in self.qubits]}
        if self.kind in ("Rotation", "PairRotation"):
            d.update(theta=self.theta, phi=self.phi)
        if self.kind == "Entangle":
            d["mode"] = self.mode
        if self.kind == "Measure":
            d.update(basis=self.basis, invert=self.invert)
        if self.kind == "Inject":
            d["pauli"] = self.pauli
        if self.tag:
            d["tag"] = self.tag
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "CircuitOp":
        d = dict(d)
        d["qubits"] = tuple(QUBIT_NAMES.index(q) if isinstance(q, str) else q for q in d.get("qubits", ()))
        return cls(**d)


@dataclass(frozen=True)
class Circuit:
    ops: tuple[CircuitOp, ...]
    variant: str
    gate_mode: str = "ideal"
    slot_ends: tuple[int, ...] = ()
    num_qubits: int = NUM_QUBITS

    def __post_init__(self):
        measured = set()
        for op in self.ops:
            if op.kind == "Measure":
                measured.update(op.qubits)
            elif op.kind not in ("Dephase",) and measured.intersection(op.qubits):
                raise ValueError(f"{op.kind} on an already measured qubit")

    @property
    def bases(self) -> tuple[str, ...]:
        b = ["Z"] * self.num_qubits
        for op in self.ops:
            if op.kind == "Measure":
                b[op.qubits[0]] = op.basis
        return tuple(b)

    def frame_gates_after(self, position: int) -> list[FrameGate]:
        """Clifford gates from injection ``position`` up to the analysis block."""
        if not 0 <= position < len(self.slot_ends):
            raise IndexError(f"injection position {position} out of range 0..{len(self.slot_ends) - 1}")
        gates: list[FrameGate] = []
        for op in self.ops[self.slot_ends[position]:]:
            if op.tag == "analysis" or op.kind == "Measure":
                break
            if op.kind == "Entangle":
                gates.append(FrameGate("ZZ_half", op.qubits))
                if op.mode == "hardware":
                    gates.append(FrameGate("PairEcho", op.qubits))
            elif op.kind == "Rotation":
                gates.append(FrameGate("LocalRot", op.qubits, op.theta, op.phi))
            elif op.kind == "PairRotation":
                for q in op.qubits:
                    gates.append(FrameGate("LocalRot", (q,), op.theta, op.phi))
        return gates

    def without_noise_markers(self) -> "Circuit":
        return replace(self, ops=tuple(op for op in self.ops if op.kind != "Dephase"))

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "gate_mode": self.gate_mode,
            "num_qubits": self.num_qubits,
            "slot_ends": list(self.slot_ends),
            "ops": [op.to_dict() for op in self.ops],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: Mapping) -> "Circuit":
        return cls(
            ops=tuple(CircuitOp.from_dict(o) for o in d["ops"]),
            variant=d["variant"],
            gate_mode=d.get("gate_mode", "ideal"),
            slot_ends=tuple(d.get("slot_ends", ())),
            num_qubits=d.get("num_qubits", NUM_QUBITS),
        )


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class ExperimentConfig:
    variant: str
    data_input: str | None = None
    injection: InjectionSite | None = None
    shots: int = 960
    gate_mode: str = "ideal"
    seed: int = 0
    bases: tuple[str, ...] | None = None  # measurement setting for gme variants

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.gate_mode not in GATE_MODES:
            raise ValueError(f"unknown gate mode {self.gate_mode!r}")
        if self.shots < 1:
            raise ValueError("shots must be positive")
        pcm = self.variant.startswith("pcm")
        if self.injection is not None and self.variant != "pcm_inject":
            raise ValueError("an injection site is only valid for pcm_inject")
        if self.data_input is not None:
            if not pcm:
                raise ValueError("data_input is only valid for pcm variants")
            if len(self.data_input) != 4 or set(self.data_input) - {"0", "1"}:
                raise ValueError(f"data_input must be a 4-bit string, got {self.data_input!r}")
        if self.bases is not None:
            if len(self.bases) != NUM_QUBITS or set(self.bases) - {"X", "Y", "Z"}:
                raise ValueError("bases must give X, Y or Z for each of the 6 qubits")

    def echo(self) -> dict:
        d = {
            "variant": self.variant,
            "data_input": self.data_input,
            "shots": self.shots,
            "gate_mode": self.gate_mode,
            "seed": self.seed,
            "bases": list(self.bases) if self.bases else None,
            "injection": None,
        }
        if self.injection is not None:
            d["injection"] = {"position": self.injection.position, "error": str(self.injection.error)}
        return d


# ---------------------------------------------------------------------------
# builders


class _Builder:
    def __init__(self, gate_mode: str):
        self.mode = gate_mode
        self.ops: list[CircuitOp] = [CircuitOp("PrepZero", tuple(range(NUM_QUBITS)))]
        self.alpha = [0.0] * NUM_QUBITS
        self.slot_ends: list[int] = []

    def mark_slot(self):
        self.slot_ends.append(len(self.ops))

    def rotate(self, q: int, theta: float, phi: float, tag: str = ""):
        self.ops.append(CircuitOp("Rotation", (q,), theta, _wrap(phi + self.alpha[q]), tag=tag))

    def echo(self, a: int, b: int):
        # R(pi,-pi/2) on both ions: Y Rz(alpha) = Rz(-alpha) Y
        self.ops.append(CircuitOp("PairRotation", (a, b), np.pi, -HALF_PI, tag="echo"))
        for q in (a, b):
            self.alpha[q] = -self.alpha[q]

    def entangle(self, a: int, b: int):
        self.ops.append(CircuitOp("Entangle", (a, b), mode=self.mode, tag="gate"))
        for q in (a, b):
            if self.mode == "ideal":
                self.alpha[q] -= HALF_PI
            else:
                self.alpha[q] = -self.alpha[q] - HALF_PI

    def dephase(self, q: int):
        self.ops.append(CircuitOp("Dephase", (q,), tag="exposure"))

    def inject(self, error: PauliString):
        self.ops.append(CircuitOp("Inject", tuple(error.support()), pauli=str(error), tag="inject"))

    def analyse(self, q: int, basis: str):
        if basis != "Z":
            self.rotate(q, HALF_PI, ANALYSIS_PHASE[basis], tag="analysis")

    def measure(self, q: int, basis: str, frame: Mapping[int, str]):
        invert = anticommutes(frame.get(q, "I"), basis)
        self.ops.append(CircuitOp("Measure", (q,), basis=basis, invert=invert, tag="readout"))

    def circuit(self, variant: str) -> Circuit:
        return Circuit(tuple(self.ops), variant, self.mode, tuple(self.slot_ends))


def build_pcm_circuit(cfg: ExperimentConfig) -> Circuit:
    if cfg.variant not in ("pcm_logical", "pcm_inject"):
        raise ValueError(f"build_pcm_circuit needs a pcm variant, got {cfg.variant!r}")
    b = _Builder(cfg.gate_mode)
    bits = cfg.data_input or "0000"
    for q, bit in zip(DATA, bits):
        if bit == "1":
            b.rotate(q, np.pi, -HALF_PI, tag="prep")
    for q in (S, F):
        b.rotate(q, HALF_PI, -HALF_PI, tag="prep")
        b.dephase(q)
    b.mark_slot()
    for k, (i, j) in enumerate(SLOT_PAIRS):
        if cfg.injection is not None and cfg.injection.position == k:
            b.inject(cfg.injection.error)
        b.entangle(i, j)
        b.mark_slot()
    if cfg.injection is not None:
        if not 0 <= cfg.injection.position < NUM_POSITIONS:
            raise IndexError(f"injection position {cfg.injection.position} out of range")
        if cfg.injection.position == len(SLOT_PAIRS):
            b.inject(cfg.injection.error)
    frame = READOUT_FRAME[("pcm", cfg.gate_mode)]
    for q in (S, F):
        b.analyse(q, "X")
    for q in DATA:
        b.dephase(q)
        b.measure(q, "Z", frame)
    for q in (S, F):
        b.measure(q, "X", frame)
    return b.circuit(cfg.variant)


def _gme_bases(cfg: ExperimentConfig) -> tuple[str, ...]:
    if cfg.bases is not None:
        return cfg.bases
    return ("Z",) * 4 + ("X", "Z")


def _build_gme(cfg: ExperimentConfig, six_qubit: bool) -> Circuit:
    b = _Builder(cfg.gate_mode)
    bases = _gme_bases(cfg)
    family = "gme6" if six_qubit else "gme4"
    frame = READOUT_FRAME[(family, cfg.gate_mode)]
    for q in (S, F):
        b.rotate(q, HALF_PI, -HALF_PI, tag="prep")
        b.dephase(q)
    b.mark_slot()
    for k, (i, j) in enumerate(SLOT_PAIRS):
        if i in DATA:
            # data leave |0> right before their gate and are analysed right after
            b.rotate(i, 3 * HALF_PI, -HALF_PI, tag="prep")
            b.entangle(i, j)
            b.analyse(i, bases[i])
        elif six_qubit:
            b.entangle(i, j)
        else:
            b.echo(i, j)
        if six_qubit and k == 2:
            b.rotate(S, HALF_PI, 0.0, tag="gme")
        b.mark_slot()
    if six_qubit:
        b.rotate(S, 3 * HALF_PI, -HALF_PI, tag="gme")
    for q in (S, F):
        b.analyse(q, bases[q])
    for q in DATA:
        b.dephase(q)
        b.measure(q, bases[q], frame)
    for q in (S, F):
        b.measure(q, bases[q], frame)
    return b.circuit(cfg.variant)


def build_gme4_circuit(cfg: ExperimentConfig) -> Circuit:
    """Data start in |+>, the s-f gates are off but their echo pulses stay."""
    if cfg.variant != "gme4":
        raise ValueError(f"build_gme4_circuit needs variant gme4, got {cfg.variant!r}")
    return _build_gme(cfg, six_qubit=False)


def build_gme6_circuit(cfg: ExperimentConfig) -> Circuit:
    if cfg.variant != "gme6":
        raise ValueError(f"build_gme6_circuit needs variant gme6, got {cfg.variant!r}")
    return _build_gme(cfg, six_qubit=True)


def build_circuit(cfg: ExperimentConfig) -> Circuit:
    if cfg.variant.startswith("pcm"):
        return build_pcm_circuit(cfg)
    if cfg.variant == "gme4":
        return build_gme4_circuit(cfg)
    return build_gme6_circuit(cfg)


# ---------------------------------------------------------------------------
# execution


def _rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


class _Engine:
    """Runs a circuit on a block of trajectories."""

    def __init__(self, circuit: Circuit, noise: NoiseParams):
        self.c = circuit
        self.noise = noise
        self.n = circuit.num_qubits
        self.zz_half = {}
        self.zz_quarter = {}
        self.echo = rotation_matrix(np.pi, -HALF_PI)

    def _zz(self, table, i, j, phi):
        key = (i, j)
        if key not in table:
            table[key] = zz_phases(self.n, i, j, phi)
        return table[key]

    def unitary_part(self, rows: int, rng: np.random.Generator | None) -> np.ndarray:
        n, noise = self.n, self.noise
        amps = np.zeros((rows, 2**n), dtype=complex)
        amps[:, 0] = 1.0
        offset_done = [False] * n

        def settle_offset(q):
            if not offset_done[q]:
                offset_done[q] = True
                if noise.z_offsets[q]:
                    amps[:] = apply_1q(amps, n, q, _rz(noise.z_offsets[q]))

        for op in self.c.ops:
            if op.kind == "PrepZero":
                continue
            if op.kind == "Rotation":
                (q,) = op.qubits
                if op.tag == "analysis":
                    settle_offset(q)
                amps = apply_1q(amps, n, q, rotation_matrix(op.theta, op.phi))
                if rng is not None:
                    depolarize_single_batch(amps, n, q, noise.p1, rng)
            elif op.kind == "PairRotation":
                u = rotation_matrix(op.theta, op.phi)
                for q in op.qubits:
                    amps = apply_1q(amps, n, q, u)
                if rng is not None:
                    for q in op.qubits:
                        depolarize_single_batch(amps, n, q, noise.p1, rng)
            elif op.kind == "Entangle":
                i, j = op.qubits
                if op.mode == "hardware":
                    quarter = self._zz(self.zz_quarter, i, j, np.pi / 4)
                    amps *= quarter
                    amps = apply_1q(apply_1q(amps, n, i, self.echo), n, j, self.echo)
                    amps *= quarter
                else:
                    amps *= self._zz(self.zz_half, i, j, HALF_PI)
                if rng is not None:
                    if noise.gate_error_model == "zz_overrotation":
                        if noise.sigma_phi > 0:
                            delta = rng.normal(0.0, noise.sigma_phi, size=rows)
                            parity = z_signs(n, i) * z_signs(n, j)
                            amps *= np.exp(0.5j * delta[:, None] * parity[None, :])
                    else:
                        depolarize_pair_batch(amps, n, (i, j), noise.p2, rng)
            elif op.kind == "Inject":
                amps = apply_pauli_kernel(amps, PauliString.parse(op.pauli))
            elif op.kind == "Dephase":
                if rng is not None:
                    dephase_batch(amps, n, op.qubits[0], noise.p_z_idle, rng)
            elif op.kind == "Measure":
                settle_offset(op.qubits[0])
        return amps

    def measured(self) -> list[CircuitOp]:
        return [op for op in self.c.ops if op.kind == "Measure"]

    def run(self, rows: int, rng: np.random.Generator) -> np.ndarray:
        noisy = not self.noise.is_noiseless
        amps = self.unitary_part(rows, rng if noisy else None)
        probs = np.abs(amps) ** 2
        cum = np.cumsum(probs, axis=1)
        u = rng.random(rows) * cum[:, -1]
        index = np.minimum((cum < u[:, None]).sum(axis=1), 2**self.n - 1)
        outcomes = np.ones((rows, self.n), dtype=np.int8)
        for q in range(self.n):
            outcomes[:, q] = 1 - 2 * ((index >> q) & 1)
        for op in self.measured():
            q = op.qubits[0]
            if noisy:
                spam_flip_batch(outcomes, q, self.noise.spam[q], rng)
            if op.invert:
                outcomes[:, q] *= -1
        return outcomes


def final_state(circuit: Circuit) -> StateVector:
    """Noiseless state right before readout (analysis pulses applied)."""
    amps = _Engine(circuit, noiseless()).unitary_part(1, None)[0]
    return StateVector(circuit.num_qubits, amps)


def exact_tallies(circuit: Circuit) -> ShotTallies:
    return ShotTallies(Counter(outcome_distribution(circuit)), circuit.bases, {}, exact=True)


def outcome_distribution(circuit: Circuit) -> dict[tuple[int, ...], float]:
    """Exact noiseless distribution over recorded outcome vectors."""
    probs = final_state(circuit).probabilities()
    invert = [False] * circuit.num_qubits
    for op in circuit.ops:
        if op.kind == "Measure":
            invert[op.qubits[0]] = op.invert
    dist: dict[tuple[int, ...], float] = {}
    for index, p in enumerate(probs):
        if p < 1e-15:
            continue
        key = tuple(
            (1 - 2 * ((index >> q) & 1)) * (-1 if invert[q] else 1) for q in range(circuit.num_qubits)
        )
        dist[key] = dist.get(key, 0.0) + float(p)
    return dist


@dataclass
class ShotTallies:
    counts: Counter = field(default_factory=Counter)
    bases: tuple[str, ...] = ()
    config: dict = field(default_factory=dict)
    exact: bool = False  # counts are probabilities, not samples

    @property
    def shots(self) -> int:
        return sum(self.counts.values())

    def merge(self, other: "ShotTallies") -> "ShotTallies":
        if self.bases and other.bases and self.bases != other.bases:
            raise ValueError("cannot merge tallies taken in different bases")
        return ShotTallies(self.counts + other.counts, self.bases or other.bases, dict(self.config), self.exact)

    def filter(self, qubit: int, value: int) -> "ShotTallies":
        kept = Counter({k: v for k, v in self.counts.items() if k[qubit] == value})
        return ShotTallies(kept, self.bases, dict(self.config), self.exact)

    def rate(self, qubit: int, value: int) -> float:
        total = self.shots
        if total == 0:
            raise ValueError("no shots")
        return sum(v for k, v in self.counts.items() if k[qubit] == value) / total

    def mean_product(self, qubits: Iterable[int]) -> float:
        qubits = list(qubits)
        total = self.shots
        if total == 0:
            raise ValueError("no shots")
        acc = 0
        for k, v in self.counts.items():
            acc += v * math.prod(k[q] for q in qubits)
        return acc / total

    def to_dict(self) -> dict:
        return {
            "bases": list(self.bases),
            "config": self.config,
            "counts": {"".join("+" if m > 0 else "-" for m in k): v for k, v in sorted(self.counts.items())},
        }


CHUNK = 8192


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    """Independent stream per (seed, chunk index)."""
    return np.random.default_rng(np.random.SeedSequence([seed & (2**64 - 1), chunk]))


def run_shots(
    circuit: Circuit,
    noise: NoiseParams | None = None,
    shots: int = 960,
    seed: int = 0,
    config: dict | None = None,
) -> ShotTallies:
    if shots < 1:
        raise ValueError("shots must be positive")
    engine = _Engine(circuit, noise or noiseless())
    counts: Counter = Counter()
    for chunk, start in enumerate(range(0, shots, CHUNK)):
        rows = min(CHUNK, shots - start)
        out = engine.run(rows, chunk_rng(seed, chunk))
        keys, freq = np.unique(out, axis=0, return_counts=True)
        for key, c in zip(keys, freq):
            counts[tuple(int(x) for x in key)] += int(c)
    return ShotTallies(counts, circuit.bases, dict(config or {}))


def run_experiment(cfg: ExperimentConfig, noise: NoiseParams | None = None) -> ShotTallies:
    return run_shots(build_circuit(cfg), noise, cfg.shots, cfg.seed, cfg.echo())


def derive_seed(seed: int, *labels) -> int:
    """Stable sub-seed for a labelled sub-experiment."""
    text = json.dumps([seed, *labels], separators=(",", ":"))
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "little")


# ---------------------------------------------------------------------------
# statistics


class Estimate(NamedTuple):
    value: float
    stderr: float


def binomial_stderr(p: float, n: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / n) if n else float("nan")


def input_parity(bits: str) -> int:
    """+1 for even, -1 for odd number of ones."""
    return 1 if bits.count("1") % 2 == 0 else -1


def parity_fidelity(
    tallies: Mapping[str, ShotTallies], inputs: Sequence[str] | None = None
) -> Estimate:
    """Mean probability of the correct syndrome, conditioned on input parity.

    Even inputs should read M_s = -1 and odd inputs M_s = +1.
    """
    inputs = list(inputs if inputs is not None else tallies)
    hits = {1: 0, -1: 0}
    shots = {1: 0, -1: 0}
    for bits in inputs:
        t = tallies[bits]
        par = input_parity(bits)
        want = -1 if par == 1 else 1
        shots[par] += t.shots
        hits[par] += sum(v for k, v in t.counts.items() if k[S] == want)
    missing = [label for label, par in (("even", 1), ("odd", -1)) if shots[par] == 0]
    if missing:
        raise ValueError(f"no shots for the {' and '.join(missing)} parity class")
    p_even = hits[1] / shots[1]
    p_odd = hits[-1] / shots[-1]
    value = 0.5 * (p_even + p_odd)
    err = 0.5 * math.hypot(binomial_stderr(p_even, shots[1]), binomial_stderr(p_odd, shots[-1]))
    return Estimate(value, err)


def flag_postselect(tallies: ShotTallies) -> tuple[float, ShotTallies]:
    """Keep shots whose flag reads M_f = -1."""
    total = tallies.shots
    if total == 0:
        raise ValueError("no shots to post-select")
    kept = tallies.filter(F, -1)
    return kept.shots / total, kept


def flag_gain(tallies: Mapping[str, ShotTallies], inputs: Sequence[str] | None = None) -> Estimate:
    """Flag-conditioned minus raw parity fidelity, with a paired standard error.

    The kept shots are a subset of all shots, so the two fidelities are
    correlated; the error follows from the delta method on the multinomial
    (correct, flagged) counts of each parity class.
    """
    inputs = list(inputs if inputs is not None else tallies)
    cells = {1: np.zeros(4), -1: np.zeros(4)}  # correct&kept, correct&flagged, wrong&kept, wrong&flagged
    for bits in inputs:
        par = input_parity(bits)
        want = -1 if par == 1 else 1
        for k, v in tallies[bits].counts.items():
            cells[par][(0 if k[S] == want else 2) + (0 if k[F] == -1 else 1)] += v
    value, var = 0.0, 0.0
    for par, c in cells.items():
        n = c.sum()
        if n == 0 or c[0] + c[2] == 0:
            raise ValueError("need kept shots in both parity classes")
        pi = c / n
        kept = pi[0] + pi[2]
        value += 0.5 * (pi[0] / kept - (pi[0] + pi[1]))
        g = np.array([pi[2] / kept**2 - 1, -1.0, -pi[0] / kept**2, 0.0])
        cov = np.diag(pi) - np.outer(pi, pi)
        var += 0.25 * float(g @ cov @ g) / n
    return Estimate(float(value), math.sqrt(max(var, 0.0)))


def syndrome_rate(tallies: ShotTallies, value: int = -1) -> Estimate:
    p = tallies.rate(S, value)
    return Estimate(p, binomial_stderr(p, tallies.shots))


ALL_INPUTS = tuple(format(k, "04b")[::-1] for k in range(16))

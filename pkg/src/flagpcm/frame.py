"""Pauli-frame propagation of a single injected error through the PCM circuit.

This is deliberately independent of the state-vector code: conjugation is
done with Pauli algebra only, so the two can be checked against each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .pauli import PauliString, anticommutes
from .sim import DATA, F, S

FRAME_KINDS = ("ZZ_half", "LocalRot", "PairEcho")


class NonCliffordError(ValueError):
    pass


def _quarter_turns(angle: float) -> int:
    k = angle / (np.pi / 2)
    r = round(k)
    if abs(k - r) > 1e-9:
        raise NonCliffordError(f"angle {angle} is not a multiple of pi/2")
    return r % 4


@dataclass(frozen=True)
class FrameGate:
    kind: str
    qubits: tuple[int, ...]
    theta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if self.kind not in FRAME_KINDS:
            raise ValueError(f"unknown frame gate kind {self.kind!r}")
        want = 1 if self.kind == "LocalRot" else 2
        if len(self.qubits) != want:
            raise ValueError(f"{self.kind} acts on {want} qubit(s)")
        if self.kind == "LocalRot":
            _quarter_turns(self.theta)
            _quarter_turns(self.phi)


@dataclass(frozen=True)
class InjectionSite:
    """Error inserted after ``position`` composite gates (0 = before the first)."""

    position: int
    error: PauliString

    def __post_init__(self):
        if self.error.weight() > 1:
            raise ValueError("injected errors must act on a single qubit")


def _rotate(p: PauliString, generator: PauliString, theta_quarters: int) -> PauliString:
    """exp(-i theta/2 G) P exp(+i theta/2 G) for a Hermitian Pauli G."""
    if p.commutes_with(generator):
        return p
    # anticommuting: U P U^dag = (cos theta - i sin theta G) P
    cos_t = (1, 0, -1, 0)[theta_quarters]
    sin_t = (0, 1, 0, -1)[theta_quarters]
    if cos_t:
        return p if cos_t > 0 else -p
    return (generator * p).times_phase(3 if sin_t > 0 else 1)


def _local_generator(n: int, q: int, phi_quarters: int) -> PauliString:
    # cos(phi) X + sin(phi) Y for phi in {0, pi/2, pi, 3pi/2}
    letter, sign = (("X", 1), ("Y", 1), ("X", -1), ("Y", -1))[phi_quarters]
    return PauliString.single(n, q, letter, sign)


def conjugate(p: PauliString, g: FrameGate) -> PauliString:
    """Return g P g^dagger with the phase tracked exactly."""
    n = p.num_qubits
    if g.kind == "ZZ_half":
        i, j = g.qubits
        zz = PauliString.from_map(n, {i: "Z", j: "Z"})
        # exp(i pi/4 ZZ) = exp(-i theta/2 ZZ) with theta = -pi/2
        return _rotate(p, zz, 3)
    if g.kind == "LocalRot":
        (q,) = g.qubits
        return _rotate(p, _local_generator(n, q, _quarter_turns(g.phi)), _quarter_turns(g.theta))
    for q in g.qubits:
        p = _rotate(p, _local_generator(n, q, 3), 2)
    return p


def propagate(error: PauliString, gates: Iterable[FrameGate]) -> PauliString:
    for g in gates:
        error = conjugate(error, g)
    return error


def propagate_to_end(circuit, site: InjectionSite) -> PauliString:
    """Equivalent Pauli at the end of the gate sequence (before analysis pulses).

    ``circuit`` must provide ``frame_gates_after(position)``.
    """
    if site.error.num_qubits != circuit.num_qubits:
        raise ValueError("error does not match the register size")
    return propagate(site.error, circuit.frame_gates_after(site.position))


@dataclass(frozen=True)
class ReadoutEffect:
    syndrome_flip: bool
    flag_flip: bool
    data_z_weight: int
    data_flips: tuple[bool, ...] = ()


def predict_readout_effect(
    final: PauliString,
    syndrome: int = S,
    flag: int = F,
    data: Sequence[int] = DATA,
) -> ReadoutEffect:
    """Readout flips caused by ``final``: X-basis on syndrome/flag, Z on data."""
    return ReadoutEffect(
        syndrome_flip=anticommutes(final[syndrome], "X"),
        flag_flip=anticommutes(final[flag], "X"),
        data_z_weight=sum(final[q] in "ZY" for q in data),
        data_flips=tuple(anticommutes(final[q], "Z") for q in data),
    )

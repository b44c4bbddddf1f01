"""Segmented linear trap: register layout, transport primitives and their rules."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

QUBITS = ("d1", "d2", "d3", "d4", "s", "f")

TRANSPORT_KINDS = ("Move", "Separate", "Merge", "Swap", "Wait")
PRIMITIVE_KINDS = TRANSPORT_KINDS + ("Laser",)
LASER_KINDS = ("entangle", "rotation", "cool", "pump", "shelve", "detect")
RULES = (
    "gap",
    "liz_only",
    "occupancy",
    "crossing",
    "bounds",
    "identity",
    "unknown_well",
    "parallel",
    "settle",
    "gate_order",
)


class ConstraintViolation(ValueError):
    def __init__(self, rule: str, message: str):
        super().__init__(f"{rule}: {message}")
        self.rule = rule
        self.message = message


@dataclass(frozen=True)
class TrapSpec:
    num_segments: int = 32
    liz_index: int = 19
    segment_pitch_mm: float = 0.2
    min_gap_segments: int = 2  # empty segments required between two wells
    max_ions_per_well: int = 2
    max_extent_segments: int = 24
    parallel_moves: bool = True

    def __post_init__(self):
        if not 0 <= self.liz_index < self.num_segments:
            raise ValueError("liz_index must lie inside the trap")
        if self.min_gap_segments < 0:
            raise ValueError("min_gap_segments must be non-negative")
        if self.max_ions_per_well < 1:
            raise ValueError("max_ions_per_well must be at least 1")

    @property
    def spacing(self) -> int:
        """Smallest allowed distance between the segments of two wells."""
        return self.min_gap_segments + 1

    @classmethod
    def from_dict(cls, d: Mapping) -> "TrapSpec":
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ValueError(f"unknown trap parameters: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DurationTable:
    """Durations in microseconds."""

    move_per_segment: float = 20.9
    settle_before_laser: float = 50.6
    separate: float = 100.0
    merge: float = 100.0
    swap: float = 60.0
    entangling_gate: float = 120.0
    local_rotation: float = 4.0
    shelving_per_pair: float = 400.0
    detection_per_ion: float = 800.0
    doppler_per_pair: float = 2000.0
    sideband_per_pair: float = 4000.0
    sideband_repeat_per_pair: float = 1000.0
    pump_sequence: float = 60.0

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) <= 0:
                raise ValueError(f"{f.name} must be positive")

    @classmethod
    def from_dict(cls, d: Mapping) -> "DurationTable":
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ValueError(f"unknown duration keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


def load_json_config(path: str | Path, cls):
    with open(path, encoding="utf-8") as fh:
        return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class Well:
    segment: int
    ions: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "ions", tuple(self.ions))


@dataclass(frozen=True)
class TrapState:
    wells: tuple[Well, ...]

    def __post_init__(self):
        object.__setattr__(self, "wells", tuple(sorted(self.wells, key=lambda w: w.segment)))

    @classmethod
    def from_pairs(cls, items: Iterable[tuple[int, Sequence[str]]]) -> "TrapState":
        return cls(tuple(Well(seg, tuple(ions)) for seg, ions in items))

    def well_at(self, segment: int) -> Well | None:
        for w in self.wells:
            if w.segment == segment:
                return w
        return None

    def index_at(self, segment: int) -> int | None:
        for k, w in enumerate(self.wells):
            if w.segment == segment:
                return k
        return None

    def well_of(self, qubit: str) -> int:
        for k, w in enumerate(self.wells):
            if qubit in w.ions:
                return k
        raise KeyError(qubit)

    @property
    def configuration(self) -> tuple[tuple[str, ...], ...]:
        """Left-to-right ion grouping, positions dropped."""
        return tuple(w.ions for w in self.wells)

    @property
    def positions(self) -> tuple[int, ...]:
        return tuple(w.segment for w in self.wells)

    @property
    def extent(self) -> int:
        if not self.wells:
            return 0
        return self.wells[-1].segment - self.wells[0].segment

    def ions(self) -> list[str]:
        return [q for w in self.wells for q in w.ions]

    def to_dict(self) -> list[dict]:
        return [{"segment": w.segment, "ions": list(w.ions)} for w in self.wells]

    @classmethod
    def from_dict(cls, d: Sequence[Mapping]) -> "TrapState":
        return cls.from_pairs((w["segment"], w["ions"]) for w in d)


def state_violations(state: TrapState, spec: TrapSpec, qubits: Sequence[str] | None = None) -> list[ConstraintViolation]:
    out = []
    for w in state.wells:
        if not 0 <= w.segment < spec.num_segments:
            out.append(ConstraintViolation("bounds", f"well at segment {w.segment} outside the trap"))
        if not 1 <= len(w.ions) <= spec.max_ions_per_well:
            out.append(ConstraintViolation("occupancy", f"well at {w.segment} holds {len(w.ions)} ions"))
    for a, b in zip(state.wells, state.wells[1:]):
        if b.segment - a.segment < spec.spacing:
            out.append(
                ConstraintViolation("gap", f"wells at {a.segment} and {b.segment} closer than {spec.spacing} segments")
            )
    ions = state.ions()
    if len(set(ions)) != len(ions) or (qubits is not None and sorted(ions) != sorted(qubits)):
        out.append(ConstraintViolation("identity", f"register holds {sorted(ions)}"))
    return out


def check_state(state: TrapState, spec: TrapSpec) -> None:
    bad = state_violations(state, spec)
    if bad:
        raise bad[0]


def initial_layout(spec: TrapSpec | None = None) -> TrapState:
    """Pairs (d2,d1), (s,f), (d3,d4) with the s-f pair in the LIZ."""
    spec = spec or TrapSpec()
    liz, sp = spec.liz_index, spec.spacing
    return TrapState.from_pairs([(liz - sp, ("d2", "d1")), (liz, ("s", "f")), (liz + sp, ("d3", "d4"))])


@dataclass(frozen=True)
class PrimitiveOp:
    kind: str
    segment: int | None = None  # well acted on, by its segment before the op
    to_segment: int | None = None  # Move destination
    laser: str = ""
    targets: tuple[str, ...] = ()
    duration: float = 0.0
    phase: str = ""
    label: str = ""

    def __post_init__(self):
        if self.kind not in PRIMITIVE_KINDS:
            raise ValueError(f"unknown primitive {self.kind!r}")
        if self.kind == "Laser" and self.laser not in LASER_KINDS:
            raise ValueError(f"unknown laser operation {self.laser!r}")
        if self.kind == "Move" and (self.segment is None or self.to_segment is None):
            raise ValueError("Move needs segment and to_segment")
        object.__setattr__(self, "targets", tuple(self.targets))

    @property
    def is_transport(self) -> bool:
        return self.kind in TRANSPORT_KINDS

    @property
    def distance(self) -> int:
        return abs(self.to_segment - self.segment) if self.kind == "Move" else 0

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        for name in ("segment", "to_segment"):
            if getattr(self, name) is not None:
                d[name] = getattr(self, name)
        if self.kind == "Laser":
            d["laser"] = self.laser
            d["targets"] = list(self.targets)
        d["duration_us"] = self.duration
        d["phase"] = self.phase
        if self.label:
            d["label"] = self.label
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "PrimitiveOp":
        d = dict(d)
        d["duration"] = d.pop("duration_us", d.get("duration", 0.0))
        d["targets"] = tuple(d.get("targets", ()))
        return cls(**d)

    def with_phase(self, phase: str) -> "PrimitiveOp":
        return replace(self, phase=phase)


def _require_liz(state: TrapState, spec: TrapSpec, op: PrimitiveOp) -> int:
    if op.segment != spec.liz_index:
        raise ConstraintViolation("liz_only", f"{op.kind} requested at segment {op.segment}, LIZ is {spec.liz_index}")
    k = state.index_at(spec.liz_index)
    if k is None:
        raise ConstraintViolation("unknown_well", f"no well in the LIZ for {op.kind}")
    return k


def _with_wells(state: TrapState, wells: list[Well], spec: TrapSpec) -> TrapState:
    new = TrapState(tuple(wells))
    check_state(new, spec)
    return new


def apply_moves(state: TrapState, moves: Sequence[PrimitiveOp], spec: TrapSpec) -> TrapState:
    """Run concurrent Moves one segment hop at a time, checking every hop."""
    starts = list(state.positions)
    goals = list(starts)
    seen = set()
    for op in moves:
        k = state.index_at(op.segment)
        if k is None:
            raise ConstraintViolation("unknown_well", f"no well at segment {op.segment} to move")
        if k in seen:
            raise ConstraintViolation("parallel", f"well at {op.segment} moved twice in one step")
        if not 0 <= op.to_segment < spec.num_segments:
            raise ConstraintViolation("bounds", f"move target {op.to_segment} outside the trap")
        seen.add(k)
        goals[k] = op.to_segment
    hops = max((abs(g - s) for s, g in zip(starts, goals)), default=0)
    for t in range(1, hops + 1):
        now = [s + max(-t, min(t, g - s)) for s, g in zip(starts, goals)]
        for a in range(len(now) - 1):
            if now[a + 1] <= now[a]:
                raise ConstraintViolation("crossing", f"wells from {starts[a]} and {starts[a + 1]} collide at hop {t}")
            if now[a + 1] - now[a] < spec.spacing:
                raise ConstraintViolation(
                    "gap", f"wells from {starts[a]} and {starts[a + 1]} within {now[a + 1] - now[a]} segments at hop {t}"
                )
    wells = [Well(g, w.ions) for w, g in zip(state.wells, goals)]
    return _with_wells(state, wells, spec)


def apply_primitive(state: TrapState, op: PrimitiveOp, spec: TrapSpec | None = None) -> TrapState:
    spec = spec or TrapSpec()
    if op.kind == "Move":
        return apply_moves(state, [op], spec)
    if op.kind == "Wait":
        return state
    liz = spec.liz_index
    if op.kind == "Merge":
        if op.segment not in (None, liz):
            raise ConstraintViolation("liz_only", f"Merge requested at segment {op.segment}")
        left, right = state.index_at(liz - spec.spacing), state.index_at(liz + spec.spacing)
        if left is None or right is None or right != left + 1:
            raise ConstraintViolation("liz_only", "Merge needs two wells straddling the LIZ")
        a, b = state.wells[left], state.wells[right]
        if len(a.ions) + len(b.ions) > spec.max_ions_per_well:
            raise ConstraintViolation("occupancy", f"merging {a.ions} and {b.ions} exceeds the well capacity")
        wells = list(state.wells[:left]) + [Well(liz, a.ions + b.ions)] + list(state.wells[right + 1:])
        return _with_wells(state, wells, spec)
    k = _require_liz(state, spec, op)
    w = state.wells[k]
    if op.kind == "Swap":
        if len(w.ions) != 2:
            raise ConstraintViolation("occupancy", "Swap needs two ions in the well")
        wells = list(state.wells)
        wells[k] = Well(liz, w.ions[::-1])
        return _with_wells(state, wells, spec)
    if op.kind == "Separate":
        if len(w.ions) != 2:
            raise ConstraintViolation("occupancy", "Separate needs two ions in the well")
        lo, hi = liz - spec.spacing, liz + spec.spacing
        if lo < 0 or hi >= spec.num_segments:
            raise ConstraintViolation("bounds", "separated wells would leave the trap")
        wells = list(state.wells[:k]) + [Well(lo, w.ions[:1]), Well(hi, w.ions[1:])] + list(state.wells[k + 1:])
        return _with_wells(state, wells, spec)
    # Laser: the beam addresses the whole LIZ well
    if set(op.targets) != set(w.ions):
        raise ConstraintViolation("liz_only", f"laser targets {list(op.targets)} but the LIZ holds {list(w.ions)}")
    if op.laser == "entangle" and len(w.ions) != 2:
        raise ConstraintViolation("occupancy", "entangling gate needs two co-trapped ions")
    return state


_LASER_FIELD = {
    "entangle": "entangling_gate",
    "rotation": "local_rotation",
    "pump": "pump_sequence",
    "shelve": "shelving_per_pair",
    "detect": "detection_per_ion",
}
_COOL_FIELD = {"doppler": "doppler_per_pair", "sideband-1": "sideband_per_pair", "sideband-2": "sideband_repeat_per_pair"}


def op_duration(op: PrimitiveOp, durations: DurationTable) -> float:
    if op.kind == "Move":
        return op.distance * durations.move_per_segment
    if op.kind in ("Separate", "Merge", "Swap"):
        return getattr(durations, op.kind.lower())
    if op.kind == "Wait":
        return durations.settle_before_laser
    name = _COOL_FIELD.get(op.label) if op.laser == "cool" else _LASER_FIELD.get(op.laser)
    return getattr(durations, name) if name else op.duration

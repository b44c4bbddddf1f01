"""Schedules of parallel primitive groups, their JSON form and timing budget."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .trap import DurationTable, PrimitiveOp, TrapSpec, TrapState, apply_moves, apply_primitive, op_duration

PHASES = ("prep", "gate_sequence", "readout")


@dataclass(frozen=True)
class Schedule:
    steps: tuple[tuple[PrimitiveOp, ...], ...]
    initial: TrapState | None = None
    gates: tuple[tuple[str, ...], ...] = ()  # entangling pairs in the requested order

    def ops(self) -> Iterable[PrimitiveOp]:
        for step in self.steps:
            yield from step

    def count(self, kind: str | None = None) -> int:
        return sum(1 for op in self.ops() if kind is None or op.kind == kind)

    def shuttle_count(self) -> int:
        return sum(1 for op in self.ops() if op.kind in ("Move", "Separate", "Merge", "Swap"))

    def entangle_order(self) -> list[tuple[str, ...]]:
        return [op.targets for op in self.ops() if op.kind == "Laser" and op.laser == "entangle"]

    def phase(self, name: str) -> "Schedule":
        steps = tuple(s for s in self.steps if s and s[0].phase == name)
        gates = self.gates if name == "gate_sequence" else ()
        return Schedule(steps, None, gates)

    def __add__(self, other: "Schedule") -> "Schedule":
        return Schedule(self.steps + other.steps, self.initial or other.initial, self.gates + other.gates)

    def states(self, spec: TrapSpec | None = None) -> list[TrapState]:
        """State after each step, starting from ``initial``."""
        spec = spec or TrapSpec()
        state = self.initial
        out = [state]
        for step in self.steps:
            if step[0].kind == "Move":
                state = apply_moves(state, step, spec)
            else:
                for op in step:
                    state = apply_primitive(state, op, spec)
            out.append(state)
        return out

    def max_extent(self, spec: TrapSpec | None = None) -> int:
        return max(s.extent for s in self.states(spec))

    def to_dict(self) -> dict:
        return {
            "initial": self.initial.to_dict() if self.initial is not None else None,
            "gates": [list(g) for g in self.gates],
            "steps": [[op.to_dict() for op in step] for step in self.steps],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: Mapping) -> "Schedule":
        if "steps" not in d:
            raise ValueError("schedule document has no 'steps'")
        initial = TrapState.from_dict(d["initial"]) if d.get("initial") else None
        steps = tuple(tuple(PrimitiveOp.from_dict(o) for o in step) for step in d["steps"])
        return cls(steps, initial, tuple(tuple(g) for g in d.get("gates", ())))


@dataclass
class TimingBudget:
    phases: dict[str, dict[str, float]] = field(
        default_factory=lambda: {p: {"shuttle_us": 0.0, "laser_us": 0.0} for p in PHASES}
    )

    def phase_total(self, phase: str) -> float:
        return sum(self.phases[phase].values())

    @property
    def total_us(self) -> float:
        return sum(self.phase_total(p) for p in self.phases)

    def laser_share(self, phase: str = "gate_sequence") -> float:
        t = self.phase_total(phase)
        return self.phases[phase]["laser_us"] / t if t else 0.0

    def phase_share(self, phase: str = "gate_sequence") -> float:
        return self.phase_total(phase) / self.total_us if self.total_us else 0.0

    def __add__(self, other: "TimingBudget") -> "TimingBudget":
        out = TimingBudget()
        for p in PHASES:
            for c in ("shuttle_us", "laser_us"):
                out.phases[p][c] = self.phases[p][c] + other.phases[p][c]
        return out

    def to_dict(self) -> dict:
        total = self.total_us
        return {
            "phases": self.phases,
            "total_us": total,
            "percent": {
                p: {
                    "of_total": 100 * self.phase_total(p) / total if total else 0.0,
                    "laser_within_phase": 100 * self.laser_share(p),
                    "shuttle_within_phase": 100 * (1 - self.laser_share(p)) if self.phase_total(p) else 0.0,
                }
                for p in PHASES
            },
        }

    def table(self) -> str:
        rows = [f"{'phase':<14}{'shuttle_us':>12}{'laser_us':>12}{'total_us':>12}{'% total':>9}{'% laser':>9}"]
        for p in PHASES:
            ph = self.phases[p]
            rows.append(
                f"{p:<14}{ph['shuttle_us']:>12.1f}{ph['laser_us']:>12.1f}{self.phase_total(p):>12.1f}"
                f"{100 * self.phase_share(p):>9.1f}{100 * self.laser_share(p):>9.1f}"
            )
        rows.append(f"{'total':<14}{'':>24}{self.total_us:>12.1f}")
        return "\n".join(rows)


def timing_budget(schedule: Schedule, durations: DurationTable | None = None, parallel: bool = True) -> TimingBudget:
    """Per-phase shuttle and laser time; a parallel group lasts as long as its longest op."""
    durations = durations or DurationTable()
    budget = TimingBudget()
    for k, step in enumerate(schedule.steps):
        if not step:
            continue
        for op in step:
            if op.phase not in PHASES:
                raise ValueError(f"step {k}: op {op.kind} has no phase label")
        lengths = [op_duration(op, durations) for op in step]
        length = max(lengths) if parallel else sum(lengths)
        category = "laser_us" if any(op.kind == "Laser" for op in step) else "shuttle_us"
        budget.phases[step[0].phase][category] += length
    return budget


def render_timeline(schedule: Schedule, spec: TrapSpec | None = None, qubits: Sequence[str] | None = None) -> str:
    """One row per ion, one column per step; cells give the ion's segment."""
    states = schedule.states(spec)
    qubits = list(qubits or states[0].ions())
    head = "step   " + " ".join(f"{k:>3}" for k in range(len(states)))
    kinds = "op     " + " ".join(f"{_abbrev(s):>3}" for s in ((),) + schedule.steps)
    rows = [head, kinds]
    for q in qubits:
        cells = []
        for st in states:
            cells.append(f"{st.wells[st.well_of(q)].segment:>3}")
        rows.append(f"{q:<7}" + " ".join(cells))
    return "\n".join(rows)


_ABBREV = {"Move": "mv", "Separate": "sep", "Merge": "mrg", "Swap": "swp", "Wait": "wt"}


def _abbrev(step) -> str:
    if not step:
        return "-"
    op = step[0]
    if op.kind == "Laser":
        return {"entangle": "G", "rotation": "R", "cool": "C", "pump": "P", "shelve": "S", "detect": "D"}[op.laser]
    return _ABBREV[op.kind]

"""Replay a schedule and collect every broken rule."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .schedule import Schedule
from .trap import ConstraintViolation, DurationTable, TrapSpec, TrapState, apply_moves, apply_primitive, state_violations


@dataclass(frozen=True)
class Violation:
    step: int  # -1 for whole-schedule checks
    rule: str
    message: str

    def to_dict(self) -> dict:
        return {"step": self.step, "rule": self.rule, "message": self.message}


def validate(
    schedule: Schedule,
    layout: TrapState | None = None,
    spec: TrapSpec | None = None,
    gates: Sequence[Sequence[str]] | None = None,
    durations: DurationTable | None = None,
) -> list[Violation]:
    spec = spec or TrapSpec()
    durations = durations or DurationTable()
    state = layout if layout is not None else schedule.initial
    if state is None:
        return [Violation(-1, "identity", "no initial layout to replay from")]
    out = [Violation(-1, v.rule, v.message) for v in state_violations(state, spec)]
    qubits = state.ions()
    settled = True
    for k, step in enumerate(schedule.steps):
        if not step:
            continue
        if len(step) > 1 and any(op.kind != "Move" for op in step):
            out.append(Violation(k, "parallel", "only Moves may share a step"))
            continue
        for op in step:
            if op.kind == "Laser" and not settled:
                out.append(Violation(k, "settle", f"laser {op.laser} fired without a settle wait after transport"))
            if op.kind == "Wait":
                if op.duration and op.duration < durations.settle_before_laser:
                    out.append(Violation(k, "settle", f"wait of {op.duration} us is shorter than the settle time"))
                else:
                    settled = True
        try:
            if step[0].kind == "Move":
                state = apply_moves(state, step, spec)
            else:
                state = apply_primitive(state, step[0], spec)
        except ConstraintViolation as e:
            out.append(Violation(k, e.rule, e.message))
            continue
        if any(op.kind in ("Move", "Separate", "Merge", "Swap") for op in step):
            settled = False
        for v in state_violations(state, spec, qubits):
            out.append(Violation(k, v.rule, v.message))
    expected = [frozenset(g) for g in (gates if gates is not None else schedule.gates)]
    if expected:
        actual = [frozenset(t) for t in schedule.entangle_order()]
        if actual != expected:
            out.append(
                Violation(-1, "gate_order", f"entangling order {[sorted(a) for a in actual]} differs from the request")
            )
    return out

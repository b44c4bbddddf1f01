"""Compile ordered laser tasks into transport schedules for the linear trap.

Each task is reached by a best-first search over register reconfigurations
(separate, swap, merge at the LIZ) where every reconfiguration is preceded
by one parallel group of Moves that makes room for it. Costs compare
lexicographically as (shuttle primitives, max extent, moves of the syndrome
well); a bounded lookahead over the next tasks picks among near-optimal
endpoints.
"""

from __future__ import annotations

import heapq
import itertools
from functools import cached_property, lru_cache
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .schedule import Schedule
from .trap import DurationTable, PrimitiveOp, TrapSpec, TrapState, Well, initial_layout, op_duration

FT_PCM_GATES = (("d1", "s"), ("s", "f"), ("d2", "s"), ("d3", "s"), ("s", "f"), ("d4", "s"))
SYNDROME = "s"


class CompileError(RuntimeError):
    pass


@dataclass(frozen=True)
class Task:
    """Bring ``targets`` alone into the LIZ well and fire ``laser`` ('' = visit only)."""

    targets: tuple[str, ...]
    laser: str = "entangle"
    label: str = ""


@dataclass(frozen=True)
class Restore:
    """Return the register to an exact layout (grouping, order and segments)."""

    layout: TrapState
    label: str = "restore"

    @cached_property
    def configuration(self) -> tuple[tuple[str, ...], ...]:
        return self.layout.configuration

    @cached_property
    def pairs(self) -> frozenset:
        return frozenset(ions for ions in self.configuration if len(ions) == 2)

    @cached_property
    def rank(self) -> dict[str, int]:
        return {q: i for i, q in enumerate(self.layout.ions())}


# Search states are plain tuples of (segment, ions) for speed; steps are
# tuples of raw ops ("Move", from, to) / (kind, liz) turned into PrimitiveOps
# only when the schedule is emitted.


def _key(prims: int, extent: int, s_moves: int) -> tuple[int, int, int]:
    return (prims, extent, s_moves)


def _add(a: tuple, b: tuple) -> tuple:
    return (a[0] + b[0], max(a[1], b[1]), a[2] + b[2])


def _extent(wells: tuple) -> int:
    return wells[-1][0] - wells[0][0] if wells else 0


@dataclass(frozen=True)
class _Plan:
    cost: tuple[int, int, int]
    steps: tuple
    final: tuple


def _place(pos: Sequence[int], fixed: dict[int, int], clear: int, spec: TrapSpec) -> list[int] | None:
    """Push the unfixed wells outward just enough; ``clear`` spaces the fixed block's neighbours."""
    x = list(pos)
    for k, seg in fixed.items():
        x[k] = seg
    a, b = min(fixed), max(fixed)
    for j in range(a - 1, -1, -1):
        sep = clear if j == a - 1 else spec.spacing
        x[j] = min(pos[j], x[j + 1] - sep)
        if x[j] < 0:
            return None
    for j in range(b + 1, len(x)):
        sep = clear if j == b + 1 else spec.spacing
        x[j] = max(pos[j], x[j - 1] + sep)
        if x[j] >= spec.num_segments:
            return None
    return x


def _moves(wells: tuple, target: Sequence[int]) -> tuple[tuple, tuple, int]:
    ops = []
    last = []
    for (seg, ions), to in zip(wells, target):
        if to != seg:
            # syndrome well listed last
            (last if SYNDROME in ions else ops).append(("Move", seg, to))
    moved = tuple((to, ions) for (_, ions), to in zip(wells, target))
    return tuple(ops + last), moved, len(last)


@lru_cache(maxsize=200_000)
def _neighbours(wells: tuple, spec: TrapSpec) -> tuple:
    """(moves, next state, cost, next grouping) for every reconfiguration."""
    return tuple((more, nxt, c, tuple(w[1] for w in nxt)) for more, nxt, c in _reconfigure(wells, spec))


def _reconfigure(wells: tuple, spec: TrapSpec):
    liz, sp = spec.liz_index, spec.spacing
    pos = [w[0] for w in wells]
    for k, (_, ions) in enumerate(wells):
        if len(ions) != 2:
            continue
        for kind, clear in (("Separate", 2 * sp), ("Swap", sp)):
            target = _place(pos, {k: liz}, clear, spec)
            if target is None:
                continue
            moves, moved, s_moves = _moves(wells, target)
            if kind == "Separate":
                new = moved[:k] + ((liz - sp, ions[:1]), (liz + sp, ions[1:])) + moved[k + 1:]
            else:
                new = moved[:k] + ((liz, ions[::-1]),) + moved[k + 1:]
            steps = ((moves,) if moves else ()) + (((kind, liz),),)
            yield steps, new, (len(moves) + 1, max(_extent(moved), _extent(new)), s_moves)
    for k in range(len(wells) - 1):
        a, b = wells[k][1], wells[k + 1][1]
        if len(a) + len(b) > spec.max_ions_per_well:
            continue
        target = _place(pos, {k: liz - sp, k + 1: liz + sp}, sp, spec)
        if target is None:
            continue
        moves, moved, s_moves = _moves(wells, target)
        new = moved[:k] + ((liz, a + b),) + moved[k + 2:]
        steps = ((moves,) if moves else ()) + ((("Merge", liz),),)
        yield steps, new, (len(moves) + 1, max(_extent(moved), _extent(new)), s_moves)


def _finish(wells: tuple, goal, spec: TrapSpec):
    """Final placement if ``wells`` can serve ``goal``, else None."""
    if isinstance(goal, Restore):
        if tuple(w[1] for w in wells) != goal.configuration:
            return None
        target = list(goal.layout.positions)
    else:
        want = set(goal.targets)
        k = next((i for i, w in enumerate(wells) if set(w[1]) == want), None)
        if k is None:
            return None
        target = _place([w[0] for w in wells], {k: spec.liz_index}, spec.spacing, spec)
        if target is None:
            return None
    moves, final, s_moves = _moves(wells, target)
    return ((moves,) if moves else ()), final, (len(moves), _extent(final), s_moves)


def _lower_bound(wells: tuple, goal) -> int:
    """Admissible count of reconfigurations still needed."""
    return _grouping_bound(tuple(w[1] for w in wells), goal)


def _grouping_bound(config: tuple, goal) -> int:
    if isinstance(goal, Restore):
        missing = len(goal.pairs.difference(config))
        # a swap removes exactly one adjacent inversion of the ion order
        rank = goal.rank
        order = [rank[q] for ions in config for q in ions]
        inversions = sum(1 for i in range(len(order)) for j in range(i + 1, len(order)) if order[i] > order[j])
        return missing + inversions
    want = set(goal.targets)
    mixed = 0
    together = False
    for ions in config:
        inside = want.intersection(ions)
        if inside and len(ions) > len(inside):
            mixed += 1
        if inside == want and len(ions) == len(want):
            together = True
    if together:
        return 0
    return mixed + (1 if len(want) == 2 else 0)


def _search(
    start: tuple,
    goal,
    spec: TrapSpec,
    slack: int,
    limit: int,
    max_extent: int | None = None,
    variants: int = 2,
    max_prims: int = 400,
) -> list[_Plan]:
    """Best-first search; each ion grouping is expanded at most ``variants`` times."""
    tie = itertools.count()
    zero = (0, _extent(start), 0)
    bounds: dict = {}

    def h_of(config):
        h = bounds.get(config)
        if h is None:
            h = bounds[config] = _grouping_bound(config, goal)
        return h

    heap = [((_lower_bound(start, goal),) + zero[1:], next(tie), start, zero)]
    best = {start: zero}
    parent: dict = {start: None}
    expanded: dict = {}
    plans: dict = {}
    bound = None
    while heap:
        f, _, wells, cost = heapq.heappop(heap)
        if best.get(wells) != cost:
            continue
        if bound is not None and f[0] > bound + slack:
            break
        config = tuple(w[1] for w in wells)
        if expanded.get(config, 0) >= variants:
            continue
        expanded[config] = expanded.get(config, 0) + 1
        done = _finish(wells, goal, spec)
        if done is not None and (max_extent is None or done[2][1] <= max_extent):
            extra_steps, final, extra = done
            total = _add(cost, extra)
            if final not in plans or total < plans[final][0]:
                plans[final] = (total, wells, extra_steps)
            bound = total[0] if bound is None else min(bound, total[0])
        if cost[0] >= max_prims:
            continue
        for more, nxt, c, nconfig in _neighbours(wells, spec):
            if max_extent is not None and c[1] > max_extent:
                continue
            if expanded.get(nconfig, 0) >= variants:
                continue
            ncost = _add(cost, c)
            old = best.get(nxt)
            if old is None or ncost < old:
                best[nxt] = ncost
                parent[nxt] = (wells, more)
                h = h_of(nconfig)
                heapq.heappush(heap, ((ncost[0] + h,) + ncost[1:], next(tie), nxt, ncost))
    if not plans:
        raise CompileError(f"no reconfiguration reaches {goal}")
    out = []
    for final, (total, wells, extra_steps) in plans.items():
        steps = []
        node = wells
        while parent[node] is not None:
            prev, more = parent[node]
            steps[:0] = more
            node = prev
        out.append(_Plan(total, tuple(steps) + extra_steps, final))
    out.sort(key=lambda p: p.cost)
    lo = out[0].cost[0]
    return [p for p in out if p.cost[0] <= lo + slack][:limit]


class _Planner:
    def __init__(self, spec: TrapSpec, lookahead: int, slack: int = 1, width: int = 3):
        self.spec = spec
        self.lookahead = max(1, lookahead)
        self.slack = slack
        self.width = width
        self._cache: dict = {}

    def options(self, wells: tuple, goal) -> list[_Plan]:
        key = (wells, goal)
        if key not in self._cache:
            try:
                plans = _search(wells, goal, self.spec, self.slack, self.width, self.spec.max_extent_segments)
            except CompileError:
                # the extent bound is soft when it cannot be met
                plans = _search(wells, goal, self.spec, self.slack, self.width)
            self._cache[key] = plans
        return self._cache[key]

    def best(self, wells: tuple, goals: Sequence, depth: int) -> tuple[tuple, _Plan]:
        options = self.options(wells, goals[0])
        if depth <= 1 or len(goals) == 1:
            return options[0].cost, options[0]
        scored = []
        for idx, plan in enumerate(options):
            rest, _ = self.best(plan.final, goals[1:], depth - 1)
            scored.append((_add(plan.cost, rest), idx, plan))
        total, _, plan = min(scored, key=lambda t: (t[0], t[1]))
        return total, plan


def _op(raw: tuple) -> PrimitiveOp:
    if raw[0] == "Move":
        return PrimitiveOp("Move", raw[1], raw[2])
    return PrimitiveOp(raw[0], raw[1])


def _as_tuple(state: TrapState) -> tuple:
    return tuple((w.segment, w.ions) for w in state.wells)


def _emit(
    goals: Sequence,
    layout: TrapState,
    spec: TrapSpec,
    durations: DurationTable,
    phase: str,
    lookahead: int,
    settled: bool = True,
) -> tuple[list[tuple[PrimitiveOp, ...]], TrapState, bool]:
    planner = _Planner(spec, lookahead)
    wells = _as_tuple(layout)
    out: list[tuple[PrimitiveOp, ...]] = []
    for i, goal in enumerate(goals):
        _, plan = planner.best(wells, list(goals[i:]), planner.lookahead)
        for raw in plan.steps:
            step = tuple(_op(r) for r in raw)
            if spec.parallel_moves or len(step) == 1:
                out.append(step)
            else:
                out.extend((op,) for op in _serial_order(step))
            settled = False
        wells = plan.final
        if isinstance(goal, Task) and goal.laser:
            if not settled:
                out.append((PrimitiveOp("Wait", duration=durations.settle_before_laser),))
                settled = True
            ions = next(w[1] for w in wells if w[0] == spec.liz_index)
            laser = PrimitiveOp("Laser", spec.liz_index, laser=goal.laser, targets=ions, label=goal.label)
            out.append((laser,))
    stamped = [tuple(_timed(op.with_phase(phase), durations) for op in step) for step in out]
    return stamped, TrapState.from_pairs(wells), settled


def _serial_order(moves: Sequence[PrimitiveOp]) -> list[PrimitiveOp]:
    """One-at-a-time order for a parallel group: leading wells go first."""
    right = sorted((m for m in moves if m.to_segment > m.segment), key=lambda m: -m.segment)
    left = sorted((m for m in moves if m.to_segment <= m.segment), key=lambda m: m.segment)
    return right + left


def _timed(op: PrimitiveOp, durations: DurationTable) -> PrimitiveOp:
    return replace(op, duration=op_duration(op, durations))


def _as_goal(item, layout: TrapState):
    if isinstance(item, (Task, Restore)):
        return item
    targets = tuple(item)
    if not 1 <= len(targets) <= 2:
        raise CompileError(f"gate {item!r} must name one or two qubits")
    return Task(targets, "entangle" if len(targets) == 2 else "rotation", "".join(targets))


def compile_gates(
    gates: Sequence,
    layout: TrapState,
    spec: TrapSpec | None = None,
    durations: DurationTable | None = None,
    lookahead: int = 2,
    phase: str = "gate_sequence",
    restore: bool = True,
) -> Schedule:
    """Schedule for the gate list; by default the register ends back in ``layout``."""
    spec = spec or TrapSpec()
    durations = durations or DurationTable()
    ions = set(layout.ions())
    goals = [_as_goal(g, layout) for g in gates]
    for g in goals:
        if isinstance(g, Task) and not set(g.targets) <= ions:
            raise CompileError(f"gate {g.targets} uses qubits outside the register")
        if isinstance(g, Task) and len(g.targets) > spec.max_ions_per_well:
            raise CompileError(f"gate {g.targets} needs more ions than a well can hold")
    if len(layout.ions()) > spec.max_ions_per_well * ((spec.num_segments - 1) // spec.spacing + 1):
        raise CompileError("register does not fit in the trap")
    if restore and goals:
        goals.append(Restore(layout))
    steps, _, _ = _emit(goals, layout, spec, durations, phase, lookahead)
    pairs = tuple(g.targets for g in goals if isinstance(g, Task) and g.laser == "entangle")
    return Schedule(tuple(steps), layout, pairs)


DOPPLER_ORDER = (("d3", "d4"), ("s", "f"), ("d2", "d1"))
SIDEBAND_ORDER = (("d2", "d1"), ("s", "f"), ("d3", "d4"))
SHELVING_ORDER = (("d3", "d4"), ("s", "f"), ("d2", "d1"))


def prep_goals(layout: TrapState, data_flips: str = "0000") -> list:
    goals: list = []
    goals += [Task(p, "cool", "doppler") for p in DOPPLER_ORDER]
    goals += [Task(p, "cool", "sideband-1") for p in SIDEBAND_ORDER]
    goals += [Task(p, "cool", "sideband-2") for p in SIDEBAND_ORDER]
    goals += [Task(p, "pump", "pump") for p in SIDEBAND_ORDER]
    flips = dict(zip(("d1", "d2", "d3", "d4"), data_flips))
    for pair in (("d2", "d1"), ("d3", "d4")):
        for q in pair:
            goals.append(Task((q,), "rotation" if flips.get(q) == "1" else "", f"flip-{q}"))
    goals += [Task(("s",), "rotation", "prep-s"), Task(("f",), "rotation", "prep-f")]
    goals.append(Restore(layout))
    return goals


def readout_goals(layout: TrapState) -> list:
    goals: list = [Task(("s",), "rotation", "analysis-s"), Task(("f",), "rotation", "analysis-f"), Restore(layout)]
    goals += [Task(p, "shelve", "shelve") for p in SHELVING_ORDER]
    for rnd in (1, 2):
        for pair in SHELVING_ORDER[::-1]:
            goals += [Task((q,), "detect", f"detect-{rnd}") for q in pair]
            goals.append(Restore(layout))
    return goals


def prep_and_readout_schedule(
    layout: TrapState,
    spec: TrapSpec | None = None,
    durations: DurationTable | None = None,
    data_flips: str = "0000",
    lookahead: int = 2,
) -> tuple[Schedule, Schedule]:
    spec = spec or TrapSpec()
    durations = durations or DurationTable()
    if layout != initial_layout(spec):
        raise CompileError("preparation and readout are defined for the initial layout only")
    prep, _, _ = _emit(prep_goals(layout, data_flips), layout, spec, durations, "prep", lookahead)
    readout, _, _ = _emit(readout_goals(layout), layout, spec, durations, "readout", lookahead)
    return Schedule(tuple(prep), layout), Schedule(tuple(readout), layout)


def full_sequence(
    gates: Sequence = FT_PCM_GATES,
    spec: TrapSpec | None = None,
    durations: DurationTable | None = None,
    data_flips: str = "0000",
    lookahead: int = 2,
) -> Schedule:
    """Preparation, gate sequence and readout from the initial layout."""
    spec = spec or TrapSpec()
    layout = initial_layout(spec)
    prep, readout = prep_and_readout_schedule(layout, spec, durations, data_flips, lookahead)
    gate_seq = compile_gates(gates, layout, spec, durations, lookahead)
    body = Schedule(prep.steps, layout) + gate_seq + readout
    return Schedule(body.steps, layout, gate_seq.gates)

from functools import lru_cache

import pytest
from hypothesis import given, settings, strategies as st

from flagpcm.shuttle import DurationTable, PrimitiveOp, Schedule, TimingBudget, full_sequence, timing_budget


def test_parallel_group_lasts_as_long_as_its_longest_move():
    step = (PrimitiveOp("Move", 10, 13, phase="prep"), PrimitiveOp("Move", 20, 21, phase="prep"))
    d = DurationTable()
    b = timing_budget(Schedule((step,)), d)
    assert b.phases["prep"]["shuttle_us"] == pytest.approx(3 * 20.9)
    assert timing_budget(Schedule((step,)), d, parallel=False).phases["prep"]["shuttle_us"] == pytest.approx(4 * 20.9)


def test_categories_and_shares():
    steps = (
        (PrimitiveOp("Wait", phase="gate_sequence"),),
        (PrimitiveOp("Laser", 19, laser="entangle", targets=("s", "f"), phase="gate_sequence"),),
        (PrimitiveOp("Laser", 19, laser="detect", targets=("s",), phase="readout"),),
    )
    b = timing_budget(Schedule(steps))
    assert b.phases["gate_sequence"] == {"shuttle_us": pytest.approx(50.6), "laser_us": pytest.approx(120.0)}
    assert b.total_us == pytest.approx(50.6 + 120 + 800)
    assert b.laser_share() == pytest.approx(120 / 170.6)
    assert b.phase_share("readout") == pytest.approx(800 / 970.6)
    d = b.to_dict()
    assert d["percent"]["readout"]["laser_within_phase"] == pytest.approx(100.0)
    assert "gate_sequence" in b.table()


def test_unlabeled_op_rejected():
    with pytest.raises(ValueError):
        timing_budget(Schedule(((PrimitiveOp("Wait"),),)))


def test_empty_schedule_costs_nothing():
    b = timing_budget(Schedule(()))
    assert b.total_us == 0 and b.laser_share() == 0 and b.phase_share() == 0


@lru_cache(maxsize=1)
def _full():
    return full_sequence()


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 400), st.integers(0, 400))
def test_budget_is_additive_over_concatenation(cut_a, cut_b):
    full_schedule = _full()
    n = len(full_schedule.steps)
    a, b = sorted((cut_a % (n + 1), cut_b % (n + 1)))
    parts = [Schedule(full_schedule.steps[:a]), Schedule(full_schedule.steps[a:b]), Schedule(full_schedule.steps[b:])]
    whole = timing_budget(full_schedule)
    summed = timing_budget(parts[0]) + timing_budget(parts[1]) + timing_budget(parts[2])
    for p in whole.phases:
        for c in whole.phases[p]:
            assert summed.phases[p][c] == pytest.approx(whole.phases[p][c])
    assert isinstance(summed, TimingBudget)


def test_full_sequence_budget_structure(full_schedule):
    b = timing_budget(full_schedule)
    assert all(b.phase_total(p) > 0 for p in ("prep", "gate_sequence", "readout"))
    # laser shares dominate preparation and readout, not the gate sequence
    assert b.laser_share("prep") > 0.5 and b.laser_share("readout") > 0.5
    assert b.laser_share("gate_sequence") < 0.15

"""Trap model, schedule compiler, validator and timing budget."""

from .compiler import (
    FT_PCM_GATES,
    CompileError,
    Restore,
    Task,
    compile_gates,
    full_sequence,
    prep_and_readout_schedule,
)
from .schedule import PHASES, Schedule, TimingBudget, render_timeline, timing_budget
from .trap import (
    ConstraintViolation,
    DurationTable,
    PrimitiveOp,
    TrapSpec,
    TrapState,
    Well,
    apply_moves,
    apply_primitive,
    initial_layout,
)
from .validate import Violation, validate

import pytest

from flagpcm.shuttle import DurationTable, TrapSpec, compile_gates, full_sequence, initial_layout


@pytest.fixture(scope="session")
def spec():
    return TrapSpec()


@pytest.fixture(scope="session")
def durations():
    return DurationTable()


@pytest.fixture(scope="session")
def gate_schedule(spec, durations):
    return compile_gates(
        [("d1", "s"), ("s", "f"), ("d2", "s"), ("d3", "s"), ("s", "f"), ("d4", "s")],
        initial_layout(spec),
        spec,
        durations,
    )


@pytest.fixture(scope="session")
def full_schedule(spec, durations):
    return full_sequence(spec=spec, durations=durations)


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def acceptance():
    return ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail}")

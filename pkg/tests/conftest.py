import pytest

from aoi_sched.flowline import FlowLineState, Mode


class ConstDraws:
    """Draw source that always returns the same setup, window and reset."""

    def __init__(self, setup=2, window=5, reset=3):
        self.c, self.w, self.rs = setup, window, reset
        self.calls = []

    def setup(self, index, sample):
        self.calls.append(("setup", index, sample))
        return self.c

    def window(self, index, sample, attempt):
        self.calls.append(("window", index, sample, attempt))
        return self.w

    def reset(self, index, sample, attempt):
        self.calls.append(("reset", index, sample, attempt))
        return self.rs


def active(index=1, latency=0, window=5, attempt=1, age=None, setup=2, cum=0, sample=1):
    age = setup + 1 + latency if age is None else age
    return FlowLineState(index, Mode.ACTIVE, age, sample, attempt, setup, window, window,
                         cum_deadline_prev=cum, attempt_latency=latency)


@pytest.fixture
def draws():
    return ConstDraws()


ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def report_criterion():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

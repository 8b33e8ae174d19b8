"""Per flow-line lifecycle: sleep, active and hibernation modes.

A flow-line is one sensor -> controller -> actuator loop. Its state is an
immutable value; every transition returns a new ``FlowLineState``.

Deadlines follow the window model: each attempt gets a latency budget
``window`` and the sample is critical once ``attempt_latency == window - 1``.
On the age axis the attempt ends at ``age - attempt_latency + window``.
"""
from __future__ import annotations

import enum
import random
from dataclasses import dataclass, replace
from typing import Protocol, Sequence, Tuple


class ContractError(ValueError):
    """A transition was applied to a state that violates its precondition."""


class Mode(str, enum.Enum):
    INACTIVE = "inactive"
    ACTIVE = "active"
    HIBERNATING = "hibernating"


@dataclass(frozen=True, slots=True)
class FlowLineState:
    index: int
    mode: Mode
    age: int
    sample_index: int
    attempt: int
    setup: int
    window: int
    window_original: int
    cum_deadline_prev: int = 0
    attempt_latency: int = 0
    reset_remaining: int = 0
    grace_count: int = 0

    @property
    def deadline(self) -> int | None:
        """Age at which the current attempt expires; ``None`` unless active."""
        if self.mode is not Mode.ACTIVE:
            return None
        return self.age - self.attempt_latency + self.window

    @property
    def laxity(self) -> int:
        return self.window - self.attempt_latency - 1

    @property
    def is_critical(self) -> bool:
        return self.mode is Mode.ACTIVE and self.laxity == 0


@dataclass(frozen=True)
class FlowLineDraws:
    """Inclusive integer ranges the per-sample quantities are drawn from."""

    setup_range: Tuple[int, int] = (1, 25)
    window_range: Tuple[int, int] = (1, 20)
    reset_range: Tuple[int, int] = (1, 10)
    d_max: int = 20

    def __post_init__(self):
        for name in ("setup_range", "window_range", "reset_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ContractError(f"{name}: empty range [{lo}, {hi}]")
        if self.setup_range[0] < 1:
            raise ContractError("setup_range: setup time must be at least 1 slot")
        if self.window_range[0] < 1:
            raise ContractError("window_range: window must be at least 1 slot")
        if self.reset_range[0] < 1:
            raise ContractError("reset_range: reset time must be at least 1 slot")
        if self.d_max < 1:
            raise ContractError("d_max: must be positive")
        if self.window_range[1] > self.d_max:
            raise ContractError(
                f"window_range: upper bound {self.window_range[1]} exceeds d_max={self.d_max}"
            )


class Draws(Protocol):
    """Source of the per-sample random quantities of every flow-line.

    Keys are the flow-line index, the sample index and the attempt number so
    that a pinned table can answer the same calls as a random stream.
    """

    def setup(self, index: int, sample: int) -> int: ...

    def window(self, index: int, sample: int, attempt: int) -> int: ...

    def reset(self, index: int, sample: int, attempt: int) -> int: ...


class StreamDraws:
    """Uniform draws from one independent ``random.Random`` per flow-line.

    Keys are ignored; values are consumed in call order, so a run is
    reproducible from ``seeds`` alone.
    """

    def __init__(self, ranges: FlowLineDraws, seeds: Sequence[int]):
        self.ranges = ranges
        self._streams = [random.Random(s) for s in seeds]

    def _uniform(self, index: int, bounds: Tuple[int, int]) -> int:
        return self._streams[index - 1].randint(bounds[0], bounds[1])

    def setup(self, index, sample):
        return self._uniform(index, self.ranges.setup_range)

    def window(self, index, sample, attempt):
        return self._uniform(index, self.ranges.window_range)

    def reset(self, index, sample, attempt):
        return self._uniform(index, self.ranges.reset_range)

    def initial_age(self, index: int, upper: int) -> int:
        return self._streams[index - 1].randint(1, upper)


def initial_state(index: int, setup: int, window: int, age: int) -> FlowLineState:
    """Slot-1 state of a flow-line from its initial setup, window and age.

    ``age`` must lie in ``[1, setup + window]`` so the flow-line starts either
    asleep or inside its first attempt, never hibernating.
    """
    if not 1 <= age <= setup + window:
        raise ContractError(f"initial age {age} outside [1, {setup + window}]")
    if age <= setup:
        return FlowLineState(index, Mode.INACTIVE, age, 1, 0, setup, window, window)
    return FlowLineState(
        index, Mode.ACTIVE, age, 1, 1, setup, window, window,
        attempt_latency=age - setup - 1,
    )


def mode_of(state: FlowLineState) -> Mode:
    """Mode implied by the clocks alone, independent of the stored ``mode``.

    Inactive while no attempt has started, hibernating while a reset is
    pending or the attempt window is exhausted, active otherwise.
    """
    if state.attempt == 0:
        return Mode.INACTIVE
    if state.reset_remaining > 0 or state.attempt_latency >= state.window:
        return Mode.HIBERNATING
    return Mode.ACTIVE


def check_state(state: FlowLineState) -> None:
    """Raise ``ContractError`` if ``state`` breaks a type invariant."""
    if state.mode is not mode_of(state):
        raise ContractError(f"sensor {state.index}: stored mode {state.mode} != {mode_of(state)}")
    if state.mode is Mode.INACTIVE and not 1 <= state.age <= state.setup:
        raise ContractError(f"sensor {state.index}: inactive with age {state.age} > setup {state.setup}")
    if state.mode is Mode.ACTIVE and not 0 <= state.attempt_latency <= state.window - 1:
        raise ContractError(f"sensor {state.index}: active latency {state.attempt_latency} outside window")
    if state.grace_count != state.window - state.window_original or state.grace_count < 0:
        raise ContractError(f"sensor {state.index}: grace accounting broken")
    if state.mode is not Mode.INACTIVE and state.attempt < 1:
        raise ContractError(f"sensor {state.index}: attempt 0 outside sleep")


def on_served(state: FlowLineState, draws: Draws) -> FlowLineState:
    """The sample was processed this slot: age resets and the loop sleeps."""
    if state.mode is not Mode.ACTIVE:
        raise ContractError(f"sensor {state.index}: only an active sample can be served")
    setup = draws.setup(state.index, state.sample_index)
    window = draws.window(state.index, state.sample_index + 1, 1)
    return FlowLineState(
        state.index, Mode.INACTIVE, 1, state.sample_index + 1, 0, setup, window, window,
    )


def on_dropped(state: FlowLineState, draws: Draws) -> FlowLineState:
    """A hard-deadline critical sample went unserved: the loop hibernates.

    The cumulative latency-axis deadline grows by the window just spent and
    the next attempt's window is drawn now.
    """
    if not state.is_critical:
        raise ContractError(f"sensor {state.index}: only a critical active sample can be dropped")
    rs = draws.reset(state.index, state.sample_index, state.attempt)
    window = draws.window(state.index, state.sample_index, state.attempt + 1)
    return replace(
        state,
        mode=Mode.HIBERNATING,
        age=state.age + 1,
        window=window,
        window_original=window,
        cum_deadline_prev=state.cum_deadline_prev + state.window,
        attempt_latency=0,
        reset_remaining=rs,
        grace_count=0,
    )


def tick_unserved(state: FlowLineState) -> FlowLineState:
    """Advance a flow-line that was neither served nor dropped this slot."""
    s = state
    age = s.age + 1
    if s.mode is Mode.INACTIVE:
        if age > s.setup:
            return FlowLineState(s.index, Mode.ACTIVE, age, s.sample_index, max(1, s.attempt),
                                 s.setup, s.window, s.window_original, s.cum_deadline_prev,
                                 0, 0, s.grace_count)
        return FlowLineState(s.index, s.mode, age, s.sample_index, s.attempt, s.setup,
                             s.window, s.window_original, s.cum_deadline_prev,
                             s.attempt_latency, s.reset_remaining, s.grace_count)
    if s.mode is Mode.ACTIVE:
        if s.window - s.attempt_latency <= 1:
            raise ContractError(
                f"sensor {s.index}: critical sample must be served, dropped or graced"
            )
        return FlowLineState(s.index, s.mode, age, s.sample_index, s.attempt, s.setup,
                             s.window, s.window_original, s.cum_deadline_prev,
                             s.attempt_latency + 1, 0, s.grace_count)
    remaining = s.reset_remaining - 1
    if remaining == 0:
        return FlowLineState(s.index, Mode.ACTIVE, age, s.sample_index, s.attempt + 1,
                             s.setup, s.window, s.window_original, s.cum_deadline_prev,
                             0, 0, s.grace_count)
    return FlowLineState(s.index, s.mode, age, s.sample_index, s.attempt, s.setup,
                         s.window, s.window_original, s.cum_deadline_prev,
                         s.attempt_latency, remaining, s.grace_count)


def grace(state: FlowLineState) -> FlowLineState:
    """Delay a critical sample's deadline by one slot (soft deadline)."""
    if not state.is_critical:
        raise ContractError(f"sensor {state.index}: only a critical sample can be graced")
    return replace(state, window=state.window + 1, grace_count=state.grace_count + 1)

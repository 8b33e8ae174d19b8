"""Scalar valuation of an active sample: freshness, laxity, utility, penalty, priority."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .flowline import ContractError, FlowLineState, Mode


@dataclass(frozen=True)
class ValuationParams:
    k_const: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    d_max: int = 20
    horizon: int = 100

    def __post_init__(self):
        if self.k_const <= 0:
            raise ContractError("k_const: must be positive")
        if self.d_max < 1:
            raise ContractError("d_max: must be positive")
        if self.horizon < 1:
            raise ContractError("horizon: must be positive")


@dataclass(frozen=True, slots=True)
class SampleView:
    index: int
    attempt: int
    attempt_latency: int
    window: int
    window_original: int
    total_latency: int
    freshness: float
    laxity: int
    slack: int
    lateness: int
    utility: float
    penalty: float
    effective_utility: float
    priority: float

    @property
    def is_critical(self) -> bool:
        return self.laxity == 0


def freshness(attempt_latency: int, attempt: int, d_max: int) -> float:
    """Reciprocal freshness; every retry costs a full ``d_max`` of latency."""
    if attempt < 1:
        raise ContractError("freshness is undefined without an active packet (attempt 0)")
    if attempt_latency < 0:
        raise ContractError("attempt latency must be nonnegative")
    return 1.0 / ((attempt - 1) * d_max + attempt_latency + 1)


def laxity(window: int, attempt_latency: int) -> int:
    # service itself takes one slot
    return window - attempt_latency - 1


def slack_indicator(lax: int) -> int:
    return 0 if lax < 0 else 1


def utility(fresh: float, slack: int, params: ValuationParams) -> float:
    return params.k_const * fresh ** params.beta * slack ** params.gamma


def lateness(attempt_latency: int, window_original: int) -> int:
    """Slots past the ungraced critical point; positive only after a grace."""
    return attempt_latency - (window_original - 1)


def tardiness_effect(late: int, attempt: int, cum_deadline: int, params: ValuationParams) -> float:
    """psi(Lt) = exp(-10 ln(T - (xi-1) D_max - D - Lt) / T), log argument clamped to >= 1."""
    arg = params.horizon - (attempt - 1) * params.d_max - cum_deadline - late
    return math.exp(-10.0 * math.log(max(arg, 1)) / params.horizon)


def penalty(util: float, late: int, attempt: int, cum_deadline: int, params: ValuationParams) -> float:
    if util < 0:
        raise ContractError("utility must be nonnegative")
    if late <= 0:
        return 0.0
    return util * tardiness_effect(late, attempt, cum_deadline, params)


def effective_utility(util: float, pen: float) -> float:
    return util - pen


def priority(util: float, slack_next: int) -> float:
    """Infinite for a sample that is critical now, otherwise ``1 / utility``."""
    if slack_next == 0:
        return math.inf
    if util <= 0:
        raise ContractError("a sample with zero utility has no priority")
    return 1.0 / util


def total_latency(attempt_latency: int, cum_deadline_prev: int) -> int:
    return attempt_latency + cum_deadline_prev


def view(state: FlowLineState, params: ValuationParams) -> SampleView:
    """Value an active flow-line's current sample."""
    if state.mode is not Mode.ACTIVE:
        raise ContractError(f"sensor {state.index}: only active samples are valued")
    lat = state.attempt_latency
    fresh = freshness(lat, state.attempt, params.d_max)
    lax = laxity(state.window, lat)
    slack = slack_indicator(lax)
    util = utility(fresh, slack, params)
    late = lateness(lat, state.window_original)
    pen = penalty(util, late, state.attempt,
                  state.cum_deadline_prev + state.window_original, params)
    return SampleView(
        index=state.index,
        attempt=state.attempt,
        attempt_latency=lat,
        window=state.window,
        window_original=state.window_original,
        total_latency=total_latency(lat, state.cum_deadline_prev),
        freshness=fresh,
        laxity=lax,
        slack=slack,
        lateness=late,
        utility=util,
        penalty=pen,
        effective_utility=effective_utility(util, pen),
        priority=priority(util, slack_indicator(lax - 1)),
    )

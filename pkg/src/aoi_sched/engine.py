"""Slotted simulation of the sensor-actuator network.

Each slot runs, in order:

1. take the wake-ups / regenerations produced at the previous slot boundary,
2. value every active flow-line,
3. read the channel state,
4. conflict avoidance: pick at most one hard-deadline critical, grace the rest,
5. let the policy pick a sensor if the channel is ON,
6. serve the pick, drop an unserved hard critical, tick everybody else,
7. emit a ``SlotRecord``.
"""
from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, replace
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from . import flowline as fl
from .channel import BernoulliChannel, ChannelParams, FixedChannel
from .flowline import ContractError, FlowLineDraws, FlowLineState, Mode, StreamDraws
from .policies import PolicyId, select
from .valuation import SampleView, ValuationParams, view

TRACE_COLUMNS = (
    "slot", "sensor", "mode", "age", "attempt", "latency_attempt", "latency_total",
    "utility", "laxity", "served", "dropped", "graced",
)


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending field name."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def _pair(name, value):
    try:
        lo, hi = (int(x) for x in value)
    except (TypeError, ValueError):
        raise ConfigError(name, f"expected [min, max], got {value!r}") from None
    if lo > hi:
        raise ConfigError(name, f"empty range [{lo}, {hi}]")
    if lo < 1:
        raise ConfigError(name, f"lower bound must be >= 1, got {lo}")
    return (lo, hi)


@dataclass(frozen=True)
class SimConfig:
    """Parameters of a single run (one horizon)."""

    num_sensors: int = 16
    horizon: int = 100
    p_on: float = 0.8
    setup_range: Tuple[int, int] = (1, 25)
    window_range: Tuple[int, int] = (1, 20)
    reset_range: Tuple[int, int] = (1, 10)
    d_max: int = 20
    alpha: float = 1.0
    k_const: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if not isinstance(self.num_sensors, int) or self.num_sensors < 1:
            raise ConfigError("num_sensors", f"must be a positive integer, got {self.num_sensors!r}")
        if not isinstance(self.horizon, int) or self.horizon < 1:
            raise ConfigError("horizon", f"must be a positive integer, got {self.horizon!r}")
        if not 0.0 <= float(self.p_on) <= 1.0:
            raise ConfigError("p_on", f"must lie in [0, 1], got {self.p_on}")
        for name in ("setup_range", "window_range", "reset_range"):
            object.__setattr__(self, name, _pair(name, getattr(self, name)))
        if not isinstance(self.d_max, int) or self.d_max < 1:
            raise ConfigError("d_max", f"must be a positive integer, got {self.d_max!r}")
        if self.window_range[1] > self.d_max:
            raise ConfigError("window_range", f"upper bound {self.window_range[1]} exceeds d_max={self.d_max}")
        if self.alpha <= 0:
            raise ConfigError("alpha", "must be positive")
        if self.k_const <= 0:
            raise ConfigError("k_const", "must be positive")

    @property
    def valuation(self) -> ValuationParams:
        return ValuationParams(self.k_const, self.beta, self.gamma, self.d_max, self.horizon)

    @property
    def channel(self) -> ChannelParams:
        return ChannelParams(self.p_on)

    @property
    def draws(self) -> FlowLineDraws:
        return FlowLineDraws(self.setup_range, self.window_range, self.reset_range, self.d_max)

    def to_dict(self) -> dict:
        d = asdict(self)
        for name in ("setup_range", "window_range", "reset_range"):
            d[name] = list(d[name])
        return d


class SensorSnapshot(NamedTuple):
    sensor: int
    mode: Mode
    age: int
    attempt: int
    attempt_latency: int
    total_latency: int
    utility: float
    laxity: Optional[int]
    priority_class: Optional[str]  # "critical", "graced", "normal" or None when not active
    window: int
    deadline: Optional[int]
    grace_count: int
    reset_remaining: int


@dataclass(frozen=True)
class SlotRecord:
    slot: int
    channel_on: bool
    sensors: Tuple[SensorSnapshot, ...]
    chosen: Optional[int]
    dropped: Tuple[int, ...]
    graced: Tuple[int, ...]
    regenerated: Tuple[int, ...]
    newly_active: Tuple[int, ...]
    utility_sum: float  # alpha-weighted sum of utilities over the active set


@dataclass(frozen=True)
class Trace:
    config: dict
    policy: str
    seed: Optional[int]
    records: Tuple[SlotRecord, ...]
    final_states: Tuple[FlowLineState, ...]
    utility_total: float  # running accumulator kept by the engine


@dataclass
class WorldState:
    slot: int
    flowlines: Tuple[FlowLineState, ...]
    draws: fl.Draws
    channel: object  # anything with .state(t) -> bool
    valuation: ValuationParams
    alpha: Tuple[float, ...]
    newly_active: Tuple[int, ...] = ()
    regenerated: Tuple[int, ...] = ()
    utility_total: float = 0.0


def conflict_avoidance(views: Sequence[SampleView], channel_on: bool) -> Tuple[Optional[int], List[int]]:
    """Return (hard-deadline critical index or None, indices to grace).

    With the channel OFF every critical is graced. With it ON a single
    critical keeps its hard deadline; among several, the one with the highest
    effective utility does (lowest index on ties) and the others are graced.
    """
    critical = [v for v in views if v.laxity == 0]
    if not critical:
        return None, []
    if not channel_on:
        return None, [v.index for v in critical]
    hard = max(critical, key=lambda v: (v.effective_utility, -v.index)).index
    return hard, [v.index for v in critical if v.index != hard]


class SlotPlan(NamedTuple):
    flowlines: Tuple[FlowLineState, ...]  # after graces
    views: Dict[int, SampleView]  # post-grace views of the active set
    hard: Optional[int]
    graced: Tuple[int, ...]
    utility_sum: float


def plan_slot(flowlines: Sequence[FlowLineState], channel_on: bool,
              params: ValuationParams, alpha: Sequence[float]) -> SlotPlan:
    """Steps 2 and 4: valuation, then conflict avoidance and graces."""
    views = {s.index: view(s, params) for s in flowlines if s.mode is Mode.ACTIVE}
    usum = 0.0
    for i, v in views.items():
        usum += alpha[i - 1] * v.utility
    hard, graced = conflict_avoidance(list(views.values()), channel_on)
    if graced:
        lines = list(flowlines)
        for i in graced:
            lines[i - 1] = fl.grace(lines[i - 1])
            views[i] = view(lines[i - 1], params)
        flowlines = tuple(lines)
    return SlotPlan(tuple(flowlines), views, hard, tuple(graced), usum)


class SlotOutcome(NamedTuple):
    flowlines: Tuple[FlowLineState, ...]
    dropped: Tuple[int, ...]
    newly_active: Tuple[int, ...]
    regenerated: Tuple[int, ...]


def resolve_slot(flowlines: Sequence[FlowLineState], chosen: Optional[int],
                 hard: Optional[int], draws: fl.Draws) -> SlotOutcome:
    """Step 6: serve, drop and tick, returning the next slot's flow-lines."""
    nxt = []
    dropped = []
    woke = []
    regen = []
    for s in flowlines:
        if s.index == chosen:
            nxt.append(fl.on_served(s, draws))
        elif s.index == hard:
            nxt.append(fl.on_dropped(s, draws))
            dropped.append(s.index)
        else:
            t = fl.tick_unserved(s)
            if t.mode is Mode.ACTIVE and s.mode is not Mode.ACTIVE:
                (woke if s.mode is Mode.INACTIVE else regen).append(s.index)
            nxt.append(t)
    return SlotOutcome(tuple(nxt), tuple(dropped), tuple(woke), tuple(regen))


def _snapshots(flowlines, views, hard, graced):
    snaps = []
    for s in flowlines:
        v = views.get(s.index)
        if v is None:
            snaps.append(SensorSnapshot(s.index, s.mode, s.age, s.attempt, s.attempt_latency,
                                        0, 0.0, None, None, s.window, None, s.grace_count,
                                        s.reset_remaining))
            continue
        if s.index in graced:
            cls = "graced"
        elif v.laxity == 0:
            cls = "critical"
        else:
            cls = "normal"
        snaps.append(SensorSnapshot(s.index, s.mode, s.age, s.attempt, s.attempt_latency,
                                    v.total_latency, v.utility, v.laxity, cls, s.window,
                                    s.deadline, s.grace_count, s.reset_remaining))
    return tuple(snaps)


def step(world: WorldState, policy: PolicyId) -> Tuple[WorldState, SlotRecord]:
    t = world.slot
    on = world.channel.state(t)
    plan = plan_slot(world.flowlines, on, world.valuation, world.alpha)
    chosen = select(policy, list(plan.views.values()), on, t)
    if chosen is not None and chosen not in plan.views:
        raise ContractError(f"slot {t}: policy chose inactive sensor {chosen}")
    out = resolve_slot(plan.flowlines, chosen, plan.hard, world.draws)
    record = SlotRecord(
        slot=t,
        channel_on=on,
        sensors=_snapshots(plan.flowlines, plan.views, plan.hard, plan.graced),
        chosen=chosen,
        dropped=out.dropped,
        graced=plan.graced,
        regenerated=world.regenerated,
        newly_active=world.newly_active,
        utility_sum=plan.utility_sum,
    )
    if len(out.dropped) > 1:
        raise AssertionError(f"slot {t}: more than one drop")
    nxt = replace(world, slot=t + 1, flowlines=out.flowlines,
                  newly_active=out.newly_active, regenerated=out.regenerated,
                  utility_total=world.utility_total + plan.utility_sum)
    return nxt, record


def seed_streams(seed: int, num_sensors: int) -> Tuple[np.random.Generator, List[int]]:
    """Channel generator and per-flow-line integer seeds, all derived from ``seed``.

    The channel stream is disjoint from the flow-line streams so every policy
    run under the same seed sees the same channel path.
    """
    ch_ss, fl_ss = np.random.SeedSequence(seed).spawn(2)
    line_seeds = [int(c.generate_state(1, dtype=np.uint64)[0]) for c in fl_ss.spawn(num_sensors)]
    return np.random.default_rng(ch_ss), line_seeds


def initial_world(config: SimConfig, seed: int,
                  channel_path: Optional[Sequence[bool]] = None) -> WorldState:
    ch_rng, line_seeds = seed_streams(seed, config.num_sensors)
    draws = StreamDraws(config.draws, line_seeds)
    lines = []
    for i in range(1, config.num_sensors + 1):
        c0 = draws.setup(i, 0)
        w1 = draws.window(i, 1, 1)
        lines.append(fl.initial_state(i, c0, w1, draws.initial_age(i, c0 + w1)))
    channel = (FixedChannel(channel_path) if channel_path is not None
               else BernoulliChannel(config.channel, ch_rng))
    return WorldState(1, tuple(lines), draws, channel, config.valuation,
                      (float(config.alpha),) * config.num_sensors)


def simulate(world: WorldState, policy: PolicyId, horizon: int) -> Tuple[WorldState, List[SlotRecord]]:
    records = []
    while world.slot <= horizon:
        world, rec = step(world, policy)
        records.append(rec)
    return world, records


def run(config: SimConfig, policy, seed: int,
        channel_path: Optional[Sequence[bool]] = None) -> Trace:
    """One seeded run over ``config.horizon`` slots."""
    policy = PolicyId(policy)
    world, records = simulate(initial_world(config, seed, channel_path), policy, config.horizon)
    return Trace(config.to_dict(), policy.value, seed, tuple(records),
                 world.flowlines, world.utility_total)


def trace_rows(trace: Trace):
    for rec in trace.records:
        for s in rec.sensors:
            yield (
                rec.slot, s.sensor, s.mode.value, s.age, s.attempt, s.attempt_latency,
                s.total_latency, repr(s.utility), "" if s.laxity is None else s.laxity,
                int(rec.chosen == s.sensor), int(s.sensor in rec.dropped),
                int(s.sensor in rec.graced),
            )


def write_trace_csv(trace: Trace, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    w.writerows(trace_rows(trace))


def trace_csv(trace: Trace) -> str:
    buf = io.StringIO()
    write_trace_csv(trace, buf)
    return buf.getvalue()

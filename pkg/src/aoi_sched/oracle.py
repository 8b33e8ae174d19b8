"""Exhaustive check that HLF-D maximizes expected weighted sum utility on tiny instances.

An ``Instance`` pins every random quantity (initial conditions, setup times,
windows and reset times per sample and attempt), so the only randomness left
is the channel. Expectations are computed exactly by branching on ON/OFF at
every slot; the optimum over all work-conserving state-feedback policies is
found by memoized recursion on the full network state.
"""
from __future__ import annotations

import hashlib
import json
import random
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from . import flowline as fl
from .channel import ChannelParams
from .engine import plan_slot, resolve_slot
from .flowline import FlowLineState
from .policies import PolicyId, select
from .valuation import ValuationParams

MAX_SENSORS = 3
MAX_HORIZON = 8
REL_TOL = 1e-9


class BoundsError(ValueError):
    pass


@dataclass(frozen=True)
class Instance:
    """A fully pinned scenario.

    ``initial[i]`` is ``(setup, window, age)`` of sensor ``i + 1`` at slot 1.
    ``setups[i][k - 1]`` is the setup time after sample ``k`` is served;
    ``windows[i][k - 1][a - 1]`` and ``resets[i][k - 1][a - 1]`` belong to
    sample ``k`` at attempt ``a``.
    """

    horizon: int
    initial: Tuple[Tuple[int, int, int], ...]
    setups: Tuple[Tuple[int, ...], ...]
    windows: Tuple[Tuple[Tuple[int, ...], ...], ...]
    resets: Tuple[Tuple[Tuple[int, ...], ...], ...]
    p_on: float = 1.0
    d_max: int = 20
    k_const: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    alpha: float = 1.0

    @property
    def num_sensors(self) -> int:
        return len(self.initial)

    @property
    def valuation(self) -> ValuationParams:
        return ValuationParams(self.k_const, self.beta, self.gamma, self.d_max, self.horizon)

    @property
    def channel(self) -> ChannelParams:
        return ChannelParams(self.p_on)

    def check_bounds(self) -> None:
        if not 1 <= self.num_sensors <= MAX_SENSORS:
            raise BoundsError(f"num_sensors={self.num_sensors} outside [1, {MAX_SENSORS}]")
        if not 1 <= self.horizon <= MAX_HORIZON:
            raise BoundsError(f"horizon={self.horizon} outside [1, {MAX_HORIZON}]")
        self.channel  # validates p_on
        depth = self.horizon + 1
        for i in range(self.num_sensors):
            if len(self.setups[i]) < depth or len(self.windows[i]) < depth or len(self.resets[i]) < depth:
                raise BoundsError(f"sensor {i + 1}: draw tables shallower than horizon + 1")
            if any(len(row) < depth for row in self.windows[i]) or any(len(row) < depth for row in self.resets[i]):
                raise BoundsError(f"sensor {i + 1}: attempt tables shallower than horizon + 1")

    def initial_states(self) -> Tuple[FlowLineState, ...]:
        return tuple(fl.initial_state(i + 1, c, w, h) for i, (c, w, h) in enumerate(self.initial))

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


class TableDraws:
    """Answers ``Draws`` calls from an instance's pinned tables."""

    def __init__(self, instance: Instance):
        self.inst = instance

    def setup(self, index, sample):
        return self.inst.setups[index - 1][sample - 1]

    def window(self, index, sample, attempt):
        return self.inst.windows[index - 1][sample - 1][attempt - 1]

    def reset(self, index, sample, attempt):
        return self.inst.resets[index - 1][sample - 1][attempt - 1]


def random_instance(rng: random.Random, num_sensors: int, horizon: int, p_on: float,
                    setup_range=(1, 3), window_range=(1, 4), reset_range=(1, 3),
                    d_max: int = 4, shared_tables: bool = False) -> Instance:
    """Draw a tiny instance.

    With ``shared_tables`` every flow-line uses the same setup/window/reset
    tables (identical flow-lines that differ only in their initial state).
    """
    depth = horizon + 1

    def tables():
        setups = tuple(rng.randint(*setup_range) for _ in range(depth))
        windows = tuple(tuple(rng.randint(*window_range) for _ in range(depth)) for _ in range(depth))
        resets = tuple(tuple(rng.randint(*reset_range) for _ in range(depth)) for _ in range(depth))
        return setups, windows, resets

    initial = []
    for _ in range(num_sensors):
        c = rng.randint(*setup_range)
        w = rng.randint(*window_range)
        initial.append((c, w, rng.randint(1, c + w)))
    if shared_tables:
        per = [tables()] * num_sensors
    else:
        per = [tables() for _ in range(num_sensors)]
    return Instance(
        horizon=horizon,
        initial=tuple(initial),
        setups=tuple(p[0] for p in per),
        windows=tuple(p[1] for p in per),
        resets=tuple(p[2] for p in per),
        p_on=p_on,
        d_max=d_max,
    )



class _Search:
    """Memoized expectation over channel paths for one instance."""

    def __init__(self, instance: Instance):
        instance.check_bounds()
        self.inst = instance
        self.params = instance.valuation
        self.alpha = (float(instance.alpha),) * instance.num_sensors
        self.draws = TableDraws(instance)
        self.scale = instance.k_const / (instance.horizon * instance.num_sensors)
        p = instance.p_on
        self.branches = [(on, w) for on, w in ((True, p), (False, 1.0 - p)) if w > 0]
        self._plans: Dict[tuple, object] = {}
        self._next: Dict[tuple, Tuple[FlowLineState, ...]] = {}

    def plan(self, lines, on):
        key = (lines, on)
        got = self._plans.get(key)
        if got is None:
            got = self._plans[key] = plan_slot(lines, on, self.params, self.alpha)
        return got

    def advance(self, lines, on, chosen):
        key = (lines, on, chosen)
        got = self._next.get(key)
        if got is None:
            plan = self.plan(lines, on)
            got = self._next[key] = resolve_slot(plan.flowlines, chosen, plan.hard, self.draws).flowlines
        return got

    def options(self, lines, on):
        plan = self.plan(lines, on)
        return sorted(plan.views) if on else []

    def value(self, policy: Optional[PolicyId], reward_slot: Optional[int] = None) -> float:
        """Expected (unscaled) sum of utilities; max over policies when ``policy`` is None."""
        memo: Dict[tuple, float] = {}
        horizon = self.inst.horizon

        def rec(t, lines):
            if t > horizon:
                return 0.0
            key = (t, lines)
            got = memo.get(key)
            if got is not None:
                return got
            total = 0.0
            for on, w in self.branches:
                plan = self.plan(lines, on)
                r = plan.utility_sum if reward_slot is None or reward_slot == t else 0.0
                if reward_slot is not None and t >= reward_slot:
                    total += w * r
                    continue
                opts = self.options(lines, on)
                if not opts:
                    cont = rec(t + 1, self.advance(lines, on, None))
                elif policy is None:
                    cont = max(rec(t + 1, self.advance(lines, on, c)) for c in opts)
                else:
                    c = select(policy, list(plan.views.values()), on, t)
                    cont = rec(t + 1, self.advance(lines, on, c))
                total += w * (r + cont)
            memo[key] = total
            return total

        self._memo = memo
        return rec(1, self.inst.initial_states())

    def witness(self, policy: Optional[PolicyId], reward_slot: Optional[int] = None) -> dict:
        """Decision tree of the (maximizing) policy over every reachable channel branch."""
        self.value(policy, reward_slot)
        memo = self._memo
        horizon = self.inst.horizon
        stop = horizon if reward_slot is None else reward_slot - 1

        def cont_value(t, lines):
            if t > horizon or (reward_slot is not None and t > reward_slot):
                return 0.0
            return memo[(t, lines)]

        def node(t, lines):
            if t > stop:
                return None
            out = {"slot": t, "branches": []}
            for on, w in self.branches:
                opts = self.options(lines, on)
                if not opts:
                    chosen = None
                elif policy is None:
                    chosen = max(opts, key=lambda c: (cont_value(t + 1, self.advance(lines, on, c)), -c))
                else:
                    chosen = select(policy, list(self.plan(lines, on).views.values()), on, t)
                out["branches"].append({
                    "channel_on": on,
                    "probability": w,
                    "active": opts if on else sorted(self.plan(lines, on).views),
                    "chosen": chosen,
                    "next": node(t + 1, self.advance(lines, on, chosen)),
                })
            return out

        return node(1, self.inst.initial_states())

    def decision_points(self) -> Tuple[int, int]:
        """(number of reachable ON states with a real choice, number of distinct policies)."""
        seen = set()
        policies = 1
        points = 0
        stack = [(1, self.inst.initial_states())]
        while stack:
            t, lines = stack.pop()
            if t > self.inst.horizon or (t, lines) in seen:
                continue
            seen.add((t, lines))
            for on, _ in self.branches:
                opts = self.options(lines, on)
                if len(opts) > 1:
                    points += 1
                    policies *= len(opts)
                for c in opts or [None]:
                    stack.append((t + 1, self.advance(lines, on, c)))
        return points, policies


def exact_value(instance: Instance, policy) -> float:
    """Exact EXWSUoI of ``policy`` on ``instance``."""
    s = _Search(instance)
    return s.scale * s.value(PolicyId(policy))


def path_value(instance: Instance, policy, path: Sequence[bool]) -> float:
    """EXWSUoI of ``policy`` along one channel path (no expectation)."""
    instance.check_bounds()
    if len(path) != instance.horizon:
        raise ValueError("channel path length must equal the horizon")
    policy = PolicyId(policy)
    params = instance.valuation
    alpha = (float(instance.alpha),) * instance.num_sensors
    draws = TableDraws(instance)
    lines = instance.initial_states()
    total = 0.0
    for t, on in enumerate(path, start=1):
        plan = plan_slot(lines, on, params, alpha)
        total += plan.utility_sum
        chosen = select(policy, list(plan.views.values()), on, t)
        lines = resolve_slot(plan.flowlines, chosen, plan.hard, draws).flowlines
    return instance.k_const * total / (instance.horizon * instance.num_sensors)


def brute_force_max(instance: Instance) -> Tuple[float, dict]:
    """Best EXWSUoI over all work-conserving policies and a decision tree attaining it."""
    s = _Search(instance)
    best = s.scale * s.value(None)
    return best, s.witness(None)


def _close_or_above(a: float, b: float) -> bool:
    """a >= b up to the relative tolerance."""
    return a >= b - REL_TOL * max(1.0, abs(a), abs(b))


@dataclass
class DominanceReport:
    instance_digest: str
    hlfd_value: float
    max_value: float
    dominant: bool
    per_slot_dominance: bool
    counterexamples: List[dict] = field(default_factory=list)
    policy_values: Dict[str, float] = field(default_factory=dict)
    decision_points: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def verify_dominance(instance: Instance) -> DominanceReport:
    """Compare HLF-D with the brute-force optimum, in total and slot by slot.

    The per-slot check compares HLF-D's expected active-set utility at each
    slot with the best any policy can reach at that slot; if HLF-D is not
    below that bound it dominates every admissible policy at that slot.
    """
    s = _Search(instance)
    hlfd = s.value(PolicyId.HLFD)
    best = s.value(None)
    report = DominanceReport(
        instance_digest=instance.digest(),
        hlfd_value=s.scale * hlfd,
        max_value=s.scale * best,
        dominant=_close_or_above(hlfd, best),
        per_slot_dominance=True,
    )
    for pol in PolicyId:
        report.policy_values[pol.value] = s.scale * s.value(pol)
    report.decision_points = s.decision_points()[0]
    if not report.dominant:
        report.counterexamples.append({
            "kind": "objective",
            "hlfd_value": report.hlfd_value,
            "max_value": report.max_value,
            "hlfd_tree": s.witness(PolicyId.HLFD),
            "witness": s.witness(None),
        })
    for tau in range(1, instance.horizon + 1):
        h = s.value(PolicyId.HLFD, reward_slot=tau)
        m = s.value(None, reward_slot=tau)
        if not _close_or_above(h, m):
            report.per_slot_dominance = False
            report.counterexamples.append({
                "kind": "per_slot",
                "slot": tau,
                "hlfd_expected": s.scale * h,
                "max_expected": s.scale * m,
                "witness": s.witness(None, reward_slot=tau),
            })
    return report


def instance_to_dict(instance: Instance) -> dict:
    return asdict(instance)

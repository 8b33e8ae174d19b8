"""Headline metrics of a run and their Monte-Carlo aggregates."""
from __future__ import annotations

import math
import statistics
from dataclasses import asdict, dataclass, fields
from typing import Dict, Optional, Sequence

from .engine import Trace
from .flowline import Mode

SUMMARY_FIELDS = ("exwsuoi", "mean_age", "mean_latency", "rms_jitter", "drops", "regenerations", "graces")


@dataclass(frozen=True)
class RunSummary:
    exwsuoi: float
    mean_age: float
    mean_latency: float
    rms_jitter: float
    drops: int
    regenerations: int
    graces: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class AggregateStats:
    n: int
    mean: Dict[str, float]
    std: Dict[str, Optional[float]]  # None when n < 2

    def to_dict(self) -> dict:
        return {"n": self.n, "mean": dict(self.mean), "std": dict(self.std)}


def summarize(trace: Trace, config: Optional[dict] = None) -> RunSummary:
    """Mean age, mean total latency, RMS jitter and EXWSUoI of one run.

    Latency enters only for active flow-lines (zero otherwise); age enters for
    every flow-line in every slot.
    """
    cfg = config if config is not None else trace.config
    horizon = cfg["horizon"]
    m = cfg["num_sensors"]
    if len(trace.records) != horizon:
        raise ValueError(f"incomplete trace: {len(trace.records)} of {horizon} slots")
    k = cfg.get("k_const", 1.0)
    alpha = cfg.get("alpha", 1.0)
    age = lat = lat2 = util = 0.0
    drops = regen = graces = 0
    for rec in trace.records:
        for s in rec.sensors:
            age += s.age
            lat += s.total_latency
            lat2 += s.total_latency * s.total_latency
            util += s.utility
        drops += len(rec.dropped)
        regen += len(rec.regenerated)
        graces += len(rec.graced)
    tm = horizon * m
    return RunSummary(
        exwsuoi=k * alpha * util / tm,
        mean_age=age / tm,
        mean_latency=lat / tm,
        rms_jitter=math.sqrt(lat2 / tm),
        drops=drops,
        regenerations=regen,
        graces=graces,
    )


def hibernating_at_end(trace: Trace) -> int:
    """Flow-lines whose drop has not yet been followed by a regeneration inside the horizon."""
    last = trace.records[-1]
    return sum(1 for s in last.sensors if s.mode is Mode.HIBERNATING) + len(last.dropped)


def aggregate(summaries: Sequence[RunSummary]) -> AggregateStats:
    if not summaries:
        raise ValueError("cannot aggregate an empty list of summaries")
    n = len(summaries)
    mean = {}
    std = {}
    for f in fields(RunSummary):
        vals = [float(getattr(s, f.name)) for s in summaries]
        mean[f.name] = statistics.fmean(vals)
        std[f.name] = statistics.stdev(vals) if n > 1 else None
    return AggregateStats(n, mean, std)

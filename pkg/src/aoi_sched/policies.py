"""Scheduling policies: HLF-D and the HLF, EDF and LLF baselines.

``select`` receives the active set's views *after* conflict avoidance, so at
most one view has zero laxity (the hard-deadline critical one). Ties go to the
lowest sensor index.
"""
from __future__ import annotations

import enum
from typing import Optional, Sequence

from .flowline import ContractError
from .valuation import SampleView


class PolicyId(str, enum.Enum):
    HLFD = "hlfd"
    HLF = "hlf"
    EDF = "edf"
    LLF = "llf"


def _check(views: Sequence[SampleView]) -> None:
    hard = 0
    for v in views:
        if v.attempt_latency < 0 or v.total_latency < 0:
            raise ContractError(f"sensor {v.index}: negative latency")
        if v.utility <= 0:
            raise ContractError(f"sensor {v.index}: active sample with zero utility")
        if v.laxity < 0:
            raise ContractError(f"sensor {v.index}: active sample past its deadline")
        hard += v.laxity == 0
    if hard > 1:
        raise ContractError("more than one hard-deadline critical sample")


def _hlfd(views, slot):
    for v in views:
        if v.laxity == 0:
            return v.index
    return max(views, key=lambda v: (v.priority, -v.index)).index


def _hlf(views, slot):
    return max(views, key=lambda v: (v.total_latency, -v.index)).index


def _edf(views, slot):
    # absolute drop epoch of the current attempt
    return min(views, key=lambda v: (slot + v.laxity + 1, v.index)).index


def _llf(views, slot):
    return min(views, key=lambda v: (v.laxity, v.index)).index


_RULES = {PolicyId.HLFD: _hlfd, PolicyId.HLF: _hlf, PolicyId.EDF: _edf, PolicyId.LLF: _llf}


def select(policy: PolicyId, views: Sequence[SampleView], channel_on: bool,
           slot: int = 0) -> Optional[int]:
    """Sensor index to serve this slot, or None when the channel is OFF or nobody is active."""
    if not channel_on or not views:
        return None
    _check(views)
    return _RULES[PolicyId(policy)](views, slot)

"""Bernoulli ON/OFF shared channel, one state per slot."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from .flowline import ContractError


@dataclass(frozen=True)
class ChannelParams:
    p_on: float = 0.8

    def __post_init__(self):
        if not 0.0 <= self.p_on <= 1.0:
            raise ContractError(f"p_on: {self.p_on} not in [0, 1]")


def next_state(params: ChannelParams, rng: np.random.Generator) -> bool:
    """One slot's state, True for ON. Uses exactly one draw from ``rng``."""
    return bool(rng.random() < params.p_on)


class BernoulliChannel:
    """Lazily drawn channel path; state of slot t depends only on the stream and t."""

    def __init__(self, params: ChannelParams, rng: np.random.Generator):
        self.params = params
        self._rng = rng
        self._path: List[bool] = []

    def state(self, t: int) -> bool:
        while len(self._path) < t:
            self._path.append(next_state(self.params, self._rng))
        return self._path[t - 1]


class FixedChannel:
    """A pinned channel path (slot 1 is ``path[0]``)."""

    def __init__(self, path: Sequence[bool]):
        self._path = tuple(bool(s) for s in path)

    def state(self, t: int) -> bool:
        return self._path[t - 1]


def realization_weight(seq: Sequence[bool], params: ChannelParams) -> float:
    on = sum(1 for s in seq if s)
    off = len(seq) - on
    return params.p_on ** on * (1.0 - params.p_on) ** off


def realizations(horizon: int) -> Iterator[Tuple[bool, ...]]:
    """All 2**horizon channel paths."""
    return itertools.product((True, False), repeat=horizon)

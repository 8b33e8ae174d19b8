import math

import pytest

from aoi_sched import valuation as va
from aoi_sched.flowline import ContractError, FlowLineState, Mode
from aoi_sched.valuation import ValuationParams

from conftest import active

P = ValuationParams()


def test_freshness_values():
    assert va.freshness(0, 1, 20) == 1.0
    assert va.freshness(4, 1, 20) == pytest.approx(0.2, rel=1e-12)
    assert va.freshness(0, 2, 20) == pytest.approx(1 / 21, rel=1e-12)
    with pytest.raises(ContractError):
        va.freshness(0, 0, 20)


def test_laxity_values():
    assert va.laxity(5, 0) == 4
    assert va.laxity(5, 4) == 0
    assert va.laxity(5, 5) == -1


@pytest.mark.parametrize("lax,expected", [(-1, 0), (0, 1), (7, 1)])
def test_slack_indicator(lax, expected):
    assert va.slack_indicator(lax) == expected


def test_utility_values():
    assert va.utility(1.0, 1, P) == 1.0
    assert va.utility(0.2, 1, P) == pytest.approx(0.2)
    assert va.utility(0.7, 0, P) == 0.0


@pytest.mark.parametrize("lat,worig,expected", [(4, 5, 0), (6, 5, 2), (1, 5, -3)])
def test_lateness(lat, worig, expected):
    assert va.lateness(lat, worig) == expected


def test_penalty_zero_without_lateness():
    assert va.penalty(0.9, 0, 1, 10, P) == 0.0
    assert va.penalty(0.9, -3, 1, 10, P) == 0.0


def test_penalty_hand_value():
    got = va.penalty(0.5, 2, 1, 10, P)
    assert got == pytest.approx(0.5 * math.exp(-10 * math.log(88) / 100), rel=1e-12)
    assert got == pytest.approx(0.3196, abs=1e-4)  # 0.319537...


def test_penalty_clamps_log_argument():
    short = ValuationParams(horizon=5)
    assert va.tardiness_effect(3, 1, 10, short) == 1.0
    assert va.penalty(0.4, 3, 1, 10, short) == 0.4


def test_effective_utility():
    assert va.effective_utility(0.5, 0.0) == 0.5
    assert va.effective_utility(0.5, va.penalty(0.5, 2, 1, 10, P)) == pytest.approx(0.1804, abs=1e-4)
    assert va.effective_utility(0.0, 0.0) == 0.0


def test_priority():
    assert va.priority(0.3, 0) == math.inf
    assert va.priority(0.2, 1) == pytest.approx(5.0)
    assert va.priority(1.0, 1) == 1.0
    with pytest.raises(ContractError):
        va.priority(0.0, 1)


def test_total_latency():
    assert va.total_latency(3, 10) == 13
    assert va.total_latency(7, 0) == 7
    assert va.total_latency(0, 10) == 10


def test_view_of_critical_sample():
    v = va.view(active(latency=4, window=5), P)
    assert v.laxity == 0 and v.priority == math.inf and v.utility == pytest.approx(0.2)
    assert v.penalty == 0.0


def test_view_of_graced_sample_is_penalized():
    s = FlowLineState(1, Mode.ACTIVE, 20, 1, 1, 2, 7, 5, cum_deadline_prev=0,
                      attempt_latency=6, grace_count=2)
    v = va.view(s, P)
    assert v.lateness == 2
    assert v.penalty == pytest.approx(v.utility * math.exp(-10 * math.log(100 - 5 - 2) / 100))


def test_view_requires_active():
    with pytest.raises(ContractError):
        va.view(FlowLineState(1, Mode.INACTIVE, 1, 1, 0, 3, 3, 3), P)

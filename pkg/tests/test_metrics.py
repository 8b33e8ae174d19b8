import math

import pytest

from aoi_sched.engine import SimConfig, run
from aoi_sched.metrics import RunSummary, aggregate, hibernating_at_end, summarize


def test_hand_built_age_series():
    cfg = SimConfig(num_sensors=1, horizon=4, p_on=1.0, setup_range=(1, 1), window_range=(1, 1))
    for seed in range(1, 6):
        tr = run(cfg, "hlfd", seed)
        assert sorted(r.sensors[0].age for r in tr.records) == [1, 1, 2, 2]
        assert summarize(tr).mean_age == 1.5


def test_silent_network():
    cfg = SimConfig(num_sensors=3, horizon=50, p_on=0.0, setup_range=(1000, 1000))
    s = summarize(run(cfg, "hlf", 1))
    assert s.mean_latency == 0 and s.exwsuoi == 0 and s.rms_jitter == 0


@pytest.mark.parametrize("pol", ["hlfd", "hlf", "edf", "llf"])
def test_rms_bounds_mean_and_drop_accounting(pol):
    tr = run(SimConfig(horizon=300), pol, 6)
    s = summarize(tr)
    assert s.rms_jitter >= s.mean_latency >= 0
    assert s.drops == s.regenerations + hibernating_at_end(tr)


def test_exwsuoi_matches_engine_accumulator():
    cfg = SimConfig(horizon=200, alpha=2.0, k_const=1.0)
    tr = run(cfg, "hlfd", 2)
    assert summarize(tr).exwsuoi == pytest.approx(tr.utility_total / (200 * 16), rel=1e-12)


def test_incomplete_trace_rejected():
    tr = run(SimConfig(horizon=10), "hlfd", 1)
    with pytest.raises(ValueError):
        summarize(tr, {**tr.config, "horizon": 11})


def _summary(x):
    return RunSummary(x, x, x, x, 0, 0, 0)


def test_aggregate():
    one = aggregate([_summary(2.0)])
    assert one.n == 1 and one.mean["mean_age"] == 2.0 and one.std["mean_age"] is None
    assert aggregate([_summary(3.0), _summary(3.0)]).std["exwsuoi"] == 0.0
    two = aggregate([_summary(2.0), _summary(4.0)])
    assert two.mean["rms_jitter"] == 3.0
    assert two.std["rms_jitter"] == pytest.approx(math.sqrt(2))
    with pytest.raises(ValueError):
        aggregate([])

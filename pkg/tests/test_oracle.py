import random

import pytest

from aoi_sched.channel import realization_weight, realizations
from aoi_sched.oracle import (BoundsError, Instance, _Search, brute_force_max, exact_value,
                              path_value, random_instance, verify_dominance)
from aoi_sched.policies import PolicyId

POLICIES = list(PolicyId)


def flat(horizon, initial, setups, window=2, reset=1, p_on=1.0, d_max=4):
    """Instance whose per-sensor tables are constant (``setups[i]`` for sensor i)."""
    depth = horizon + 1
    m = len(initial)
    return Instance(
        horizon=horizon,
        initial=tuple(initial),
        setups=tuple((setups[i],) * depth for i in range(m)),
        windows=tuple(((window,) * depth,) * depth for _ in range(m)),
        resets=tuple(((reset,) * depth,) * depth for _ in range(m)),
        p_on=p_on,
        d_max=d_max,
    )


def test_single_path_when_channel_always_on():
    inst = flat(5, [(1, 2, 2)], [2])
    for pol in POLICIES:
        assert exact_value(inst, pol) == pytest.approx(path_value(inst, pol, [True] * 5), rel=1e-12)


def test_dead_channel_accumulates_waiting_utility():
    # L = 0, 1, 2 with the window graced every slot: 1 + 1/2 + 1/3 over T*M = 3
    inst = flat(3, [(1, 2, 2)], [1], p_on=0.0)
    assert exact_value(inst, "hlfd") == pytest.approx(11 / 18, rel=1e-12)


def test_two_slot_fair_coin_hand_average():
    # paths ON-ON, ON-OFF give 1; OFF-ON, OFF-OFF give 1.5; averaged over T*M = 2
    inst = flat(2, [(1, 2, 2)], [1], p_on=0.5)
    assert exact_value(inst, "hlfd") == pytest.approx(0.625, rel=1e-12)
    best, _ = brute_force_max(inst)
    assert best == pytest.approx(0.625, rel=1e-12)


def test_memoized_expectation_matches_path_enumeration():
    rng = random.Random(3)
    for _ in range(15):
        inst = random_instance(rng, rng.randint(1, 3), rng.randint(1, 5), rng.choice([0.3, 0.5, 0.8]))
        for pol in POLICIES:
            direct = sum(realization_weight(p, inst.channel) * path_value(inst, pol, p)
                         for p in realizations(inst.horizon))
            assert exact_value(inst, pol) == pytest.approx(direct, rel=1e-12, abs=1e-15)


def test_no_decisions_with_one_sensor():
    inst = flat(6, [(2, 3, 1)], [1], p_on=0.7)
    best, _ = brute_force_max(inst)
    for pol in POLICIES:
        assert exact_value(inst, pol) == pytest.approx(best, rel=1e-12)
    assert _Search(inst).decision_points() == (0, 1)


def test_decision_count_on_hand_instance():
    # both active at slot 1 (one choice point); afterwards at most one sensor is active
    inst = flat(2, [(1, 3, 2), (1, 3, 2)], [5, 5])
    assert _Search(inst).decision_points() == (1, 2)


def test_maximum_dominates_every_policy():
    rng = random.Random(11)
    for _ in range(25):
        inst = random_instance(rng, rng.randint(2, 3), rng.randint(3, 6), rng.choice([0.5, 0.8, 1.0]))
        best, _ = brute_force_max(inst)
        for pol in POLICIES:
            assert best >= exact_value(inst, pol) - 1e-12


def test_deadline_blind_greedy_is_beaten_by_the_maximum():
    # HLF serves the older sample 2 and lets sample 1 drop into a long reset
    inst = flat(4, [(1, 2, 3), (1, 6, 5)], [1, 1], window=2, reset=3)
    best, _ = brute_force_max(inst)
    hlf = exact_value(inst, "hlf")
    assert best > hlf + 1e-9
    assert best == pytest.approx(exact_value(inst, "hlfd"), rel=1e-9)


def test_shared_critical_slot_hlfd_is_optimal():
    inst = flat(3, [(1, 2, 3), (1, 2, 3)], [1, 1])
    best, _ = brute_force_max(inst)
    assert exact_value(inst, "hlfd") == pytest.approx(best, rel=1e-9)
    assert verify_dominance(inst).dominant


def test_known_counterexample_is_reported():
    # sensor 1 is fresh and returns after one slot; sensor 2 is older and sleeps 3 slots.
    # HLF-D: 4/3 + 1/2 + 0 = 11/6; serving sensor 1 first: 4/3 + 1/4 + 1 = 31/12
    inst = flat(3, [(1, 2, 2), (3, 4, 6)], [1, 3])
    assert exact_value(inst, "hlfd") == pytest.approx(11 / 36, rel=1e-12)
    best, tree = brute_force_max(inst)
    assert best == pytest.approx(31 / 72, rel=1e-12)
    assert tree["branches"][0]["chosen"] == 1
    rep = verify_dominance(inst)
    assert not rep.dominant
    assert rep.counterexamples[0]["kind"] == "objective"


def test_silent_instance_is_trivially_dominant():
    inst = flat(4, [(3, 2, 1), (3, 2, 2)], [3, 3], p_on=0.5)
    inst = Instance(**{**inst.__dict__, "initial": ((8, 2, 1), (8, 2, 1))})
    rep = verify_dominance(inst)
    assert rep.hlfd_value == rep.max_value == 0.0
    assert rep.dominant and rep.per_slot_dominance


def test_report_serializes():
    import json

    rep = verify_dominance(random_instance(random.Random(1), 2, 4, 0.8))
    d = json.loads(json.dumps(rep.to_dict()))
    for key in ("instance_digest", "hlfd_value", "max_value", "dominant",
                "per_slot_dominance", "counterexamples"):
        assert key in d


def test_bounds_enforced():
    with pytest.raises(BoundsError):
        exact_value(flat(9, [(1, 2, 1)], [1]), "hlfd")
    with pytest.raises(BoundsError):
        exact_value(flat(3, [(1, 2, 1)] * 4, [1] * 4), "hlfd")

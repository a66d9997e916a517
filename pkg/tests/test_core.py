import itertools
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polyra.core import (
    ArrivalEvent,
    ArrivalSequence,
    FlexibleCountError,
    InstanceError,
    NonPositiveError,
    ProblemInstance,
    RewardOrderError,
    SequenceError,
    ball_queyranne_L,
    big_G,
    load_instance,
    load_sequence,
    opt_period,
    opt_total_flexible,
    period_cr,
)

from conftest import instances


# ---------------------------------------------------------------- validation


def test_valid_instance(k2):
    assert k2.dimension == 3
    assert k2.ratio(1) == 0.0 and k2.ratio(2) == 0.5


@pytest.mark.parametrize(
    "K, M, C, r, err",
    [
        (2, 1, 1.0, (2.0, 1.0), RewardOrderError),
        (2, 1, 1.0, (1.0, 1.0), RewardOrderError),
        (2, 2, 1.0, (1.0, 2.0), FlexibleCountError),
        (2, -1, 1.0, (1.0, 2.0), FlexibleCountError),
        (2, 1, 0.0, (1.0, 2.0), NonPositiveError),
        (2, 1, 1.0, (0.0, 2.0), NonPositiveError),
        (2, 1, 1.0, (1.0, 2.0, 3.0), InstanceError),
        (1, 0, 1.0, (1.0,), InstanceError),
    ],
)
def test_invalid_instances(K, M, C, r, err):
    with pytest.raises(err):
        ProblemInstance(K, M, C, r)


def test_instance_json_roundtrip(tmp_path, k3m1):
    path = tmp_path / "inst.json"
    path.write_text(json.dumps(k3m1.to_dict()))
    assert load_instance(path) == k3m1
    with pytest.raises(InstanceError):
        ProblemInstance.from_dict({"K": 2})


def test_geometric():
    inst = ProblemInstance.geometric(3, 1, 0.5)
    assert inst.rewards == (0.25, 0.5, 1.0)


def test_sequence_json_roundtrip(tmp_path):
    seq = ArrivalSequence.of([(1, 0.5), (2, 1.0)], [])
    path = tmp_path / "seq.json"
    path.write_text(json.dumps(seq.to_dict()))
    assert load_sequence(path) == seq
    assert seq.T == 2 and len(seq.events()) == 2
    with pytest.raises(SequenceError):
        ArrivalSequence.from_dict({"periods": [[{"type": 1}]]})


def test_bad_events(k2):
    with pytest.raises(SequenceError):
        ArrivalEvent(0, 1.0)
    with pytest.raises(SequenceError):
        ArrivalEvent(1, -0.1)
    with pytest.raises(SequenceError):
        ArrivalSequence.of([(3, 1.0)]).check(k2)


# ---------------------------------------------------------------- per-period OPT


def test_opt_period_examples(k2, k3m1):
    assert opt_period(k2, [ArrivalEvent(1, 1.0)]) == pytest.approx(1.0)
    assert opt_period(k2, [ArrivalEvent(1, 0.5), ArrivalEvent(2, 0.8)]) == pytest.approx(1.8)
    staircase = [ArrivalEvent(k, 1.0) for k in (1, 2, 3)]
    assert opt_period(k3m1, staircase) == pytest.approx(1.0)
    assert opt_period(k2, []) == 0.0


def test_period_cr_convention():
    assert period_cr(0.0, 0.0) == 1.0
    assert period_cr(1.0, 2.0) == 0.5


def brute_opt_period(inst, events, q):
    """Best subset of unit agents of size C/q, capacity q agents."""
    agents = [e.agent_type for e in events for _ in range(round(e.mass * q / inst.C))]
    best = 0.0
    for n in range(min(q, len(agents)) + 1):
        for pick in itertools.combinations(range(len(agents)), n):
            best = max(best, sum(inst.rewards[agents[i] - 1] for i in pick) * inst.C / q)
    return best


@given(
    instances(K=st.integers(2, 4)),
    st.integers(1, 4),
    st.data(),
)
def test_opt_period_matches_brute_force(inst, q, data):
    n = data.draw(st.integers(0, 6))
    evs = [
        ArrivalEvent(data.draw(st.integers(1, inst.K)), data.draw(st.integers(1, q)) * inst.C / q)
        for _ in range(n)
    ]
    assert opt_period(inst, evs) == pytest.approx(brute_opt_period(inst, evs, q), abs=1e-9)


# ---------------------------------------------------------------- flexible OPT


def brute_opt_flexible(inst, seq, q=4, include_dummy=False):
    """Enumerate grid splits of each flexible event between its period and the next."""
    T = seq.T + (1 if include_dummy else 0)
    flex = [
        (t, n)
        for t, p in enumerate(seq.periods)
        for n, e in enumerate(p)
        if e.agent_type <= inst.M and t + 1 < T
    ]
    best = 0.0
    for split in itertools.product(range(q + 1), repeat=len(flex)):
        late = dict(zip(flex, split))
        buckets = [[] for _ in range(T)]
        for t, p in enumerate(seq.periods):
            for n, e in enumerate(p):
                d = e.mass * late.get((t, n), 0) / q
                buckets[t].append(ArrivalEvent(e.agent_type, e.mass - d))
                if d:
                    buckets[t + 1].append(ArrivalEvent(e.agent_type, d))
        best = max(best, sum(opt_period(inst, b) for b in buckets))
    return best


def test_opt_total_examples(k2):
    for K in (2, 3, 4):
        inst = ProblemInstance.geometric(K, K - 1, 0.5)
        for j in range(1, K + 1):
            block = [(k, 2.0) for k in range(1, j + 1)]
            seq = ArrivalSequence.of(block, block if j == K else [])
            assert opt_total_flexible(inst, seq) == pytest.approx(2 * inst.rewards[j - 1])
    assert opt_total_flexible(k2, ArrivalSequence.of([(2, 1.0)])) == pytest.approx(2.0)
    assert opt_total_flexible(k2, ArrivalSequence.of([(1, 2.0)], [])) == pytest.approx(2.0)
    assert opt_total_flexible(k2, ArrivalSequence.of([])) == 0.0


def test_opt_total_dummy_period(k2):
    seq = ArrivalSequence.of([(1, 2.0)])
    assert opt_total_flexible(k2, seq) == pytest.approx(1.0)
    assert opt_total_flexible(k2, seq, include_dummy=True) == pytest.approx(2.0)


@given(instances(K=st.integers(2, 3)), st.data(), st.booleans())
def test_opt_total_matches_brute_force(inst, data, dummy):
    periods = []
    for _ in range(data.draw(st.integers(1, 2))):
        periods.append(
            [
                (data.draw(st.integers(1, inst.K)), data.draw(st.integers(1, 4)) * inst.C / 4)
                for _ in range(data.draw(st.integers(0, 2)))
            ]
        )
    seq = ArrivalSequence.of(*periods)
    got = opt_total_flexible(inst, seq, include_dummy=dummy)
    assert got == pytest.approx(brute_opt_flexible(inst, seq, 4, dummy), abs=1e-9)
    assert got >= sum(opt_period(inst, p) for p in seq.periods) - 1e-9


# ---------------------------------------------------------------- G and L


def test_G_examples(k3m1, k2):
    assert big_G(k3m1) == pytest.approx(1.5)
    assert big_G(k2) == 1.0
    assert big_G(ProblemInstance(4, 2, 1.0, (1, 3, 4, 400))) == pytest.approx(1.99)


def test_L_examples(k2, k3m1):
    assert ball_queyranne_L(k2) == pytest.approx(2 / 3)
    assert ball_queyranne_L(k3m1) == pytest.approx(0.5)
    near_equal = ProblemInstance(3, 0, 1.0, (1.0, 1.0 + 1e-9, 1.0 + 2e-9))
    assert ball_queyranne_L(near_equal) == pytest.approx(1.0, abs=1e-6)


@given(instances())
def test_G_and_L_ranges(inst):
    G = big_G(inst)
    assert 1.0 - 1e-12 <= G
    if inst.K - inst.M == 1:
        assert G == 1.0
    else:
        assert G < inst.K - inst.M
    L = ball_queyranne_L(inst)
    assert 1.0 / inst.K < L <= 1.0

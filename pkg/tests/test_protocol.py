from collections import Counter

import pytest
from hypothesis import given, strategies as st

from rrl.protocol import (
    CheaterDetected,
    ConfigError,
    Decision,
    NodeState,
    Triplet,
    finalize,
    init_node,
    relay_step,
    verify_own_return,
)


def test_init_node_records_own_triplet():
    state, trip = init_node(3, 1, 2, 4)
    assert state.ids_array == ((3, 1),)
    assert (state.rand_sum, state.input_sum, state.round) == (2, 1, 0)
    assert trip == Triplet(3, 1, 2)


def test_init_node_all_zero():
    state, trip = init_node(0, 0, 0, 4)
    assert (state.rand_sum, state.input_sum) == (0, 0)
    assert trip.as_list() == [0, 0, 0]


@pytest.mark.parametrize("args", [(1, 2, 0, 4), (1, 0, 4, 4), (1, 0, -1, 4), (1, 0, 0, 1), (-1, 0, 0, 4)])
def test_init_node_rejects_bad_config(args):
    with pytest.raises(ConfigError):
        init_node(*args)


def test_relay_step_bookkeeping():
    state, _ = init_node(3, 1, 2, 4)
    new, out = relay_step(state, Triplet(7, 1, 3))
    assert (new.rand_sum, new.input_sum, new.round) == (5, 2, 1)
    assert new.ids_array[-1] == (7, 1)
    assert out == Triplet(7, 1, 3)
    assert state.round == 0  # original untouched


@pytest.mark.parametrize("msg", [Triplet(7, 5, 0), Triplet(7, -1, 0), None])
def test_relay_step_detects(msg):
    state, _ = init_node(3, 1, 2, 4)
    with pytest.raises(CheaterDetected):
        relay_step(state, msg)


def test_relay_step_refuses_extra_rounds():
    state, _ = init_node(1, 0, 0, 2)
    state, _ = relay_step(state, Triplet(2, 0, 0))
    with pytest.raises(ValueError):
        relay_step(state, Triplet(3, 0, 0))


def _ready(own=(3, 1, 2), n=3):
    state, _ = init_node(*own, n)
    for other in range(n - 1):
        state, _ = relay_step(state, Triplet(10 + other, 0, 0))
    return state


def test_verify_own_return_pass_and_mismatch():
    state = _ready()
    assert verify_own_return(state, Triplet(3, 1, 2)).round == 3
    for bad in (Triplet(3, 1, 0), Triplet(4, 1, 2), Triplet(3, 0, 2), None):
        with pytest.raises(CheaterDetected):
            verify_own_return(state, bad)


def test_verify_own_return_needs_all_relays():
    state, _ = init_node(3, 1, 2, 4)
    with pytest.raises(ValueError):
        verify_own_return(state, Triplet(3, 1, 2))


def _final(ids_array, rand_sum, n):
    return NodeState(
        id=ids_array[0][0], input=ids_array[0][1], my_rand=0, n=n,
        ids_array=tuple(ids_array), rand_sum=rand_sum,
        input_sum=sum(i for _, i in ids_array), round=n,
    )


def test_finalize_two_nodes_second_leads():
    d = finalize(_final([(1, 0), (2, 1)], 1, 2))
    assert d == Decision.decided(0, 2, 1)


def test_finalize_all_ones_even_ring():
    for r in range(8):
        assert finalize(_final([(i, 1) for i in (4, 2, 3, 1)], r, 4)).value == 1


def test_finalize_duplicate_id():
    with pytest.raises(CheaterDetected):
        finalize(_final([(5, 0), (5, 1), (2, 0), (3, 0)], 0, 4))


def test_decision_json():
    assert Decision.cheater("x").to_json() == "cheater"
    assert Decision.decided(1, 2, 0).to_json() == 1
    with pytest.raises(ValueError):
        Decision.decided(2, 1, 0)


@st.composite
def views(draw):
    n = draw(st.integers(2, 7))
    ids = draw(st.lists(st.integers(0, 50), min_size=n, max_size=n, unique=True))
    inputs = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    rands = draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
    return n, list(zip(ids, inputs, rands))


def _drive(n, trips):
    state, _ = init_node(*trips[0], n)
    for t in trips[1:]:
        state, _ = relay_step(state, Triplet(*t))
    state = verify_own_return(state, Triplet(*trips[0]))
    return state


@given(views())
def test_relay_invariants_and_decision_formula(view):
    n, trips = view
    state = _drive(n, trips)
    assert len(state.ids_array) == n
    assert state.rand_sum == sum(t[2] for t in trips)
    assert state.input_sum == sum(t[1] for t in trips)
    d = finalize(state)
    ordered = sorted(trips)
    leader = ordered[sum(t[2] for t in trips) % n]
    assert d.leader_id == leader[0]
    assert d.value == (sum(t[1] for t in trips) + leader[1]) % 2


@given(views())
def test_finalize_is_deterministic(view):
    n, trips = view
    assert finalize(_drive(n, trips)) == finalize(_drive(n, trips))


@given(views(), st.integers(1, 6))
def test_duplicates_always_detected(view, k):
    n, trips = view
    j = k % n
    if j == 0:
        j = 1
    trips = list(trips)
    trips[j] = (trips[0][0],) + trips[j][1:]
    assert Counter(t[0] for t in trips)[trips[0][0]] == 2
    with pytest.raises(CheaterDetected):
        finalize(_drive(n, trips))

import pytest
from hypothesis import given, strategies as st

from fogmatch.model import (
    ChannelModel,
    FogProfile,
    Matching,
    MatchingError,
    Scenario,
    ScenarioError,
    UserProfile,
    assignment_indicator,
    matching_is_feasible,
)


def fogs(n, q_min, q_max):
    return [FogProfile(id=i, capacity=1.0, bandwidth=1.0, q_min=q_min, q_max=q_max) for i in range(n)]


def test_da_counterexample_matching_is_infeasible():
    m = Matching.from_fog_sets([[0, 1], [2], []], n_users=3)
    assert not matching_is_feasible(m, fogs(3, 1, 2))


def test_empty_matching_feasible_with_zero_minimums():
    assert matching_is_feasible(Matching(3, 3), fogs(3, 0, 2))


def test_one_user_per_fog_is_feasible():
    m = Matching.from_fog_sets([[0], [1], [2]], n_users=3)
    assert matching_is_feasible(m, fogs(3, 1, 2))


def test_feasibility_rejects_mismatched_fog_list():
    with pytest.raises(MatchingError):
        matching_is_feasible(Matching(2, 3), fogs(2, 0, 1))


def test_indicator():
    m = Matching.from_assignment([0, None], n_fogs=2)
    assert assignment_indicator(m, 0, 0) == 1
    assert assignment_indicator(m, 0, 1) == 0
    assert [assignment_indicator(m, 1, f) for f in range(2)] == [0, 0]
    with pytest.raises(MatchingError):
        assignment_indicator(m, 0, 5)


def test_reassign_moves_user():
    m = Matching(2, 2)
    m.assign(0, 0)
    m.assign(0, 1)
    assert m.users_at(0) == () and m.users_at(1) == (0,)
    assert m.is_consistent()


@given(st.lists(st.tuples(st.integers(0, 9), st.one_of(st.none(), st.integers(0, 3))), max_size=60))
def test_inverse_stays_consistent(ops):
    m = Matching(10, 4)
    for u, f in ops:
        if f is None:
            m.unassign(u)
        else:
            m.assign(u, f)
        assert m.is_consistent()
    for u in range(10):
        assert sum(assignment_indicator(m, u, f) for f in range(4)) <= 1
    assert sum(m.occupancy()) + len(m.unmatched()) == 10


@pytest.mark.parametrize(
    "make",
    [
        lambda: UserProfile(id=0, task_size=0.0, tx_payload=1.0),
        lambda: UserProfile(id=0, task_size=1.0, tx_payload=0.0),
        lambda: FogProfile(id=0, capacity=0.0, bandwidth=1.0),
        lambda: FogProfile(id=0, capacity=1.0, bandwidth=1.0, q_min=3, q_max=2),
        lambda: ChannelModel(path_loss_exponent=1.5),
        lambda: ChannelModel(noise_power=0.0),
        lambda: Scenario(users=[], fogs=[]),
        lambda: Scenario(users=[UserProfile(id=1, task_size=1, tx_payload=1)], fogs=fogs(1, 0, 1)),
    ],
)
def test_invariant_violations_rejected(make):
    with pytest.raises(ScenarioError):
        make()


def test_scenario_json_round_trip(three_fog_scenario):
    text = three_fog_scenario.to_json()
    assert Scenario.from_json(text) == three_fog_scenario

import numpy as np

from fogmatch.baselines import nearest_assignment, random_assignment
from fogmatch.model import Scenario
from fogmatch.simulator import ExperimentConfig, generate_scenario

from conftest import UNIT_CHANNEL, unit_fog, unit_user


def test_random_single_fog():
    s = Scenario(users=[unit_user(u, 1.0) for u in range(5)], fogs=[unit_fog(0)], channel=UNIT_CHANNEL)
    assert random_assignment(s, 3).occupancy() == [5]


def test_random_is_seeded():
    s = generate_scenario(ExperimentConfig(), 100, 1)
    assert random_assignment(s, 7) == random_assignment(s, 7)
    assert random_assignment(s, 7) != random_assignment(s, 8)


def test_random_occupancy_law_of_large_numbers():
    s = generate_scenario(ExperimentConfig(), 500, 0)
    occ = np.mean([random_assignment(s, seed).occupancy() for seed in range(100)], axis=0)
    assert np.all(np.abs(occ - 100) <= 15)


def test_nearest_assignment():
    fogs = [unit_fog(0, pos=(0, 0)), unit_fog(1, pos=(10, 0)), unit_fog(2, pos=(5, 5))]
    users = [unit_user(0, 1.0, pos=(5, 5)), unit_user(1, 1.0, pos=(5, 0)), unit_user(2, 1.0, pos=(9, 0))]
    s = Scenario(users=users, fogs=fogs, channel=UNIT_CHANNEL)
    assert nearest_assignment(s).assignment() == (2, 0, 1)


def test_nearest_cluster_piles_onto_one_fog():
    fogs = [unit_fog(0, pos=(0, 0)), unit_fog(1, pos=(100, 0))]
    users = [unit_user(u, 1.0, pos=(1 + u * 0.1, 0)) for u in range(30)]
    s = Scenario(users=users, fogs=fogs, channel=UNIT_CHANNEL)
    m = nearest_assignment(s)
    assert m.occupancy() == [30, 0]
    assert m.unmatched() == []


def test_baselines_match_every_user_once():
    s = generate_scenario(ExperimentConfig(), 200, 3)
    for m in (random_assignment(s, 3), nearest_assignment(s)):
        assert m.is_consistent() and not m.unmatched() and sum(m.occupancy()) == 200

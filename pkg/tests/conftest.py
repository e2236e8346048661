import pytest

from fogmatch.model import ChannelModel, FogProfile, Scenario, UserProfile

# tx_power == noise_power at the reference distance gives SINR = 1, so a 1 MHz
# link moves 1e6 bit/s and a 1e6-bit payload takes exactly one second.
UNIT_CHANNEL = ChannelModel(tx_power=1.0, noise_power=1.0, path_loss_exponent=2.0, reference_distance=1.0)


def unit_user(uid, work, payload=1e6, pos=(0.0, 0.0)):
    return UserProfile(id=uid, task_size=work, tx_payload=payload, position=pos)


def unit_fog(fid, capacity=5.0, q_min=0, q_max=10, pos=(0.0, 0.0)):
    return FogProfile(id=fid, capacity=capacity, bandwidth=1e6, position=pos, q_min=q_min, q_max=q_max)


@pytest.fixture
def unit_channel():
    return UNIT_CHANNEL


@pytest.fixture
def counterexample():
    """3 users / 3 fogs, q_min=1, q_max=2, GL u1>u2>u3, all users f1>f2>f3 (0-based ids)."""
    prefs = ((0, 1, 2),) * 3
    gl = (0, 1, 2)
    return prefs, gl


@pytest.fixture
def three_fog_scenario():
    users = [unit_user(0, 10.0), unit_user(1, 5.0), unit_user(2, 1.0)]
    fogs = [unit_fog(0), unit_fog(1), unit_fog(2)]
    return Scenario(users=users, fogs=fogs, channel=UNIT_CHANNEL)

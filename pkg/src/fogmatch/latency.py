"""Response delay of a user's request at a fog, and the fog load / imbalance metrics built on it."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from fogmatch.model import ChannelModel, FogId, FogProfile, Matching, Scenario, UserId, UserProfile


class LinkError(ArithmeticError):
    """The link between a user and a fog carries no usable rate."""


@dataclass(frozen=True)
class DelayBreakdown:
    processing: float
    queueing: float
    propagation: float

    @property
    def total(self) -> float:
        return self.processing + self.queueing + self.propagation


def distance(a: tuple[float, float], b: tuple[float, float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def sinr(u: UserProfile, f: FogProfile, ch: ChannelModel) -> float:
    # distances below the reference distance (including 0) are clamped to it
    d = max(distance(u.position, f.position), ch.reference_distance)
    gain = (d / ch.reference_distance) ** (-ch.path_loss_exponent)
    return ch.tx_power * gain / ch.noise_power


def transmission_rate(u: UserProfile, f: FogProfile, ch: ChannelModel) -> float:
    """Shannon rate bw * log2(1 + SINR) of the user-fog link, in bits per second."""
    return f.bandwidth * math.log2(1.0 + sinr(u, f, ch))


def propagation_delay(u: UserProfile, f: FogProfile, ch: ChannelModel) -> float:
    """Time to move the request and response payload over the link."""
    rate = transmission_rate(u, f, ch)
    if not rate > 0:
        raise LinkError(f"user {u.id} -> fog {f.id}: link rate is zero")
    return u.tx_payload / rate


def queueing_delay(pending: Iterable[float], f: FogProfile) -> float:
    """Time to drain the work already queued at the fog."""
    return math.fsum(pending) / f.capacity


def response_delay(
    u: UserProfile, f: FogProfile, pending: Iterable[float], ch: ChannelModel
) -> DelayBreakdown:
    return DelayBreakdown(
        processing=u.task_size / f.capacity,
        queueing=queueing_delay(pending, f),
        propagation=propagation_delay(u, f, ch),
    )


def _arrival_order(scenario: Scenario, gl: Optional[Sequence[UserId]]) -> dict[UserId, int]:
    if gl is None:
        from fogmatch.preferences import build_global_list

        gl = build_global_list(scenario)
    return {u: i for i, u in enumerate(gl)}


def fog_delays(
    m: Matching, f: FogId, scenario: Scenario, gl: Optional[Sequence[UserId]] = None
) -> dict[UserId, DelayBreakdown]:
    """Delay of every user at fog ``f``, queueing them in GL rank order."""
    rank = _arrival_order(scenario, gl)
    fog = scenario.fogs[f]
    out: dict[UserId, DelayBreakdown] = {}
    pending: list[float] = []
    for u in sorted(m.users_at(f), key=lambda u: (rank[u], u)):
        user = scenario.users[u]
        out[u] = response_delay(user, fog, pending, scenario.channel)
        pending.append(user.task_size)
    return out


def user_delays(
    m: Matching, scenario: Scenario, gl: Optional[Sequence[UserId]] = None
) -> dict[UserId, DelayBreakdown]:
    """Delays of all matched users, keyed by user id."""
    if gl is None:
        gl = list(_arrival_order(scenario, None))
    out: dict[UserId, DelayBreakdown] = {}
    for f in range(scenario.n_fogs):
        out.update(fog_delays(m, f, scenario, gl))
    return out


def fog_load(
    m: Matching, f: FogId, scenario: Scenario, gl: Optional[Sequence[UserId]] = None
) -> float:
    """Sum of response delays of the users assigned to ``f``."""
    return math.fsum(d.total for d in fog_delays(m, f, scenario, gl).values())


def fog_loads(
    m: Matching, scenario: Scenario, gl: Optional[Sequence[UserId]] = None
) -> list[float]:
    if gl is None:
        gl = list(_arrival_order(scenario, None))
    return [fog_load(m, f, scenario, gl) for f in range(scenario.n_fogs)]


def load_imbalance(
    m: Matching, scenario: Scenario, gl: Optional[Sequence[UserId]] = None
) -> float:
    """Spread between the most and the least loaded fog."""
    loads = fog_loads(m, scenario, gl)
    return max(loads) - min(loads)


def total_delay(
    m: Matching, scenario: Scenario, gl: Optional[Sequence[UserId]] = None
) -> float:
    return math.fsum(fog_loads(m, scenario, gl))

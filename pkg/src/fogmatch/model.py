"""Entities shared by every other module: users, fogs, channel, scenario and matching."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

UserId = int
FogId = int


class ScenarioError(ValueError):
    """A profile or scenario violates a field invariant."""


class MatchingError(ValueError):
    """A matching refers to unknown users or fogs, or is internally inconsistent."""


def _finite_pos(name: str, value: float) -> None:
    if not (math.isfinite(value) and value > 0):
        raise ScenarioError(f"{name} must be a finite positive number, got {value!r}")


@dataclass(frozen=True)
class UserProfile:
    id: UserId
    task_size: float  # work units
    tx_payload: float  # bits on the wire (request + response)
    position: tuple[float, float] = (0.0, 0.0)  # meters

    def __post_init__(self):
        if self.id < 0:
            raise ScenarioError(f"user id must be >= 0, got {self.id}")
        _finite_pos("task_size", self.task_size)
        _finite_pos("tx_payload", self.tx_payload)
        object.__setattr__(self, "position", (float(self.position[0]), float(self.position[1])))


@dataclass(frozen=True)
class FogProfile:
    id: FogId
    capacity: float  # work units per second
    bandwidth: float  # Hz
    position: tuple[float, float] = (0.0, 0.0)
    q_min: int = 0
    q_max: int = 0

    def __post_init__(self):
        if self.id < 0:
            raise ScenarioError(f"fog id must be >= 0, got {self.id}")
        _finite_pos("capacity", self.capacity)
        _finite_pos("bandwidth", self.bandwidth)
        if not 0 <= self.q_min <= self.q_max:
            raise ScenarioError(
                f"fog {self.id}: need 0 <= q_min <= q_max, got ({self.q_min}, {self.q_max})"
            )
        object.__setattr__(self, "position", (float(self.position[0]), float(self.position[1])))


@dataclass(frozen=True)
class ChannelModel:
    """Log-distance path loss: SINR = tx_power * (d / d0)^-alpha / noise_power."""

    tx_power: float = 1.0
    noise_power: float = 1e-9
    path_loss_exponent: float = 3.0
    reference_distance: float = 1.0

    def __post_init__(self):
        _finite_pos("tx_power", self.tx_power)
        _finite_pos("noise_power", self.noise_power)
        _finite_pos("reference_distance", self.reference_distance)
        if not (math.isfinite(self.path_loss_exponent) and self.path_loss_exponent >= 2):
            raise ScenarioError(f"path_loss_exponent must be >= 2, got {self.path_loss_exponent}")


@dataclass(frozen=True)
class Scenario:
    users: tuple[UserProfile, ...]
    fogs: tuple[FogProfile, ...]
    channel: ChannelModel = field(default_factory=ChannelModel)
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "users", tuple(self.users))
        object.__setattr__(self, "fogs", tuple(self.fogs))
        if not self.fogs:
            raise ScenarioError("a scenario needs at least one fog")
        if [u.id for u in self.users] != list(range(len(self.users))):
            raise ScenarioError("user ids must be dense and ordered 0..U-1")
        if [f.id for f in self.fogs] != list(range(len(self.fogs))):
            raise ScenarioError("fog ids must be dense and ordered 0..F-1")
        if not 0 <= self.rng_seed < 2**64:
            raise ScenarioError("rng_seed must fit in 64 unsigned bits")

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def n_fogs(self) -> int:
        return len(self.fogs)

    def to_dict(self) -> dict:
        return {
            "rng_seed": self.rng_seed,
            "channel": asdict(self.channel),
            "fogs": [asdict(f) for f in self.fogs],
            "users": [asdict(u) for u in self.users],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        def _pos(d):
            d = dict(d)
            d["position"] = tuple(d["position"])
            return d

        return cls(
            users=tuple(UserProfile(**_pos(u)) for u in data["users"]),
            fogs=tuple(FogProfile(**_pos(f)) for f in data["fogs"]),
            channel=ChannelModel(**data["channel"]),
            rng_seed=int(data["rng_seed"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        return cls.from_dict(json.loads(text))


class Matching:
    """Assignment of users to at most one fog each, with the fog-side inverse kept in sync.

    Users listed under a fog are kept in insertion order, which the algorithms
    arrange to be GL order.
    """

    def __init__(self, n_users: int, n_fogs: int):
        self.n_users = n_users
        self.n_fogs = n_fogs
        self._fog_of: list[Optional[FogId]] = [None] * n_users
        self._users_at: list[list[UserId]] = [[] for _ in range(n_fogs)]

    @classmethod
    def from_assignment(
        cls, assignment: Sequence[Optional[FogId]], n_fogs: int
    ) -> "Matching":
        m = cls(len(assignment), n_fogs)
        for u, f in enumerate(assignment):
            if f is not None:
                m.assign(u, f)
        return m

    @classmethod
    def from_fog_sets(
        cls, fog_sets: Sequence[Iterable[UserId]], n_users: int
    ) -> "Matching":
        m = cls(n_users, len(fog_sets))
        for f, users in enumerate(fog_sets):
            for u in users:
                m.assign(u, f)
        return m

    def _check_user(self, u: UserId) -> None:
        if not 0 <= u < self.n_users:
            raise MatchingError(f"unknown user id {u}")

    def _check_fog(self, f: FogId) -> None:
        if not 0 <= f < self.n_fogs:
            raise MatchingError(f"unknown fog id {f}")

    def assign(self, u: UserId, f: FogId) -> None:
        self._check_user(u)
        self._check_fog(f)
        if self._fog_of[u] is not None:
            self.unassign(u)
        self._fog_of[u] = f
        self._users_at[f].append(u)

    def unassign(self, u: UserId) -> None:
        self._check_user(u)
        f = self._fog_of[u]
        if f is not None:
            self._users_at[f].remove(u)
            self._fog_of[u] = None

    def fog_of(self, u: UserId) -> Optional[FogId]:
        self._check_user(u)
        return self._fog_of[u]

    def users_at(self, f: FogId) -> tuple[UserId, ...]:
        self._check_fog(f)
        return tuple(self._users_at[f])

    def occupancy(self) -> list[int]:
        return [len(us) for us in self._users_at]

    def unmatched(self) -> list[UserId]:
        return [u for u, f in enumerate(self._fog_of) if f is None]

    def assignment(self) -> tuple[Optional[FogId], ...]:
        return tuple(self._fog_of)

    def pairs(self) -> Iterator[tuple[UserId, FogId]]:
        for u, f in enumerate(self._fog_of):
            if f is not None:
                yield u, f

    def is_consistent(self) -> bool:
        """Forward map and inverse agree exactly, and no user sits under two fogs."""
        seen: set[UserId] = set()
        for f, users in enumerate(self._users_at):
            for u in users:
                if u in seen or self._fog_of[u] != f:
                    return False
                seen.add(u)
        return seen == {u for u, f in enumerate(self._fog_of) if f is not None}

    def __eq__(self, other):
        if not isinstance(other, Matching):
            return NotImplemented
        return (
            self.n_fogs == other.n_fogs
            and self._fog_of == other._fog_of
            and [sorted(x) for x in self._users_at] == [sorted(x) for x in other._users_at]
        )

    def __repr__(self):
        body = ", ".join(f"f{f}:{sorted(us)}" for f, us in enumerate(self._users_at))
        return f"Matching({body})"


def matching_is_feasible(m: Matching, fogs: Sequence[FogProfile]) -> bool:
    """True iff every fog's occupancy lies inside its [q_min, q_max] window."""
    if m.n_fogs != len(fogs):
        raise MatchingError(f"matching has {m.n_fogs} fogs, profile list has {len(fogs)}")
    occ = m.occupancy()
    return all(f.q_min <= occ[f.id] <= f.q_max for f in fogs)


def assignment_indicator(m: Matching, u: UserId, f: FogId) -> int:
    m._check_fog(f)
    return int(m.fog_of(u) == f)

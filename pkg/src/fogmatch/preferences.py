"""User-side rankings of fogs and the global list (GL) of users shared by all fogs."""

from __future__ import annotations

import math
from enum import Enum
from typing import Optional, Sequence

from fogmatch.latency import LinkError, propagation_delay
from fogmatch.model import FogId, Scenario, UserId

UserPreferences = tuple[tuple[FogId, ...], ...]
GlobalList = tuple[UserId, ...]


class UserCriterion(str, Enum):
    EXPECTED_DELAY = "expected-delay"


class GLCriterion(str, Enum):
    TASK_SIZE_DESC = "task-size-desc"
    ID = "id"
    CUSTOM = "custom"


def expected_delay(scenario: Scenario, u: UserId, f: FogId) -> float:
    """Delay ``u`` would see at ``f`` with an empty queue; inf for a dead link."""
    user, fog = scenario.users[u], scenario.fogs[f]
    try:
        return user.task_size / fog.capacity + propagation_delay(user, fog, scenario.channel)
    except LinkError:
        return math.inf


def build_user_preferences(
    scenario: Scenario, criterion: UserCriterion | str = UserCriterion.EXPECTED_DELAY
) -> UserPreferences:
    criterion = UserCriterion(criterion)
    prefs = []
    for u in range(scenario.n_users):
        cost = [expected_delay(scenario, u, f) for f in range(scenario.n_fogs)]
        prefs.append(tuple(sorted(range(scenario.n_fogs), key=lambda f: (cost[f], f))))
    return tuple(prefs)


def build_global_list(
    scenario: Scenario,
    criterion: GLCriterion | str = GLCriterion.TASK_SIZE_DESC,
    custom: Optional[Sequence[UserId]] = None,
) -> GlobalList:
    criterion = GLCriterion(criterion)
    ids = range(scenario.n_users)
    if criterion is GLCriterion.TASK_SIZE_DESC:
        return tuple(sorted(ids, key=lambda u: (-scenario.users[u].task_size, u)))
    if criterion is GLCriterion.ID:
        return tuple(ids)
    if custom is None or sorted(custom) != list(ids):
        raise ValueError("custom GL must be a permutation of all user ids")
    return tuple(custom)


def is_permutation(order: Sequence[int], n: int) -> bool:
    return len(order) == n and sorted(order) == list(range(n))

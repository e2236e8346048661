"""Capacitated deferred acceptance, multi-stage DA with minimum quotas, and matching audits."""

from __future__ import annotations

import heapq
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from fogmatch.model import FogId, Matching, Scenario, UserId

log = logging.getLogger(__name__)


class InfeasibleQuotaError(ValueError):
    """Total minimum quota exceeds the users, or total maximum quota falls short of them."""


@dataclass(frozen=True)
class QuotaVector:
    q_min: tuple[int, ...]
    q_max: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "q_min", tuple(int(x) for x in self.q_min))
        object.__setattr__(self, "q_max", tuple(int(x) for x in self.q_max))
        if len(self.q_min) != len(self.q_max):
            raise ValueError("q_min and q_max must have one entry per fog")
        for f, (lo, hi) in enumerate(zip(self.q_min, self.q_max)):
            if not 0 <= lo <= hi:
                raise ValueError(f"fog {f}: need 0 <= q_min <= q_max, got ({lo}, {hi})")

    @classmethod
    def from_scenario(cls, scenario: Scenario) -> "QuotaVector":
        return cls(tuple(f.q_min for f in scenario.fogs), tuple(f.q_max for f in scenario.fogs))

    @classmethod
    def uniform(cls, n_fogs: int, q_min: int, q_max: int) -> "QuotaVector":
        return cls((q_min,) * n_fogs, (q_max,) * n_fogs)

    def __len__(self):
        return len(self.q_min)

    def admits(self, n_users: int) -> bool:
        return sum(self.q_min) <= n_users <= sum(self.q_max)


@dataclass
class StageTrace:
    """What one MSDA stage reserved, whom it matched, and how the quotas moved."""

    index: int
    reserved: tuple[UserId, ...]
    subgroup: tuple[UserId, ...]
    capacity_source: str  # "max" or "min"
    capacities: tuple[int, ...]
    matched: dict[UserId, FogId]
    q_min_before: tuple[int, ...]
    q_max_before: tuple[int, ...]
    q_min_after: tuple[int, ...]
    q_max_after: tuple[int, ...]

    def received(self) -> list[int]:
        counts = [0] * len(self.capacities)
        for f in self.matched.values():
            counts[f] += 1
        return counts

    def to_dict(self) -> dict:
        return {
            "stage": self.index,
            "reserved": list(self.reserved),
            "subgroup": list(self.subgroup),
            "capacity_source": self.capacity_source,
            "capacities": list(self.capacities),
            "matched": {str(u): f for u, f in sorted(self.matched.items())},
            "q_min_before": list(self.q_min_before),
            "q_max_before": list(self.q_max_before),
            "q_min_after": list(self.q_min_after),
            "q_max_after": list(self.q_max_after),
        }


def _gl_rank(gl: Sequence[UserId]) -> dict[UserId, int]:
    return {u: i for i, u in enumerate(gl)}


def deferred_acceptance(
    users: Iterable[UserId],
    prefs: Sequence[Sequence[FogId]],
    gl: Sequence[UserId],
    capacities: Sequence[int],
) -> Matching:
    """User-proposing deferred acceptance with fog capacities and GL as every fog's ranking.

    Users propose down their preference lists; a full fog keeps its best
    proposers under GL and bounces the worst. Users who run out of fogs stay
    unmatched. Only ``users`` take part; everyone else is left unmatched.
    """
    rank = _gl_rank(gl)
    n_fogs = len(capacities)
    held: list[list[tuple[int, UserId]]] = [[] for _ in range(n_fogs)]  # max-heap on rank
    next_choice: dict[UserId, int] = {}
    free = deque()
    for u in users:
        next_choice[u] = 0
        free.append(u)

    while free:
        u = free.popleft()
        choices = prefs[u]
        while next_choice[u] < len(choices):
            f = choices[next_choice[u]]
            next_choice[u] += 1
            if capacities[f] <= 0:
                continue
            heap = held[f]
            if len(heap) < capacities[f]:
                heapq.heappush(heap, (-rank[u], u))
                break
            worst_rank = -heap[0][0]
            if rank[u] < worst_rank:
                _, bumped = heapq.heapreplace(heap, (-rank[u], u))
                free.append(bumped)
                break
        # falling through the loop leaves u unmatched

    m = Matching(len(prefs), n_fogs)
    for f, heap in enumerate(held):
        for _, u in sorted(heap, key=lambda t: -t[0]):
            m.assign(u, f)
    return m


def multi_stage_da(
    prefs: Sequence[Sequence[FogId]],
    gl: Sequence[UserId],
    quotas: QuotaVector,
) -> tuple[Matching, list[StageTrace]]:
    """Run DA in stages, holding back the GL-worst users needed to fill minimum quotas.

    Each stage reserves the ``sum(q_min)`` lowest-ranked remaining users. The
    users that dropped out of the reserve since the previous stage are matched
    with the current maximum quotas; once nothing drops out, the reserve itself
    is matched with the current minimum quotas. Quotas shrink by the number of
    users each fog received.
    """
    n_users, n_fogs = len(prefs), len(quotas)
    if not quotas.admits(n_users):
        raise InfeasibleQuotaError(
            f"{n_users} users outside quota window "
            f"[{sum(quotas.q_min)}, {sum(quotas.q_max)}]"
        )
    q_min = list(quotas.q_min)
    q_max = list(quotas.q_max)
    remaining = list(gl)  # best first
    prev_reserved = set(remaining)
    m = Matching(n_users, n_fogs)
    traces: list[StageTrace] = []

    k = 0
    while remaining:
        k += 1
        r = sum(q_min)
        reserved = remaining[max(len(remaining) - r, 0):] if r > 0 else []
        reserved_set = set(reserved)
        released = [u for u in remaining if u in prev_reserved and u not in reserved_set]
        if released:
            subgroup, caps, source = released, tuple(q_max), "max"
        else:
            subgroup, caps, source = reserved, tuple(q_min), "min"

        stage = deferred_acceptance(subgroup, prefs, gl, caps)
        matched = dict(stage.pairs())
        if not matched:
            raise RuntimeError(f"MSDA stage {k} matched no user; quota bookkeeping is broken")

        before = (tuple(q_min), tuple(q_max))
        got = [0] * n_fogs
        for u in subgroup:  # GL order keeps each fog's user list GL-sorted
            f = matched.get(u)
            if f is not None:
                m.assign(u, f)
                got[f] += 1
        for f in range(n_fogs):
            q_max[f] -= got[f]
            q_min[f] = max(0, q_min[f] - got[f])
        remaining = [u for u in remaining if u not in matched]
        prev_reserved = reserved_set
        traces.append(
            StageTrace(
                index=k,
                reserved=tuple(reserved),
                subgroup=tuple(subgroup),
                capacity_source=source,
                capacities=caps,
                matched=matched,
                q_min_before=before[0],
                q_max_before=before[1],
                q_min_after=tuple(q_min),
                q_max_after=tuple(q_max),
            )
        )
        log.debug("stage %d: %s caps %s matched %d, %d left", k, source, caps, len(matched), len(remaining))

    return m, traces


def msda(
    scenario: Scenario,
    prefs: Sequence[Sequence[FogId]],
    gl: Sequence[UserId],
    quotas: Optional[QuotaVector] = None,
) -> tuple[Matching, list[StageTrace]]:
    """Multi-stage deferred acceptance on a scenario; quotas default to the fog profiles."""
    if quotas is None:
        quotas = QuotaVector.from_scenario(scenario)
    if len(prefs) != scenario.n_users or len(quotas) != scenario.n_fogs:
        raise ValueError("preferences / quotas do not match the scenario dimensions")
    return multi_stage_da(prefs, gl, quotas)


def _max_caps(quotas: Union[QuotaVector, Sequence[int]]) -> tuple[int, ...]:
    return quotas.q_max if isinstance(quotas, QuotaVector) else tuple(quotas)


def find_blocking_pairs(
    m: Matching,
    prefs: Sequence[Sequence[FogId]],
    gl: Sequence[UserId],
    quotas: Union[QuotaVector, Sequence[int]],
    users: Optional[Iterable[UserId]] = None,
) -> list[tuple[UserId, FogId]]:
    """All (u, f) where u prefers f to its match and f has room or holds someone GL-worse than u.

    Being unmatched is worse than any fog. ``users`` restricts the check to a
    subset of users (the matching should then only contain those users).
    """
    caps = _max_caps(quotas)
    rank = _gl_rank(gl)
    occ = m.occupancy()
    worst_held = [max((rank[v] for v in m.users_at(f)), default=-1) for f in range(m.n_fogs)]
    out = []
    for u in range(m.n_users) if users is None else sorted(users):
        current = m.fog_of(u)
        for f in prefs[u]:
            if f == current:
                break
            if occ[f] < caps[f] or worst_held[f] > rank[u]:
                out.append((u, f))
    return out


@dataclass
class AuditReport:
    feasible: bool
    occupancy: list[int]
    under_quota: list[FogId] = field(default_factory=list)
    over_quota: list[FogId] = field(default_factory=list)
    unmatched: int = 0
    blocking_pairs: int = 0
    consistent: bool = True

    @property
    def ok(self) -> bool:
        return (
            self.feasible and self.consistent and self.unmatched == 0 and self.blocking_pairs == 0
        )

    def __str__(self):
        status = "OK" if self.ok else "FLAGGED"
        lines = [f"audit: {status}", f"  occupancy: {self.occupancy}"]
        if self.under_quota:
            lines.append(f"  below q_min: fogs {self.under_quota}")
        if self.over_quota:
            lines.append(f"  above q_max: fogs {self.over_quota}")
        lines.append(f"  unmatched users: {self.unmatched}")
        lines.append(f"  blocking pairs: {self.blocking_pairs}")
        return "\n".join(lines)


def stage_blocking_pairs(
    traces: Sequence[StageTrace],
    prefs: Sequence[Sequence[FogId]],
    gl: Sequence[UserId],
    n_users: int,
) -> list[tuple[int, UserId, FogId]]:
    """Blocking pairs of each MSDA stage, judged against that stage's own capacities."""
    out = []
    for t in traces:
        sub = Matching(n_users, len(t.capacities))
        for u, f in t.matched.items():
            sub.assign(u, f)
        for u, f in find_blocking_pairs(sub, prefs, gl, t.capacities, users=t.subgroup):
            out.append((t.index, u, f))
    return out


def audit(
    m: Matching,
    quotas: QuotaVector,
    prefs: Optional[Sequence[Sequence[FogId]]] = None,
    gl: Optional[Sequence[UserId]] = None,
    traces: Optional[Sequence[StageTrace]] = None,
) -> AuditReport:
    """Feasibility, occupancy and blocking-pair summary of a matching.

    With ``traces`` (MSDA output) blocking pairs are counted per stage against
    the reduced quotas; otherwise, given ``prefs`` and ``gl``, against q_max.
    """
    occ = m.occupancy()
    under = [f for f in range(m.n_fogs) if occ[f] < quotas.q_min[f]]
    over = [f for f in range(m.n_fogs) if occ[f] > quotas.q_max[f]]
    blocking = 0
    if prefs is not None and gl is not None:
        if traces is not None:
            blocking = len(stage_blocking_pairs(traces, prefs, gl, m.n_users))
        else:
            blocking = len(find_blocking_pairs(m, prefs, gl, quotas))
    return AuditReport(
        feasible=not under and not over,
        occupancy=occ,
        under_quota=under,
        over_quota=over,
        unmatched=len(m.unmatched()),
        blocking_pairs=blocking,
        consistent=m.is_consistent(),
    )

"""Exhaustive-search oracles for small instances.

Everything here enumerates assignments directly and shares no code with the
matching engine beyond the ``Matching`` container, so it can be used to check it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from fogmatch.matching import QuotaVector, deferred_acceptance, multi_stage_da
from fogmatch.model import FogId, Matching, Scenario, UserId

UNMATCHED = -1


@dataclass(frozen=True)
class Instance:
    prefs: tuple[tuple[FogId, ...], ...]
    gl: tuple[UserId, ...]
    quotas: QuotaVector

    @property
    def n_users(self) -> int:
        return len(self.prefs)

    @property
    def n_fogs(self) -> int:
        return len(self.quotas)


def assignments(n_users: int, n_fogs: int, allow_unmatched: bool = True) -> Iterator[tuple[int, ...]]:
    """Every map users -> fogs (or UNMATCHED); (F+1)^U of them, F^U without UNMATCHED."""
    options = list(range(n_fogs)) + ([UNMATCHED] if allow_unmatched else [])
    return itertools.product(options, repeat=n_users)


def _counts(assign: Sequence[int], n_fogs: int) -> list[int]:
    c = [0] * n_fogs
    for f in assign:
        if f != UNMATCHED:
            c[f] += 1
    return c


def _pref_pos(prefs) -> np.ndarray:
    n_fogs = len(prefs[0]) if prefs else 0
    pos = np.empty((len(prefs), n_fogs + 1), dtype=int)
    for u, order in enumerate(prefs):
        for i, f in enumerate(order):
            pos[u, f] = i
        pos[u, UNMATCHED] = n_fogs  # the extra column: unmatched ranks last
    return pos


def has_justified_envy(assign, prefs, gl, pos=None) -> bool:
    """Some user prefers a fog holding a GL-worse user than itself."""
    pos = _pref_pos(prefs) if pos is None else pos
    rank = {u: i for i, u in enumerate(gl)}
    for u, fu in enumerate(assign):
        for v, fv in enumerate(assign):
            if fv != UNMATCHED and rank[v] > rank[u] and pos[u, fv] < pos[u, fu]:
                return True
    return False


def is_wasteful(assign, prefs, caps, pos=None) -> bool:
    """Some user prefers a fog that still has a free seat."""
    pos = _pref_pos(prefs) if pos is None else pos
    counts = _counts(assign, len(caps))
    for u, fu in enumerate(assign):
        for f in range(len(caps)):
            if counts[f] < caps[f] and pos[u, f] < pos[u, fu]:
                return True
    return False


def is_stable(assign, prefs, gl, caps) -> bool:
    pos = _pref_pos(prefs)
    if any(c > cap for c, cap in zip(_counts(assign, len(caps)), caps)):
        return False
    return not has_justified_envy(assign, prefs, gl, pos) and not is_wasteful(assign, prefs, caps, pos)


def stable_assignments(prefs, gl, caps) -> list[tuple[int, ...]]:
    return [a for a in assignments(len(prefs), len(caps)) if is_stable(a, prefs, gl, caps)]


def user_optimal(prefs, candidates: Sequence[tuple[int, ...]]) -> Optional[tuple[int, ...]]:
    """The candidate every user weakly prefers to every other candidate, if one exists."""
    pos = _pref_pos(prefs)
    for a in candidates:
        if all(pos[u, a[u]] <= pos[u, b[u]] for b in candidates for u in range(len(a))):
            return a
    return None


def fair_feasible_assignments(prefs, gl, quotas: QuotaVector) -> list[tuple[int, ...]]:
    """Complete assignments inside every quota window with no justified envy."""
    out = []
    pos = _pref_pos(prefs)
    for a in assignments(len(prefs), len(quotas), allow_unmatched=False):
        c = _counts(a, len(quotas))
        if all(lo <= x <= hi for x, lo, hi in zip(c, quotas.q_min, quotas.q_max)):
            if not has_justified_envy(a, prefs, gl, pos):
                out.append(a)
    return out


def min_total_delay_assignment(
    scenario: Scenario, gl: Sequence[UserId], quotas: Optional[QuotaVector] = None
) -> tuple[Optional[tuple[int, ...]], float]:
    """Exhaustive O(F^U) search for the quota-feasible assignment with least total delay."""
    from fogmatch.latency import total_delay

    quotas = QuotaVector.from_scenario(scenario) if quotas is None else quotas
    best, best_cost = None, float("inf")
    for a in assignments(scenario.n_users, scenario.n_fogs, allow_unmatched=False):
        c = _counts(a, scenario.n_fogs)
        if not all(lo <= x <= hi for x, lo, hi in zip(c, quotas.q_min, quotas.q_max)):
            continue
        cost = total_delay(Matching.from_assignment(a, scenario.n_fogs), scenario, gl)
        if cost < best_cost:
            best, best_cost = a, cost
    return best, best_cost


def as_assignment(m: Matching) -> tuple[int, ...]:
    return tuple(UNMATCHED if f is None else f for f in m.assignment())


def random_quota_window(rng: np.random.Generator, n_users: int, n_fogs: int) -> QuotaVector:
    """Random per-fog quotas with sum(q_min) <= n_users <= sum(q_max)."""
    q_max = rng.integers(0, n_users + 1, size=n_fogs)
    while q_max.sum() < n_users:
        q_max[rng.integers(n_fogs)] += 1
    q_min = np.array([rng.integers(0, hi + 1) for hi in q_max])
    while q_min.sum() > n_users:
        f = rng.choice(np.flatnonzero(q_min))
        q_min[f] -= 1
    return QuotaVector(tuple(q_min.tolist()), tuple(q_max.tolist()))


def random_instance(
    rng: np.random.Generator,
    max_users: int,
    max_fogs: int,
    zero_min: bool = False,
    min_users: int = 0,
) -> Instance:
    n_users = int(rng.integers(min_users, max_users + 1))
    n_fogs = int(rng.integers(1, max_fogs + 1))
    prefs = tuple(tuple(int(f) for f in rng.permutation(n_fogs)) for _ in range(n_users))
    gl = tuple(int(u) for u in rng.permutation(n_users))
    quotas = random_quota_window(rng, n_users, n_fogs)
    if zero_min:
        quotas = QuotaVector((0,) * n_fogs, quotas.q_max)
    return Instance(prefs, gl, quotas)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def __str__(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def check_da_stability(instances: Sequence[Instance]) -> CheckResult:
    """DA output must be the user-optimal member of the brute-force stable set."""
    bad = 0
    for inst in instances:
        da = as_assignment(
            deferred_acceptance(range(inst.n_users), inst.prefs, inst.gl, inst.quotas.q_max)
        )
        stable = stable_assignments(inst.prefs, inst.gl, inst.quotas.q_max)
        if da not in stable or user_optimal(inst.prefs, stable) != da:
            bad += 1
    return CheckResult(
        "da-stability-vs-brute-force", bad == 0, f"{len(instances) - bad}/{len(instances)} instances agree"
    )


def check_msda_feasible(instances: Sequence[Instance]) -> CheckResult:
    bad = 0
    for inst in instances:
        m, _ = multi_stage_da(inst.prefs, inst.gl, inst.quotas)
        a = as_assignment(m)
        c = _counts(a, inst.n_fogs)
        ok = UNMATCHED not in a and all(
            lo <= x <= hi for x, lo, hi in zip(c, inst.quotas.q_min, inst.quotas.q_max)
        )
        # a feasible complete assignment must exist by brute force too
        ok = ok and any(
            all(lo <= x <= hi for x, lo, hi in zip(_counts(b, inst.n_fogs), inst.quotas.q_min, inst.quotas.q_max))
            for b in assignments(inst.n_users, inst.n_fogs, allow_unmatched=False)
        )
        bad += not ok
    return CheckResult(
        "msda-feasibility", bad == 0, f"{len(instances) - bad}/{len(instances)} instances feasible"
    )


def check_msda_reduction(instances: Sequence[Instance]) -> CheckResult:
    bad = 0
    for inst in instances:
        zero = QuotaVector((0,) * inst.n_fogs, inst.quotas.q_max)
        m, _ = multi_stage_da(inst.prefs, inst.gl, zero)
        da = deferred_acceptance(range(inst.n_users), inst.prefs, inst.gl, zero.q_max)
        bad += m != da
    return CheckResult(
        "msda-reduces-to-da", bad == 0, f"{len(instances) - bad}/{len(instances)} instances equal"
    )


def check_counterexample() -> CheckResult:
    """The 3x3 instance where plain DA starves the last fog; MSDA must be the unique fair feasible matching."""
    prefs = ((0, 1, 2),) * 3
    gl = (0, 1, 2)
    quotas = QuotaVector.uniform(3, 1, 2)
    da = as_assignment(deferred_acceptance(range(3), prefs, gl, quotas.q_max))
    m, _ = multi_stage_da(prefs, gl, quotas)
    fair = fair_feasible_assignments(prefs, gl, quotas)
    ok = da == (0, 0, 1) and fair == [as_assignment(m)] and as_assignment(m) == (0, 1, 2)
    return CheckResult("counterexample", ok, f"DA={da} MSDA={as_assignment(m)} fair-feasible={fair}")


def run_suite(n_instances: int = 100, seed: int = 0, max_users: int = 6, max_fogs: int = 3) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    instances = [random_instance(rng, max_users, max_fogs) for _ in range(n_instances)]
    return [
        check_counterexample(),
        check_da_stability(instances),
        check_msda_feasible(instances),
        check_msda_reduction(instances),
    ]

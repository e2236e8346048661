"""Reference policies that ignore quotas: uniform random and nearest fog."""

from __future__ import annotations

import numpy as np

from fogmatch.latency import distance
from fogmatch.model import Matching, Scenario


def random_assignment(scenario: Scenario, seed: int) -> Matching:
    """Each user lands on a fog drawn uniformly at random."""
    rng = np.random.default_rng(seed)
    picks = rng.integers(0, scenario.n_fogs, size=scenario.n_users)
    return Matching.from_assignment([int(f) for f in picks], scenario.n_fogs)


def nearest_assignment(scenario: Scenario) -> Matching:
    """Each user goes to its geometrically closest fog, lowest id on ties."""
    out = []
    for u in scenario.users:
        d = [distance(u.position, f.position) for f in scenario.fogs]
        out.append(min(range(scenario.n_fogs), key=lambda f: (d[f], f)))
    return Matching.from_assignment(out, scenario.n_fogs)

"""User-to-fog assignment with minimum/maximum quotas via multi-stage deferred acceptance."""

from fogmatch.model import (
    ChannelModel,
    FogProfile,
    Matching,
    Scenario,
    UserProfile,
    assignment_indicator,
    matching_is_feasible,
)
from fogmatch.latency import (
    DelayBreakdown,
    fog_load,
    load_imbalance,
    propagation_delay,
    queueing_delay,
    response_delay,
    total_delay,
    transmission_rate,
)
from fogmatch.preferences import build_global_list, build_user_preferences
from fogmatch.matching import (
    QuotaVector,
    StageTrace,
    audit,
    deferred_acceptance,
    find_blocking_pairs,
    msda,
)
from fogmatch.baselines import nearest_assignment, random_assignment

__version__ = "0.1.0"

"""Seeded scenario generation, policy sweeps and CSV export."""

from __future__ import annotations

import configparser
import csv
import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from fogmatch.baselines import nearest_assignment, random_assignment
from fogmatch.latency import LinkError, fog_loads, user_delays
from fogmatch.matching import InfeasibleQuotaError, QuotaVector, StageTrace, deferred_acceptance, msda
from fogmatch.model import ChannelModel, FogProfile, Matching, Scenario, UserProfile
from fogmatch.preferences import GLCriterion, UserCriterion, build_global_list, build_user_preferences

log = logging.getLogger(__name__)

POLICIES = ("msda", "da_max_only", "random", "nearest")
QUOTA_POLICIES = ("uniform", "fixed")
SECTION = "experiment"
MAX_QUOTA_REDRAWS = 100


class ConfigError(ValueError):
    pass


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(",", " ").split())


def _ints(text: str) -> tuple[int, ...]:
    out = []
    for tok in text.replace(",", " ").split():
        if ":" in tok:  # start:stop:step, stop inclusive
            start, stop, step = (int(x) for x in tok.split(":"))
            out.extend(range(start, stop + 1, step))
        else:
            out.append(int(tok))
    return tuple(out)


def _names(text: str) -> tuple[str, ...]:
    return tuple(text.replace(",", " ").split())


@dataclass(frozen=True)
class ExperimentConfig:
    fog_count: int = 5
    user_counts: tuple[int, ...] = tuple(range(50, 501, 50))
    tasks_per_user: tuple[int, int] = (5, 15)
    task_size_range: tuple[float, float] = (1e8, 5e8)  # work units per task
    area_side: float = 1000.0
    capacity_values: tuple[float, ...] = (2e9, 4e9, 6e9, 8e9, 10e9)
    capacity_range: tuple[float, float] = (2e9, 10e9)  # used only when capacity_values is empty
    bandwidth_hz: float = 20e6
    tx_power_w: float = 1.0
    noise_power_w: float = 1e-9
    path_loss_exponent: float = 3.0
    reference_distance_m: float = 1.0
    payload_bits_per_work_unit: float = 1000.0
    quota_policy: str = "uniform"
    q_max_slack: float = 1.25
    q_min_fixed: int = 0
    q_max_fixed: int = 0
    seeds: tuple[int, ...] = tuple(range(10))
    policies: tuple[str, ...] = ("msda", "random")
    gl_criterion: str = "task-size-desc"
    user_pref_criterion: str = "expected-delay"
    verify_instances: int = 100
    verify_max_users: int = 6
    verify_max_fogs: int = 3

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(self.fog_count >= 1, "fog_count must be >= 1")
        need(len(self.user_counts) > 0 and min(self.user_counts) >= 0, "user_counts must be a nonempty list of counts")
        lo, hi = self.tasks_per_user
        need(1 <= lo <= hi, "tasks_per_user must be 1 <= lo <= hi")
        lo, hi = self.task_size_range
        need(0 < lo <= hi, "task_size_range must be 0 < lo <= hi")
        need(self.area_side > 0, "area_side must be > 0")
        if self.capacity_values:
            need(len(self.capacity_values) == self.fog_count, "capacity_values needs one entry per fog")
            need(min(self.capacity_values) > 0, "capacities must be > 0")
        else:
            lo, hi = self.capacity_range
            need(0 < lo < hi, "capacity_range must be 0 < lo < hi")
        need(self.bandwidth_hz > 0, "bandwidth_hz must be > 0")
        need(self.payload_bits_per_work_unit > 0, "payload_bits_per_work_unit must be > 0")
        need(self.quota_policy in QUOTA_POLICIES, f"quota_policy must be one of {QUOTA_POLICIES}")
        need(self.q_max_slack >= 1, "q_max_slack must be >= 1")
        need(0 <= self.q_min_fixed <= self.q_max_fixed or self.quota_policy != "fixed",
             "fixed quotas need 0 <= q_min_fixed <= q_max_fixed")
        need(len(self.seeds) > 0, "seeds must be nonempty")
        need(all(0 <= s < 2**64 for s in self.seeds), "seeds must be unsigned 64-bit integers")
        need(len(self.policies) > 0, "policies must be nonempty")
        for p in self.policies:
            need(p in POLICIES, f"unknown policy {p!r}; choose from {POLICIES}")
        try:
            GLCriterion(self.gl_criterion)
            UserCriterion(self.user_pref_criterion)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        need(self.gl_criterion != GLCriterion.CUSTOM.value, "custom GL order is library-only")
        self.channel()  # channel invariants

    def channel(self) -> ChannelModel:
        try:
            return ChannelModel(
                tx_power=self.tx_power_w,
                noise_power=self.noise_power_w,
                path_loss_exponent=self.path_loss_exponent,
                reference_distance=self.reference_distance_m,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def min_quota_total_bound(self, user_count: int) -> int:
        if self.quota_policy == "fixed":
            return self.q_min_fixed * self.fog_count
        return (user_count // self.fog_count) * self.fog_count

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc}") from None
        if parser.sections() != [SECTION]:
            raise ConfigError(f"config must contain exactly one [{SECTION}] section")
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, raw in parser[SECTION].items():
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            kind = known[key].type
            try:
                if kind == "int":
                    kwargs[key] = int(raw)
                elif kind == "float":
                    kwargs[key] = float(raw)
                elif kind == "str":
                    kwargs[key] = raw.strip()
                elif kind.startswith("tuple[int"):
                    kwargs[key] = _ints(raw)
                elif kind.startswith("tuple[float"):
                    kwargs[key] = _floats(raw)
                else:
                    kwargs[key] = _names(raw)
            except ValueError:
                raise ConfigError(f"bad value for {key!r}: {raw!r}") from None
        for key in ("tasks_per_user", "task_size_range", "capacity_range"):
            if key in kwargs and len(kwargs[key]) != 2:
                raise ConfigError(f"{key} takes exactly two values (lo, hi)")
        return cls(**kwargs)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_text(Path(path).read_text())


def _draw_quotas(cfg: ExperimentConfig, user_count: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    F = cfg.fog_count
    if cfg.quota_policy == "fixed":
        q = [(cfg.q_min_fixed, cfg.q_max_fixed)] * F
        if not cfg.q_min_fixed * F <= user_count <= cfg.q_max_fixed * F:
            raise InfeasibleQuotaError(f"fixed quotas cannot host {user_count} users on {F} fogs")
        return q
    q_max = max(math.ceil(cfg.q_max_slack * user_count / F), user_count // F)
    for _ in range(MAX_QUOTA_REDRAWS):
        q_min = rng.integers(0, user_count // F + 1, size=F)
        if q_min.sum() <= user_count:
            return [(int(lo), q_max) for lo in q_min]
    raise InfeasibleQuotaError(f"no feasible q_min draw after {MAX_QUOTA_REDRAWS} tries")


def generate_scenario(cfg: ExperimentConfig, user_count: int, seed: int) -> Scenario:
    """Random fogs and users on a square area, fully determined by (cfg, user_count, seed)."""
    rng = np.random.default_rng([seed, user_count])
    F = cfg.fog_count
    fog_pos = rng.uniform(0.0, cfg.area_side, size=(F, 2))
    if cfg.capacity_values:
        caps = np.asarray(cfg.capacity_values, dtype=float)
    else:
        lo, hi = cfg.capacity_range
        caps = rng.uniform(lo, hi, size=F)
    quotas = _draw_quotas(cfg, user_count, rng)
    fogs = tuple(
        FogProfile(
            id=f,
            capacity=float(caps[f]),
            bandwidth=cfg.bandwidth_hz,
            position=(float(fog_pos[f, 0]), float(fog_pos[f, 1])),
            q_min=quotas[f][0],
            q_max=quotas[f][1],
        )
        for f in range(F)
    )
    user_pos = rng.uniform(0.0, cfg.area_side, size=(user_count, 2))
    n_tasks = rng.integers(cfg.tasks_per_user[0], cfg.tasks_per_user[1] + 1, size=user_count)
    users = []
    for u in range(user_count):
        work = float(rng.uniform(*cfg.task_size_range, size=n_tasks[u]).sum())
        users.append(
            UserProfile(
                id=u,
                task_size=work,
                tx_payload=work * cfg.payload_bits_per_work_unit,
                position=(float(user_pos[u, 0]), float(user_pos[u, 1])),
            )
        )
    return Scenario(users=tuple(users), fogs=fogs, channel=cfg.channel(), rng_seed=seed)


@dataclass
class ScenarioResult:
    policy: str
    seed: int
    user_count: int
    mean_delay: float = math.nan
    median_delay: float = math.nan
    p95_delay: float = math.nan
    fog_loads: list[float] = field(default_factory=list)
    occupancy: list[int] = field(default_factory=list)
    delta_p: float = math.nan
    unmatched: int = 0
    violations: int = 0
    runtime_ms: float = 0.0
    error: Optional[str] = None
    traces: list[StageTrace] = field(default_factory=list, repr=False)

    @property
    def sort_key(self):
        return (self.policy, self.user_count, self.seed)


def assign(policy: str, scenario: Scenario, cfg: ExperimentConfig, seed: int, prefs, gl):
    """Run one policy; returns the matching and any MSDA stage traces."""
    if policy == "msda":
        return msda(scenario, prefs, gl)
    if policy == "da_max_only":
        caps = [f.q_max for f in scenario.fogs]
        return deferred_acceptance(gl, prefs, gl, caps), []
    if policy == "random":
        return random_assignment(scenario, seed), []
    if policy == "nearest":
        return nearest_assignment(scenario), []
    raise ValueError(f"unknown policy {policy!r}")


def evaluate(policy: str, seed: int, m: Matching, scenario: Scenario, gl) -> ScenarioResult:
    delays = np.array([d.total for d in user_delays(m, scenario, gl).values()])
    loads = fog_loads(m, scenario, gl)
    occ = m.occupancy()
    violations = sum(not f.q_min <= occ[f.id] <= f.q_max for f in scenario.fogs)
    empty = delays.size == 0
    return ScenarioResult(
        policy=policy,
        seed=seed,
        user_count=scenario.n_users,
        mean_delay=0.0 if empty else float(delays.mean()),
        median_delay=0.0 if empty else float(np.median(delays)),
        p95_delay=0.0 if empty else float(np.percentile(delays, 95)),
        fog_loads=loads,
        occupancy=occ,
        delta_p=max(loads) - min(loads),
        unmatched=len(m.unmatched()),
        violations=violations,
    )


def run_one(cfg: ExperimentConfig, policy: str, user_count: int, seed: int) -> ScenarioResult:
    t0 = time.perf_counter()
    try:
        scenario = generate_scenario(cfg, user_count, seed)
        prefs = build_user_preferences(scenario, cfg.user_pref_criterion)
        gl = build_global_list(scenario, cfg.gl_criterion)
        m, traces = assign(policy, scenario, cfg, seed, prefs, gl)
        res = evaluate(policy, seed, m, scenario, gl)
        res.traces = traces
    except (InfeasibleQuotaError, LinkError) as exc:
        log.warning("%s users=%d seed=%d failed: %s", policy, user_count, seed, exc)
        res = ScenarioResult(policy, seed, user_count, error=f"{type(exc).__name__}: {exc}")
    res.runtime_ms = (time.perf_counter() - t0) * 1e3
    return res


def _run_packed(args):
    return run_one(*args)


def run_experiment(
    cfg: ExperimentConfig,
    policies: Optional[Sequence[str]] = None,
    seeds: Optional[Sequence[int]] = None,
    jobs: int = 1,
) -> list[ScenarioResult]:
    """Every (policy, user_count, seed) combination, in canonical sorted order."""
    policies = tuple(policies or cfg.policies)
    for p in policies:
        if p not in POLICIES:
            raise ConfigError(f"unknown policy {p!r}")
    seeds = tuple(cfg.seeds if seeds is None else seeds)
    work = [(cfg, p, n, s) for p in policies for n in cfg.user_counts for s in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_packed, work, chunksize=4))
    else:
        results = [_run_packed(w) for w in work]
    return sorted(results, key=lambda r: r.sort_key)


def _fmt(x: float) -> str:
    return "" if math.isnan(x) else f"{x:.6f}"


def csv_header(n_fogs: int) -> list[str]:
    head = [
        "policy", "seed", "user_count", "mean_delay_s", "median_delay_s", "p95_delay_s",
        "delta_p_s", "unmatched", "violations", "runtime_ms",
    ]
    head += [f"fog_load_{i}_s" for i in range(n_fogs)]
    head += [f"fog_occupancy_{i}" for i in range(n_fogs)]
    return head


def render_csv(results: Sequence[ScenarioResult], n_fogs: int, timing: bool = False) -> str:
    """CSV text for ``results``; runtime_ms is left blank unless ``timing`` so output stays reproducible."""
    if not results:
        raise ValueError("no results to export")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(csv_header(n_fogs))
    for r in sorted(results, key=lambda r: r.sort_key):
        failed = r.error is not None
        row = [
            r.policy, r.seed, r.user_count,
            _fmt(r.mean_delay), _fmt(r.median_delay), _fmt(r.p95_delay), _fmt(r.delta_p),
            "" if failed else r.unmatched,
            "" if failed else r.violations,
            _fmt(r.runtime_ms) if timing else "",
        ]
        row += [_fmt(x) for x in r.fog_loads] if not failed else [""] * n_fogs
        row += list(r.occupancy) if not failed else [""] * n_fogs
        w.writerow(row)
    return buf.getvalue()


def export_csv(results: Sequence[ScenarioResult], path, n_fogs: Optional[int] = None, timing: bool = False) -> Path:
    if n_fogs is None:
        n_fogs = max((len(r.fog_loads) for r in results), default=0)
    text = render_csv(results, n_fogs, timing)
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return path


def summarize(results: Sequence[ScenarioResult]) -> dict[tuple[str, int], dict[str, float]]:
    """Seed-averaged mean delay and imbalance per (policy, user_count), skipping failed runs."""
    groups: dict[tuple[str, int], list[ScenarioResult]] = {}
    for r in results:
        if r.error is None:
            groups.setdefault((r.policy, r.user_count), []).append(r)
    return {
        key: {
            "mean_delay": float(np.mean([r.mean_delay for r in rows])),
            "delta_p": float(np.mean([r.delta_p for r in rows])),
            "violations": float(np.mean([r.violations for r in rows])),
            "runs": len(rows),
        }
        for key, rows in sorted(groups.items())
    }

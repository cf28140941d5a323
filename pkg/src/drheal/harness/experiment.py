"""Experiment orchestration: the train -> trace -> drift -> heal matrix.

A *cell* is one (environment kind, agent kind) combination. Per cell the
plan trains one agent per seed, collects its pre-deployment traces,
samples a shared set of drifts, and runs both healers on every
(agent, drift) pair. Cells run independently (optionally in parallel);
a failing cell is recorded and never aborts its siblings.
"""

import math
import traceback
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from statistics import mean
from typing import NamedTuple

import numpy as np

from ..agents import DqnHyperparams, PpoHyperparams, train_dqn, train_ppo
from ..envs import DEFAULT_DRIFT_RANGES, KINDS, EnvSpec, sample_drifts
from ..healing import HealingConfig, heal_drdrl, heal_vanilla_cl
from ..tracing import collect_observations, trace_agent_networks
from .metrics import adaptability_ratio, decrease_ratio, increase_ratio
from .stats import vargha_delaney_a12, wilcoxon_rank_sum

# Environment-specific forgetting defaults: gentler erasure for the
# deceptive-reward tasks, aggressive for the easy one.
HEALING_DEFAULTS = {
    "cartpole": {"forget_rate": 50.0, "scale_rate": 0.1,
                 "use_tolerance": True},
    "mountaincar": {"forget_rate": 10.0, "scale_rate": 1e-4,
                    "use_tolerance": True},
    "acrobot": {"forget_rate": 10.0, "scale_rate": 1e-4,
                "use_tolerance": True},
}

DEFAULT_TRACE_SAMPLES = 2_000


def default_healing_config(env_kind, **overrides):
    fields = dict(HEALING_DEFAULTS[env_kind])
    fields.update(overrides)
    return HealingConfig(**fields)


@dataclass
class ExperimentPlan:
    env_kinds: list
    agent_kinds: list
    seeds: int = 10
    drifts_per_cell: int = 6
    drift_intensity: str = "moderate"
    heal_budget: int = 300
    healing_configs: dict = None  # env kind -> HealingConfig
    dqn_hyperparams: DqnHyperparams = field(default_factory=DqnHyperparams)
    ppo_hyperparams: PpoHyperparams = field(default_factory=PpoHyperparams)
    drift_ranges: dict = None  # env kind -> {param: (lo, hi)}
    trace_samples: int = DEFAULT_TRACE_SAMPLES
    master_seed: int = 0
    workers: int = 1
    out_dir: str = None  # when set, run_experiment writes the CSV artifacts

    def __post_init__(self):
        if self.seeds < 1:
            raise ValueError("seeds must be >= 1")
        if self.drifts_per_cell < 1:
            raise ValueError("drifts_per_cell must be >= 1")
        if self.healing_configs is None:
            self.healing_configs = {
                kind: default_healing_config(
                    kind, max_heal_episodes=self.heal_budget)
                for kind in self.env_kinds
            }
        if self.drift_ranges is None:
            self.drift_ranges = {kind: DEFAULT_DRIFT_RANGES[kind]
                                 for kind in self.env_kinds}


@dataclass
class PairOutcome:
    env_kind: str
    agent_kind: str
    drift_id: str
    seed: int
    drdrl: object  # HealingReport
    cl: object  # HealingReport

    def __post_init__(self):
        if self.drdrl is None or self.cl is None:
            raise ValueError("a pair needs both healing reports")

    @property
    def failed(self):
        return bool(self.drdrl.failure or self.cl.failure)


class QuadrantCounts(NamedTuple):
    both: int
    drdrl_only: int
    cl_only: int
    neither: int

    @property
    def total(self):
        return self.both + self.drdrl_only + self.cl_only + self.neither


def quadrant_classify(outcomes) -> QuadrantCounts:
    """Partition pairs by which method adapted them."""
    both = drdrl_only = cl_only = neither = 0
    for pair in outcomes:
        if pair.drdrl is None or pair.cl is None:
            raise ValueError("pair is missing a counterpart report")
        if pair.drdrl.adapted and pair.cl.adapted:
            both += 1
        elif pair.drdrl.adapted:
            drdrl_only += 1
        elif pair.cl.adapted:
            cl_only += 1
        else:
            neither += 1
    return QuadrantCounts(both, drdrl_only, cl_only, neither)


@dataclass
class MetricComparison:
    metric: str  # "episodes" | "wall_time" | "reward"
    ratio_kind: str  # "DR" | "IR"
    scope: str  # "all" | "both_adapted" | "both_failed" | "empty"
    n_pairs: int
    drdrl_mean: float = math.nan
    cl_mean: float = math.nan
    ratio_pct: float = math.nan
    statistic: float = math.nan
    p_value: float = math.nan
    degenerate: bool = False
    a12: float = math.nan
    magnitude: str = ""


@dataclass
class CellSummary:
    env_kind: str
    agent_kind: str
    n_pairs: int
    metrics: list
    quadrants: QuadrantCounts
    ar_drdrl_pct: float
    ar_cl_pct: float
    failures: list = field(default_factory=list)


@dataclass
class ComparisonSummary:
    cells: list

    def cell(self, env_kind, agent_kind):
        for c in self.cells:
            if c.env_kind == env_kind and c.agent_kind == agent_kind:
                return c
        raise KeyError((env_kind, agent_kind))


def _compare_metric(metric, ratio_kind, scope, drdrl_values, cl_values):
    comparison = MetricComparison(metric=metric, ratio_kind=ratio_kind,
                                  scope=scope, n_pairs=len(drdrl_values))
    if not drdrl_values:
        comparison.scope = "empty"
        return comparison
    comparison.drdrl_mean = mean(drdrl_values)
    comparison.cl_mean = mean(cl_values)
    try:
        if ratio_kind == "DR":
            comparison.ratio_pct = decrease_ratio(comparison.cl_mean,
                                                  comparison.drdrl_mean)
        else:
            comparison.ratio_pct = increase_ratio(comparison.drdrl_mean,
                                                  comparison.cl_mean)
    except ZeroDivisionError:
        pass
    if len(drdrl_values) >= 3 and len(cl_values) >= 3:
        stat = wilcoxon_rank_sum(drdrl_values, cl_values)
        comparison.statistic = stat.statistic
        comparison.p_value = stat.p_value
        comparison.degenerate = stat.degenerate
    effect = vargha_delaney_a12(drdrl_values, cl_values)
    comparison.a12 = effect.a12
    comparison.magnitude = effect.magnitude
    return comparison


def summarize_cell(env_kind, agent_kind, outcomes, failures=()) -> CellSummary:
    """Aggregate one cell's pair outcomes into metrics + quadrants."""
    clean = [p for p in outcomes if not p.failed]
    quadrants = quadrant_classify(clean)
    metrics = [
        _compare_metric(
            "episodes", "DR", "all",
            [p.drdrl.fine_tune_episodes for p in clean],
            [p.cl.fine_tune_episodes for p in clean]),
        _compare_metric(
            "wall_time", "DR", "all",
            [p.drdrl.wall_time_seconds for p in clean],
            [p.cl.wall_time_seconds for p in clean]),
    ]
    both = [p for p in clean if p.drdrl.adapted and p.cl.adapted]
    neither = [p for p in clean if not p.drdrl.adapted and not p.cl.adapted]
    reward_pairs, scope = ((both, "both_adapted") if both
                           else (neither, "both_failed"))
    metrics.append(_compare_metric(
        "reward", "IR", scope,
        [p.drdrl.final_avg_reward for p in reward_pairs],
        [p.cl.final_avg_reward for p in reward_pairs]))

    n = len(clean)
    run_failures = [f"pair {p.drift_id}/{p.seed}: "
                    f"{p.drdrl.failure or p.cl.failure}"
                    for p in outcomes if p.failed]
    return CellSummary(
        env_kind=env_kind,
        agent_kind=agent_kind,
        n_pairs=n,
        metrics=metrics,
        quadrants=quadrants,
        ar_drdrl_pct=(adaptability_ratio(
            sum(p.drdrl.adapted for p in clean), n) if n else math.nan),
        ar_cl_pct=(adaptability_ratio(
            sum(p.cl.adapted for p in clean), n) if n else math.nan),
        failures=list(failures) + run_failures,
    )


def _cell_seed(master_seed, env_kind, agent_kind, purpose, index=0):
    # zlib.crc32, unlike hash(), is stable across processes.
    entropy = [master_seed, zlib.crc32(purpose.encode()), index,
               KINDS.index(env_kind), 0 if agent_kind == "dqn" else 1]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def _train(agent_kind, env_spec, plan, seed):
    if agent_kind == "dqn":
        return train_dqn(env_spec, plan.dqn_hyperparams, seed)
    agent, outcome = train_ppo(env_spec, plan.ppo_hyperparams, seed)
    return agent, outcome, None


def run_cell(plan: ExperimentPlan, env_kind: str, agent_kind: str):
    """All pair outcomes for one cell. Returns (outcomes, failures)."""
    env_spec = EnvSpec.defaults(env_kind)
    config = plan.healing_configs[env_kind]
    drifts = sample_drifts(env_kind, plan.drift_ranges[env_kind],
                           plan.drift_intensity, plan.drifts_per_cell,
                           _cell_seed(plan.master_seed, env_kind, agent_kind,
                                      "drifts"))
    outcomes = []
    failures = []
    for seed_index in range(plan.seeds):
        try:
            agent, _, replay = _train(
                agent_kind, env_spec, plan,
                _cell_seed(plan.master_seed, env_kind, agent_kind, "train",
                           seed_index))
            obs_set = collect_observations(
                agent, env_spec, plan.trace_samples,
                _cell_seed(plan.master_seed, env_kind, agent_kind, "trace",
                           seed_index))
            traces = trace_agent_networks(agent, obs_set)
        except Exception:
            failures.append(f"seed {seed_index}: {traceback.format_exc(limit=2)}")
            continue
        for drift in drifts:
            drifted = drift.drifted_spec(template=env_spec)
            pair_seed = _cell_seed(plan.master_seed, env_kind, agent_kind,
                                   f"heal-{drift.drift_id}", seed_index)
            try:
                drdrl = heal_drdrl(agent, env_spec, drifted, traces, config,
                                   pair_seed, replay=replay, drift=drift)
                cl = heal_vanilla_cl(agent, drifted, config, pair_seed,
                                     replay=replay, drift=drift)
                # Reports carry the trial's seed index; the RNG seed is
                # rederivable from (plan, cell, drift, index).
                drdrl.seed = seed_index
                cl.seed = seed_index
                outcomes.append(PairOutcome(env_kind, agent_kind,
                                            drift.drift_id, seed_index,
                                            drdrl, cl))
            except Exception:
                failures.append(
                    f"seed {seed_index} drift {drift.drift_id}: "
                    f"{traceback.format_exc(limit=2)}")
    return outcomes, failures


def _run_cell_task(args):
    plan, env_kind, agent_kind = args
    try:
        outcomes, failures = run_cell(plan, env_kind, agent_kind)
    except Exception:
        return env_kind, agent_kind, [], [traceback.format_exc(limit=3)]
    return env_kind, agent_kind, outcomes, failures


def run_experiment(plan: ExperimentPlan):
    """Execute the full matrix. Returns (summary, all pair outcomes).

    Cells execute independently; results aggregate in sorted cell order
    so output files are deterministic regardless of worker scheduling.
    """
    cell_keys = sorted((env, agent) for env in plan.env_kinds
                       for agent in plan.agent_kinds)
    tasks = [(plan, env, agent) for env, agent in cell_keys]
    if plan.workers > 1:
        with ProcessPoolExecutor(max_workers=plan.workers) as pool:
            raw = list(pool.map(_run_cell_task, tasks))
    else:
        raw = [_run_cell_task(t) for t in tasks]
    raw.sort(key=lambda r: (r[0], r[1]))

    cells = []
    all_outcomes = []
    for env_kind, agent_kind, outcomes, failures in raw:
        cells.append(summarize_cell(env_kind, agent_kind, outcomes, failures))
        all_outcomes.extend(outcomes)
    summary = ComparisonSummary(cells)

    if plan.out_dir is not None:
        from pathlib import Path

        from .reporting import (
            write_quadrants_csv,
            write_runs_csv,
            write_summary_csv,
        )
        out = Path(plan.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_runs_csv(out / "runs.csv", all_outcomes)
        write_summary_csv(out / "summary.csv", summary)
        write_quadrants_csv(out / "quadrants.csv", summary)
    return summary, all_outcomes

"""Failure detection and the two healing pipelines.

`heal_drdrl` composes hypoactive-neuron detection, under-scaled
re-initialization, an exploration restart, an optional replay reload
(off-policy agents only), and fine-tuning with the agent's own training
loop. `heal_vanilla_cl` is the identical pipeline minus detection and
forgetting, so a comparison isolates the forgetting mechanism. The dual
update speed emerges from the weight scale alone; there is no per-neuron
learning-rate machinery.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ..agents import Agent, ReplayBuffer, run_dqn_loop, run_ppo_loop
from ..envs import DriftSpec, EnvSpec, evaluate, is_solved
from ..errors import BindingError, TrainingAborted
from ..nn import InitializerSpec, network_fingerprint
from ..tracing import ActivationTrace, detect_minor_regions
from .forgetting import forget_minor_behavior

METHOD_DRDRL = "drdrl"
METHOD_VANILLA_CL = "vanilla_cl"


@dataclass
class HealingConfig:
    forget_rate: float = 50.0
    scale_rate: float = 0.1
    max_heal_episodes: int = 300
    dqn_epsilon_start: float = 0.5
    dqn_epsilon_end: float = 0.05
    dqn_epsilon_anneal_fraction: float = 0.5  # of the heal budget, in steps
    ppo_entropy_coef: float = 0.02
    reload_replay: bool = True
    eval_window: int = 100
    use_tolerance: bool = True
    eval_every_episodes: int = 20
    reset_outgoing: bool = False

    def __post_init__(self):
        if not (0.0 <= self.forget_rate <= 100.0):
            raise ValueError("forget_rate must be in [0, 100]")
        if not (0.0 < self.scale_rate <= 1.0):
            raise ValueError("scale_rate must be in (0, 1]")
        if self.max_heal_episodes < 1:
            raise ValueError("max_heal_episodes must be >= 1")
        if self.eval_window < 1:
            raise ValueError("eval_window must be >= 1")


@dataclass
class HealingReport:
    method: str
    adapted: bool
    fine_tune_episodes: int
    wall_time_seconds: float
    final_avg_reward: float
    reward_curve: list = field(default_factory=list)
    drift: DriftSpec = None
    seed: int = 0
    failure: str = ""
    # The (possibly) adapted agent; not part of the CSV row.
    healed_agent: Agent = None


def detect_failure(agent: Agent, drifted_env_spec: EnvSpec,
                   eval_episodes: int, seed: int):
    """Greedy evaluation against the tolerance-relaxed solve bar.

    Returns (failed, average_reward); `failed` means the healing
    mechanism should run.
    """
    avg = evaluate(drifted_env_spec, agent, eval_episodes, seed)
    return (not is_solved(drifted_env_spec, avg, use_tolerance=True)), avg


def _heal_seeds(seed):
    """(forget_seed, run_seed) shared by both pipelines so that a
    zero-forget heal consumes randomness identically to the baseline."""
    forget_seq, run_seq = np.random.SeedSequence(seed).spawn(2)
    return (int(forget_seq.generate_state(1)[0]),
            int(run_seq.generate_state(1)[0]))


def dual_speed_cl(agent: Agent, drifted_env_spec: EnvSpec,
                  config: HealingConfig, seed: int, *,
                  replay: ReplayBuffer = None, drift: DriftSpec = None,
                  method: str = METHOD_VANILLA_CL,
                  gate_agent: Agent = None) -> HealingReport:
    """Fine-tune `agent` on the drifted environment with its own loop.

    Fine-tuning only runs when the drift actually broke the agent: the
    gate evaluation (of `gate_agent`, default the agent itself; the
    forgetting-driven healer passes its pre-forget agent so both methods
    gate on the identical policy) happens before any episode, and further
    evaluations run at every cadence with early stop on adaptation.
    Mutates `agent` (healers pass in a copy). A non-finite loss aborts
    with the report marked failed.
    """
    root = np.random.SeedSequence(seed)
    env_seq, eval_seq, explore_seq, replay_seq, update_seq = root.spawn(5)
    agent.rng = np.random.Generator(
        np.random.PCG64(int(explore_seq.generate_state(1)[0])))

    eval_root = int(eval_seq.generate_state(1)[0])
    gate_seed, loop_eval_base = (
        int(s.generate_state(1)[0])
        for s in np.random.SeedSequence(eval_root).spawn(2))
    gate_avg = evaluate(drifted_env_spec, gate_agent or agent,
                        config.eval_window, gate_seed)
    if is_solved(drifted_env_spec, gate_avg, config.use_tolerance):
        return HealingReport(method, True, 0, 0.0, gate_avg, [], drift, seed,
                             healed_agent=gate_agent or agent)

    try:
        if agent.kind == "dqn":
            if config.reload_replay and replay is not None:
                buffer = replay.copy(int(replay_seq.generate_state(1)[0]))
            else:
                buffer = ReplayBuffer(agent.hyperparams.replay_capacity,
                                      drifted_env_spec.obs_dim,
                                      int(replay_seq.generate_state(1)[0]))
            anneal_steps = max(1, int(
                config.dqn_epsilon_anneal_fraction * config.max_heal_episodes
                * drifted_env_spec.max_steps_per_episode))
            outcome = run_dqn_loop(
                agent, drifted_env_spec, buffer,
                max_episodes=config.max_heal_episodes,
                epsilon_start=config.dqn_epsilon_start,
                epsilon_end=config.dqn_epsilon_end,
                epsilon_anneal_steps=anneal_steps,
                use_tolerance=config.use_tolerance,
                eval_every=config.eval_every_episodes,
                eval_window=config.eval_window,
                env_seed=int(env_seq.generate_state(1)[0]),
                eval_seed_base=loop_eval_base,
            )
        else:
            outcome = run_ppo_loop(
                agent, drifted_env_spec,
                max_episodes=config.max_heal_episodes,
                entropy_coef=config.ppo_entropy_coef,
                use_tolerance=config.use_tolerance,
                eval_every=config.eval_every_episodes,
                eval_window=config.eval_window,
                env_seed=int(env_seq.generate_state(1)[0]),
                eval_seed_base=loop_eval_base,
                update_seed=int(update_seq.generate_state(1)[0]),
            )
    except TrainingAborted as exc:
        return HealingReport(method, False, config.max_heal_episodes,
                             math.nan, math.nan, [], drift, seed,
                             failure=str(exc))

    return HealingReport(method, outcome.solved, outcome.episodes_used,
                         outcome.wall_time_seconds, outcome.final_avg_reward,
                         outcome.reward_curve, drift, seed,
                         healed_agent=agent)


def _normalize_traces(agent: Agent, trace):
    roles = ("q",) if agent.kind == "dqn" else ("policy", "value")
    if isinstance(trace, ActivationTrace):
        if agent.kind != "dqn":
            raise ValueError("a PPO agent needs one trace per network "
                             "({'policy', 'value'})")
        return {"q": trace}
    missing = [r for r in roles if r not in trace]
    if missing:
        raise ValueError(f"missing traces for networks: {missing}")
    return {role: trace[role] for role in roles}


def heal_drdrl(agent: Agent, original_env_spec: EnvSpec,
               drifted_env_spec: EnvSpec, trace, config: HealingConfig,
               seed: int, *, replay: ReplayBuffer = None,
               drift: DriftSpec = None) -> HealingReport:
    """Forgetting-driven healing: detect minor regions in the
    pre-deployment trace, re-initialize them under-scaled, restart
    exploration, reload replay (DQN), and fine-tune dual-speed.

    The input agent is not mutated.
    """
    traces = _normalize_traces(agent, trace)
    original_hash = original_env_spec.spec_hash()
    for role, role_trace in traces.items():
        if role_trace.env_spec_hash and role_trace.env_spec_hash != original_hash:
            raise BindingError(
                f"trace for {role!r} was collected on a different "
                "environment spec")

    forget_seed, run_seed = _heal_seeds(seed)
    forget_seqs = np.random.SeedSequence(forget_seed).spawn(len(traces))

    patched = agent.copy()
    for (role, role_trace), forget_seq in zip(sorted(traces.items()),
                                              forget_seqs):
        net = patched.networks[role]
        if role_trace.network_fingerprint != network_fingerprint(net):
            raise BindingError(
                f"trace for {role!r} is bound to a different network "
                "checkpoint")
        mask = detect_minor_regions(role_trace, config.forget_rate)
        patched.networks[role] = forget_minor_behavior(
            net, mask, config.scale_rate,
            InitializerSpec(net.initializer.scheme,
                            int(forget_seq.generate_state(1)[0])),
            reset_outgoing=config.reset_outgoing)
    if patched.kind == "dqn":
        # Bootstrap from post-forget values, not from erased neurons.
        patched.networks["target"] = patched.networks["q"].copy()

    # The failure gate inside dual_speed_cl must judge the agent as
    # deployed, so the unforgotten original decides whether to heal.
    report = dual_speed_cl(patched, drifted_env_spec, config, run_seed,
                           replay=replay, drift=drift, method=METHOD_DRDRL,
                           gate_agent=agent)
    report.seed = seed
    return report


def heal_vanilla_cl(agent: Agent, drifted_env_spec: EnvSpec,
                    config: HealingConfig, seed: int, *,
                    replay: ReplayBuffer = None,
                    drift: DriftSpec = None) -> HealingReport:
    """Plain continual-learning baseline: the same pipeline with the
    detection and forgetting steps removed. The input agent is not
    mutated."""
    _, run_seed = _heal_seeds(seed)
    patched = agent.copy()
    if patched.kind == "dqn":
        patched.networks["target"] = patched.networks["q"].copy()
    report = dual_speed_cl(patched, drifted_env_spec, config, run_seed,
                           replay=replay, drift=drift,
                           method=METHOD_VANILLA_CL)
    report.seed = seed
    return report

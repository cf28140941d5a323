"""DQN: Q-learning with replay, a frozen target network, and epsilon-greedy
exploration annealed per environment step.

The core loop (`run_dqn_loop`) is shared by initial training and by
healing fine-tunes, which inject their own exploration schedule, replay
buffer, evaluation tolerance, and episode budget.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..envs import EnvSpec, evaluate, is_solved, make_env
from ..errors import TrainingAborted
from ..nn import (
    InitializerSpec,
    OptimizerState,
    apply_update,
    backward,
    forward,
    init_network,
    mlp_layers,
)
from .base import Agent
from .replay import ReplayBuffer


@dataclass
class DqnHyperparams:
    replay_capacity: int = 50_000
    batch_size: int = 64
    target_update_interval_steps: int = 500
    discount: float = 0.99
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_anneal_steps: int = 10_000
    learning_rate: float = 1e-3
    max_train_episodes: int = 1_000
    warmup_transitions: int = 1_000
    eval_every_episodes: int = 20
    hidden: tuple = (64, 64)

    def __post_init__(self):
        if not (0.0 < self.discount <= 1.0):
            raise ValueError("discount must be in (0, 1]")
        if not (self.epsilon_start >= self.epsilon_end >= 0.0):
            raise ValueError("need epsilon_start >= epsilon_end >= 0")
        if self.replay_capacity < self.batch_size:
            raise ValueError("replay capacity must be >= batch size")
        if self.warmup_transitions > self.replay_capacity:
            raise ValueError("warmup cannot exceed the replay capacity")
        if self.learning_rate <= 0.0:
            raise ValueError("learning rate must be positive")


@dataclass
class TrainOutcome:
    solved: bool
    episodes_used: int
    wall_time_seconds: float
    final_avg_reward: float
    reward_curve: list = field(default_factory=list)


def _epsilon(start, end, anneal_steps, step):
    if anneal_steps <= 0:
        return end
    frac = min(1.0, step / anneal_steps)
    return start + (end - start) * frac


def _eval_seed(base, index):
    return int(np.random.SeedSequence([base, index]).generate_state(1)[0])


def _child_seed(seed_seq):
    return int(seed_seq.generate_state(1)[0])


def dqn_gradient_step(online, target, opt_state, batch, gamma):
    """One Bellman-target MSE step; returns the batch loss."""
    n = batch["obs"].shape[0]
    q_next = forward(target, batch["next_obs"]).output
    targets = batch["rewards"] + gamma * (1.0 - batch["terminated"]) * q_next.max(axis=1)
    trace = forward(online, batch["obs"])
    q = trace.output
    rows = np.arange(n)
    errors = q[rows, batch["actions"]] - targets
    loss = float(np.mean(errors * errors))
    if not math.isfinite(loss):
        raise TrainingAborted(f"non-finite DQN loss ({loss})")
    dq = np.zeros_like(q)
    dq[rows, batch["actions"]] = 2.0 * errors / n
    grads = backward(online, trace, dq)
    apply_update(online, grads, opt_state)
    return loss


def run_dqn_loop(agent: Agent, env_spec: EnvSpec, buffer: ReplayBuffer, *,
                 max_episodes, epsilon_start, epsilon_end, epsilon_anneal_steps,
                 use_tolerance, eval_every, eval_window, env_seed,
                 eval_seed_base) -> TrainOutcome:
    """Train/fine-tune the agent's Q network on `env_spec`.

    Evaluates greedily every `eval_every` episodes and stops once the
    solve criterion passes. Wall time covers the training segments only
    (evaluation episodes excluded). Mutates `agent` and `buffer`.
    """
    hp = agent.hyperparams
    opt_state = OptimizerState.adam(hp.learning_rate)
    env = make_env(env_spec, env_seed)
    eval_index = 0
    train_time = 0.0
    curve = []
    episodes_used = 0
    step_offset = agent.global_step

    solved = False
    final_avg = None
    min_fill = max(hp.warmup_transitions, hp.batch_size)
    for episode in range(max_episodes):
        start = time.monotonic()
        obs = env.reset()
        episode_return = 0.0
        while True:
            local_step = agent.global_step - step_offset
            agent.exploration_epsilon = _epsilon(
                epsilon_start, epsilon_end, epsilon_anneal_steps, local_step)
            action = agent.act(obs, explore=True)
            result = env.step(action)
            buffer.add(obs, action, result.reward, result.next_obs,
                       result.terminated)
            episode_return += result.reward
            agent.global_step += 1
            if len(buffer) >= min_fill:
                dqn_gradient_step(agent.networks["q"], agent.networks["target"],
                                  opt_state, buffer.sample(hp.batch_size),
                                  hp.discount)
                if agent.global_step % hp.target_update_interval_steps == 0:
                    agent.networks["target"] = agent.networks["q"].copy()
            obs = result.next_obs
            if result.done:
                break
        train_time += time.monotonic() - start
        curve.append(episode_return)
        episodes_used = episode + 1
        agent.train_episodes += 1
        if eval_every and episodes_used % eval_every == 0:
            avg = evaluate(env_spec, agent, eval_window,
                           _eval_seed(eval_seed_base, eval_index))
            eval_index += 1
            if is_solved(env_spec, avg, use_tolerance):
                solved = True
                final_avg = avg
                break

    if final_avg is None:
        final_avg = evaluate(env_spec, agent, eval_window,
                             _eval_seed(eval_seed_base, eval_index))
        solved = is_solved(env_spec, final_avg, use_tolerance)
    return TrainOutcome(solved, episodes_used, train_time, final_avg, curve)


def train_dqn(env_spec: EnvSpec, hyperparams: DqnHyperparams, seed: int):
    """Train a fresh DQN agent on `env_spec`.

    Returns (agent, outcome, replay_buffer); the buffer is kept so a
    later healing run can reload the original experience.
    """
    root = np.random.SeedSequence(seed)
    net_seq, env_seq, explore_seq, replay_seq, eval_seq = root.spawn(5)

    layers = mlp_layers(env_spec.obs_dim, hyperparams.hidden, "linear",
                        env_spec.n_actions)
    online = init_network(layers, InitializerSpec("glorot_uniform",
                                                  _child_seed(net_seq)))
    networks = {"q": online, "target": online.copy()}
    agent = Agent("dqn", env_spec, hyperparams, networks,
                  _child_seed(explore_seq),
                  exploration_epsilon=hyperparams.epsilon_start)
    buffer = ReplayBuffer(hyperparams.replay_capacity, env_spec.obs_dim,
                          _child_seed(replay_seq))

    outcome = run_dqn_loop(
        agent, env_spec, buffer,
        max_episodes=hyperparams.max_train_episodes,
        epsilon_start=hyperparams.epsilon_start,
        epsilon_end=hyperparams.epsilon_end,
        epsilon_anneal_steps=hyperparams.epsilon_anneal_steps,
        use_tolerance=False,
        eval_every=hyperparams.eval_every_episodes,
        eval_window=env_spec.eval_window,
        env_seed=_child_seed(env_seq),
        eval_seed_base=_child_seed(eval_seq),
    )
    return agent, outcome, buffer

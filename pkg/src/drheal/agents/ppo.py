"""PPO with a clipped surrogate objective and GAE advantages.

Separate policy (softmax head) and value networks. Rollouts are
collected on-policy for a fixed step count (or until the episode budget
runs out), advantages are normalized per rollout, and the rollout store
is discarded after each update.
"""

import math
import time
from dataclasses import dataclass

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
from .base import Agent, _sample_categorical
from .dqn import TrainOutcome, _child_seed, _eval_seed

_PROB_FLOOR = 1e-12  # guards log() in the entropy gradient


@dataclass
class PpoHyperparams:
    clip_ratio: float = 0.2
    discount: float = 0.99
    gae_lambda: float = 0.95
    rollout_steps: int = 2_048
    epochs_per_update: int = 10
    minibatch_size: int = 64
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    learning_rate: float = 1e-3
    max_train_episodes: int = 1_000
    eval_every_episodes: int = 20
    hidden: tuple = (64, 64)

    def __post_init__(self):
        if not (0.0 < self.clip_ratio < 1.0):
            raise ValueError("clip_ratio must be in (0, 1)")
        if not (0.0 <= self.gae_lambda <= 1.0):
            raise ValueError("gae_lambda must be in [0, 1]")
        if not (0.0 < self.discount <= 1.0):
            raise ValueError("discount must be in (0, 1]")
        if self.learning_rate <= 0.0:
            raise ValueError("learning rate must be positive")


def clipped_surrogate(ratio, advantage, clip_ratio):
    """Per-sample objective min(r*A, clip(r, 1-eps, 1+eps)*A)."""
    clipped = np.clip(ratio, 1.0 - clip_ratio, 1.0 + clip_ratio)
    return np.minimum(ratio * advantage, clipped * advantage)


def gae_advantages(rewards, values, dones, boundary_values, tail_value,
                   gamma, lam):
    """Generalized advantage estimates over one rollout segment.

    `dones[t]` marks the end of an episode at step t; `boundary_values[t]`
    is then the bootstrap value of the post-step observation (0 for a true
    terminal, V(next_obs) for a truncation). `tail_value` bootstraps a
    rollout cut mid-episode.
    """
    n = len(rewards)
    advantages = np.zeros(n)
    last = 0.0
    for t in range(n - 1, -1, -1):
        if dones[t]:
            next_value = boundary_values[t]
            carry = 0.0
        elif t == n - 1:
            next_value = tail_value
            carry = 0.0
        else:
            next_value = values[t + 1]
            carry = last
        delta = rewards[t] + gamma * next_value - values[t]
        last = delta + gamma * lam * carry
        advantages[t] = last
    return advantages


class RolloutStore:
    """On-policy transition store, cleared after every update."""

    def __init__(self):
        self.clear()

    def clear(self):
        self.obs = []
        self.actions = []
        self.rewards = []
        self.dones = []
        self.boundary_values = []
        self.values = []
        self.action_probs = []

    def __len__(self):
        return len(self.obs)

    def arrays(self):
        return {
            "obs": np.asarray(self.obs),
            "actions": np.asarray(self.actions, dtype=np.int64),
            "rewards": np.asarray(self.rewards),
            "dones": np.asarray(self.dones, dtype=bool),
            "boundary_values": np.asarray(self.boundary_values),
            "values": np.asarray(self.values),
            "action_probs": np.asarray(self.action_probs),
        }


def iter_minibatches(n, batch_size, rng):
    """Shuffled index minibatches partitioning range(n)."""
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start:start + batch_size]


def _value_of(net, obs):
    return float(forward(net, obs).output[0])


def ppo_update(policy, value_net, policy_opt, value_opt, data, hp,
               entropy_coef, rng):
    """Clipped-surrogate update over one rollout; returns mean policy loss."""
    advantages = gae_advantages(data["rewards"], data["values"], data["dones"],
                                data["boundary_values"], data["tail_value"],
                                hp.discount, hp.gae_lambda)
    returns = advantages + data["values"]
    norm_adv = (advantages - advantages.mean()) / (advantages.std() + 1e-8)

    n = len(returns)
    last_loss = 0.0
    for _ in range(hp.epochs_per_update):
        for idx in iter_minibatches(n, hp.minibatch_size, rng):
            obs = data["obs"][idx]
            actions = data["actions"][idx]
            adv = norm_adv[idx]
            old_probs = data["action_probs"][idx]
            ret = returns[idx]
            m = len(idx)
            rows = np.arange(m)

            trace = forward(policy, obs)
            probs = trace.output
            p_a = probs[rows, actions]
            ratio = p_a / old_probs
            objective = clipped_surrogate(ratio, adv, hp.clip_ratio)
            entropy = -np.sum(probs * np.log(np.maximum(probs, _PROB_FLOOR)),
                              axis=1)
            loss = float(-np.mean(objective) - entropy_coef * np.mean(entropy))
            if not math.isfinite(loss):
                raise TrainingAborted(f"non-finite PPO loss ({loss})")
            last_loss = loss

            # d(min(r A, clip(r) A))/dr is A where the raw term attains
            # the min, 0 where the clipped branch is strictly active.
            raw = ratio * adv
            clipped = np.clip(ratio, 1.0 - hp.clip_ratio,
                              1.0 + hp.clip_ratio) * adv
            pass_grad = raw <= clipped
            d_probs = np.zeros_like(probs)
            d_probs[rows, actions] = -np.where(pass_grad, adv / old_probs,
                                               0.0) / m
            d_probs += entropy_coef * (
                np.log(np.maximum(probs, _PROB_FLOOR)) + 1.0) / m
            grads = backward(policy, trace, d_probs)
            apply_update(policy, grads, policy_opt)

            vtrace = forward(value_net, obs)
            v = vtrace.output[:, 0]
            v_err = v - ret
            if not np.all(np.isfinite(v_err)):
                raise TrainingAborted("non-finite PPO value error")
            dv = (2.0 * hp.value_coef * v_err / m)[:, None]
            vgrads = backward(value_net, vtrace, dv)
            apply_update(value_net, vgrads, value_opt)
    return last_loss


def run_ppo_loop(agent: Agent, env_spec: EnvSpec, *, max_episodes,
                 entropy_coef, use_tolerance, eval_every, eval_window,
                 env_seed, eval_seed_base, update_seed) -> TrainOutcome:
    """Train/fine-tune the agent's policy and value nets on `env_spec`.

    Stops at the episode budget or as soon as a cadence evaluation
    passes; a rollout in flight when the budget hits is dropped without
    an update. Mutates `agent`.
    """
    hp = agent.hyperparams
    policy = agent.networks["policy"]
    value_net = agent.networks["value"]
    policy_opt = OptimizerState.adam(hp.learning_rate)
    value_opt = OptimizerState.adam(hp.learning_rate)
    update_rng = np.random.Generator(np.random.PCG64(update_seed))

    eval_index = 0
    env = make_env(env_spec, env_seed)
    store = RolloutStore()
    curve = []
    train_time = 0.0
    episodes_used = 0
    solved = False
    final_avg = None
    episodes_at_last_eval = 0

    obs = env.reset() if max_episodes > 0 else None
    episode_return = 0.0
    while episodes_used < max_episodes and not solved:
        start = time.monotonic()
        while len(store) < hp.rollout_steps and episodes_used < max_episodes:
            probs = forward(policy, obs).output
            action = _sample_categorical(agent.rng, probs)
            v = _value_of(value_net, obs)
            result = env.step(action)
            episode_return += result.reward
            done = result.done
            boundary = 0.0
            if done:
                boundary = (0.0 if result.terminated
                            else _value_of(value_net, result.next_obs))
            store.obs.append(obs)
            store.actions.append(action)
            store.rewards.append(result.reward)
            store.dones.append(done)
            store.boundary_values.append(boundary)
            store.values.append(v)
            store.action_probs.append(max(float(probs[action]), _PROB_FLOOR))
            agent.global_step += 1
            if done:
                curve.append(episode_return)
                episode_return = 0.0
                episodes_used += 1
                agent.train_episodes += 1
                obs = env.reset()
            else:
                obs = result.next_obs
        if len(store) == 0:
            break
        if episodes_used >= max_episodes and len(store) < hp.rollout_steps:
            # Budget exhausted mid-rollout: drop the partial segment.
            store.clear()
            train_time += time.monotonic() - start
            break
        data = store.arrays()
        data["tail_value"] = (0.0 if data["dones"][-1]
                              else _value_of(value_net, obs))
        ppo_update(policy, value_net, policy_opt, value_opt, data, hp,
                   entropy_coef, update_rng)
        store.clear()
        train_time += time.monotonic() - start

        if eval_every and (episodes_used - episodes_at_last_eval) >= eval_every:
            episodes_at_last_eval = episodes_used
            avg = evaluate(env_spec, agent, eval_window,
                           _eval_seed(eval_seed_base, eval_index))
            eval_index += 1
            if is_solved(env_spec, avg, use_tolerance):
                solved = True
                final_avg = avg

    if final_avg is None:
        final_avg = evaluate(env_spec, agent, eval_window,
                             _eval_seed(eval_seed_base, eval_index))
        solved = is_solved(env_spec, final_avg, use_tolerance)
    return TrainOutcome(solved, episodes_used, train_time, final_avg, curve)


def train_ppo(env_spec: EnvSpec, hyperparams: PpoHyperparams, seed: int):
    """Train a fresh PPO agent on `env_spec`. Returns (agent, outcome)."""
    root = np.random.SeedSequence(seed)
    (policy_seq, value_seq, env_seq, explore_seq, update_seq,
     eval_seq) = root.spawn(6)

    policy = init_network(
        mlp_layers(env_spec.obs_dim, hyperparams.hidden, "softmax",
                   env_spec.n_actions),
        InitializerSpec("glorot_uniform", _child_seed(policy_seq)))
    value_net = init_network(
        mlp_layers(env_spec.obs_dim, hyperparams.hidden, "linear", 1),
        InitializerSpec("glorot_uniform", _child_seed(value_seq)))
    agent = Agent("ppo", env_spec, hyperparams,
                  {"policy": policy, "value": value_net},
                  _child_seed(explore_seq))

    outcome = run_ppo_loop(
        agent, env_spec,
        max_episodes=hyperparams.max_train_episodes,
        entropy_coef=hyperparams.entropy_coef,
        use_tolerance=False,
        eval_every=hyperparams.eval_every_episodes,
        eval_window=env_spec.eval_window,
        env_seed=_child_seed(env_seq),
        eval_seed_base=_child_seed(eval_seq),
        update_seed=_child_seed(update_seq),
    )
    return agent, outcome

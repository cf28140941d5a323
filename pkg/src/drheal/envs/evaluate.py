"""Greedy policy evaluation and the solve criterion."""

from ..errors import SchemaError
from .classic import make_env
from .params import EnvSpec


def is_solved(env_spec: EnvSpec, average_reward: float,
              use_tolerance: bool) -> bool:
    """Inclusive threshold check, optionally tolerance-relaxed."""
    return average_reward >= env_spec.effective_threshold(use_tolerance)


def evaluate(env_spec: EnvSpec, agent, episodes: int, seed: int) -> float:
    """Mean return of `episodes` exploration-free rollouts.

    `agent` needs an ``act(obs, explore=False) -> action`` method. The
    run is deterministic given the seed: greedy actions consume no agent
    randomness and the environment owns its RNG.
    """
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    agent_obs_dim = getattr(agent, "obs_dim", None)
    if agent_obs_dim is not None and agent_obs_dim != env_spec.obs_dim:
        raise SchemaError(
            f"agent observes {agent_obs_dim} dims but the environment "
            f"emits {env_spec.obs_dim}")
    agent_n_actions = getattr(agent, "n_actions", None)
    if agent_n_actions is not None and agent_n_actions != env_spec.n_actions:
        raise SchemaError(
            f"agent emits {agent_n_actions} actions but the environment "
            f"accepts {env_spec.n_actions}")

    env = make_env(env_spec, seed)
    total = 0.0
    for _ in range(episodes):
        obs = env.reset()
        episode_return = 0.0
        while True:
            result = env.step(agent.act(obs, explore=False))
            episode_return += result.reward
            obs = result.next_obs
            if result.done:
                break
        total += episode_return
    return total / episodes

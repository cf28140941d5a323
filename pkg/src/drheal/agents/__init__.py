"""DQN and PPO agents over the dense-network engine."""

from .base import Agent, act, load_agent, save_agent
from .dqn import DqnHyperparams, TrainOutcome, run_dqn_loop, train_dqn
from .ppo import (
    PpoHyperparams,
    clipped_surrogate,
    gae_advantages,
    run_ppo_loop,
    train_ppo,
)
from .replay import ReplayBuffer, load_replay, save_replay

__all__ = [
    "Agent",
    "DqnHyperparams",
    "PpoHyperparams",
    "ReplayBuffer",
    "TrainOutcome",
    "act",
    "clipped_surrogate",
    "gae_advantages",
    "load_agent",
    "load_replay",
    "run_dqn_loop",
    "run_ppo_loop",
    "save_agent",
    "save_replay",
    "train_dqn",
    "train_ppo",
]

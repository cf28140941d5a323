"""Seeded classic-control environment handles.

A handle owns its RNG, so (spec, seed, action sequence) fully determines
every trajectory. Physics runs through the kernel backend; the handle
only manages episode state, observations, and reward bookkeeping.
"""

import math
from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..errors import SchemaError
from .params import EnvSpec


@dataclass
class StepResult:
    next_obs: np.ndarray
    reward: float
    terminated: bool
    truncated: bool

    @property
    def done(self):
        return self.terminated or self.truncated


class Environment:
    """Single-owner episodic environment. Use :func:`make_env` to build one."""

    def __init__(self, spec: EnvSpec, seed: int):
        if not isinstance(spec, EnvSpec):
            raise SchemaError("spec must be an EnvSpec")
        # Re-validate: specs are mutable dataclasses.
        spec.params.validate(spec.kind)
        self._spec = spec
        self._rng = np.random.Generator(np.random.PCG64(seed))
        self._state = None
        self._steps = 0
        self._done = True

    @property
    def spec(self):
        return self._spec

    @property
    def obs_dim(self):
        return self._spec.obs_dim

    @property
    def n_actions(self):
        return self._spec.n_actions

    def reset(self, seed=None):
        """Start a new episode; reseeding is optional."""
        if seed is not None:
            self._rng = np.random.Generator(np.random.PCG64(seed))
        kind = self._spec.kind
        if kind == "mountaincar":
            self._state = (self._rng.uniform(-0.6, -0.4), 0.0)
        elif kind == "cartpole":
            self._state = tuple(self._rng.uniform(-0.05, 0.05, size=4))
        else:  # acrobot
            self._state = tuple(self._rng.uniform(-0.1, 0.1, size=4))
        self._steps = 0
        self._done = False
        return self._observe()

    def step(self, action):
        if self._done:
            raise RuntimeError("episode has ended; call reset()")
        action = int(action)
        if not (0 <= action < self.n_actions):
            raise ValueError(
                f"action {action} out of range [0, {self.n_actions})")
        kind = self._spec.kind
        p = self._spec.params
        if kind == "mountaincar":
            pos, vel, terminated = _kernels.mountain_car_step(
                self._state[0], self._state[1], action,
                p["force"], p["gravity"], p["goal_velocity"])
            self._state = (pos, vel)
            reward = -1.0
        elif kind == "cartpole":
            x, x_dot, theta, theta_dot, terminated = _kernels.cart_pole_step(
                *self._state, action,
                p["masspole"], p["lengthpole"], p["masscart"], p["friction"])
            self._state = (x, x_dot, theta, theta_dot)
            reward = 1.0
        else:  # acrobot
            th1, th2, om1, om2, terminated = _kernels.acrobot_step(
                *self._state, action,
                p["link_length_1"], p["link_com_pos_1"],
                p["link_mass_1"], p["link_mass_2"])
            self._state = (th1, th2, om1, om2)
            reward = 0.0 if terminated else -1.0
        self._steps += 1
        truncated = (not terminated
                     and self._steps >= self._spec.max_steps_per_episode)
        self._done = terminated or truncated
        return StepResult(self._observe(), reward, terminated, truncated)

    def _observe(self):
        kind = self._spec.kind
        if kind == "acrobot":
            th1, th2, om1, om2 = self._state
            obs = np.array([math.cos(th1), math.sin(th1),
                            math.cos(th2), math.sin(th2), om1, om2])
        else:
            obs = np.array(self._state, dtype=np.float64)
        return obs


def make_env(spec: EnvSpec, seed: int) -> Environment:
    """Deterministic environment handle for the given spec and seed."""
    return Environment(spec, seed)

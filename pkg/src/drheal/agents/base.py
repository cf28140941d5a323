"""Agent container, action selection, and agent checkpoints."""

from dataclasses import asdict

import numpy as np

from .. import _container
from ..envs import EnvSpec
from ..errors import SchemaError
from ..nn import InitializerSpec, LayerShape, MlpNetwork, forward

MAGIC = b"DHAG"
VERSION = 1


def _sample_categorical(rng, probs):
    """One draw from a probability vector using a single uniform."""
    u = rng.random()
    return int(min(np.searchsorted(np.cumsum(probs), u), len(probs) - 1))


class Agent:
    """A trained (or training) policy bound to an environment spec.

    kind "dqn" holds networks {"q", "target"}; kind "ppo" holds
    {"policy", "value"}. The exploration RNG lives on the agent so
    trials with different seeds are fully independent.
    """

    def __init__(self, kind, env_spec: EnvSpec, hyperparams, networks,
                 rng_seed, exploration_epsilon=0.0):
        if kind not in ("dqn", "ppo"):
            raise ValueError(f"unknown agent kind {kind!r}")
        self.kind = kind
        self.env_spec = env_spec
        self.hyperparams = hyperparams
        self.networks = networks
        self.rng = np.random.Generator(np.random.PCG64(rng_seed))
        self.exploration_epsilon = exploration_epsilon
        self.train_episodes = 0
        self.global_step = 0

    @property
    def obs_dim(self):
        return self.env_spec.obs_dim

    @property
    def n_actions(self):
        return self.env_spec.n_actions

    def policy_network(self):
        return self.networks["q" if self.kind == "dqn" else "policy"]

    def act(self, obs, explore=False):
        obs = np.asarray(obs, dtype=np.float64)
        if obs.shape != (self.obs_dim,):
            raise SchemaError(
                f"observation shape {obs.shape} does not match "
                f"({self.obs_dim},)")
        if self.kind == "dqn":
            if explore and self.rng.random() < self.exploration_epsilon:
                return int(self.rng.integers(self.n_actions))
            q = forward(self.networks["q"], obs).output
            return int(np.argmax(q))  # ties resolve to the lowest index
        probs = forward(self.networks["policy"], obs).output
        if explore:
            return _sample_categorical(self.rng, probs)
        return int(np.argmax(probs))

    def copy(self, rng_seed=None):
        """Independent deep copy; optionally reseed its exploration RNG."""
        clone = Agent(self.kind, self.env_spec, self.hyperparams,
                      {name: net.copy() for name, net in self.networks.items()},
                      rng_seed if rng_seed is not None else 0,
                      self.exploration_epsilon)
        if rng_seed is None:
            clone.rng = np.random.Generator(np.random.PCG64())
            clone.rng.bit_generator.state = self.rng.bit_generator.state
        clone.train_episodes = self.train_episodes
        clone.global_step = self.global_step
        return clone


def act(agent: Agent, obs, explore: bool = False):
    """Module-level alias for :meth:`Agent.act`."""
    return agent.act(obs, explore)


def _net_meta(net):
    return {
        "layers": [{"in_dim": l.in_dim, "out_dim": l.out_dim,
                    "activation": l.activation} for l in net.layers],
        "initializer": {"scheme": net.initializer.scheme,
                        "seed": net.initializer.seed},
    }


def _net_from_meta(meta, arrays, prefix):
    layers = [LayerShape(int(l["in_dim"]), int(l["out_dim"]), l["activation"])
              for l in meta["layers"]]
    init = InitializerSpec(meta["initializer"]["scheme"],
                           int(meta["initializer"]["seed"]))
    weights = [arrays[f"{prefix}:w{i}"] for i in range(len(layers))]
    biases = [arrays[f"{prefix}:b{i}"] for i in range(len(layers))]
    return MlpNetwork(layers, weights, biases, init)


def save_agent(agent: Agent) -> bytes:
    """Checkpoint embedding every network plus hyperparams and counters."""
    meta = {
        "kind": agent.kind,
        "env_spec": agent.env_spec.to_json_dict(),
        "hyperparams": asdict(agent.hyperparams),
        "train_episodes": agent.train_episodes,
        "global_step": agent.global_step,
        "exploration_epsilon": agent.exploration_epsilon,
        "networks": {name: _net_meta(net)
                     for name, net in agent.networks.items()},
    }
    arrays = []
    for name in sorted(agent.networks):
        net = agent.networks[name]
        for i, (w, b) in enumerate(zip(net.weights, net.biases)):
            arrays.append((f"{name}:w{i}", w))
            arrays.append((f"{name}:b{i}", b))
    return _container.pack(MAGIC, VERSION, meta, arrays)


def load_agent(data: bytes, rng_seed: int = 0) -> Agent:
    from .dqn import DqnHyperparams
    from .ppo import PpoHyperparams

    _, meta, arrays = _container.unpack(data, MAGIC, VERSION)
    kind = meta["kind"]
    hp_cls = DqnHyperparams if kind == "dqn" else PpoHyperparams
    hp_fields = dict(meta["hyperparams"])
    if "hidden" in hp_fields:
        hp_fields["hidden"] = tuple(hp_fields["hidden"])
    hyperparams = hp_cls(**hp_fields)
    networks = {name: _net_from_meta(net_meta, arrays, name)
                for name, net_meta in meta["networks"].items()}
    agent = Agent(kind, EnvSpec.from_json_dict(meta["env_spec"]), hyperparams,
                  networks, rng_seed,
                  exploration_epsilon=float(meta["exploration_epsilon"]))
    agent.train_episodes = int(meta["train_episodes"])
    agent.global_step = int(meta["global_step"])
    return agent

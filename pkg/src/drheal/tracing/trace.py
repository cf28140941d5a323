"""Observation collection and per-neuron activation statistics.

A trace scores every hidden neuron by its mean absolute activation over
a saved observation set and is bound to the exact network checkpoint it
was computed from. Trace files use the shared container (magic ``DHTR``,
version 1) with one score array per hidden layer plus the observation
count, environment-spec hash, and network fingerprint in the header.
"""

from dataclasses import dataclass

import numpy as np

from .. import _container
from ..envs import EnvSpec, make_env
from ..errors import BindingError
from ..nn import MlpNetwork, forward, network_fingerprint

MAGIC = b"DHTR"
VERSION = 1


@dataclass
class ObservationSet:
    observations: np.ndarray  # (n, obs_dim)
    env_spec_hash: str
    episode_indices: list
    seed: int

    def __post_init__(self):
        self.observations = np.asarray(self.observations, dtype=np.float64)
        if self.observations.ndim != 2 or len(self.observations) == 0:
            raise ValueError("observation set must be a non-empty (n, d) array")
        if not np.all(np.isfinite(self.observations)):
            raise ValueError("observation set contains non-finite values")

    def __len__(self):
        return len(self.observations)


@dataclass
class ActivationTrace:
    layer_scores: list  # one (width,) array per hidden layer
    observation_count: int
    network_fingerprint: str
    env_spec_hash: str = ""

    def __post_init__(self):
        if not self.layer_scores:
            raise ValueError("trace must cover at least one hidden layer")
        self.layer_scores = [np.asarray(s, dtype=np.float64)
                             for s in self.layer_scores]
        if self.observation_count < 1:
            raise ValueError("trace must aggregate at least one observation")

    def layer_widths(self):
        return [len(s) for s in self.layer_scores]


def collect_observations(agent, env_spec: EnvSpec, sample_count: int,
                         seed: int) -> ObservationSet:
    """Gather the first `sample_count` states visited by greedy rollouts."""
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    env = make_env(env_spec, seed)
    observations = []
    episode_indices = []
    episode = 0
    while len(observations) < sample_count:
        obs = env.reset()
        while True:
            observations.append(obs)
            episode_indices.append(episode)
            if len(observations) == sample_count:
                break
            result = env.step(agent.act(obs, explore=False))
            obs = result.next_obs
            if result.done:
                break
        episode += 1
    return ObservationSet(np.asarray(observations), env_spec.spec_hash(),
                          episode_indices, seed)


def compute_activation_trace(net: MlpNetwork,
                             obs_set: ObservationSet) -> ActivationTrace:
    """Mean |activation| per hidden neuron over the observation set."""
    if len(obs_set) == 0:
        raise ValueError("observation set is empty")
    trace = forward(net, obs_set.observations)
    scores = [np.abs(trace.activations[l]).mean(axis=0)
              for l in net.hidden_layer_indices()]
    return ActivationTrace(scores, len(obs_set), network_fingerprint(net),
                           obs_set.env_spec_hash)


def trace_agent_networks(agent, obs_set: ObservationSet) -> dict:
    """One trace per healable network: {"q"} for DQN, {"policy", "value"}
    for PPO (the DQN target is a copy and is re-synced after forgetting)."""
    roles = ("q",) if agent.kind == "dqn" else ("policy", "value")
    return {role: compute_activation_trace(agent.networks[role], obs_set)
            for role in roles}


def save_trace(trace: ActivationTrace) -> bytes:
    meta = {
        "observation_count": trace.observation_count,
        "network_fingerprint": trace.network_fingerprint,
        "env_spec_hash": trace.env_spec_hash,
        "n_hidden_layers": len(trace.layer_scores),
    }
    arrays = [(f"scores{i}", s) for i, s in enumerate(trace.layer_scores)]
    return _container.pack(MAGIC, VERSION, meta, arrays)


def load_trace(data: bytes, expected_fingerprint: str = None) -> ActivationTrace:
    _, meta, arrays = _container.unpack(data, MAGIC, VERSION)
    trace = ActivationTrace(
        [arrays[f"scores{i}"] for i in range(int(meta["n_hidden_layers"]))],
        int(meta["observation_count"]),
        meta["network_fingerprint"],
        meta.get("env_spec_hash", ""),
    )
    if (expected_fingerprint is not None
            and trace.network_fingerprint != expected_fingerprint):
        raise BindingError(
            "trace is bound to a different network checkpoint "
            f"({trace.network_fingerprint[:12]}... != "
            f"{expected_fingerprint[:12]}...)")
    return trace


def trace_to_csv(path, trace: ActivationTrace):
    """Score table for offline inspection: columns layer,neuron,score
    behind a ``# format: drheal-trace-v1`` line."""
    with open(path, "w", newline="") as fh:
        fh.write("# format: drheal-trace-v1\n")
        fh.write("layer,neuron,score\n")
        for layer, scores in enumerate(trace.layer_scores):
            for neuron, score in enumerate(scores):
                fh.write(f"{layer},{neuron},{float(score)!r}\n")


AGENT_TRACES_MAGIC = b"DHTA"


def save_agent_traces(traces: dict) -> bytes:
    """One file holding every network role's trace (magic ``DHTA``)."""
    meta = {"roles": {}}
    arrays = []
    for role in sorted(traces):
        trace = traces[role]
        meta["roles"][role] = {
            "observation_count": trace.observation_count,
            "network_fingerprint": trace.network_fingerprint,
            "env_spec_hash": trace.env_spec_hash,
            "n_hidden_layers": len(trace.layer_scores),
        }
        arrays.extend((f"{role}:scores{i}", s)
                      for i, s in enumerate(trace.layer_scores))
    return _container.pack(AGENT_TRACES_MAGIC, VERSION, meta, arrays)


def load_agent_traces(data: bytes) -> dict:
    _, meta, arrays = _container.unpack(data, AGENT_TRACES_MAGIC, VERSION)
    traces = {}
    for role, info in meta["roles"].items():
        traces[role] = ActivationTrace(
            [arrays[f"{role}:scores{i}"]
             for i in range(int(info["n_hidden_layers"]))],
            int(info["observation_count"]),
            info["network_fingerprint"],
            info.get("env_spec_hash", ""),
        )
    return traces

"""Uniform experience replay with a bit-exact file format.

Transitions live in preallocated float64 ring arrays. The serialized
form (magic ``DHRB``, version 1) stores the arrays in insertion-ring
order plus the ring cursor, so a round trip reproduces the buffer state
exactly; sampling randomness is reseeded by the caller on load.
"""

import numpy as np

from .. import _container
from ..errors import CheckpointError

MAGIC = b"DHRB"
VERSION = 1


class ReplayBuffer:
    def __init__(self, capacity, obs_dim, seed):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = int(capacity)
        self.obs_dim = int(obs_dim)
        self._obs = np.zeros((capacity, obs_dim))
        self._actions = np.zeros(capacity)
        self._rewards = np.zeros(capacity)
        self._next_obs = np.zeros((capacity, obs_dim))
        self._terminated = np.zeros(capacity)
        self._next = 0
        self._size = 0
        self.inserted = 0
        self._rng = np.random.Generator(np.random.PCG64(seed))

    def __len__(self):
        return self._size

    def add(self, obs, action, reward, next_obs, terminated):
        i = self._next
        self._obs[i] = obs
        self._actions[i] = action
        self._rewards[i] = reward
        self._next_obs[i] = next_obs
        self._terminated[i] = 1.0 if terminated else 0.0
        self._next = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)
        self.inserted += 1

    def sample(self, batch_size):
        """Uniform sample without replacement within the batch."""
        if batch_size > self._size:
            raise ValueError(
                f"cannot sample {batch_size} from {self._size} transitions")
        idx = self._rng.choice(self._size, size=batch_size, replace=False)
        return {
            "obs": self._obs[idx],
            "actions": self._actions[idx].astype(np.int64),
            "rewards": self._rewards[idx],
            "next_obs": self._next_obs[idx],
            "terminated": self._terminated[idx],
        }

    def reseed(self, seed):
        self._rng = np.random.Generator(np.random.PCG64(seed))

    def copy(self, seed):
        """Content-identical buffer with a freshly seeded sampler."""
        clone = ReplayBuffer(self.capacity, self.obs_dim, seed)
        clone._obs[...] = self._obs
        clone._actions[...] = self._actions
        clone._rewards[...] = self._rewards
        clone._next_obs[...] = self._next_obs
        clone._terminated[...] = self._terminated
        clone._next = self._next
        clone._size = self._size
        clone.inserted = self.inserted
        return clone


def save_replay(buffer: ReplayBuffer) -> bytes:
    meta = {
        "capacity": buffer.capacity,
        "obs_dim": buffer.obs_dim,
        "size": len(buffer),
        "next": buffer._next,
        "inserted": buffer.inserted,
    }
    arrays = [
        ("obs", buffer._obs),
        ("actions", buffer._actions),
        ("rewards", buffer._rewards),
        ("next_obs", buffer._next_obs),
        ("terminated", buffer._terminated),
    ]
    return _container.pack(MAGIC, VERSION, meta, arrays)


def load_replay(data: bytes, seed: int = 0) -> ReplayBuffer:
    _, meta, arrays = _container.unpack(data, MAGIC, VERSION)
    buffer = ReplayBuffer(int(meta["capacity"]), int(meta["obs_dim"]), seed)
    for name, target in (("obs", buffer._obs), ("actions", buffer._actions),
                         ("rewards", buffer._rewards),
                         ("next_obs", buffer._next_obs),
                         ("terminated", buffer._terminated)):
        if arrays[name].shape != target.shape:
            raise CheckpointError(f"replay array {name} has wrong shape")
        target[...] = arrays[name]
    buffer._size = int(meta["size"])
    buffer._next = int(meta["next"])
    buffer.inserted = int(meta["inserted"])
    return buffer

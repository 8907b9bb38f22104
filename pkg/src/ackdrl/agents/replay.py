from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..exceptions import NotReadyError, ShapeError


class Transition(NamedTuple):
    obs: np.ndarray
    action: np.ndarray
    reward: float
    next_obs: np.ndarray
    done: bool


class Batch(NamedTuple):
    obs: np.ndarray         # (B, obs_dim)
    action: np.ndarray      # (B, action_dim) float, or (B,) int for discrete agents
    reward: np.ndarray      # (B,)
    next_obs: np.ndarray    # (B, obs_dim)
    done: np.ndarray        # (B,) float 0/1


class ReplayBuffer:
    """Fixed-capacity FIFO ring of transitions with uniform sampling (with replacement).

    Storage is allocated on the first push, once the observation and action
    shapes are known.
    """

    def __init__(self, capacity: int = 5000):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = int(capacity)
        self.size = 0
        self._next = 0
        self._obs = None

    def __len__(self):
        return self.size

    def _allocate(self, obs, action):
        cap = self.capacity
        action = np.asarray(action)
        self._obs = np.zeros((cap, obs.shape[0]))
        self._next_obs = np.zeros((cap, obs.shape[0]))
        self._action = np.zeros((cap,) + action.shape, dtype=action.dtype if action.dtype.kind in "iu" else float)
        self._reward = np.zeros(cap)
        self._done = np.zeros(cap)

    def push(self, obs, action, reward, next_obs, done) -> "ReplayBuffer":
        obs = np.asarray(obs, dtype=float)
        next_obs = np.asarray(next_obs, dtype=float)
        if self._obs is None:
            self._allocate(obs, action)
        if obs.shape != self._obs.shape[1:] or next_obs.shape != self._obs.shape[1:]:
            raise ShapeError(f"observation shape {obs.shape} does not match buffer {self._obs.shape[1:]}")
        i = self._next
        self._obs[i] = obs
        self._action[i] = action
        self._reward[i] = reward
        self._next_obs[i] = next_obs
        self._done[i] = float(done)
        self._next = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)
        return self

    def ready(self, batch_size: int) -> bool:
        return self.size >= batch_size

    def sample_indices(self, batch_size: int, rng: np.random.Generator) -> np.ndarray:
        if not self.ready(batch_size):
            raise NotReadyError(f"buffer holds {self.size} transitions, need {batch_size}")
        return rng.integers(0, self.size, size=batch_size)

    def gather(self, idx) -> Batch:
        return Batch(self._obs[idx], self._action[idx], self._reward[idx], self._next_obs[idx], self._done[idx])

    def sample(self, batch_size: int, rng: np.random.Generator) -> Batch:
        return self.gather(self.sample_indices(batch_size, rng))

    def transitions(self) -> list:
        """Stored transitions, oldest first."""
        if self.size < self.capacity:
            order = range(self.size)
        else:
            order = [(self._next + k) % self.capacity for k in range(self.capacity)]
        return [Transition(self._obs[i].copy(), self._action[i].copy(), float(self._reward[i]),
                           self._next_obs[i].copy(), bool(self._done[i])) for i in order]

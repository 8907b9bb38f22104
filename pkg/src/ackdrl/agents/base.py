from __future__ import annotations

import time
from typing import Callable, NamedTuple

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .._validation import check_observations
from ..env import NavigationEnv, Outcome
from ..seeding import seed_everything


class EpisodeRecord(NamedTuple):
    episode: int
    steps: int
    cumulative_reward: float
    outcome: str
    wall_ms: float


def is_terminal(outcome: Outcome) -> bool:
    """Bootstrap cut-off: goal and crash are terminal, a step-cap timeout is not."""
    return outcome in (Outcome.REACHED_GOAL, Outcome.COLLIDED)


class BaseAgent(BaseEstimator):
    """Shared episode loop for the learners.

    Subclasses build their networks in ``_initialize`` and provide
    ``_select_action``, ``update`` and the checkpoint hooks. Fitted state
    lives in attributes with a trailing underscore.
    """

    algo = None

    def _init_rngs(self):
        self.rngs_ = seed_everything(0 if self.random_state is None else self.random_state)

    def initialize(self, obs_dim: int):
        """Allocate networks, optimisers and replay for ``obs_dim``-wide observations."""
        self._init_rngs()
        self.obs_dim_ = int(obs_dim)
        self._initialize(self.obs_dim_)
        self.n_updates_ = 0
        self.episodes_seen_ = 0
        return self

    def _initialize(self, obs_dim):
        raise NotImplementedError

    def _select_action(self, obs, explore):
        """Return ``(stored_action, ControlAction)`` for one observation."""
        raise NotImplementedError

    def update(self):
        raise NotImplementedError

    def _begin_episode(self):
        pass

    def _end_episode(self):
        pass

    def _check_obs(self, X):
        check_is_fitted(self, "obs_dim_")
        return check_observations(X, self.obs_dim_)

    def act(self, obs, explore: bool = False):
        """ControlAction for a single observation."""
        check_is_fitted(self, "obs_dim_")
        return self._select_action(self._check_obs(obs)[0], explore)[1]

    def run_episode(self, env: NavigationEnv, goal_rng: np.random.Generator, *, explore: bool, learn: bool,
                    goal=None):
        obs = env.reset(goal_rng, goal=goal)
        self._begin_episode()
        total = 0.0
        while True:
            stored, control = self._select_action(obs, explore)
            result = env.step(control)
            total += result.reward
            if learn:
                self.replay_.push(obs, stored, result.reward, result.observation, is_terminal(result.outcome))
                self.update()
            obs = result.observation
            if result.done:
                break
        if learn:
            self._end_episode()
            self.episodes_seen_ += 1
        return env.steps, total, result.outcome

    def fit(self, env: NavigationEnv, n_episodes: int = 400,
            callback: Callable[[EpisodeRecord], None] | None = None, record_wall_time: bool = True):
        """Train for ``n_episodes`` episodes with exploration; one update per step once replay is warm.

        ``callback`` receives one :class:`EpisodeRecord` per finished episode.
        """
        if not hasattr(self, "obs_dim_") or self.obs_dim_ != env.obs_dim:
            self.initialize(env.obs_dim)
        goals = self.rngs_["goals"]
        records = []
        for ep in range(n_episodes):
            t0 = time.perf_counter()
            steps, total, outcome = self.run_episode(env, goals, explore=True, learn=True)
            wall_ms = (time.perf_counter() - t0) * 1000.0 if record_wall_time else 0.0
            rec = EpisodeRecord(ep, steps, total, outcome.value, wall_ms)
            records.append(rec)
            if callback is not None:
                callback(rec)
        self.training_records_ = records
        return self

    # checkpoint hooks
    def networks(self) -> dict:
        raise NotImplementedError

    def optimizers(self) -> dict:
        raise NotImplementedError

    def extra_state(self) -> dict:
        return {"n_updates": self.n_updates_, "episodes_seen": self.episodes_seen_}

    def load_extra_state(self, extra: dict):
        self.n_updates_ = int(extra["n_updates"])
        self.episodes_seen_ = int(extra["episodes_seen"])

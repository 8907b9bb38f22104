from __future__ import annotations

import numpy as np

from .._validation import check_float, check_int
from ..env import discrete_action_table
from ..exceptions import ConfigError
from ..nn import AdamState, MLP, adam_step, hard_update, mlp_init, soft_update
from ..vehicle import VehicleParams
from .base import BaseAgent
from .replay import Batch, ReplayBuffer


def epsilon_greedy(q_values, epsilon: float, rng: np.random.Generator) -> int:
    """Greedy index (lowest index on ties) with probability ``1 - epsilon``, else uniform."""
    q_values = np.asarray(q_values, dtype=float).reshape(-1)
    if q_values.size == 0:
        raise ValueError("q_values is empty")
    if rng.random() < epsilon:
        return int(rng.integers(q_values.size))
    return int(np.argmax(q_values))


def dqn_targets(batch: Batch, q_net: MLP, q_target: MLP, gamma: float, double_q: bool) -> np.ndarray:
    """TD targets. DQN bootstraps from ``max_a Q_target(s', a)``; DDQN evaluates
    the online argmax with the target network."""
    q_next_target = q_target.predict(batch.next_obs)
    if double_q:
        chosen = np.argmax(q_net.predict(batch.next_obs), axis=1)
        bootstrap = q_next_target[np.arange(len(chosen)), chosen]
    else:
        bootstrap = q_next_target.max(axis=1)
    return batch.reward + gamma * (1.0 - batch.done) * bootstrap


class DQNAgent(BaseAgent):
    """Q-learning over a fixed table of constant-speed steering actions.

    ``double_q=False`` gives DQN, ``double_q=True`` gives DDQN. With
    ``target_sync="soft"`` the target follows ``tau * target + (1 - tau) *
    online`` after every update; ``"hard"`` copies every ``target_sync_every``
    updates.
    """

    def __init__(self, hidden_sizes=(64, 64), gamma=0.9, tau=0.99, alpha=0.01, epsilon=0.05,
                 batch_size=64, buffer_size=5000, double_q=False, target_sync="soft", target_sync_every=100,
                 n_steer=5, v_fixed=None, v_max=1.0, delta_max=0.5, random_state=None):
        self.hidden_sizes = hidden_sizes
        self.gamma = gamma
        self.tau = tau
        self.alpha = alpha
        self.epsilon = epsilon
        self.batch_size = batch_size
        self.buffer_size = buffer_size
        self.double_q = double_q
        self.target_sync = target_sync
        self.target_sync_every = target_sync_every
        self.n_steer = n_steer
        self.v_fixed = v_fixed
        self.v_max = v_max
        self.delta_max = delta_max
        self.random_state = random_state

    @property
    def algo(self) -> str:
        return "ddqn" if self.double_q else "dqn"

    def _validate_params(self):
        check_float(self.gamma, "gamma", 0.0, 1.0)
        check_float(self.tau, "tau", 0.0, 1.0)
        check_float(self.alpha, "alpha", 0.0, low_inclusive=False)
        check_float(self.epsilon, "epsilon", 0.0, 1.0)
        check_int(self.batch_size, "batch_size", 1)
        check_int(self.buffer_size, "buffer_size", 1)
        check_int(self.target_sync_every, "target_sync_every", 1)
        if self.target_sync not in ("soft", "hard"):
            raise ConfigError(f"must be 'soft' or 'hard', got {self.target_sync!r}", field="target_sync")

    def _initialize(self, obs_dim):
        self._validate_params()
        params = VehicleParams(v_max=self.v_max, delta_max=self.delta_max)
        self.actions_ = discrete_action_table(self.n_steer, self.v_fixed, params)
        rng = self.rngs_["net_init"]
        self.q_net_ = mlp_init([obs_dim, *self.hidden_sizes, len(self.actions_)], "relu", "linear", rng)
        self.q_target_ = self.q_net_.copy()
        self.optim_ = AdamState.for_network(self.q_net_, alpha=self.alpha)
        self.replay_ = ReplayBuffer(self.buffer_size)

    def q_values(self, X) -> np.ndarray:
        return self.q_net_.predict(self._check_obs(X))

    def predict(self, X) -> np.ndarray:
        """Greedy action indices."""
        return np.argmax(self.q_values(X), axis=1)

    def _select_action(self, obs, explore):
        q = self.q_net_.predict(obs)[0]
        idx = epsilon_greedy(q, self.epsilon if explore else 0.0, self.rngs_["exploration"])
        return idx, self.actions_[idx]

    def targets(self, batch: Batch) -> np.ndarray:
        return dqn_targets(batch, self.q_net_, self.q_target_, self.gamma, self.double_q)

    def update_on_batch(self, batch: Batch) -> float:
        y = self.targets(batch)
        q, cache = self.q_net_.forward(batch.obs)
        rows = np.arange(len(y))
        actions = batch.action.astype(int)
        err = q[rows, actions] - y
        grad_out = np.zeros_like(q)
        grad_out[rows, actions] = (2.0 / len(y)) * err
        grads, _ = self.q_net_.backward(cache, grad_out)
        adam_step(self.q_net_, grads, self.optim_)
        self.n_updates_ += 1
        if self.target_sync == "soft":
            soft_update(self.q_target_, self.q_net_, self.tau)
        elif self.n_updates_ % self.target_sync_every == 0:
            hard_update(self.q_target_, self.q_net_)
        return float(np.mean(err * err))

    def update(self):
        """One TD regression step. ``None`` while replay is underfull."""
        if not self.replay_.ready(self.batch_size):
            return None
        return self.update_on_batch(self.replay_.sample(self.batch_size, self.rngs_["replay"]))

    def networks(self) -> dict:
        return {"q_net": self.q_net_, "q_target": self.q_target_}

    def optimizers(self) -> dict:
        return {"q_net": self.optim_}


class DDQNAgent(DQNAgent):
    """:class:`DQNAgent` with double-Q targets enabled by default."""

    def __init__(self, hidden_sizes=(64, 64), gamma=0.9, tau=0.99, alpha=0.01, epsilon=0.05,
                 batch_size=64, buffer_size=5000, double_q=True, target_sync="soft", target_sync_every=100,
                 n_steer=5, v_fixed=None, v_max=1.0, delta_max=0.5, random_state=None):
        super().__init__(hidden_sizes, gamma, tau, alpha, epsilon, batch_size, buffer_size, double_q,
                         target_sync, target_sync_every, n_steer, v_fixed, v_max, delta_max, random_state)

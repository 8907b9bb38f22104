from __future__ import annotations

import numpy as np

from .._validation import check_float, check_int
from ..nn import AdamState, MLP, adam_step, mlp_init, soft_update
from ..vehicle import ControlAction
from .base import BaseAgent
from .noise import OUNoise
from .replay import Batch, ReplayBuffer


def action_to_control(a, v_max: float, delta_max: float) -> ControlAction:
    """Map a policy output in [-1, 1]^2 to (v in [0, v_max], delta in [-delta_max, delta_max])."""
    return ControlAction((a[0] + 1.0) / 2.0 * v_max, a[1] * delta_max)


def critic_targets(batch: Batch, actor_target: MLP, critic_target: MLP, gamma: float) -> np.ndarray:
    """``y = r + gamma * (1 - done) * Q'(s', mu'(s'))``."""
    next_actions = actor_target.predict(batch.next_obs)
    q_next = critic_target.predict(np.hstack([batch.next_obs, next_actions]))[:, 0]
    return batch.reward + gamma * (1.0 - batch.done) * q_next


class DDPGAgent(BaseAgent):
    """Deterministic actor-critic with target networks, replay and OU exploration.

    The actor maps observations to ``[-1, 1]^2`` (tanh); the critic scores
    ``[obs, action]`` concatenated at its input. Target networks follow
    ``target <- tau * target + (1 - tau) * online`` after every update, so
    ``tau`` is the retained fraction.

    Parameters
    ----------
    hidden_sizes : tuple of int
        Hidden widths shared by actor and critic.
    gamma : float
        Discount rate.
    tau : float
        Target retention per soft update, in [0, 1].
    alpha : float
        Adam learning rate for the critic. The actor uses ``actor_alpha``
        when set, otherwise ``alpha``.
    final_layer_init : float or None
        When set, output-layer weights of both networks start uniform in
        ``[-final_layer_init, final_layer_init]`` instead of the default
        fan-in scaling. Small values keep the initial actor out of tanh
        saturation.
    """

    algo = "ddpg"

    def __init__(self, hidden_sizes=(64, 64), gamma=0.9, tau=0.99, alpha=0.01, actor_alpha=None,
                 batch_size=64, buffer_size=5000, ou_theta=0.15, ou_sigma=0.2, ou_sigma_decay=0.995,
                 final_layer_init=None, v_max=1.0, delta_max=0.5, random_state=None):
        self.hidden_sizes = hidden_sizes
        self.gamma = gamma
        self.tau = tau
        self.alpha = alpha
        self.actor_alpha = actor_alpha
        self.batch_size = batch_size
        self.buffer_size = buffer_size
        self.ou_theta = ou_theta
        self.ou_sigma = ou_sigma
        self.ou_sigma_decay = ou_sigma_decay
        self.final_layer_init = final_layer_init
        self.v_max = v_max
        self.delta_max = delta_max
        self.random_state = random_state

    def _validate_params(self):
        check_float(self.gamma, "gamma", 0.0, 1.0)
        check_float(self.tau, "tau", 0.0, 1.0)
        check_float(self.alpha, "alpha", 0.0, low_inclusive=False)
        if self.actor_alpha is not None:
            check_float(self.actor_alpha, "actor_alpha", 0.0, low_inclusive=False)
        check_int(self.batch_size, "batch_size", 1)
        check_int(self.buffer_size, "buffer_size", 1)
        check_float(self.ou_theta, "ou_theta", 0.0, 1.0)
        check_float(self.ou_sigma, "ou_sigma", 0.0)
        check_float(self.ou_sigma_decay, "ou_sigma_decay", 0.0, 1.0)
        if self.final_layer_init is not None:
            check_float(self.final_layer_init, "final_layer_init", 0.0, low_inclusive=False)

    def _initialize(self, obs_dim):
        self._validate_params()
        rng = self.rngs_["net_init"]
        hidden = list(self.hidden_sizes)
        self.actor_ = mlp_init([obs_dim, *hidden, 2], "relu", "tanh", rng)
        self.critic_ = mlp_init([obs_dim + 2, *hidden, 1], "relu", "linear", rng)
        if self.final_layer_init is not None:
            for net in (self.actor_, self.critic_):
                w = net.weights[-1]
                w[...] = rng.uniform(-self.final_layer_init, self.final_layer_init, w.shape)
        self.actor_target_ = self.actor_.copy()
        self.critic_target_ = self.critic_.copy()
        actor_alpha = self.alpha if self.actor_alpha is None else self.actor_alpha
        self.actor_optim_ = AdamState.for_network(self.actor_, alpha=actor_alpha)
        self.critic_optim_ = AdamState.for_network(self.critic_, alpha=self.alpha)
        self.replay_ = ReplayBuffer(self.buffer_size)
        self.noise_ = OUNoise(2, self.ou_theta, self.ou_sigma, self.ou_sigma_decay)

    def policy(self, X) -> np.ndarray:
        """Raw actor outputs in (-1, 1)^2 for a batch of observations."""
        return self.actor_.predict(self._check_obs(X))

    def predict(self, X) -> np.ndarray:
        """Greedy controls, one ``(v, delta)`` row per observation."""
        a = self.policy(X)
        return np.column_stack([(a[:, 0] + 1.0) / 2.0 * self.v_max, a[:, 1] * self.delta_max])

    def _select_action(self, obs, explore):
        a = self.actor_.predict(obs)[0]
        if explore:
            a = np.clip(a + self.noise_.step(self.rngs_["exploration"]), -1.0, 1.0)
        return a, action_to_control(a, self.v_max, self.delta_max)

    def _begin_episode(self):
        self.noise_.reset()

    def _end_episode(self):
        self.noise_.end_episode()

    def critic_targets(self, batch: Batch) -> np.ndarray:
        return critic_targets(batch, self.actor_target_, self.critic_target_, self.gamma)

    def update_critic(self, batch: Batch) -> float:
        y = self.critic_targets(batch)
        q, cache = self.critic_.forward(np.hstack([batch.obs, batch.action]))
        err = q[:, 0] - y
        grads, _ = self.critic_.backward(cache, (2.0 / len(y)) * err[:, None])
        adam_step(self.critic_, grads, self.critic_optim_)
        return float(np.mean(err * err))

    def update_actor(self, obs: np.ndarray) -> float:
        """One Adam step ascending mean Q(s, mu(s)); the critic is read but not modified."""
        a, actor_cache = self.actor_.forward(obs)
        q, critic_cache = self.critic_.forward(np.hstack([obs, a]))
        n = obs.shape[0]
        _, input_grad = self.critic_.backward(critic_cache, np.full((n, 1), -1.0 / n))
        grads, _ = self.actor_.backward(actor_cache, input_grad[:, self.obs_dim_:])
        adam_step(self.actor_, grads, self.actor_optim_)
        return float(q.mean())

    def update(self):
        """Critic step, actor step, then soft target updates. ``None`` while replay is underfull."""
        if not self.replay_.ready(self.batch_size):
            return None
        batch = self.replay_.sample(self.batch_size, self.rngs_["replay"])
        critic_loss = self.update_critic(batch)
        actor_objective = self.update_actor(batch.obs)
        soft_update(self.actor_target_, self.actor_, self.tau)
        soft_update(self.critic_target_, self.critic_, self.tau)
        self.n_updates_ += 1
        return critic_loss, actor_objective

    def networks(self) -> dict:
        return {"actor": self.actor_, "actor_target": self.actor_target_,
                "critic": self.critic_, "critic_target": self.critic_target_}

    def optimizers(self) -> dict:
        return {"actor": self.actor_optim_, "critic": self.critic_optim_}

    def extra_state(self) -> dict:
        return {**super().extra_state(), "noise_sigma": self.noise_.sigma}

    def load_extra_state(self, extra: dict):
        super().load_extra_state(extra)
        self.noise_.sigma = float(extra["noise_sigma"])

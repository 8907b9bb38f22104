from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class OUNoise:
    """Discrete Ornstein-Uhlenbeck process reverting to zero.

    ``state <- state - theta_ou * state + sigma * N(0, I)``; ``sigma`` is
    multiplied by ``sigma_decay`` at each :meth:`end_episode`.
    """

    action_dim: int = 2
    theta_ou: float = 0.15
    sigma: float = 0.2
    sigma_decay: float = 0.995
    state: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.state is None:
            self.state = np.zeros(self.action_dim)
        self.state = np.asarray(self.state, dtype=float)
        if self.state.shape != (self.action_dim,):
            raise ValueError(f"state must have shape ({self.action_dim},)")

    def reset(self):
        self.state = np.zeros(self.action_dim)

    def step(self, rng: np.random.Generator) -> np.ndarray:
        self.state = self.state - self.theta_ou * self.state + self.sigma * rng.standard_normal(self.action_dim)
        return self.state.copy()

    def end_episode(self):
        self.sigma *= self.sigma_decay

    @property
    def stationary_variance(self) -> float:
        t = self.theta_ou
        return self.sigma ** 2 / (2 * t - t * t)

from .base import BaseAgent, EpisodeRecord
from .ddpg import DDPGAgent, action_to_control, critic_targets
from .dqn import DDQNAgent, DQNAgent, dqn_targets, epsilon_greedy
from .noise import OUNoise
from .replay import Batch, ReplayBuffer, Transition

AGENTS = {"ddpg": DDPGAgent, "dqn": DQNAgent, "ddqn": DDQNAgent}


def make_agent(algo: str, **params) -> BaseAgent:
    from ..exceptions import ConfigError
    try:
        cls = AGENTS[algo]
    except KeyError:
        raise ConfigError(f"unknown algorithm {algo!r}; expected one of {sorted(AGENTS)}", field="algo") from None
    return cls(**params)


__all__ = ["AGENTS", "BaseAgent", "Batch", "DDPGAgent", "DDQNAgent", "DQNAgent", "EpisodeRecord", "OUNoise",
           "ReplayBuffer", "Transition", "action_to_control", "critic_targets", "dqn_targets", "epsilon_greedy",
           "make_agent"]

"""Episodic goal-reaching MDP around the vehicle model and an obstacle world."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import ConfigError, InvalidStateError
from .vehicle import ControlAction, Pose, VehicleParams, clamp_action, step_euler, wrap_angle
from .world import WorldMap, collides, lidar_scan, sample_goal


class Outcome(str, enum.Enum):
    RUNNING = "running"
    REACHED_GOAL = "reached_goal"
    COLLIDED = "collided"
    TIMED_OUT = "timed_out"


@dataclass(frozen=True)
class RewardCoeffs:
    r_goal: float = 100.0
    r_crash: float = 100.0
    k_prog: float = 10.0
    c_step: float = 0.05


@dataclass(frozen=True)
class EnvConfig:
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    n_beams: int = 16
    fov: float = math.pi
    max_range: float = 10.0
    max_steps: int = 500
    reward: RewardCoeffs = field(default_factory=RewardCoeffs)
    goal_radius: float | None = None  # None: use the world's goal radius
    goal_min_start_distance: float = 2.0

    def __post_init__(self):
        if self.max_steps < 1:
            raise ConfigError("must be >= 1", field="max_steps")
        if self.n_beams < 1:
            raise ConfigError("must be >= 1", field="n_beams")
        if not (self.max_range > 0 and self.fov > 0) or (self.goal_radius is not None and not self.goal_radius > 0):
            raise ConfigError("max_range, fov and goal_radius must be positive", field="sensor")

    @property
    def obs_dim(self) -> int:
        return self.n_beams + 4


@dataclass
class StepResult:
    observation: np.ndarray
    reward: float
    done: bool
    outcome: Outcome


def reward(prev_distance: float, new_distance: float, outcome: Outcome, coeffs: RewardCoeffs = RewardCoeffs()) -> float:
    """Terminal bonus/penalty, otherwise progress toward the goal minus a step cost."""
    if outcome == Outcome.REACHED_GOAL:
        return coeffs.r_goal
    if outcome == Outcome.COLLIDED:
        return -coeffs.r_crash
    return coeffs.k_prog * (prev_distance - new_distance) - coeffs.c_step


def discrete_action_table(n_steer: int = 5, v_fixed: float | None = None,
                          params: VehicleParams = VehicleParams()) -> list:
    """``n_steer`` constant-speed actions with steering evenly spread over the full range."""
    if n_steer < 2 or n_steer % 2 == 0:
        raise ConfigError(f"must be an odd count >= 3 so straight driving is included, got {n_steer}",
                          field="n_steer")
    v = params.v_max if v_fixed is None else v_fixed
    deltas = np.linspace(-params.delta_max, params.delta_max, n_steer)
    deltas[n_steer // 2] = 0.0
    return [ControlAction(v, float(d)) for d in deltas]


class NavigationEnv:
    """Fixed start, random goal per episode; Euler-integrated kinematics.

    Observation layout: ``n_beams`` normalised lidar ranges, normalised goal
    distance, goal bearing relative to the heading, and the last applied
    action scaled to ``(v / v_max, delta / delta_max)``.
    """

    def __init__(self, world: WorldMap, config: EnvConfig = EnvConfig()):
        self.world = world
        self.config = config
        self.pose: Pose = world.start
        self.goal = world.goal
        self.last_action = ControlAction(0.0, 0.0)
        self.goal_radius = world.goal_radius if config.goal_radius is None else config.goal_radius
        self.steps = 0
        self.done = True
        self._distance = self._goal_distance()

    @property
    def obs_dim(self) -> int:
        return self.config.obs_dim

    def _goal_distance(self) -> float:
        return math.hypot(self.goal[0] - self.pose.x, self.goal[1] - self.pose.y)

    def reset(self, rng: np.random.Generator | None = None, goal=None) -> np.ndarray:
        if goal is None:
            rng = np.random.default_rng() if rng is None else rng
            goal = sample_goal(self.world, rng, min_clearance=self.config.vehicle.footprint_radius,
                               min_start_distance=self.config.goal_min_start_distance)
        self.goal = (float(goal[0]), float(goal[1]))
        self.pose = self.world.start
        self.last_action = ControlAction(0.0, 0.0)
        self.steps = 0
        self.done = False
        self._distance = self._goal_distance()
        return self.observe()

    def observe(self) -> np.ndarray:
        cfg = self.config
        scan = lidar_scan(self.world, self.pose, cfg.n_beams, cfg.fov, cfg.max_range)
        bearing = wrap_angle(math.atan2(self.goal[1] - self.pose.y, self.goal[0] - self.pose.x) - self.pose.theta)
        obs = np.empty(cfg.obs_dim)
        obs[:cfg.n_beams] = scan.ranges / cfg.max_range
        obs[cfg.n_beams] = min(self._goal_distance() / self.world.diagonal, 1.0)
        obs[cfg.n_beams + 1] = bearing
        obs[cfg.n_beams + 2] = self.last_action.v / cfg.vehicle.v_max
        obs[cfg.n_beams + 3] = self.last_action.delta / cfg.vehicle.delta_max
        return obs

    def step(self, action: ControlAction) -> StepResult:
        if self.done:
            raise InvalidStateError("episode is finished; call reset() first")
        vp = self.config.vehicle
        action = clamp_action(action, vp)
        self.pose = step_euler(self.pose, action, vp, vp.dt)
        self.last_action = action
        self.steps += 1
        prev = self._distance
        self._distance = self._goal_distance()
        if collides(self.world, (self.pose.x, self.pose.y), vp.footprint_radius):
            outcome = Outcome.COLLIDED
        elif self._distance <= self.goal_radius:
            outcome = Outcome.REACHED_GOAL
        elif self.steps >= self.config.max_steps:
            outcome = Outcome.TIMED_OUT
        else:
            outcome = Outcome.RUNNING
        self.done = outcome != Outcome.RUNNING
        r = reward(prev, self._distance, outcome, self.config.reward)
        return StepResult(self.observe(), r, self.done, outcome)

    def with_config(self, **changes) -> "NavigationEnv":
        return NavigationEnv(self.world, replace(self.config, **changes))

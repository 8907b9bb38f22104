"""Run configuration files (JSON) with strict key checking."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from ..agents import AGENTS
from ..env import EnvConfig, RewardCoeffs
from ..exceptions import ConfigError, FormatError
from ..vehicle import VehicleParams

_VEHICLE_KEYS = ("wheelbase_L", "v_max", "delta_max", "footprint_radius", "dt")
_REWARD_KEYS = ("r_goal", "r_crash", "k_prog", "c_step")
_SENSOR_KEYS = ("n_beams", "fov", "max_range", "max_steps", "goal_radius", "goal_min_start_distance")
ENV_KEYS = _VEHICLE_KEYS + _REWARD_KEYS + _SENSOR_KEYS

# the vehicle section owns the action bounds, and seeding is driven by the run seed
_DERIVED_AGENT_KEYS = {"v_max", "delta_max", "random_state"}


def env_config_from_dict(data: dict) -> EnvConfig:
    """Build an :class:`EnvConfig` from a flat mapping of :data:`ENV_KEYS`."""
    if not isinstance(data, dict):
        raise ConfigError("must be an object", field="env")
    unknown = set(data) - set(ENV_KEYS)
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)}", field="env")
    pick = lambda keys: {k: data[k] for k in keys if k in data}
    for key, value in data.items():
        if key != "goal_radius" or value is not None:
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ConfigError("must be a finite number", field=f"env.{key}")
    vehicle = VehicleParams(**pick(_VEHICLE_KEYS))
    reward = RewardCoeffs(**pick(_REWARD_KEYS))
    return EnvConfig(vehicle=vehicle, reward=reward, **pick(_SENSOR_KEYS))


def env_config_to_dict(cfg: EnvConfig) -> dict:
    out = {k: getattr(cfg.vehicle, k) for k in _VEHICLE_KEYS}
    out.update({k: getattr(cfg.reward, k) for k in _REWARD_KEYS})
    out.update({k: getattr(cfg, k) for k in _SENSOR_KEYS})
    return out


@dataclass(frozen=True)
class WorldSpec:
    """Either a generated map (size, obstacle counts, optional seed) or a world file."""

    width: float = 20.0
    height: float = 20.0
    rects: int = 3
    circles: int = 5
    seed: int | None = None  # None: drawn from the run seed's world stream
    path: str | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "WorldSpec":
        if not isinstance(data, dict):
            raise ConfigError("must be an object", field="world")
        allowed = {f.name for f in fields(cls)}
        unknown = set(data) - allowed
        if unknown:
            raise ConfigError(f"unknown key(s) {sorted(unknown)}", field="world")
        if "path" in data and len(data) > 1:
            raise ConfigError("a world file path excludes generator keys", field="world")
        spec = cls(**data)
        if spec.path is None:
            for name in ("rects", "circles"):
                if not isinstance(getattr(spec, name), int) or getattr(spec, name) < 0:
                    raise ConfigError("must be a non-negative integer", field=f"world.{name}")
            for name in ("width", "height"):
                v = getattr(spec, name)
                if not isinstance(v, (int, float)) or not math.isfinite(v) or v <= 0:
                    raise ConfigError("must be a positive number", field=f"world.{name}")
        return spec

    def to_dict(self) -> dict:
        if self.path is not None:
            return {"path": self.path}
        out = {"width": self.width, "height": self.height, "rects": self.rects, "circles": self.circles}
        if self.seed is not None:
            out["seed"] = self.seed
        return out


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one training run.

    ``algo`` may be a list when the config drives a comparison. ``agent``
    holds hyperparameters shared by every algorithm that accepts them; a
    nested object keyed by algorithm name overrides per algorithm.
    """

    algo: str | tuple = "ddpg"
    episodes: int = 400
    seed: int = 0
    world: WorldSpec = field(default_factory=WorldSpec)
    env: EnvConfig = field(default_factory=EnvConfig)
    agent: dict = field(default_factory=dict)
    eval_episodes: int = 100
    checkpoint_every: int = 50
    record_wall_time: bool = False
    out: str = "runs"

    def __post_init__(self):
        algos = self.algos
        if not algos:
            raise ConfigError("no algorithm given", field="algo")
        for a in algos:
            if a not in AGENTS:
                raise ConfigError(f"unknown algorithm {a!r}; expected one of {sorted(AGENTS)}", field="algo")
        if len(set(algos)) != len(algos):
            raise ConfigError("duplicate algorithm entries", field="algo")
        for name, minimum in (("episodes", 1), ("eval_episodes", 1), ("checkpoint_every", 1)):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
                raise ConfigError(f"must be an integer >= {minimum}", field=name)
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("must be a non-negative integer", field="seed")
        if not isinstance(self.record_wall_time, bool):
            raise ConfigError("must be true or false", field="record_wall_time")
        self._check_agent_keys()

    @property
    def algos(self) -> tuple:
        return (self.algo,) if isinstance(self.algo, str) else tuple(self.algo)

    def _check_agent_keys(self):
        if not isinstance(self.agent, dict):
            raise ConfigError("must be an object", field="agent")
        accepted = {a: set(AGENTS[a]().get_params()) - _DERIVED_AGENT_KEYS for a in AGENTS}
        for key, value in self.agent.items():
            if key in AGENTS:
                if not isinstance(value, dict):
                    raise ConfigError("per-algorithm overrides must be an object", field=f"agent.{key}")
                bad = set(value) - accepted[key]
                if bad:
                    raise ConfigError(f"unknown hyperparameter(s) {sorted(bad)}", field=f"agent.{key}")
            elif not any(key in accepted[a] for a in self.algos):
                raise ConfigError("unknown hyperparameter", field=f"agent.{key}")
        for a in self.algos:
            try:
                AGENTS[a](**self.agent_params(a))._validate_params()
            except TypeError as exc:
                raise ConfigError(str(exc), field="agent") from exc

    def agent_params(self, algo: str) -> dict:
        """Constructor arguments for ``algo`` (without the seed)."""
        accepted = set(AGENTS[algo]().get_params()) - _DERIVED_AGENT_KEYS
        params = {k: v for k, v in self.agent.items() if k in accepted and k not in AGENTS}
        params.update(self.agent.get(algo, {}))
        if "hidden_sizes" in params:
            params["hidden_sizes"] = tuple(params["hidden_sizes"])
        params["v_max"] = self.env.vehicle.v_max
        params["delta_max"] = self.env.vehicle.delta_max
        return params

    def for_algo(self, algo: str) -> "RunConfig":
        return replace(self, algo=algo)

    def to_dict(self) -> dict:
        return {
            "algo": self.algo if isinstance(self.algo, str) else list(self.algo),
            "episodes": self.episodes,
            "seed": self.seed,
            "world": self.world.to_dict(),
            "env": env_config_to_dict(self.env),
            "agent": self.agent,
            "eval_episodes": self.eval_episodes,
            "checkpoint_every": self.checkpoint_every,
            "record_wall_time": self.record_wall_time,
            "out": self.out,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("top level must be an object", field="config")
        allowed = {f.name for f in fields(cls)}
        unknown = set(data) - allowed
        if unknown:
            raise ConfigError(f"unknown key(s) {sorted(unknown)}", field=sorted(unknown)[0])
        kwargs = dict(data)
        if isinstance(kwargs.get("algo"), list):
            kwargs["algo"] = tuple(kwargs["algo"])
        if "world" in kwargs:
            kwargs["world"] = WorldSpec.from_dict(kwargs["world"])
        if "env" in kwargs:
            kwargs["env"] = env_config_from_dict(kwargs["env"])
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc), field="config") from exc


def load_config(path) -> RunConfig:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"config is not valid JSON: {exc.msg}", offset=exc.pos, line=exc.lineno) from exc
    return RunConfig.from_dict(data)


def save_config(config: RunConfig, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n")
    return path

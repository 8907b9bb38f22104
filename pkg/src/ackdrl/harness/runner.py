"""Training, evaluation and multi-algorithm comparison drivers."""
from __future__ import annotations

import csv
import statistics
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..agents import BaseAgent, EpisodeRecord, make_agent
from ..env import EnvConfig, NavigationEnv, Outcome
from ..exceptions import AckDRLError, ConfigError
from ..seeding import seed_everything
from ..world import WorldMap, generate_world, load_world, save_world
from .checkpoint import load_checkpoint, save_checkpoint
from .config import RunConfig, WorldSpec, env_config_from_dict, env_config_to_dict, save_config

METRICS_HEADER = ("episode", "steps", "cumulative_reward", "outcome", "wall_ms")
COMPARE_HEADER = ("algo", "seed", "success_rate", "mean_sim_time_s", "mean_steps", "train_wall_s")


def build_world(spec: WorldSpec, seed: int) -> WorldMap:
    """Load the world file, or generate one; an unset generator seed comes from ``seed``'s world stream."""
    if spec.path is not None:
        return load_world(spec.path)
    world_seed = spec.seed
    if world_seed is None:
        world_seed = int(seed_everything(seed)["world"].integers(2**31))
    return generate_world(spec.width, spec.height, spec.rects, spec.circles, world_seed)


def parse_world_arg(text: str) -> WorldSpec:
    """``gen:W,H,RECTS,CIRCLES,SEED`` for a generated map, anything else is a world file path."""
    if not text.startswith("gen:"):
        return WorldSpec(path=text)
    parts = text[4:].split(",")
    if len(parts) != 5:
        raise ConfigError("expected gen:WIDTH,HEIGHT,RECTS,CIRCLES,SEED", field="world")
    try:
        w, h = float(parts[0]), float(parts[1])
        r, c, s = (int(p) for p in parts[2:])
    except ValueError as exc:
        raise ConfigError(f"bad generator spec {text!r}", field="world") from exc
    return WorldSpec.from_dict({"width": w, "height": h, "rects": r, "circles": c, "seed": s})


def format_record(rec: EpisodeRecord) -> list:
    return [rec.episode, rec.steps, repr(float(rec.cumulative_reward)), rec.outcome, f"{rec.wall_ms:.3f}"]


@dataclass
class TrainResult:
    agent: BaseAgent
    records: list
    metrics_path: Path
    checkpoints: list
    world_path: Path
    train_wall_s: float


def train(config: RunConfig, out_dir=None) -> TrainResult:
    """Run ``config.episodes`` training episodes, writing metrics, checkpoints, world and config to ``out_dir``."""
    if len(config.algos) != 1:
        raise ConfigError("train takes exactly one algorithm", field="algo")
    algo = config.algos[0]
    out = Path(config.out if out_dir is None else out_dir)
    out.mkdir(parents=True, exist_ok=True)
    world = build_world(config.world, config.seed)
    world_path = save_world(world, out / "world.json")
    save_config(config, out / "config.json")
    env = NavigationEnv(world, config.env)
    env_dict = env_config_to_dict(config.env)
    agent = make_agent(algo, random_state=config.seed, **config.agent_params(algo))
    agent.initialize(env.obs_dim)

    metrics_path = out / "metrics.csv"
    checkpoints = []
    with open(metrics_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(METRICS_HEADER)

        def on_episode(rec: EpisodeRecord):
            writer.writerow(format_record(rec))
            n = rec.episode + 1
            if n % config.checkpoint_every == 0 or n == config.episodes:
                checkpoints.append(save_checkpoint(agent, out / f"checkpoint_ep{n:05d}.bin", env_dict))

        t0 = time.perf_counter()
        agent.fit(env, config.episodes, callback=on_episode, record_wall_time=config.record_wall_time)
        wall = time.perf_counter() - t0
    final = out / "checkpoint.bin"
    final.write_bytes(checkpoints[-1].read_bytes())
    checkpoints.append(final)
    return TrainResult(agent, agent.training_records_, metrics_path, checkpoints, world_path, wall)


@dataclass(frozen=True)
class EvalReport:
    success_rate: float       # percent
    mean_episode_time: float  # simulated seconds over successful episodes, nan if none
    mean_steps: float
    n_episodes: int
    collision_rate: float = 0.0

    def to_dict(self) -> dict:
        """JSON-safe mapping; an undefined mean time becomes ``None``."""
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        if np.isnan(out["mean_episode_time"]):
            out["mean_episode_time"] = None
        return out


def evaluate_agent(agent: BaseAgent, world: WorldMap, env_config: EnvConfig, n_episodes: int,
                   seed: int) -> EvalReport:
    """Greedy rollouts with goals drawn from ``seed``'s goal stream."""
    if isinstance(n_episodes, bool) or not isinstance(n_episodes, int) or n_episodes < 1:
        raise ConfigError("must be an integer >= 1", field="n_episodes")
    env = NavigationEnv(world, env_config)
    goals = seed_everything(seed)["goals"]
    steps, success_steps, crashes = [], [], 0
    for _ in range(n_episodes):
        n, _, outcome = agent.run_episode(env, goals, explore=False, learn=False)
        steps.append(n)
        if outcome == Outcome.REACHED_GOAL:
            success_steps.append(n)
        crashes += outcome == Outcome.COLLIDED
    dt = env_config.vehicle.dt
    return EvalReport(
        success_rate=100.0 * len(success_steps) / n_episodes,
        mean_episode_time=float(np.mean(success_steps)) * dt if success_steps else float("nan"),
        mean_steps=float(np.mean(steps)),
        n_episodes=n_episodes,
        collision_rate=100.0 * crashes / n_episodes,
    )


def evaluate(checkpoint_path, world_spec: WorldSpec | str, n_episodes: int, seed: int) -> EvalReport:
    """Load a checkpoint and evaluate it greedily on the given world."""
    if isinstance(n_episodes, bool) or not isinstance(n_episodes, int) or n_episodes < 1:
        raise ConfigError("must be an integer >= 1", field="n_episodes")
    agent, env_dict = load_checkpoint(checkpoint_path)
    env_config = EnvConfig() if env_dict is None else env_config_from_dict(env_dict)
    if isinstance(world_spec, str):
        world_spec = parse_world_arg(world_spec)
    world = build_world(world_spec, seed)
    return evaluate_agent(agent, world, env_config, n_episodes, seed)


class SubRunError(AckDRLError, RuntimeError):
    """A compare sub-run failed; ``algo`` and ``seed`` identify it."""

    def __init__(self, algo, seed, cause):
        self.algo, self.seed = algo, seed
        super().__init__(f"sub-run algo={algo} seed={seed} failed: {cause}")


def check_compare_algos(algos) -> tuple:
    algos = tuple(algos)
    if len(set(algos)) != len(algos):
        raise ConfigError("duplicate algorithm entries", field="algo")
    if not algos:
        raise ConfigError("no algorithm given", field="algo")
    return algos


def _median(values):
    finite = [v for v in values if not np.isnan(v)]
    return statistics.median(finite) if finite else float("nan")


def compare(config: RunConfig, seeds, out_dir=None, eval_episodes: int | None = None) -> tuple:
    """Train and evaluate every (algo, seed) pair; returns ``(csv_path, rows)``.

    Rows hold per-seed results in algo-then-seed order followed, when more
    than one seed ran, by one ``median`` row per algorithm.
    """
    algos = check_compare_algos(config.algos)
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ConfigError("need at least one seed", field="seeds")
    n_eval = config.eval_episodes if eval_episodes is None else eval_episodes
    out = Path(config.out if out_dir is None else out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for algo in algos:
        for seed in seeds:
            run_cfg = RunConfig.from_dict({**config.to_dict(), "algo": algo, "seed": seed})
            try:
                result = train(run_cfg, out / f"{algo}_seed{seed}")
                world = load_world(result.world_path)
                report = evaluate_agent(result.agent, world, run_cfg.env, n_eval, seed)
            except ConfigError:
                raise
            except Exception as exc:
                raise SubRunError(algo, seed, exc) from exc
            rows.append({"algo": algo, "seed": str(seed), "success_rate": report.success_rate,
                         "mean_sim_time_s": report.mean_episode_time, "mean_steps": report.mean_steps,
                         "train_wall_s": result.train_wall_s})
    for algo in algos if len(seeds) > 1 else ():
        mine = [r for r in rows if r["algo"] == algo]
        rows.append({"algo": algo, "seed": "median",
                     **{k: _median([r[k] for r in mine]) for k in COMPARE_HEADER[2:]}})
    path = out / "comparison.csv"
    write_comparison(rows, path)
    return path, rows


def write_comparison(rows, path) -> Path:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COMPARE_HEADER)
        for r in rows:
            writer.writerow([r["algo"], r["seed"]] + [f"{r[k]:.6g}" for k in COMPARE_HEADER[2:]])
    return Path(path)

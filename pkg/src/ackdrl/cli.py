"""Command-line entry point: ``ackdrl <train|eval|compare|plot|gen-world> ...``.

Exit codes: 0 success, 1 configuration error, 2 I/O or file-format error,
3 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .exceptions import AckDRLError, ConfigError, FormatError
from .harness.config import RunConfig, load_config
from .harness.plotting import plot_rewards
from .harness.runner import compare, evaluate, train
from .world import generate_world, save_world

log = logging.getLogger("ackdrl")

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_RUNTIME = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message, field="arguments")


def _config(path) -> RunConfig:
    return RunConfig() if path is None else load_config(path)


def cmd_train(args):
    cfg = _config(args.config)
    overrides = {k: v for k, v in (("algo", args.algo), ("seed", args.seed), ("episodes", args.episodes))
                 if v is not None}
    if overrides:
        cfg = RunConfig.from_dict({**cfg.to_dict(), **overrides})
    out = args.out or cfg.out
    result = train(cfg, out)
    last = result.records[-50:]
    wins = sum(r.outcome == "reached_goal" for r in last)
    log.info("trained %s for %d episodes in %.1f s; %d/%d goals in the last %d episodes",
             cfg.algo, cfg.episodes, result.train_wall_s, wins, len(last), len(last))
    print(json.dumps({"metrics": str(result.metrics_path), "checkpoint": str(result.checkpoints[-1]),
                      "world": str(result.world_path)}))


def cmd_eval(args):
    report = evaluate(args.checkpoint, args.world, args.episodes, args.seed)
    text = json.dumps(report.to_dict(), indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)


def cmd_compare(args):
    cfg = _config(args.config)
    if args.algos:
        cfg = RunConfig.from_dict({**cfg.to_dict(), "algo": args.algos.split(",")})
    seeds = _int_list(args.seeds, "seeds")
    path, rows = compare(cfg, seeds, args.out or cfg.out, args.eval_episodes)
    for r in rows:
        log.info("%s seed=%s success=%.1f%%", r["algo"], r["seed"], r["success_rate"])
    print(str(path))


def cmd_plot(args):
    paths = [p for p in args.metrics.split(",") if p]
    print(str(plot_rewards(paths, args.out, args.window, cumulative=args.cumulative)))


def cmd_gen_world(args):
    world = generate_world(args.width, args.height, args.rects, args.circles, args.seed)
    print(str(save_world(world, args.out)))


def _int_list(text, name):
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated integers, got {text!r}", field=name) from exc


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ackdrl", description="Train and compare DDPG, DQN and DDQN on Ackermann navigation.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("train", help="train one agent")
    t.add_argument("--algo", choices=["ddpg", "dqn", "ddqn"])
    t.add_argument("--config")
    t.add_argument("--seed", type=int)
    t.add_argument("--episodes", type=int)
    t.add_argument("--out")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="evaluate a checkpoint greedily")
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--world", required=True, help="world file, or gen:WIDTH,HEIGHT,RECTS,CIRCLES,SEED")
    e.add_argument("--episodes", type=int, default=100)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out", help="also write the report as JSON here")
    e.set_defaults(func=cmd_eval)

    c = sub.add_parser("compare", help="train and evaluate several algorithms over several seeds")
    c.add_argument("--config")
    c.add_argument("--seeds", default="0,1,2")
    c.add_argument("--algos", help="comma-separated; overrides the config's algo list")
    c.add_argument("--eval-episodes", type=int)
    c.add_argument("--out")
    c.set_defaults(func=cmd_compare)

    pl = sub.add_parser("plot", help="reward curves from metrics CSVs as SVG")
    pl.add_argument("--metrics", required=True, help="comma-separated metrics CSV paths")
    pl.add_argument("--window", type=int, default=20)
    pl.add_argument("--cumulative", action="store_true", help="plot the running sum across episodes")
    pl.add_argument("--out", required=True)
    pl.set_defaults(func=cmd_plot)

    g = sub.add_parser("gen-world", help="generate a random world file")
    g.add_argument("--width", type=float, default=20.0)
    g.add_argument("--height", type=float, default=20.0)
    g.add_argument("--rects", type=int, default=3)
    g.add_argument("--circles", type=int, default=5)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_world)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FormatError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (AckDRLError, RuntimeError, ValueError, ArithmeticError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

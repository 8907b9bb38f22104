"""Reward curves as standalone SVG (no plotting library needed)."""
from __future__ import annotations

import csv
import math
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from ..env import Outcome
from ..exceptions import ConfigError, FormatError
from .runner import METRICS_HEADER

_OUTCOMES = {o.value for o in Outcome} - {Outcome.RUNNING.value}
_COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

WIDTH, HEIGHT = 800, 480
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 40, 60


class MetricsParseError(FormatError):
    pass


def read_metrics(path) -> np.ndarray:
    """Cumulative rewards from a metrics CSV, validated row by row."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != METRICS_HEADER:
            raise MetricsParseError(f"{path}: expected header {','.join(METRICS_HEADER)}", line=1)
        rewards = []
        for row in reader:
            line = reader.line_num
            if len(row) != len(METRICS_HEADER):
                raise MetricsParseError(f"{path}: expected {len(METRICS_HEADER)} fields, got {len(row)}", line=line)
            try:
                episode, steps = int(row[0]), int(row[1])
                r, wall = float(row[2]), float(row[4])
            except ValueError as exc:
                raise MetricsParseError(f"{path}: {exc}", line=line) from exc
            if row[3] not in _OUTCOMES:
                raise MetricsParseError(f"{path}: unknown outcome {row[3]!r}", line=line)
            if episode != len(rewards) or steps < 0 or not math.isfinite(r) or wall < 0:
                raise MetricsParseError(f"{path}: inconsistent row", line=line)
            rewards.append(r)
    if not rewards:
        raise MetricsParseError(f"{path}: no data rows", line=2)
    return np.array(rewards)


def moving_average(values, window: int) -> np.ndarray:
    """Trailing mean over full windows only: ``len(values) - window + 1`` points."""
    values = np.asarray(values, dtype=float)
    if window < 1 or window > len(values):
        raise ConfigError(f"window must be in [1, {len(values)}]", field="window")
    c = np.concatenate([[0.0], np.cumsum(values)])
    return (c[window:] - c[:-window]) / window


def _points(xs, ys, sx, sy) -> str:
    return " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))


def _nice_ticks(lo, hi, n=5):
    span = hi - lo
    step = 10 ** math.floor(math.log10(span / n))
    for m in (1, 2, 5, 10):
        if span / (step * m) <= n:
            step *= m
            break
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step + 1e-9) + 1)]


def render_svg(series: dict, window: int, title: str = "Training rewards", ylabel: str = "cumulative reward") -> str:
    """``series`` maps a label to its per-episode values."""
    averaged = {k: moving_average(v, window) for k, v in series.items()}
    n_max = max(len(v) for v in series.values())
    all_y = np.concatenate([*series.values(), [0.0]])
    y_lo, y_hi = float(all_y.min()), float(all_y.max())
    if y_hi - y_lo < 1e-9:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad
    x_hi = max(n_max - 1, 1)
    plot_w, plot_h = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM
    sx = lambda x: LEFT + plot_w * x / x_hi
    sy = lambda y: TOP + plot_h * (y_hi - y) / (y_hi - y_lo)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>']
    # axes and ticks
    out.append(f'<g class="axes" stroke="black" stroke-width="1">'
               f'<line x1="{LEFT}" y1="{TOP + plot_h}" x2="{LEFT + plot_w}" y2="{TOP + plot_h}"/>'
               f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + plot_h}"/></g>')
    for t in _nice_ticks(y_lo, y_hi):
        out.append(f'<text x="{LEFT - 6}" y="{sy(t) + 4:.2f}" text-anchor="end">{t:g}</text>')
    for t in _nice_ticks(0, x_hi):
        out.append(f'<text x="{sx(t):.2f}" y="{TOP + plot_h + 16}" text-anchor="middle">{t:g}</text>')
    out.append(f'<text x="{LEFT + plot_w / 2}" y="{HEIGHT - 16}" text-anchor="middle">episode</text>')
    out.append(f'<text x="16" y="{TOP + plot_h / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {TOP + plot_h / 2})">{escape(ylabel)}</text>')
    out.append(f'<line class="zero" x1="{LEFT}" y1="{sy(0):.2f}" x2="{LEFT + plot_w}" y2="{sy(0):.2f}" '
               f'stroke="gray" stroke-dasharray="4 3"/>')
    for i, (label, values) in enumerate(series.items()):
        colour = _COLOURS[i % len(_COLOURS)]
        avg = averaged[label]
        out.append(f'<g class="series" data-label="{escape(label)}">')
        out.append(f'<polyline class="raw" fill="none" stroke="{colour}" stroke-opacity="0.3" stroke-width="1" '
                   f'points="{_points(range(len(values)), values, sx, sy)}"/>')
        out.append(f'<polyline class="avg" fill="none" stroke="{colour}" stroke-width="2.5" '
                   f'points="{_points(range(window - 1, len(values)), avg, sx, sy)}"/>')
        out.append(f'<text x="{LEFT + 10}" y="{TOP + 16 + 16 * i}" fill="{colour}">'
                   f'{escape(label)} ({window}-episode mean)</text>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot_rewards(metrics_paths, out_path, window: int = 20, cumulative: bool = False) -> Path:
    """Write an SVG with one raw and one moving-average polyline per metrics file.

    ``cumulative=True`` plots the running sum of episode rewards instead.
    """
    if isinstance(metrics_paths, (str, Path)):
        metrics_paths = [metrics_paths]
    series = {}
    for p in metrics_paths:
        values = read_metrics(p)
        label = Path(p).parent.name or Path(p).stem
        while label in series:
            label += "'"
        series[label] = np.cumsum(values) if cumulative else values
    ylabel = "running sum of episode rewards" if cumulative else "cumulative reward"
    out_path = Path(out_path)
    out_path.write_text(render_svg(series, window, ylabel=ylabel))
    return out_path

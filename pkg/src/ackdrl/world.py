"""Static obstacle worlds: procedural generation, collision tests and range sensing.

Houses are axis-aligned rectangles and trees are circles. Ray intersections
are computed analytically (ray-circle quadratic, slab method for rectangles
and for the map boundary).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .exceptions import ConfigError, FormatError, SamplingError, WorldGenerationError
from .vehicle import Pose


@dataclass(frozen=True)
class Circle:
    cx: float
    cy: float
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise ConfigError(f"circle radius must be > 0, got {self.r}", field="r")

    def distance(self, x: float, y: float) -> float:
        """Signed distance from a point to the circle boundary (negative inside)."""
        return math.hypot(x - self.cx, y - self.cy) - self.r


@dataclass(frozen=True)
class Rect:
    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise ConfigError(f"rect min corner must be below max corner: {self!r}", field="rect")

    def distance(self, x: float, y: float) -> float:
        """Distance from a point to the rectangle (0 inside or on the boundary)."""
        dx = max(self.xmin - x, 0.0, x - self.xmax)
        dy = max(self.ymin - y, 0.0, y - self.ymax)
        return math.hypot(dx, dy)


Obstacle = Union[Circle, Rect]
Point = tuple


@dataclass(frozen=True)
class WorldMap:
    width: float
    height: float
    obstacles: tuple = ()
    start: Pose = field(default_factory=lambda: Pose(2.0, 2.0, math.pi / 4))
    goal: Point = (18.0, 18.0)
    goal_radius: float = 0.5
    clearance: float = 0.3

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        object.__setattr__(self, "goal", (float(self.goal[0]), float(self.goal[1])))
        validate_world(self)

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)


def validate_world(world: WorldMap) -> None:
    """Raise ``ConfigError`` unless every WorldMap invariant holds."""
    if not (world.width > 0 and world.height > 0):
        raise ConfigError("map dimensions must be positive", field="width/height")
    if not world.goal_radius > 0:
        raise ConfigError("must be > 0", field="goal_radius")
    for i, ob in enumerate(world.obstacles):
        if isinstance(ob, Circle):
            inside = (ob.cx - ob.r >= 0 and ob.cx + ob.r <= world.width
                      and ob.cy - ob.r >= 0 and ob.cy + ob.r <= world.height)
        elif isinstance(ob, Rect):
            inside = ob.xmin >= 0 and ob.ymin >= 0 and ob.xmax <= world.width and ob.ymax <= world.height
        else:
            raise ConfigError(f"unknown obstacle type {type(ob).__name__}", field=f"obstacles[{i}]")
        if not inside:
            raise ConfigError("obstacle extends outside the map", field=f"obstacles[{i}]")
    if collides(world, (world.start.x, world.start.y), world.clearance):
        raise ConfigError("start pose is not collision-free", field="start")
    if collides(world, world.goal, world.clearance):
        raise ConfigError("goal is not collision-free", field="goal")
    if math.hypot(world.goal[0] - world.start.x, world.goal[1] - world.start.y) <= world.goal_radius:
        raise ConfigError("goal lies inside the goal radius of the start", field="goal")


def collides(world: WorldMap, position: Sequence[float], clearance: float) -> bool:
    """True if the disc of radius ``clearance`` at ``position`` touches an obstacle or leaves the map."""
    return _collides(world.obstacles, world.width, world.height, float(position[0]), float(position[1]), clearance)


def _collides(obstacles, width, height, x, y, clearance) -> bool:
    if x - clearance <= 0 or y - clearance <= 0 or x + clearance >= width or y + clearance >= height:
        return True
    return any(ob.distance(x, y) <= clearance for ob in obstacles)


def _world_arrays(world: WorldMap):
    # cached per instance; WorldMap is frozen so the arrays never go stale
    cached = world.__dict__.get("_arrays")
    if cached is None:
        circles = np.array([[o.cx, o.cy, o.r] for o in world.obstacles if isinstance(o, Circle)], dtype=float)
        rects = np.array([[o.xmin, o.ymin, o.xmax, o.ymax] for o in world.obstacles if isinstance(o, Rect)],
                         dtype=float)
        boxes = np.vstack([rects.reshape(-1, 4), [[0.0, 0.0, world.width, world.height]]])
        cached = (circles.reshape(-1, 3), boxes)
        object.__setattr__(world, "_arrays", cached)
    return cached


def raycast_many(world: WorldMap, origin: Sequence[float], bearings, max_range: float) -> np.ndarray:
    """Range along each bearing to the first obstacle or map edge, capped at ``max_range``."""
    ox, oy = float(origin[0]), float(origin[1])
    bearings = np.asarray(bearings, dtype=float).reshape(-1)
    dx = np.cos(bearings)[:, None]
    dy = np.sin(bearings)[:, None]
    circles, boxes = _world_arrays(world)
    best = np.full(bearings.shape[0], float(max_range))

    if circles.shape[0]:
        fx = ox - circles[:, 0]
        fy = oy - circles[:, 1]
        b = dx * fx + dy * fy
        c = fx * fx + fy * fy - circles[:, 2] ** 2
        disc = b * b - c
        hit = disc >= 0
        root = np.sqrt(np.where(hit, disc, 0.0))
        t1 = -b - root
        t2 = -b + root
        t = np.where(t1 > 0, t1, np.where(t2 > 0, t2, np.inf))
        t = np.where(hit, t, np.inf)
        best = np.minimum(best, t.min(axis=1))

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        inv_x = 1.0 / dx
        inv_y = 1.0 / dy
        tx1 = (boxes[:, 0] - ox) * inv_x
        tx2 = (boxes[:, 2] - ox) * inv_x
        ty1 = (boxes[:, 1] - oy) * inv_y
        ty2 = (boxes[:, 3] - oy) * inv_y
    # a zero direction component inside the slab gives (-inf, inf); outside gives matching infinities
    tx1 = np.where(np.isnan(tx1), -np.inf, tx1)
    tx2 = np.where(np.isnan(tx2), np.inf, tx2)
    ty1 = np.where(np.isnan(ty1), -np.inf, ty1)
    ty2 = np.where(np.isnan(ty2), np.inf, ty2)
    tmin = np.maximum(np.minimum(tx1, tx2), np.minimum(ty1, ty2))
    tmax = np.minimum(np.maximum(tx1, tx2), np.maximum(ty1, ty2))
    hit = tmax >= np.maximum(tmin, 0.0)
    t = np.where(tmin > 0, tmin, np.where(tmax > 0, tmax, np.inf))
    t = np.where(hit, t, np.inf)
    return np.minimum(best, t.min(axis=1))


def raycast(world: WorldMap, origin: Sequence[float], bearing: float, max_range: float) -> float:
    return float(raycast_many(world, origin, [bearing], max_range)[0])


@dataclass(frozen=True)
class LidarScan:
    ranges: np.ndarray
    n_beams: int
    fov: float
    max_range: float


def beam_bearings(theta: float, n_beams: int, fov: float) -> np.ndarray:
    if n_beams < 1:
        raise ConfigError("must be >= 1", field="n_beams")
    if n_beams == 1:
        return np.array([theta])
    return theta - fov / 2.0 + np.arange(n_beams) * (fov / (n_beams - 1))


def lidar_scan(world: WorldMap, pose: Pose, n_beams: int = 16, fov: float = math.pi,
               max_range: float = 10.0) -> LidarScan:
    ranges = raycast_many(world, (pose.x, pose.y), beam_bearings(pose.theta, n_beams, fov), max_range)
    return LidarScan(ranges=ranges, n_beams=n_beams, fov=fov, max_range=max_range)


def sample_goal(world: WorldMap, rng: np.random.Generator, min_clearance: float = 0.3,
                min_start_distance: float = 1.0, max_attempts: int = 10_000) -> Point:
    """Draw a free point uniformly by rejection sampling."""
    return _sample_free_point(world.obstacles, world.width, world.height, world.start, rng,
                              min_clearance, min_start_distance, max_attempts)


def _sample_free_point(obstacles, width, height, start, rng, min_clearance, min_start_distance, max_attempts):
    for _ in range(max_attempts):
        x = rng.uniform(0.0, width)
        y = rng.uniform(0.0, height)
        if math.hypot(x - start.x, y - start.y) < min_start_distance:
            continue
        if not _collides(obstacles, width, height, x, y, min_clearance):
            return (x, y)
    raise SamplingError(f"no free goal found after {max_attempts} attempts")


def _box_gap(a, b) -> float:
    dx = max(b[0] - a[2], a[0] - b[2], 0.0)
    dy = max(b[1] - a[3], a[1] - b[3], 0.0)
    return math.hypot(dx, dy)


def _gap(a: Obstacle, b: Obstacle) -> float:
    """Free distance between two obstacles (0 when they overlap)."""
    if isinstance(a, Circle) and isinstance(b, Circle):
        return max(math.hypot(a.cx - b.cx, a.cy - b.cy) - a.r - b.r, 0.0)
    if isinstance(a, Rect) and isinstance(b, Rect):
        return _box_gap((a.xmin, a.ymin, a.xmax, a.ymax), (b.xmin, b.ymin, b.xmax, b.ymax))
    circle, rect = (a, b) if isinstance(a, Circle) else (b, a)
    return max(rect.distance(circle.cx, circle.cy) - circle.r, 0.0)


def default_start(width: float, height: float) -> Pose:
    return Pose(0.1 * width, 0.1 * height, math.atan2(height, width))


def generate_world(width: float, height: float, n_rects: int, n_circles: int, seed: int, *,
                   start: Pose | None = None, goal_radius: float = 0.5, clearance: float = 0.3,
                   spacing: float | None = None, start_clearance: float | None = None,
                   max_attempts: int = 2000) -> WorldMap:
    """Procedurally place ``n_rects`` houses and ``n_circles`` trees.

    Obstacle sizes scale with the smaller map side (houses 7.5-15 %, tree
    radii 1.5-4 %). Obstacles are rejection-sampled so that neighbours,
    walls and the start keep at least ``spacing`` metres of free corridor.
    """
    if not (width > 0 and height > 0):
        raise ConfigError("map dimensions must be positive", field="width/height")
    if n_rects < 0 or n_circles < 0:
        raise ConfigError("obstacle counts must be >= 0", field="n_rects/n_circles")
    rng = np.random.default_rng(seed)
    scale = min(width, height) / 20.0
    spacing = 1.0 * scale if spacing is None else spacing
    start_clearance = 2.0 * scale if start_clearance is None else start_clearance
    start = default_start(width, height) if start is None else start

    placed: list = []
    kinds = ["rect"] * n_rects + ["circle"] * n_circles
    for kind in kinds:
        for _ in range(max_attempts):
            if kind == "rect":
                w = rng.uniform(1.5, 3.0) * scale
                h = rng.uniform(1.5, 3.0) * scale
                x0 = rng.uniform(0.0, width - w)
                y0 = rng.uniform(0.0, height - h)
                cand = Rect(x0, y0, x0 + w, y0 + h)
                wall_gap = min(cand.xmin, cand.ymin, width - cand.xmax, height - cand.ymax)
            else:
                r = rng.uniform(0.3, 0.8) * scale
                cx = rng.uniform(r, width - r)
                cy = rng.uniform(r, height - r)
                cand = Circle(cx, cy, r)
                wall_gap = min(cx - r, cy - r, width - cx - r, height - cy - r)
            if wall_gap < spacing:
                continue
            if cand.distance(start.x, start.y) < start_clearance:
                continue
            if any(_gap(cand, other) < spacing for other in placed):
                continue
            placed.append(cand)
            break
        else:
            raise WorldGenerationError(
                f"could not place {kind} #{len(placed)} after {max_attempts} attempts "
                f"in a {width}x{height} map")
    try:
        goal = _sample_free_point(placed, width, height, start, rng, clearance, 2 * goal_radius, 10_000)
    except SamplingError as exc:
        raise WorldGenerationError(str(exc)) from exc
    return WorldMap(width, height, tuple(placed), start, goal, goal_radius, clearance)


# --- world file (JSON) ---------------------------------------------------------

def world_to_dict(world: WorldMap) -> dict:
    obstacles = []
    for ob in world.obstacles:
        if isinstance(ob, Circle):
            obstacles.append({"type": "circle", "cx": ob.cx, "cy": ob.cy, "r": ob.r})
        else:
            obstacles.append({"type": "rect", "xmin": ob.xmin, "ymin": ob.ymin, "xmax": ob.xmax, "ymax": ob.ymax})
    return {
        "width": world.width,
        "height": world.height,
        "start": {"x": world.start.x, "y": world.start.y, "theta": world.start.theta},
        "goal": {"x": world.goal[0], "y": world.goal[1]},
        "goal_radius": world.goal_radius,
        "obstacles": obstacles,
    }


_OBSTACLE_KEYS = {"circle": ("cx", "cy", "r"), "rect": ("xmin", "ymin", "xmax", "ymax")}
_WORLD_KEYS = {"width", "height", "start", "goal", "goal_radius", "obstacles"}


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise FormatError(f"expected a finite number, got {value!r}", section=where)
    return float(value)


def world_from_dict(data: dict, clearance: float = 0.3) -> WorldMap:
    if not isinstance(data, dict):
        raise FormatError("world file must hold an object", section="root")
    missing = _WORLD_KEYS - data.keys()
    unknown = data.keys() - _WORLD_KEYS
    if missing:
        raise FormatError(f"missing keys {sorted(missing)}", section="root")
    if unknown:
        raise FormatError(f"unknown keys {sorted(unknown)}", section="root")
    try:
        start = data["start"]
        goal = data["goal"]
        pose = Pose(_number(start["x"], "start"), _number(start["y"], "start"), _number(start["theta"], "start"))
        goal_pt = (_number(goal["x"], "goal"), _number(goal["y"], "goal"))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed start/goal: {exc}", section="start/goal") from exc
    obstacles = []
    if not isinstance(data["obstacles"], list):
        raise FormatError("obstacles must be a list", section="obstacles")
    for i, item in enumerate(data["obstacles"]):
        where = f"obstacles[{i}]"
        kind = item.get("type") if isinstance(item, dict) else None
        if kind not in _OBSTACLE_KEYS:
            raise FormatError(f"unknown obstacle type {kind!r}", section=where)
        keys = _OBSTACLE_KEYS[kind]
        if set(item) != {"type", *keys}:
            raise FormatError(f"{kind} needs exactly keys {keys}", section=where)
        values = [_number(item[k], where) for k in keys]
        try:
            obstacles.append(Circle(*values) if kind == "circle" else Rect(*values))
        except ConfigError as exc:
            raise FormatError(str(exc), section=where) from exc
    try:
        return WorldMap(_number(data["width"], "width"), _number(data["height"], "height"), tuple(obstacles),
                        pose, goal_pt, _number(data["goal_radius"], "goal_radius"), clearance)
    except ConfigError as exc:
        raise FormatError(f"world violates invariants: {exc}", section=exc.field) from exc


def save_world(world: WorldMap, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(world_to_dict(world), indent=2) + "\n")
    return path


def load_world(path, clearance: float = 0.3) -> WorldMap:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc.msg}", line=exc.lineno, offset=exc.pos) from exc
    return world_from_dict(data, clearance)

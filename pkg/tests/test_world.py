import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from ackdrl.exceptions import ConfigError, FormatError, SamplingError
from ackdrl.vehicle import Pose
from ackdrl.world import (Circle, Rect, WorldMap, collides, generate_world, lidar_scan, load_world, raycast,
                          sample_goal, save_world, world_to_dict)


def empty(width=20.0, height=20.0, start=Pose(10, 10, 0), goal=(3.0, 3.0), obstacles=()):
    return WorldMap(width, height, obstacles, start, goal)


def march(world, origin, bearing, max_range, step=1e-3):
    """Oracle: walk along the ray until collides() trips, then bisect."""
    dx, dy = math.cos(bearing), math.sin(bearing)
    hit = lambda t: collides(world, (origin[0] + t * dx, origin[1] + t * dy), 0.0)
    t = 0.0
    while t < max_range:
        nxt = min(t + step, max_range)
        if hit(nxt):
            lo, hi = t, nxt
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                lo, hi = (lo, mid) if hit(mid) else (mid, hi)
            return hi
        t = nxt
    return max_range


class TestGenerate:
    def test_desk_scale_layout(self):
        w = generate_world(150, 150, 3, 8, seed=7)
        kinds = [type(o) for o in w.obstacles]
        assert kinds.count(Rect) == 3 and kinds.count(Circle) == 8
        assert (w.width, w.height) == (150, 150)

    def test_empty(self):
        assert generate_world(20, 20, 0, 0, seed=3).obstacles == ()

    def test_deterministic(self):
        a = generate_world(20, 20, 3, 5, seed=1)
        b = generate_world(20, 20, 3, 5, seed=1)
        assert json.dumps(world_to_dict(a)) == json.dumps(world_to_dict(b))

    def test_seeds_differ(self):
        assert generate_world(20, 20, 3, 5, seed=1).obstacles != generate_world(20, 20, 3, 5, seed=2).obstacles

    @pytest.mark.parametrize("seed", range(10))
    def test_invariants(self, seed):
        w = generate_world(20, 20, 3, 5, seed=seed)
        assert not collides(w, (w.start.x, w.start.y), 0.3)
        assert not collides(w, w.goal, 0.3)
        assert math.dist((w.start.x, w.start.y), w.goal) > w.goal_radius

    def test_crowded_map_fails(self):
        from ackdrl.exceptions import WorldGenerationError
        with pytest.raises(WorldGenerationError):
            generate_world(20, 20, 10, 0, seed=0, spacing=8.0, max_attempts=50)

    def test_bad_counts(self):
        with pytest.raises(ConfigError):
            generate_world(20, 20, -1, 0, seed=0)


class TestCollides:
    def test_open_space(self):
        assert not collides(empty(), (10, 10), 0.3)

    def test_out_of_bounds(self):
        assert collides(empty(), (-1, 10), 0.3)

    def test_circle_boundary(self):
        w = empty(obstacles=(Circle(5, 5, 1),))
        assert not collides(w, (5, 6.5), 0.3)
        assert collides(w, (5, 6.2), 0.3)

    def test_rect(self):
        w = empty(obstacles=(Rect(4, 4, 6, 6),))
        assert collides(w, (5, 5), 0.0)
        assert collides(w, (6.2, 5), 0.3)
        assert not collides(w, (6.4, 5), 0.3)


class TestRaycast:
    def test_capped(self):
        assert raycast(empty(), (10, 10), 0.0, 5.0) == 5.0

    def test_east_wall(self):
        assert raycast(empty(), (10, 10), 0.0, 50.0) == pytest.approx(10.0)

    def test_circle(self):
        w = empty(obstacles=(Circle(15, 10, 2),), goal=(3, 3))
        assert raycast(w, (10, 10), 0.0, 50.0) == pytest.approx(3.0)

    def test_rect_faces(self):
        w = empty(obstacles=(Rect(12, 8, 14, 12),))
        assert raycast(w, (10, 10), 0.0, 50.0) == pytest.approx(2.0)
        assert raycast(w, (10, 10), math.pi, 50.0) == pytest.approx(10.0)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0, 2 * math.pi), st.integers(0, 20))
    def test_matches_ray_march_oracle(self, bearing, seed):
        w = generate_world(20, 20, 3, 5, seed=seed)
        origin = (w.start.x, w.start.y)
        assert raycast(w, origin, bearing, 10.0) == pytest.approx(march(w, origin, bearing, 10.0), abs=1e-6)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.5, 19.5), st.floats(0.5, 19.5), st.floats(-math.pi, math.pi), st.integers(0, 5))
    def test_positive_from_free_origin(self, x, y, bearing, seed):
        w = generate_world(20, 20, 3, 5, seed=seed)
        if collides(w, (x, y), 0.0):
            return
        r = raycast(w, (x, y), bearing, 10.0)
        assert 0.0 < r <= 10.0


class TestLidar:
    def test_nothing_in_range(self):
        w = WorldMap(1000, 1000, (), Pose(500, 500, 0.3), (10, 10))
        scan = lidar_scan(w, w.start, n_beams=16, fov=math.pi, max_range=10.0)
        assert np.all(scan.ranges == 10.0) and scan.ranges.shape == (16,)

    def test_center_beam_hits_wall(self):
        w = empty(start=Pose(16, 10, 0))
        scan = lidar_scan(w, w.start, n_beams=3, fov=math.pi, max_range=10.0)
        assert scan.ranges[1] == pytest.approx(4.0)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(-math.pi, math.pi), st.floats(-math.pi, math.pi), st.integers(0, 10))
    def test_rotation_equivariance(self, phi, theta, seed):
        rng = np.random.default_rng(seed)
        centre = np.array([500.0, 500.0])
        circles = []
        for _ in range(6):
            off = rng.uniform(-6, 6, 2)
            if np.linalg.norm(off) > 2.5:
                circles.append((off, rng.uniform(0.3, 1.0)))
        rot = np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])
        w1 = WorldMap(1000, 1000, tuple(Circle(*(centre + o), r) for o, r in circles), Pose(500, 500, theta), (10, 10))
        w2 = WorldMap(1000, 1000, tuple(Circle(*(centre + rot @ o), r) for o, r in circles),
                      Pose(500, 500, theta + phi), (10, 10))
        a = lidar_scan(w1, w1.start, 16, math.pi, 10.0).ranges
        b = lidar_scan(w2, w2.start, 16, math.pi, 10.0).ranges
        np.testing.assert_allclose(a, b, atol=1e-9)

    def test_quarter_turn_with_rects(self):
        # square map rotated by 90 degrees about its centre maps rects onto rects
        rects = [Rect(12, 9, 14, 11), Rect(5, 13, 7, 16)]
        def rotate(r):
            corners = [(10 - (y - 10), 10 + (x - 10)) for x, y in ((r.xmin, r.ymin), (r.xmax, r.ymax))]
            xs, ys = zip(*corners)
            return Rect(min(xs), min(ys), max(xs), max(ys))
        w1 = WorldMap(20, 20, tuple(rects), Pose(10, 10, 0.2), (3, 3))
        w2 = WorldMap(20, 20, tuple(rotate(r) for r in rects), Pose(10, 10, 0.2 + math.pi / 2), (17, 3))
        np.testing.assert_allclose(lidar_scan(w1, w1.start, 16, math.pi, 10.0).ranges,
                                   lidar_scan(w2, w2.start, 16, math.pi, 10.0).ranges, atol=1e-9)


class TestSampleGoal:
    def test_open_map(self):
        w = empty()
        rng = np.random.default_rng(0)
        for _ in range(200):
            g = sample_goal(w, rng, 0.3, 2.0)
            assert not collides(w, g, 0.3)
            assert math.dist(g, (10, 10)) >= 2.0

    def test_blocked(self):
        w = WorldMap(4, 4, (Rect(0.0, 0.0, 4.0, 1.2), Rect(0.0, 2.8, 4.0, 4.0)), Pose(2, 2, 0), (3.0, 2.0))
        with pytest.raises(SamplingError):
            sample_goal(w, np.random.default_rng(0), 0.9, 0.0, max_attempts=500)

    def test_deterministic(self):
        w = generate_world(20, 20, 3, 5, seed=4)
        a = [sample_goal(w, np.random.default_rng(9)) for _ in range(3)]
        b = [sample_goal(w, np.random.default_rng(9)) for _ in range(3)]
        assert a == b

    def test_uniform_over_free_area(self):
        w = empty()
        clearance, min_start = 0.3, 2.0
        rng = np.random.default_rng(2024)
        pts = np.array([sample_goal(w, rng, clearance, min_start) for _ in range(1000)])
        observed = np.histogram2d(pts[:, 0], pts[:, 1], bins=4, range=[[0, 20], [0, 20]])[0].ravel()
        # expected counts from free-area quadrature on a fine grid
        g = (np.arange(800) + 0.5) * (20 / 800)
        xx, yy = np.meshgrid(g, g, indexing="ij")
        free = ((xx > clearance) & (xx < 20 - clearance) & (yy > clearance) & (yy < 20 - clearance)
                & (np.hypot(xx - 10, yy - 10) >= min_start))
        area = free.reshape(4, 200, 4, 200).sum(axis=(1, 3)).ravel().astype(float)
        expected = area / area.sum() * len(pts)
        assert stats.chisquare(observed, expected).pvalue > 0.01


class TestWorldFile:
    def test_round_trip(self, tmp_path):
        w = generate_world(20, 20, 3, 5, seed=11)
        path = tmp_path / "w.json"
        save_world(w, path)
        assert load_world(path) == w

    def test_schema_fields(self, tmp_path):
        w = generate_world(20, 20, 1, 1, seed=2)
        data = world_to_dict(w)
        assert set(data) == {"width", "height", "start", "goal", "goal_radius", "obstacles"}
        assert {o["type"] for o in data["obstacles"]} == {"rect", "circle"}

    @pytest.mark.parametrize("mutate", [
        lambda d: d["obstacles"].append({"type": "circle", "cx": 19.9, "cy": 10, "r": 1.0}),
        lambda d: d["obstacles"].append({"type": "circle", "cx": d["start"]["x"], "cy": d["start"]["y"], "r": 0.5}),
        lambda d: d.update(goal={"x": d["start"]["x"], "y": d["start"]["y"] + 0.1}),
        lambda d: d["obstacles"].append({"type": "rect", "xmin": 3, "ymin": 3, "xmax": 2, "ymax": 4}),
        lambda d: d["obstacles"].append({"type": "hexagon"}),
        lambda d: d.update(extra=1),
        lambda d: d.pop("goal_radius"),
    ])
    def test_rejects_invalid(self, tmp_path, mutate):
        data = world_to_dict(empty(start=Pose(2, 2, 0), goal=(15, 15)))
        mutate(data)
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data))
        with pytest.raises(FormatError):
            load_world(path)

    def test_rejects_bad_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{\n  \"width\": 20,\n  oops\n}")
        with pytest.raises(FormatError) as err:
            load_world(path)
        assert err.value.line == 3

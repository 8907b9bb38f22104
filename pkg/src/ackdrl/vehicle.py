"""Ackermann (single-track bicycle) kinematics.

State is ``(x, y, theta)``; controls are forward speed ``v`` and the effective
front steering angle ``delta``. The heading rate is ``v / L * tan(delta)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .exceptions import ConfigError, InvalidActionError


def wrap_angle(angle: float) -> float:
    """Wrap an angle to the half-open interval (-pi, pi]."""
    wrapped = math.pi - math.fmod(math.pi - angle, 2.0 * math.pi)
    if wrapped > math.pi:
        wrapped -= 2.0 * math.pi
    elif wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    theta: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.theta)):
            raise ValueError(f"non-finite pose {self!r}")
        object.__setattr__(self, "theta", wrap_angle(self.theta))


@dataclass(frozen=True)
class ControlAction:
    v: float
    delta: float


@dataclass(frozen=True)
class VehicleParams:
    wheelbase_L: float = 0.5
    v_max: float = 1.0
    delta_max: float = 0.5
    footprint_radius: float = 0.3
    dt: float = 0.1

    def __post_init__(self):
        for name in ("wheelbase_L", "v_max", "delta_max", "footprint_radius", "dt"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"must be a positive finite number, got {value!r}", field=name)
        if self.delta_max >= math.pi / 2:
            raise ConfigError("must be below pi/2 so tan(delta) stays finite", field="delta_max")


def clamp_action(raw: ControlAction, params: VehicleParams) -> ControlAction:
    """Saturate speed to [0, v_max] and steering to [-delta_max, delta_max]."""
    if not (math.isfinite(raw.v) and math.isfinite(raw.delta)):
        raise InvalidActionError(f"non-finite action {raw!r}")
    v = min(max(raw.v, 0.0), params.v_max)
    delta = min(max(raw.delta, -params.delta_max), params.delta_max)
    if v == raw.v and delta == raw.delta:
        return raw
    return ControlAction(v, delta)


def _derivatives(theta: float, v: float, turn_rate: float):
    return v * math.cos(theta), v * math.sin(theta), turn_rate


def step_euler(pose: Pose, action: ControlAction, params: VehicleParams, dt: float) -> Pose:
    """One forward-Euler step; the position update uses the heading at the start of the step."""
    turn_rate = action.v / params.wheelbase_L * math.tan(action.delta)
    return Pose(
        pose.x + action.v * math.cos(pose.theta) * dt,
        pose.y + action.v * math.sin(pose.theta) * dt,
        pose.theta + turn_rate * dt,
    )


def step_rk4(pose: Pose, action: ControlAction, params: VehicleParams, dt: float) -> Pose:
    """Classical fourth-order Runge-Kutta step with the control held constant."""
    v = action.v
    w = v / params.wheelbase_L * math.tan(action.delta)
    th = pose.theta
    k1 = _derivatives(th, v, w)
    k2 = _derivatives(th + 0.5 * dt * k1[2], v, w)
    k3 = _derivatives(th + 0.5 * dt * k2[2], v, w)
    k4 = _derivatives(th + dt * k3[2], v, w)
    dx = dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    dy = dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    return Pose(pose.x + dx, pose.y + dy, th + w * dt)


def arc_closed_form(pose: Pose, action: ControlAction, params: VehicleParams, t: float) -> Pose:
    """Exact pose after driving ``t`` seconds with a constant control.

    Straight line when ``delta == 0`` (or ``v == 0``), otherwise a circular arc
    of radius ``L / tan(delta)``.
    """
    v = action.v
    w = v / params.wheelbase_L * math.tan(action.delta)
    if w == 0.0:
        return Pose(pose.x + v * math.cos(pose.theta) * t, pose.y + v * math.sin(pose.theta) * t, pose.theta)
    radius = v / w
    theta_end = pose.theta + w * t
    return Pose(
        pose.x + radius * (math.sin(theta_end) - math.sin(pose.theta)),
        pose.y - radius * (math.cos(theta_end) - math.cos(pose.theta)),
        theta_end,
    )

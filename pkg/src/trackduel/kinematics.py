"""Discrete vehicle model and its one-step inverse.

Per step of length ``tau_s`` the body advances ``f_r(v, delta)`` along the
CURRENT heading, then the heading turns by ``arcsin(tau_s*v*sin(delta)/b)``
and the speed integrates the acceleration:

    x'     = x + f_r(v, delta) * cos(theta)
    y'     = y + f_r(v, delta) * sin(theta)
    theta' = theta + arcsin(tau_s * v * sin(delta) / b)
    v'     = v + tau_s * alpha

    f_r(v, delta) = b + tau_s*v*cos(delta) - sqrt(b^2 - (tau_s*v*sin(delta))^2)

The model is only defined while ``tau_s*v*|sin(delta)| <= b``. Note that
the step displacement is along the heading BEFORE the turn: steering
changes the next heading and (slightly) the step length, never the step
direction. ``f_r`` exceeds ``tau_s*v`` whenever ``tau_s*v > b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import DomainViolation, Unreachable
from .track import wrap_angle

# planner-side steering cap; the model itself is bounded only by its domain
STEER_CAP = 0.6

_POS_TOL = 0.05   # inverse_step landing tolerance, m
_VEL_TOL = 0.1    # inverse_step speed tolerance, m/s


@dataclass(frozen=True)
class VehicleState:
    """Cartesian pose plus longitudinal speed at one timestep."""

    px: float
    py: float
    theta: float
    v: float


@dataclass(frozen=True)
class ControlInput:
    accel: float
    steer: float


@dataclass(frozen=True)
class KinematicsConfig:
    tau_s: float
    wheelbase: float
    v_max: float
    steer_cap: float = STEER_CAP

    def __post_init__(self) -> None:
        if self.tau_s <= 0 or self.wheelbase <= 0 or self.v_max <= 0:
            raise ValueError("tau_s, wheelbase and v_max must be positive")


def f_r(cfg: KinematicsConfig, v: float, steer: float) -> float:
    """Step displacement length. Exactly tau_s*v at steer == 0."""
    s = cfg.tau_s * v
    front = s * math.sin(steer)
    under = cfg.wheelbase * cfg.wheelbase - front * front
    if under < 0.0:
        raise DomainViolation(
            f"tau_s*v*|sin(steer)| = {abs(front):.6f} exceeds wheelbase {cfg.wheelbase}"
        )
    # ordered so the delta=0 case reduces to s exactly (b - sqrt(b^2) == 0)
    return s * math.cos(steer) + (cfg.wheelbase - math.sqrt(under))


def step_with_flags(
    cfg: KinematicsConfig, s: VehicleState, u: ControlInput
) -> tuple[VehicleState, bool]:
    """Advance one step; the flag reports clamping of v into [0, v_max]."""
    front = cfg.tau_s * s.v * math.sin(u.steer)
    if abs(front) > cfg.wheelbase:
        raise DomainViolation(
            f"tau_s*v*|sin(steer)| = {abs(front):.6f} exceeds wheelbase {cfg.wheelbase}"
        )
    dist = f_r(cfg, s.v, u.steer)
    v_next = s.v + cfg.tau_s * u.accel
    clamped = v_next < 0.0 or v_next > cfg.v_max
    v_next = min(max(v_next, 0.0), cfg.v_max)
    return (
        VehicleState(
            px=s.px + dist * math.cos(s.theta),
            py=s.py + dist * math.sin(s.theta),
            theta=wrap_angle(s.theta + math.asin(front / cfg.wheelbase)),
            v=v_next,
        ),
        clamped,
    )


def step(cfg: KinematicsConfig, s: VehicleState, u: ControlInput) -> VehicleState:
    """One exact model step; v clamped to [0, v_max]."""
    return step_with_flags(cfg, s, u)[0]


def max_steer(cfg: KinematicsConfig, v: float) -> float:
    """Largest usable |steer| at speed v: the cap intersected with the domain.

    Backed off the exact arcsin boundary by 1e-9 rad so that re-evaluating
    sin at the returned angle cannot overshoot the domain by rounding.
    """
    s = cfg.tau_s * v
    if s <= cfg.wheelbase:
        return cfg.steer_cap
    return min(cfg.steer_cap, math.asin(cfg.wheelbase / s) - 1e-9)


def steer_for_heading_change(cfg: KinematicsConfig, v: float, dtheta: float) -> float:
    """Steering that turns the heading by ``dtheta`` after one step at speed v.

    Inverts theta' - theta = arcsin(tau_s*v*sin(steer)/b); the result is
    clamped to the usable steering range, so large requests saturate.
    """
    if v <= 1e-12:
        return 0.0
    want = cfg.wheelbase * math.sin(dtheta) / (cfg.tau_s * v)
    want = min(max(want, -1.0), 1.0)
    raw = math.asin(want)
    cap = max_steer(cfg, v)
    return min(max(raw, -cap), cap)


def speed_for_segment(cfg: KinematicsConfig, length: float, dtheta: float) -> float:
    """Speed from which one step covers ``length`` while turning ``dtheta``.

    Closed form from f_r with tau_s*v*sin(steer) = b*sin(dtheta):
    tau_s*v = sqrt((L - b*(1-cos dtheta))^2 + (b*sin dtheta)^2).
    """
    b = cfg.wheelbase
    along = length - b * (1.0 - math.cos(dtheta))
    if along < 0.0:
        along = 0.0
    return math.sqrt(along * along + (b * math.sin(dtheta)) ** 2) / cfg.tau_s


def inverse_step(
    cfg: KinematicsConfig,
    s: VehicleState,
    target: tuple[float, float],
    target_v: float,
) -> ControlInput:
    """Recover a control whose step lands on ``target`` at ``target_v``.

    The landing point always lies on the ray along the current heading, so
    only targets (numerically) on that ray are exactly reachable: |steer|
    is found by bisection on the monotone step-length map f_r, and the
    steering sign points toward the target's cross-track side (nonnegative
    for on-ray targets, where the sign is degenerate). Raises Unreachable
    when the best landing misses by more than 0.05 m or the speed by more
    than 0.1 m/s.
    """
    if target_v < -_VEL_TOL or target_v > cfg.v_max + _VEL_TOL:
        raise Unreachable(f"target speed {target_v} outside [0, v_max]")
    dx, dy = target[0] - s.px, target[1] - s.py
    dist = math.hypot(dx, dy)
    if dist > (cfg.v_max + 1.0) * cfg.tau_s + cfg.wheelbase:
        raise Unreachable(f"target {dist:.3f} m away exceeds one-step reach")
    ux, uy = math.cos(s.theta), math.sin(s.theta)
    along = dx * ux + dy * uy
    cross = -dx * uy + dy * ux
    if along < -_POS_TOL:
        raise Unreachable("target lies behind the vehicle")

    cap = max_steer(cfg, s.v)
    lo, hi = 0.0, cap
    f_lo, f_hi = f_r(cfg, s.v, lo), f_r(cfg, s.v, hi)
    # f_r is monotone in |steer| (direction set by sign of tau_s*v - b)
    if (f_lo - along) * (f_hi - along) > 0.0:
        mag = lo if abs(f_lo - along) <= abs(f_hi - along) else hi
    else:
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if (f_r(cfg, s.v, mid) - along) * (f_lo - along) > 0.0:
                lo, f_lo = mid, f_r(cfg, s.v, mid)
            else:
                hi = mid
        mag = 0.5 * (lo + hi)
    landing_err = math.hypot(f_r(cfg, s.v, mag) - along, cross)
    if landing_err > _POS_TOL:
        raise Unreachable(f"best landing misses target by {landing_err:.4f} m")

    steer = mag if cross >= 0.0 else -mag
    accel = (min(max(target_v, 0.0), cfg.v_max) - s.v) / cfg.tau_s
    return ControlInput(accel=accel, steer=steer)


def aligned_state(px: float, py: float, heading: float, v: float) -> VehicleState:
    """Convenience constructor with heading normalization."""
    return VehicleState(px=px, py=py, theta=wrap_angle(heading), v=v)


def with_speed(s: VehicleState, v: float) -> VehicleState:
    return replace(s, v=v)

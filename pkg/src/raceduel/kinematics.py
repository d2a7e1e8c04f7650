"""Differential-drive robot state and fixed-timestep integration."""

from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi

ACCEL_MODES = ("finite_difference", "zero")


def wrap_heading(theta: float) -> float:
    """Wrap an angle into the half-open interval (-pi, pi]."""
    if not math.isfinite(theta):
        raise ValueError(f"heading must be finite, got {theta!r}")
    return -((math.pi - theta) % TWO_PI - math.pi)


@dataclass(frozen=True)
class KinodynamicState:
    """Planar pose plus velocity/acceleration components of one robot.

    x is longitudinal, y lateral, theta the heading in (-pi, pi].
    The acceleration components only seed trajectory boundary conditions.
    """

    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0
    vx: float = 0.0
    vy: float = 0.0
    ax: float = 0.0
    ay: float = 0.0

    @property
    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)

    def is_finite(self) -> bool:
        return all(
            math.isfinite(v)
            for v in (self.x, self.y, self.theta, self.vx, self.vy, self.ax, self.ay)
        )


@dataclass(frozen=True)
class ControlInput:
    """Linear velocity (m/s, >= 0) and angular velocity (rad/s)."""

    v: float
    omega: float

    def is_finite(self) -> bool:
        return math.isfinite(self.v) and math.isfinite(self.omega)

    def clamped(self, v_max: float, omega_max: float) -> "ControlInput":
        return ControlInput(
            v=min(max(self.v, 0.0), v_max),
            omega=min(max(self.omega, -omega_max), omega_max),
        )


def step(
    state: KinodynamicState,
    control: ControlInput,
    dt: float,
    accel_mode: str = "finite_difference",
) -> KinodynamicState:
    """Advance one explicit forward-Euler step of the unicycle kinematics.

    Position integrates at the old heading; the velocity components are
    re-expressed at the new (wrapped) heading.  Acceleration components are
    either finite-differenced from the previous velocity sample or zeroed,
    depending on ``accel_mode``.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if accel_mode not in ACCEL_MODES:
        raise ValueError(f"unknown accel_mode {accel_mode!r}")
    if not state.is_finite():
        raise ValueError("state has non-finite components")
    if not control.is_finite():
        raise ValueError("control has non-finite components")

    x = state.x + control.v * math.cos(state.theta) * dt
    y = state.y + control.v * math.sin(state.theta) * dt
    theta = wrap_heading(state.theta + control.omega * dt)
    vx = control.v * math.cos(theta)
    vy = control.v * math.sin(theta)
    if accel_mode == "finite_difference":
        ax = (vx - state.vx) / dt
        ay = (vy - state.vy) / dt
    else:
        ax = 0.0
        ay = 0.0
    return KinodynamicState(x=x, y=y, theta=theta, vx=vx, vy=vy, ax=ax, ay=ay)

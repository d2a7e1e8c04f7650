"""Quintic candidate trajectories: construction, sampling, and blending."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from .kinematics import KinodynamicState

SAMPLE_MATCH_TOL = 1e-9


@dataclass(frozen=True)
class PlanningParams:
    """Grid and horizon settings for one robot's candidate library."""

    a_set_values: Tuple[float, ...] = (-0.05, 0.0, 0.05)
    y_targets: Tuple[float, ...] = (1.0, 1.5, 2.0)
    y_track: Tuple[float, float] = (0.65, 2.35)
    horizon: float = 5.0
    sample_time: float = 0.2
    v_max: float = 0.6

    def __post_init__(self) -> None:
        if self.horizon <= 0 or self.sample_time <= 0 or self.v_max <= 0:
            raise ValueError("horizon, sample_time and v_max must be positive")
        lo, hi = self.y_track
        if not all(lo <= y <= hi for y in self.y_targets):
            raise ValueError("all lateral targets must lie within the track range")

    @property
    def n_samples(self) -> int:
        return round(self.horizon / self.sample_time) + 1


@dataclass(frozen=True)
class QuinticCoefficients:
    """Longitudinal (a0..a5) and lateral (b0..b5) quintic coefficients."""

    a: Tuple[float, float, float, float, float, float]
    b: Tuple[float, float, float, float, float, float]


@dataclass(frozen=True)
class CandidateMeta:
    """Generating pair of a candidate, plus whether track clamping touched it."""

    a_set: float
    y_target: float
    clamped: bool = False


@dataclass(frozen=True)
class Trajectory:
    """A planned or blended path sampled on a uniform time grid."""

    times: np.ndarray  # (N,)
    points: np.ndarray  # (N, 2) of (x, y)
    coeffs: Optional[QuinticCoefficients] = None
    meta: Optional[CandidateMeta] = None

    def __len__(self) -> int:
        return len(self.times)

    def as_triples(self) -> list:
        """Serialize as [t, x, y] triples, fixed field order."""
        return [
            [float(t), float(p[0]), float(p[1])]
            for t, p in zip(self.times, self.points)
        ]

    def same_grid(self, other: "Trajectory") -> bool:
        return self.times.shape == other.times.shape and bool(
            np.array_equal(self.times, other.times)
        )


@dataclass(frozen=True)
class CandidateSet:
    """The nine-member candidate library of one robot for one decision cycle.

    Index order is acceleration-major, lateral-target-minor, both ascending.
    ``xs``/``ys`` hold the stacked samples for vectorized reward evaluation.
    """

    trajectories: Tuple[Trajectory, ...]
    xs: np.ndarray  # (9, N)
    ys: np.ndarray  # (9, N)
    times: np.ndarray  # (N,)

    def __len__(self) -> int:
        return len(self.trajectories)

    def __getitem__(self, idx: int) -> Trajectory:
        return self.trajectories[idx]


def terminal_state(
    initial: KinodynamicState,
    a_set: float,
    y_target: float,
    params: PlanningParams,
) -> KinodynamicState:
    """Terminal boundary state for one (acceleration, lateral target) pair.

    The terminal longitudinal speed follows the constant-acceleration profile
    clamped into [0, v_max]; the travelled distance uses the clamped profile
    (accelerate until the bound binds, then cruise).  Lateral terminal speed
    and both terminal accelerations are zero.
    """
    lo, hi = params.y_track
    if not lo <= y_target <= hi:
        raise ValueError(f"lateral target {y_target} outside track range {params.y_track}")
    if not initial.is_finite():
        raise ValueError("initial state has non-finite components")
    v0 = initial.vx
    if not -1e-12 <= v0 <= params.v_max + 1e-9:
        raise ValueError(f"initial longitudinal speed {v0} outside [0, {params.v_max}]")
    v0 = min(max(v0, 0.0), params.v_max)

    t_total = params.horizon
    v_end_free = v0 + a_set * t_total
    v_end = min(max(v_end_free, 0.0), params.v_max)
    if a_set != 0.0 and v_end != v_end_free:
        # The speed bound binds before the horizon ends: ramp then cruise.
        t_ramp = (v_end - v0) / a_set
        dist = v0 * t_ramp + 0.5 * a_set * t_ramp * t_ramp + v_end * (t_total - t_ramp)
    else:
        dist = v0 * t_total + 0.5 * a_set * t_total * t_total
    return KinodynamicState(
        x=initial.x + dist,
        y=y_target,
        theta=0.0,
        vx=v_end,
        vy=0.0,
        ax=0.0,
        ay=0.0,
    )


def _axis_quintic(
    p0: float, v0: float, acc0: float, p1: float, v1: float, acc1: float, t_total: float
) -> Tuple[float, float, float, float, float, float]:
    c0 = p0
    c1 = v0
    c2 = acc0 / 2.0
    t2 = t_total * t_total
    t3 = t2 * t_total
    t4 = t3 * t_total
    t5 = t4 * t_total
    m = np.array(
        [
            [t3, t4, t5],
            [3.0 * t2, 4.0 * t3, 5.0 * t4],
            [6.0 * t_total, 12.0 * t2, 20.0 * t3],
        ]
    )
    rhs = np.array(
        [
            p1 - c0 - c1 * t_total - c2 * t2,
            v1 - c1 - 2.0 * c2 * t_total,
            acc1 - 2.0 * c2,
        ]
    )
    c3, c4, c5 = np.linalg.solve(m, rhs)
    return (c0, c1, c2, float(c3), float(c4), float(c5))


def fit_quintic(
    initial: KinodynamicState, terminal: KinodynamicState, t_total: float
) -> QuinticCoefficients:
    """Fit the unique per-axis quintic through both boundary states."""
    if t_total <= 0:
        raise ValueError(f"horizon must be positive, got {t_total!r}")
    if not (initial.is_finite() and terminal.is_finite()):
        raise ValueError("boundary states must be finite")
    a = _axis_quintic(initial.x, initial.vx, initial.ax, terminal.x, terminal.vx, terminal.ax, t_total)
    b = _axis_quintic(initial.y, initial.vy, initial.ay, terminal.y, terminal.vy, terminal.ay, t_total)
    return QuinticCoefficients(a=a, b=b)


@lru_cache(maxsize=16)
def _time_grid(horizon: float, sample_time: float) -> Tuple[np.ndarray, np.ndarray]:
    n = round(horizon / sample_time) + 1
    times = np.arange(n) * sample_time
    powers = np.vander(times, 6, increasing=True).T  # (6, N)
    times.setflags(write=False)
    powers.setflags(write=False)
    return times, powers


def sample_quintic(coeffs: QuinticCoefficients, params: PlanningParams) -> Trajectory:
    """Evaluate a quintic pair on the uniform sample grid (no track clamping)."""
    times, powers = _time_grid(params.horizon, params.sample_time)
    xs = np.asarray(coeffs.a) @ powers
    ys = np.asarray(coeffs.b) @ powers
    return Trajectory(times=times, points=np.column_stack([xs, ys]), coeffs=coeffs)


def build_candidates(initial: KinodynamicState, params: PlanningParams) -> CandidateSet:
    """Build the 3x3 candidate library from the current state.

    The x-axis quintic depends only on the acceleration setting and the
    y-axis quintic only on the lateral target, so three fits per axis cover
    all nine combinations.  Sampled lateral positions are clamped into the
    track range; a binding clamp is flagged in the candidate metadata.
    """
    lo, hi = params.y_track
    if not lo - 1e-9 <= initial.y <= hi + 1e-9:
        raise ValueError(f"initial lateral position {initial.y} outside track range")

    times, powers = _time_grid(params.horizon, params.sample_time)
    x_rows = []
    a_coeffs = []
    for a_set in params.a_set_values:
        term = terminal_state(initial, a_set, params.y_targets[0], params)
        coeffs = _axis_quintic(initial.x, initial.vx, initial.ax, term.x, term.vx, 0.0, params.horizon)
        a_coeffs.append(coeffs)
        x_rows.append(np.asarray(coeffs) @ powers)
    y_rows = []
    b_coeffs = []
    for y_target in params.y_targets:
        coeffs = _axis_quintic(initial.y, initial.vy, initial.ay, y_target, 0.0, 0.0, params.horizon)
        b_coeffs.append(coeffs)
        y_rows.append(np.asarray(coeffs) @ powers)

    trajectories = []
    xs = np.empty((len(params.a_set_values) * len(params.y_targets), len(times)))
    ys = np.empty_like(xs)
    idx = 0
    for ia, a_set in enumerate(params.a_set_values):
        for iy, y_target in enumerate(params.y_targets):
            y_clamped = np.clip(y_rows[iy], lo, hi)
            clamped = bool(np.any(np.abs(y_clamped - y_rows[iy]) > 1e-12))
            xs[idx] = x_rows[ia]
            ys[idx] = y_clamped
            trajectories.append(
                Trajectory(
                    times=times,
                    points=np.column_stack([x_rows[ia], y_clamped]),
                    coeffs=QuinticCoefficients(a=a_coeffs[ia], b=b_coeffs[iy]),
                    meta=CandidateMeta(a_set=a_set, y_target=y_target, clamped=clamped),
                )
            )
            idx += 1
    xs.setflags(write=False)
    ys.setflags(write=False)
    return CandidateSet(trajectories=tuple(trajectories), xs=xs, ys=ys, times=times)


def hold_position(x: float, y: float, params: PlanningParams) -> Trajectory:
    """Trajectory of a robot frozen at its current position for the full grid."""
    times, _ = _time_grid(params.horizon, params.sample_time)
    points = np.tile((float(x), float(y)), (len(times), 1))
    return Trajectory(times=times, points=points)


def blend(best: Trajectory, failsafe: Trajectory, p: float) -> Trajectory:
    """Pointwise convex combination (1-p)*best + p*failsafe of the samples."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"blend weight must be in [0, 1], got {p!r}")
    if not best.same_grid(failsafe):
        raise ValueError("trajectories must share an identical sample grid")
    points = (1.0 - p) * best.points + p * failsafe.points
    return Trajectory(times=best.times, points=points)

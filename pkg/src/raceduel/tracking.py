"""Receding-horizon tracking of a sampled trajectory.

The controller minimizes a quadratic tracking cost over a short horizon
subject to the unicycle dynamics and box input bounds.  It iterates
linearizations about the best rollout so far, solving each quadratic
subproblem in closed form and projecting the inputs into their bounds;
candidate iterates are only accepted when the true nonlinear rollout cost
decreases, so the returned sequence never costs more than simply replaying
the clamped reference inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .kinematics import ControlInput, KinodynamicState, wrap_heading

_ACCEPT_TOL = 1e-12
_REGULARIZATION = 1e-10


@dataclass(frozen=True)
class TrackerConfig:
    horizon: int = 25
    dt: float = 0.2
    state_weights: Tuple[float, float, float] = (10.0, 10.0, 1.0)
    input_weights: Tuple[float, float] = (1.0, 1.0)
    v_max: float = 0.6
    omega_max: float = 2.0
    max_iterations: int = 2

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if min(self.state_weights) < 0 or min(self.input_weights) < 0:
            raise ValueError("weights must be non-negative")
        if self.v_max <= 0 or self.omega_max <= 0:
            raise ValueError("input bounds must be positive")


@dataclass(frozen=True)
class SolveInfo:
    fallback: bool
    cost: float
    reference_cost: float
    iterations: int


def _wrap_vec(angles: np.ndarray) -> np.ndarray:
    return (angles + math.pi) % (2.0 * math.pi) - math.pi


def reference_from_trajectory(
    traj, now_index: int, config: TrackerConfig
) -> np.ndarray:
    """Per-step references (x, y, theta, v, omega) over the horizon.

    Entry k targets the trajectory sample at ``now_index + k + 1``; headings
    come from finite differences of consecutive samples, speeds from segment
    lengths, and turn rates from heading differences, all clamped to the
    input bounds.  Indices past the final sample hold that sample (zero
    speed).
    """
    pts = traj.points
    n = len(pts)
    if n == 0:
        raise ValueError("trajectory has no samples")
    h = config.horizon
    dt = config.dt
    refs = np.empty((h, 5))
    prev_theta = None
    if now_index >= 1:
        dx0 = pts[min(now_index, n - 1), 0] - pts[min(now_index - 1, n - 1), 0]
        dy0 = pts[min(now_index, n - 1), 1] - pts[min(now_index - 1, n - 1), 1]
        if math.hypot(dx0, dy0) > 1e-12:
            prev_theta = math.atan2(dy0, dx0)
    for k in range(h):
        ia = min(now_index + k, n - 1)
        ib = min(now_index + k + 1, n - 1)
        dx = pts[ib, 0] - pts[ia, 0]
        dy = pts[ib, 1] - pts[ia, 1]
        dist = math.hypot(dx, dy)
        if dist > 1e-12:
            theta = math.atan2(dy, dx)
        elif prev_theta is not None:
            theta = prev_theta
        else:
            theta = 0.0
        v = min(dist / dt, config.v_max)
        if prev_theta is None:
            omega = 0.0
        else:
            omega = wrap_heading(theta - prev_theta) / dt
            omega = min(max(omega, -config.omega_max), config.omega_max)
        refs[k] = (pts[ib, 0], pts[ib, 1], theta, v, omega)
        prev_theta = theta
    return refs


def _rollout(x: float, y: float, th: float, inputs: np.ndarray, dt: float) -> np.ndarray:
    states = np.empty((inputs.shape[0], 3))
    for k in range(inputs.shape[0]):
        v = inputs[k, 0]
        x += v * math.cos(th) * dt
        y += v * math.sin(th) * dt
        th += inputs[k, 1] * dt
        states[k, 0] = x
        states[k, 1] = y
        states[k, 2] = th
    return states


def _sequence_cost(states: np.ndarray, inputs: np.ndarray, refs: np.ndarray, config: TrackerConfig) -> float:
    qx, qy, qth = config.state_weights
    rv, rw = config.input_weights
    ex = states[:, 0] - refs[:, 0]
    ey = states[:, 1] - refs[:, 1]
    eth = _wrap_vec(states[:, 2] - refs[:, 2])
    ev = inputs[:, 0] - refs[:, 3]
    ew = inputs[:, 1] - refs[:, 4]
    return float(
        qx * ex @ ex + qy * ey @ ey + qth * eth @ eth + rv * ev @ ev + rw * ew @ ew
    )


def _clip_inputs(inputs: np.ndarray, config: TrackerConfig) -> np.ndarray:
    out = np.empty_like(inputs)
    np.clip(inputs[:, 0], 0.0, config.v_max, out=out[:, 0])
    np.clip(inputs[:, 1], -config.omega_max, config.omega_max, out=out[:, 1])
    return out


def _box_qp_step(
    hess: np.ndarray,
    grad: np.ndarray,
    nominal: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
) -> np.ndarray:
    """Newton step for 0.5 d'Hd + g'd with the iterate kept inside the box.

    Coordinates whose unconstrained step leaves the box are frozen at their
    bound and the remaining system re-solved; a plain clipped step would zero
    out exactly the components that matter when a bound is active.
    """
    delta = np.linalg.solve(hess, -grad)
    active = np.zeros(delta.shape[0], dtype=bool)
    for _ in range(3):
        candidate = nominal + delta
        violating = (candidate < lower - 1e-12) | (candidate > upper + 1e-12)
        violating &= ~active
        if not violating.any():
            break
        active |= violating
        delta[active] = np.clip(nominal[active] + delta[active], lower[active], upper[active]) - nominal[active]
        free = ~active
        if not free.any():
            break
        rhs = -(grad[free] + hess[np.ix_(free, active)] @ delta[active])
        delta[free] = np.linalg.solve(hess[np.ix_(free, free)], rhs)
    return delta


def solve(
    state: KinodynamicState,
    refs: np.ndarray,
    config: TrackerConfig,
    warm_start: Optional[np.ndarray] = None,
) -> Tuple[ControlInput, SolveInfo, np.ndarray]:
    """First input of a bound-respecting sequence minimizing the tracking cost.

    Returns the input, solve diagnostics, and the full input sequence (for
    warm starting the next call).  When no iterate improves on the clamped
    reference inputs the reference input is returned and flagged.
    """
    if refs.shape[0] != config.horizon:
        raise ValueError("reference length must equal the horizon")
    dt = config.dt
    qx, qy, qth = config.state_weights
    rv, rw = config.input_weights
    h = config.horizon
    x0, y0, th0 = state.x, state.y, state.theta

    u_ref = _clip_inputs(refs[:, 3:5].copy(), config)
    ref_states = _rollout(x0, y0, th0, u_ref, dt)
    ref_cost = _sequence_cost(ref_states, u_ref, refs, config)

    best_u = u_ref
    best_states = ref_states
    best_cost = ref_cost
    if warm_start is not None and warm_start.shape == (h, 2):
        u_warm = _clip_inputs(warm_start, config)
        warm_states = _rollout(x0, y0, th0, u_warm, dt)
        warm_cost = _sequence_cost(warm_states, u_warm, refs, config)
        if warm_cost < best_cost - _ACCEPT_TOL:
            best_u, best_states, best_cost = u_warm, warm_states, warm_cost

    q_diag = np.tile((qx, qy, qth), h)
    r_diag = np.tile((rv, rw), h)
    lower = np.tile((0.0, -config.omega_max), h)
    upper = np.tile((config.v_max, config.omega_max), h)
    iterations = 0
    if ref_cost > 1e-14:
        for _ in range(config.max_iterations):
            iterations += 1
            thetas = np.concatenate(([th0], best_states[:-1, 2]))
            residual = np.empty(3 * h)
            residual[0::3] = best_states[:, 0] - refs[:, 0]
            residual[1::3] = best_states[:, 1] - refs[:, 1]
            residual[2::3] = _wrap_vec(best_states[:, 2] - refs[:, 2])

            mapping = np.zeros((3 * h, 2 * h))
            cur = np.zeros((3, 2 * h))
            for k in range(h):
                v_k = best_u[k, 0]
                c = math.cos(thetas[k])
                s = math.sin(thetas[k])
                # cur <- A_k @ cur: A_k is identity plus the heading coupling.
                cur[0] += (-v_k * s * dt) * cur[2]
                cur[1] += (v_k * c * dt) * cur[2]
                cur[0, 2 * k] += c * dt
                cur[1, 2 * k] += s * dt
                cur[2, 2 * k + 1] += dt
                mapping[3 * k : 3 * k + 3] = cur

            weighted = mapping * q_diag[:, None]
            hess = weighted.T @ mapping
            hess[np.arange(2 * h), np.arange(2 * h)] += r_diag + _REGULARIZATION
            grad = weighted.T @ residual + r_diag * (best_u - u_ref).ravel()
            try:
                delta = _box_qp_step(hess, grad, best_u.ravel(), lower, upper).reshape(h, 2)
            except np.linalg.LinAlgError:
                break

            accepted = False
            scale = 1.0
            for _ in range(3):
                u_try = _clip_inputs(best_u + scale * delta, config)
                states_try = _rollout(x0, y0, th0, u_try, dt)
                cost_try = _sequence_cost(states_try, u_try, refs, config)
                if cost_try < best_cost - _ACCEPT_TOL:
                    best_u, best_states, best_cost = u_try, states_try, cost_try
                    accepted = True
                    break
                scale *= 0.5
            if not accepted:
                break

    fallback = best_u is u_ref and ref_cost > 1e-9
    control = ControlInput(v=float(best_u[0, 0]), omega=float(best_u[0, 1]))
    return control, SolveInfo(fallback, best_cost, ref_cost, iterations), best_u


class Tracker:
    """Per-robot tracker that warm-starts each solve from the previous one."""

    def __init__(self, config: TrackerConfig):
        self.config = config
        self._last: Optional[np.ndarray] = None

    def reset(self) -> None:
        self._last = None

    def control(self, state: KinodynamicState, refs: np.ndarray) -> Tuple[ControlInput, SolveInfo]:
        warm = None
        if self._last is not None:
            warm = np.vstack([self._last[1:], self._last[-1:]])
        control, info, sequence = solve(state, refs, self.config, warm)
        self._last = sequence
        return control, info

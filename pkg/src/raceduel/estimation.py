"""Opponent reasoning-depth estimation and adaptive trajectory mixing.

Beliefs over the opponent's depth are bumped toward whichever cached
prediction best matches the recently observed motion, then renormalized.
A scalar "level-change potential" tracks how wary the ego should be of a
sudden depth switch: it collapses to zero when the estimated depth changes
and creeps back up while the estimate holds.  The tracked trajectory is the
convex blend of the best response and a fail-safe response weighted by that
potential.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np

from .levelk import LevelPolicy
from .trajectory import Trajectory, blend


class InsufficientHistoryError(ValueError):
    """Raised when fewer observed samples exist than the matching window."""


@dataclass(frozen=True)
class EstimatorParams:
    belief_increment: float = 0.5
    potential_limit: float = 0.2
    potential_hold_step: float = 0.05
    window: int = 5


@dataclass(frozen=True)
class BeliefState:
    """Beliefs over opponent depths 0-2, the level-change potential, and the
    previous cycle's beliefs and cached per-depth predictions."""

    beliefs: Tuple[float, float, float]
    potential: float
    prev_beliefs: Tuple[float, float, float]
    cached_predictions: Optional[Tuple[Trajectory, Trajectory, Trajectory]]
    params: EstimatorParams


def init_beliefs(params: EstimatorParams = EstimatorParams()) -> BeliefState:
    """Even beliefs across the three depths; potential starts at its limit."""
    even = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
    return BeliefState(
        beliefs=even,
        potential=params.potential_limit,
        prev_beliefs=even,
        cached_predictions=None,
        params=params,
    )


def estimated_level(beliefs: Sequence[float]) -> int:
    """Argmax depth; ties go to the lowest depth."""
    return int(np.argmax(np.asarray(beliefs)))


def least_likely_level(beliefs: Sequence[float]) -> int:
    """Argmin depth; ties go to the lowest depth."""
    return int(np.argmin(np.asarray(beliefs)))


def with_predictions(
    state: BeliefState, predictions: Tuple[Trajectory, Trajectory, Trajectory]
) -> BeliefState:
    return replace(state, cached_predictions=predictions)


def update_beliefs(
    state: BeliefState,
    observed: np.ndarray,
    cached_predictions: Optional[Tuple[Trajectory, Trajectory, Trajectory]],
) -> BeliefState:
    """Bump the belief of the depth whose cached prediction best matches the
    observed positions, then renormalize.

    ``observed`` holds the last ``window`` opponent positions, one per sample
    step since the previous decision; they align with prediction samples
    1..window (sample 0 of a prediction is the decision instant itself).
    """
    window = state.params.window
    obs = np.asarray(observed, dtype=float)
    if cached_predictions is None or len(obs) < window:
        raise InsufficientHistoryError(
            f"need {window} observed samples and cached predictions"
        )
    obs = obs[-window:]
    distances = []
    for pred in cached_predictions:
        pts = pred.points[1 : window + 1]
        distances.append(float(np.sum(np.hypot(*(obs - pts).T))))
    k_star = int(np.argmin(distances))
    raw = list(state.beliefs)
    raw[k_star] += state.params.belief_increment
    total = sum(raw)
    new_beliefs = tuple(b / total for b in raw)
    return replace(state, beliefs=new_beliefs, prev_beliefs=state.beliefs)


def update_potential(state: BeliefState) -> BeliefState:
    """Collapse the potential on an estimated depth change, otherwise grow it
    by the hold step; clamp into [0, limit]."""
    lim = state.params.potential_limit
    if estimated_level(state.beliefs) != estimated_level(state.prev_beliefs):
        delta = -lim
    else:
        delta = state.params.potential_hold_step
    potential = min(max(state.potential + delta, 0.0), lim)
    return replace(state, potential=potential)


def select_mixed_trajectory(state: BeliefState, ego_policy: LevelPolicy) -> Trajectory:
    """Blend the best response (to the most likely depth) with the fail-safe
    response (to the least likely depth) using the potential as weight."""
    k_star = estimated_level(state.beliefs)
    k_fail = least_likely_level(state.beliefs)
    best = ego_policy.ego_trajectory(k_star + 1)
    failsafe = ego_policy.ego_trajectory(k_fail + 1)
    return blend(best, failsafe, state.potential)

"""Duel rewards: per-pair components, the chaser's holistic reward, and the
zero-sum payoff matrix over both candidate libraries.

All stored rewards are the chasing opponent's; the leading ego robot's reward
is the exact entrywise negation and is never stored separately.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .kinematics import KinodynamicState
from .trajectory import CandidateSet, PlanningParams, Trajectory, hold_position

ROBOT_TRACK_WIDTH = 0.3


@dataclass(frozen=True)
class RewardWeights:
    """Weights for the progress, relative-distance and blocking terms."""

    progress: float = 1.0
    relative: float = 0.5
    blocking: float = 1.0

    def __post_init__(self) -> None:
        if min(self.progress, self.relative, self.blocking) < 0:
            raise ValueError("reward weights must be non-negative")

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.progress, self.relative, self.blocking)


@dataclass(frozen=True)
class RewardMatrix:
    """9x9 payoff table: entry (i, j) is the opponent's holistic reward when
    the ego plays candidate i and the opponent candidate j."""

    values: np.ndarray  # (9, 9)

    @property
    def ego_values(self) -> np.ndarray:
        return -self.values


@dataclass(frozen=True)
class FrozenRewardVectors:
    """Per-candidate rewards with the other robot held at its current pose.

    ``ego_candidates[i]``: opponent reward when the ego plays candidate i
    against a frozen opponent.  ``opp_candidates[j]``: opponent reward when
    the opponent plays candidate j against a frozen ego.
    """

    ego_candidates: np.ndarray  # (9,)
    opp_candidates: np.ndarray  # (9,)


def _check_grids(ego_traj: Trajectory, opp_traj: Trajectory) -> None:
    if not ego_traj.same_grid(opp_traj):
        raise ValueError("trajectories must share an identical sample grid")


def reward_components(
    ego_traj: Trajectory,
    opp_traj: Trajectory,
    track_width: float = ROBOT_TRACK_WIDTH,
) -> Tuple[float, float, float]:
    """Progress, relative-distance, and capped lateral-gap sums over the grid."""
    _check_grids(ego_traj, opp_traj)
    opp_x = opp_traj.points[:, 0]
    opp_y = opp_traj.points[:, 1]
    ego_x = ego_traj.points[:, 0]
    ego_y = ego_traj.points[:, 1]
    r_pos = float(np.sum(opp_x - opp_x[0]))
    r_rel = float(np.sum(opp_x - ego_x))
    r_block = float(np.sum(np.minimum(np.abs(opp_y - ego_y), track_width)))
    return (r_pos, r_rel, r_block)


def holistic_reward(
    ego_traj: Trajectory,
    opp_traj: Trajectory,
    weights: RewardWeights = RewardWeights(),
    track_width: float = ROBOT_TRACK_WIDTH,
) -> float:
    """The opponent's weighted reward for one trajectory pair."""
    r_pos, r_rel, r_block = reward_components(ego_traj, opp_traj, track_width)
    return weights.progress * r_pos + weights.relative * r_rel + weights.blocking * r_block


def ego_reward(
    ego_traj: Trajectory,
    opp_traj: Trajectory,
    weights: RewardWeights = RewardWeights(),
    track_width: float = ROBOT_TRACK_WIDTH,
) -> float:
    """The ego robot's zero-sum reward: the negated opponent reward."""
    return -holistic_reward(ego_traj, opp_traj, weights, track_width)


def build_matrix(
    ego_set: CandidateSet,
    opp_set: CandidateSet,
    weights: RewardWeights = RewardWeights(),
    track_width: float = ROBOT_TRACK_WIDTH,
) -> RewardMatrix:
    """Vectorized 9x9 payoff table over both candidate libraries."""
    if ego_set.times.shape != opp_set.times.shape or not np.array_equal(
        ego_set.times, opp_set.times
    ):
        raise ValueError("candidate sets must share an identical sample grid")
    r_pos = np.sum(opp_set.xs - opp_set.xs[:, :1], axis=1)  # (9,)
    r_rel = np.sum(opp_set.xs, axis=1)[None, :] - np.sum(ego_set.xs, axis=1)[:, None]
    gap = np.abs(opp_set.ys[None, :, :] - ego_set.ys[:, None, :])
    r_block = np.sum(np.minimum(gap, track_width), axis=2)
    values = (
        weights.progress * r_pos[None, :]
        + weights.relative * r_rel
        + weights.blocking * r_block
    )
    return RewardMatrix(values=values)


def frozen_reward_vectors(
    ego_set: CandidateSet,
    opp_set: CandidateSet,
    ego_state: KinodynamicState,
    opp_state: KinodynamicState,
    params: PlanningParams,
    weights: RewardWeights = RewardWeights(),
    track_width: float = ROBOT_TRACK_WIDTH,
) -> FrozenRewardVectors:
    """Reward vectors for the naive evaluations, each against a robot frozen
    at its current pose for the whole grid."""
    frozen_ego = hold_position(ego_state.x, ego_state.y, params)
    frozen_opp = hold_position(opp_state.x, opp_state.y, params)
    ego_vec = np.array(
        [holistic_reward(traj, frozen_opp, weights, track_width) for traj in ego_set.trajectories]
    )
    opp_vec = np.array(
        [holistic_reward(frozen_ego, traj, weights, track_width) for traj in opp_set.trajectories]
    )
    return FrozenRewardVectors(ego_candidates=ego_vec, opp_candidates=opp_vec)


def matrix_to_csv(matrix: RewardMatrix, ego_set: CandidateSet, opp_set: CandidateSet) -> str:
    """Debug dump: 9x9 CSV with candidate metadata headers."""
    buf = io.StringIO()
    header = ["ego\\opp"] + [
        f"a={t.meta.a_set}/y={t.meta.y_target}" if t.meta else f"c{j}"
        for j, t in enumerate(opp_set.trajectories)
    ]
    buf.write(",".join(header) + "\n")
    for i, traj in enumerate(ego_set.trajectories):
        label = f"a={traj.meta.a_set}/y={traj.meta.y_target}" if traj.meta else f"c{i}"
        row = [label] + [f"{matrix.values[i, j]:.6f}" for j in range(matrix.values.shape[1])]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()

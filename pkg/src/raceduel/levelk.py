"""Best-response recursion over the payoff matrix.

The opponent is evaluated at reasoning depths 0..2 and the ego robot at
depths 1..3, each depth best-responding to the other robot one depth below.
Depth 0 responds to the other robot frozen at its current pose.  The ego's
depth-0 choice exists only to seed the opponent's depth-1 response.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from .reward import FrozenRewardVectors, RewardMatrix
from .trajectory import CandidateSet, Trajectory

OPPONENT_LEVELS = (0, 1, 2)
EGO_LEVELS = (1, 2, 3)


@dataclass
class PolicyTable:
    """Mutable scratch table of best-candidate indices filled level by level."""

    ego: Dict[int, int] = field(default_factory=dict)
    opp: Dict[int, int] = field(default_factory=dict)


@dataclass(frozen=True)
class LevelPolicy:
    """Per-level best candidate indices plus their trajectories."""

    ego_indices: Tuple[int, int, int, int]  # levels 0..3 (0 internal)
    opp_indices: Tuple[int, int, int]  # levels 0..2
    ego_set: CandidateSet
    opp_set: CandidateSet

    def ego_index(self, level: int) -> int:
        return self.ego_indices[level]

    def opp_index(self, level: int) -> int:
        return self.opp_indices[level]

    def ego_trajectory(self, level: int) -> Trajectory:
        return self.ego_set[self.ego_indices[level]]

    def opp_trajectory(self, level: int) -> Trajectory:
        return self.opp_set[self.opp_indices[level]]

    def opp_predictions(self) -> Tuple[Trajectory, Trajectory, Trajectory]:
        return tuple(self.opp_trajectory(k) for k in OPPONENT_LEVELS)


def level0_best(rewards: np.ndarray, role: str) -> int:
    """Naive best candidate against the other robot frozen in place.

    ``rewards`` holds the opponent's reward per candidate; the ego maximizes
    the negation.  Ties break to the lowest index.
    """
    vec = np.asarray(rewards, dtype=float)
    if not np.all(np.isfinite(vec)):
        raise ValueError("reward vector has non-finite entries")
    if role == "opponent":
        return int(np.argmax(vec))
    if role == "ego":
        return int(np.argmax(-vec))
    raise ValueError(f"unknown role {role!r}")


def levelk_best(matrix: RewardMatrix, k: int, role: str, policy_below: PolicyTable) -> int:
    """Best response at depth k >= 1 against the other role's depth k-1 choice."""
    if k < 1:
        raise ValueError(f"depth must be >= 1, got {k}")
    values = matrix.values
    if not np.all(np.isfinite(values)):
        raise ValueError("payoff matrix has non-finite entries")
    if role == "ego":
        if k - 1 not in policy_below.opp:
            raise ValueError(f"missing opponent depth-{k - 1} entry")
        j = policy_below.opp[k - 1]
        return int(np.argmax(-values[:, j]))
    if role == "opponent":
        if k - 1 not in policy_below.ego:
            raise ValueError(f"missing ego depth-{k - 1} entry")
        i = policy_below.ego[k - 1]
        return int(np.argmax(values[i, :]))
    raise ValueError(f"unknown role {role!r}")


def compute_all_levels(
    ego_set: CandidateSet,
    opp_set: CandidateSet,
    matrix: RewardMatrix,
    frozen: FrozenRewardVectors,
) -> LevelPolicy:
    """Fill opponent depths 0-2 and ego depths 1-3 by the alternating recursion."""
    table = PolicyTable()
    table.ego[0] = level0_best(frozen.ego_candidates, "ego")
    table.opp[0] = level0_best(frozen.opp_candidates, "opponent")
    for k in (1, 2):
        table.ego[k] = levelk_best(matrix, k, "ego", table)
        table.opp[k] = levelk_best(matrix, k, "opponent", table)
    table.ego[3] = levelk_best(matrix, 3, "ego", table)
    return LevelPolicy(
        ego_indices=(table.ego[0], table.ego[1], table.ego[2], table.ego[3]),
        opp_indices=(table.opp[0], table.opp[1], table.opp[2]),
        ego_set=ego_set,
        opp_set=opp_set,
    )

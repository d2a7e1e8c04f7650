import numpy as np
import pytest

from raceduel.kinematics import KinodynamicState
from raceduel.levelk import (
    PolicyTable,
    compute_all_levels,
    level0_best,
    levelk_best,
)
from raceduel.reward import FrozenRewardVectors, RewardMatrix, build_matrix, frozen_reward_vectors
from raceduel.trajectory import PlanningParams, build_candidates


def brute_force_levels(values, ego0_vec, opp0_vec):
    """Independent best-response recursion using plain Python loops.

    ``values`` holds the opponent's reward; the ego maximizes the negation.
    Ties break to the lowest index via max() over reversed-index scan.
    """
    def argmax(scores):
        best_idx, best = 0, scores[0]
        for i, s in enumerate(scores):
            if s > best:
                best_idx, best = i, s
        return best_idx

    n = len(values)
    ego = {0: argmax([-v for v in ego0_vec])}
    opp = {0: argmax(list(opp0_vec))}
    for k in (1, 2):
        ego[k] = argmax([-values[i][opp[k - 1]] for i in range(n)])
        opp[k] = argmax([values[ego[k - 1]][j] for j in range(n)])
    ego[3] = argmax([-values[i][opp[2]] for i in range(n)])
    return ego, opp


class TestLevel0:
    def test_tie_break_lowest(self):
        assert level0_best(np.zeros(9), "opponent") == 0
        assert level0_best(np.zeros(9), "ego") == 0

    def test_argmax_for_opponent(self):
        vec = np.arange(9, dtype=float)
        assert level0_best(vec, "opponent") == 8
        assert level0_best(vec, "ego") == 0

    def test_matches_exhaustive_scan(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            vec = rng.normal(size=9)
            best = max(range(9), key=lambda i: (vec[i], -i))
            assert level0_best(vec, "opponent") == best
            worst = max(range(9), key=lambda i: (-vec[i], -i))
            assert level0_best(vec, "ego") == worst

    def test_rejects_non_finite(self):
        vec = np.zeros(9)
        vec[3] = np.nan
        with pytest.raises(ValueError):
            level0_best(vec, "opponent")

    def test_rejects_unknown_role(self):
        with pytest.raises(ValueError):
            level0_best(np.zeros(9), "referee")


class TestLevelK:
    def test_dominant_column(self):
        values = np.zeros((9, 9))
        values[:, 4] = 10.0
        table = PolicyTable(ego={0: 2})
        matrix = RewardMatrix(values=values)
        assert levelk_best(matrix, 1, "opponent", table) == 4

    def test_two_by_two_hand_trace(self):
        # opponent reward [[1, 3], [2, 0]] with ego depth-0 playing row 0:
        # the opponent's depth-1 reply is column 1; the ego's depth-2 reply
        # to that is row 1 (it loses 0 instead of 3)
        values = np.array([[1.0, 3.0], [2.0, 0.0]])
        matrix = RewardMatrix(values=values)
        table = PolicyTable(ego={0: 0})
        opp1 = levelk_best(matrix, 1, "opponent", table)
        assert opp1 == 1
        table.opp[1] = opp1
        assert levelk_best(matrix, 2, "ego", table) == 1

    def test_all_zero_ties(self):
        matrix = RewardMatrix(values=np.zeros((9, 9)))
        table = PolicyTable(ego={0: 0}, opp={0: 0})
        assert levelk_best(matrix, 1, "ego", table) == 0
        assert levelk_best(matrix, 1, "opponent", table) == 0

    def test_missing_lower_level(self):
        matrix = RewardMatrix(values=np.zeros((9, 9)))
        with pytest.raises(ValueError):
            levelk_best(matrix, 2, "ego", PolicyTable())


def _policy_inputs(seed):
    rng = np.random.default_rng(seed)
    values = rng.normal(size=(9, 9))
    ego0 = rng.normal(size=9)
    opp0 = rng.normal(size=9)
    return values, ego0, opp0


def _compute(values, ego0, opp0):
    ego_set = build_candidates(KinodynamicState(x=0, y=1.5, vx=0.5), PlanningParams())
    matrix = RewardMatrix(values=np.asarray(values, dtype=float))
    frozen = FrozenRewardVectors(
        ego_candidates=np.asarray(ego0, dtype=float),
        opp_candidates=np.asarray(opp0, dtype=float),
    )
    return compute_all_levels(ego_set, ego_set, matrix, frozen)


class TestComputeAllLevels:
    def test_degenerate_all_equal(self):
        policy = _compute(np.zeros((9, 9)), np.zeros(9), np.zeros(9))
        assert policy.ego_indices == (0, 0, 0, 0)
        assert policy.opp_indices == (0, 0, 0)

    def test_indices_in_range(self):
        for seed in range(20):
            policy = _compute(*_policy_inputs(seed))
            assert all(0 <= i <= 8 for i in policy.ego_indices)
            assert all(0 <= j <= 8 for j in policy.opp_indices)

    def test_matches_brute_force_recursion(self):
        for seed in range(200):
            values, ego0, opp0 = _policy_inputs(seed)
            policy = _compute(values, ego0, opp0)
            ego, opp = brute_force_levels(values.tolist(), ego0.tolist(), opp0.tolist())
            assert policy.ego_indices == (ego[0], ego[1], ego[2], ego[3])
            assert policy.opp_indices == (opp[0], opp[1], opp[2])

    def test_affine_invariance(self):
        for seed in range(50):
            values, ego0, opp0 = _policy_inputs(seed)
            rng = np.random.default_rng(seed + 1000)
            scale = float(rng.uniform(0.1, 10.0))
            shift = float(rng.uniform(-5.0, 5.0))
            base = _compute(values, ego0, opp0)
            transformed = _compute(values * scale + shift, ego0 * scale + shift, opp0 * scale + shift)
            assert base.ego_indices == transformed.ego_indices
            assert base.opp_indices == transformed.opp_indices

    def test_determinism(self):
        values, ego0, opp0 = _policy_inputs(4)
        a = _compute(values, ego0, opp0)
        b = _compute(values, ego0, opp0)
        assert a.ego_indices == b.ego_indices and a.opp_indices == b.opp_indices

    def test_real_candidate_pipeline(self):
        ego_state = KinodynamicState(x=2.0, y=1.5, vx=0.5)
        opp_state = KinodynamicState(x=1.2, y=1.2, vx=0.5)
        ego_set = build_candidates(ego_state, PlanningParams())
        opp_set = build_candidates(opp_state, PlanningParams(v_max=0.61))
        matrix = build_matrix(ego_set, opp_set)
        frozen = frozen_reward_vectors(ego_set, opp_set, ego_state, opp_state, PlanningParams())
        policy = compute_all_levels(ego_set, opp_set, matrix, frozen)
        ego, opp = brute_force_levels(
            matrix.values.tolist(),
            frozen.ego_candidates.tolist(),
            frozen.opp_candidates.tolist(),
        )
        assert policy.ego_indices == (ego[0], ego[1], ego[2], ego[3])
        assert policy.opp_indices == (opp[0], opp[1], opp[2])

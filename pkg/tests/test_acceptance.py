"""Acceptance gate: every primary criterion at its stated tolerance.

Each test prints one PASS/FAIL line (visible with ``pytest -rA`` or ``-s``).
The Monte-Carlo criteria run hundreds of full episodes and dominate the
suite's runtime.
"""

import json
import math
import time

import numpy as np
import pytest

from raceduel.estimation import (
    estimated_level,
    init_beliefs,
    update_beliefs,
    update_potential,
)
from raceduel.kinematics import KinodynamicState, step
from raceduel.levelk import compute_all_levels
from raceduel.records import BLOCKING
from raceduel.reward import (
    FrozenRewardVectors,
    RewardMatrix,
    ego_reward,
    holistic_reward,
)
from raceduel.sim import (
    ConstantLevel,
    LevelSwitcher,
    SimConfig,
    random_switch_schedule,
    run_batch,
    run_episode,
)
from raceduel.tracking import Tracker, TrackerConfig, reference_from_trajectory
from raceduel.trajectory import (
    PlanningParams,
    Trajectory,
    blend,
    build_candidates,
    fit_quintic,
)

from test_estimation import predictions_around
from test_levelk import brute_force_levels
from test_trajectory import poly_eval

CONFIG = SimConfig()
WORKERS = 2
N_RUNS = 200


def report(name: str, ok: bool, detail: str = "") -> bool:
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] {name}" + (f" — {detail}" if detail else ""))
    return ok


# --------------------------------------------------------------------------- #
# Monte-Carlo criteria


class TestConstantLevelBlocking:
    def test_constant_levels_blocked(self):
        started = time.perf_counter()
        summary = run_batch(
            CONFIG,
            controllers=("mixing",),
            opponents=("constant:0", "constant:1", "constant:2"),
            n_runs=N_RUNS,
            base_seed=0,
            workers=WORKERS,
        )
        elapsed = time.perf_counter() - started
        ok = True
        details = []
        for row in summary.rows:
            details.append(f"{row.opponent}: {row.blocking_rate:.3f}")
            ok &= row.blocking_rate >= 0.98
            ok &= row.aborts == 0
        runtime_ok = elapsed < 600.0
        detail = ", ".join(details) + f"; runtime {elapsed:.0f}s"
        assert report(
            "constant-level opponents blocked (rate >= 0.98 per level, < 10 min)",
            ok and runtime_ok,
            detail,
        )


class TestRandomOpponentComparison:
    def test_mixing_at_least_conventional(self):
        summary = run_batch(
            CONFIG,
            controllers=("mixing", "conventional"),
            opponents=("random",),
            n_runs=N_RUNS,
            base_seed=0,
            workers=WORKERS,
        )
        rates = {row.controller: row.blocking_rate for row in summary.rows}
        ok = rates["mixing"] >= rates["conventional"] and rates["mixing"] >= 0.90
        assert report(
            "random opponent: mixing rate >= conventional rate and >= 0.90",
            ok,
            f"mixing {rates['mixing']:.3f} vs conventional {rates['conventional']:.3f}",
        )


class TestLevelSwitcherComparison:
    def test_mixing_strictly_better_pooled(self):
        # deterministic stand-in for the human-operator comparison: 20 seeded
        # switch schedules, 10 scenario seeds each, pooled over 200 episodes
        blocks = {"mixing": 0, "conventional": 0}
        for sched_id in range(20):
            schedule = random_switch_schedule(9000 + sched_id, CONFIG)
            model = LevelSwitcher(schedule=schedule)
            for rep in range(10):
                seed = sched_id * 10 + rep
                for controller in ("mixing", "conventional"):
                    record = run_episode(CONFIG, controller, model, seed)
                    if record.outcome == BLOCKING:
                        blocks[controller] += 1
        rate_m = blocks["mixing"] / 200.0
        rate_c = blocks["conventional"] / 200.0
        assert report(
            "level-switching opponent: mixing blocking rate strictly greater",
            rate_m > rate_c,
            f"mixing {rate_m:.3f} vs conventional {rate_c:.3f} (pooled 200)",
        )


class TestDecisionLatency:
    def test_mean_latency_under_budget(self):
        latencies = []
        for seed in range(10):
            record = run_episode(
                SimConfig(episode_limit=20.0), "mixing", ConstantLevel(seed % 3), seed
            )
            latencies.extend(d.latency_ms for d in record.decisions)
        mean = sum(latencies) / len(latencies)
        assert report(
            "decision latency mean < 50 ms",
            mean < 50.0,
            f"measured mean {mean:.2f} ms over {len(latencies)} decisions",
        )


# --------------------------------------------------------------------------- #
# Property suites (all runnable without the UI)


def _random_trajectory(rng, n=26):
    xs = np.cumsum(rng.uniform(0, 0.12, n)) + rng.uniform(-2, 2)
    ys = rng.uniform(0.65, 2.35, n)
    return Trajectory(times=np.arange(n) * 0.2, points=np.column_stack([xs, ys]))


class TestPropertySuites:
    def test_zero_sum_identity(self):
        rng = np.random.default_rng(101)
        ok = True
        for _ in range(1000):
            ego = _random_trajectory(rng)
            opp = _random_trajectory(rng)
            if ego_reward(ego, opp) + holistic_reward(ego, opp) != 0.0:
                ok = False
                break
        assert report("zero-sum identity exact on 1000 random pairs", ok)

    def test_quintic_boundary_residuals(self):
        rng = np.random.default_rng(102)
        worst = 0.0
        for _ in range(1000):
            init = KinodynamicState(
                x=rng.uniform(-5, 5), y=rng.uniform(0, 3),
                vx=rng.uniform(-1, 1), vy=rng.uniform(-1, 1),
                ax=rng.uniform(-1, 1), ay=rng.uniform(-1, 1),
            )
            term = KinodynamicState(
                x=rng.uniform(-5, 5), y=rng.uniform(0, 3),
                vx=rng.uniform(-1, 1), vy=rng.uniform(-1, 1),
                ax=rng.uniform(-1, 1), ay=rng.uniform(-1, 1),
            )
            horizon = float(rng.uniform(0.5, 8.0))
            coeffs = fit_quintic(init, term, horizon)

            def d1(c, t):
                return sum(i * v * t ** (i - 1) for i, v in enumerate(c) if i >= 1)

            def d2(c, t):
                return sum(i * (i - 1) * v * t ** (i - 2) for i, v in enumerate(c) if i >= 2)

            residuals = [
                poly_eval(coeffs.a, 0.0) - init.x,
                d1(coeffs.a, 0.0) - init.vx,
                d2(coeffs.a, 0.0) - init.ax,
                poly_eval(coeffs.a, horizon) - term.x,
                d1(coeffs.a, horizon) - term.vx,
                d2(coeffs.a, horizon) - term.ax,
                poly_eval(coeffs.b, 0.0) - init.y,
                d1(coeffs.b, 0.0) - init.vy,
                d2(coeffs.b, 0.0) - init.ay,
                poly_eval(coeffs.b, horizon) - term.y,
                d1(coeffs.b, horizon) - term.vy,
                d2(coeffs.b, horizon) - term.ay,
            ]
            worst = max(worst, max(abs(r) for r in residuals))
        assert report(
            "quintic boundary residuals < 1e-9 on 1000 random conditions",
            worst < 1e-9,
            f"worst residual {worst:.2e}",
        )

    def test_belief_normalization_and_potential(self):
        rng = np.random.default_rng(103)
        preds = predictions_around(1.2)
        total_updates = 0
        ok = True
        while total_updates < 10_000:
            state = init_beliefs()
            prev_argmax = estimated_level(state.beliefs)
            for _ in range(int(rng.integers(5, 25))):
                level = int(rng.integers(0, 3))
                observed = preds[level].points[1:6] + rng.normal(0, 0.08, (5, 2))
                state = update_beliefs(state, observed, preds)
                state = update_potential(state)
                total_updates += 1
                ok &= abs(sum(state.beliefs) - 1.0) < 1e-12
                ok &= 0.0 <= state.potential <= 0.2
                new_argmax = estimated_level(state.beliefs)
                if new_argmax != prev_argmax:
                    ok &= state.potential == 0.0
                prev_argmax = new_argmax
            if not ok:
                break
        # exactly 4 hold cycles climb from 0 to the 0.2 limit
        from raceduel.estimation import BeliefState, EstimatorParams

        state = BeliefState(
            beliefs=(0.6, 0.3, 0.1), potential=0.0,
            prev_beliefs=(0.6, 0.3, 0.1), cached_predictions=None,
            params=EstimatorParams(),
        )
        climbs = []
        for _ in range(4):
            state = update_potential(state)
            climbs.append(state.potential)
        ok &= climbs == pytest.approx([0.05, 0.10, 0.15, 0.2], abs=1e-12)
        ok &= climbs[2] < 0.2 and climbs[3] == 0.2
        assert report(
            "beliefs normalized, potential bounded/reset/4-cycle climb (1e4 updates)",
            ok,
            f"{total_updates} updates checked",
        )

    def test_levelk_oracle_equivalence(self):
        rng = np.random.default_rng(104)
        ego_set = build_candidates(
            KinodynamicState(x=0, y=1.5, vx=0.5), PlanningParams()
        )
        ok = True
        for _ in range(500):
            values = rng.normal(size=(9, 9))
            ego0 = rng.normal(size=9)
            opp0 = rng.normal(size=9)
            policy = compute_all_levels(
                ego_set,
                ego_set,
                RewardMatrix(values=values),
                FrozenRewardVectors(ego_candidates=ego0, opp_candidates=opp0),
            )
            ego, opp = brute_force_levels(values.tolist(), ego0.tolist(), opp0.tolist())
            if policy.ego_indices != (ego[0], ego[1], ego[2], ego[3]) or policy.opp_indices != (
                opp[0], opp[1], opp[2],
            ):
                ok = False
                break
        assert report("depth selections match brute-force recursion on 500 matrices", ok)

    def test_argmax_affine_invariance(self):
        rng = np.random.default_rng(105)
        ego_set = build_candidates(
            KinodynamicState(x=0, y=1.5, vx=0.5), PlanningParams()
        )
        ok = True
        for _ in range(200):
            values = rng.normal(size=(9, 9))
            ego0 = rng.normal(size=9)
            opp0 = rng.normal(size=9)
            scale = float(rng.uniform(0.05, 20.0))
            shift = float(rng.uniform(-10.0, 10.0))
            base = compute_all_levels(
                ego_set, ego_set, RewardMatrix(values=values),
                FrozenRewardVectors(ego_candidates=ego0, opp_candidates=opp0),
            )
            scaled = compute_all_levels(
                ego_set, ego_set, RewardMatrix(values=values * scale + shift),
                FrozenRewardVectors(
                    ego_candidates=ego0 * scale + shift,
                    opp_candidates=opp0 * scale + shift,
                ),
            )
            if base.ego_indices != scaled.ego_indices or base.opp_indices != scaled.opp_indices:
                ok = False
                break
        assert report("affine rescaling never changes selections (200 trials)", ok)

    def test_blend_convexity(self):
        rng = np.random.default_rng(106)
        ok = True
        for _ in range(500):
            a = _random_trajectory(rng)
            b = Trajectory(times=a.times, points=_random_trajectory(rng).points)
            p = float(rng.uniform(0, 1))
            out = blend(a, b, p)
            lo = np.minimum(a.points, b.points) - 1e-12
            hi = np.maximum(a.points, b.points) + 1e-12
            if not (np.all(out.points >= lo) and np.all(out.points <= hi)):
                ok = False
                break
        assert report("blend convexity componentwise on 500 random pairs", ok)

    def test_episode_determinism(self):
        config = SimConfig(episode_limit=20.0)
        runs = [
            run_episode(config, "mixing", ConstantLevel(1), seed=123).jsonl_lines(
                mask_latency=True
            )
            for _ in range(2)
        ]
        ok = runs[0] == runs[1]
        assert report(
            "same (config, seed) gives byte-identical logs (latency masked)", ok
        )

    def test_tracking_error_bound(self):
        params = PlanningParams(v_max=0.6)
        tracker_config = TrackerConfig()
        init = KinodynamicState(x=0.0, y=1.5, theta=0.0, vx=0.5)
        candidates = build_candidates(init, params)
        worst = 0.0
        for traj in candidates.trajectories:
            state = KinodynamicState(
                x=traj.points[0, 0], y=traj.points[0, 1], theta=0.0, vx=0.5
            )
            tracker = Tracker(tracker_config)
            for k in range(len(traj) - 1):
                refs = reference_from_trajectory(traj, k, tracker_config)
                control, _ = tracker.control(state, refs)
                state = step(state, control, tracker_config.dt)
                err = math.hypot(
                    state.x - traj.points[k + 1, 0], state.y - traj.points[k + 1, 1]
                )
                worst = max(worst, err)
        assert report(
            "closed-loop tracking error < 0.05 m for all 9 candidates",
            worst < 0.05,
            f"worst error {worst:.4f} m",
        )

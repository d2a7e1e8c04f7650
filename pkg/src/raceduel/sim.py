"""Deterministic two-robot duel engine, opponent models, and batch runs."""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import estimation, kinematics, levelk, records, reward, trajectory
from .estimation import EstimatorParams
from .kinematics import ControlInput, KinodynamicState
from .records import BLOCKING, OVERTAKING, BatchRow, BatchSummary, EpisodeRecord
from .tracking import Tracker, TrackerConfig, reference_from_trajectory
from .trajectory import PlanningParams, Trajectory

CONTROLLERS = ("mixing", "conventional")

_SWITCH_SALT = 0x5E1EC7


@dataclass(frozen=True)
class SimConfig:
    sample_time: float = 0.2
    decision_cycle: float = 1.0
    episode_limit: float = 60.0
    y_track: Tuple[float, float] = (0.65, 2.35)
    footprint: float = 0.3
    ego_v_max: float = 0.6
    opp_v_max: float = 0.61
    omega_max: float = 2.0
    gap_range: Tuple[float, float] = (0.0, 2.0)
    opp_y_range: Tuple[float, float] = (1.0, 2.0)
    ego_start: Tuple[float, float] = (2.0, 1.5)
    initial_speed: float = 0.5
    accel_mode: str = "finite_difference"
    a_set_values: Tuple[float, ...] = (-0.05, 0.0, 0.05)
    y_targets: Tuple[float, ...] = (1.0, 1.5, 2.0)
    planning_horizon: float = 5.0
    reward_weights: Tuple[float, float, float] = (1.0, 0.5, 1.0)
    track_width: float = 0.3
    belief_increment: float = 0.5
    potential_limit: float = 0.2
    potential_hold_step: float = 0.05
    estimation_window: int = 5
    tracker_horizon: int = 25
    tracker_state_weights: Tuple[float, float, float] = (10.0, 10.0, 1.0)
    tracker_input_weights: Tuple[float, float] = (1.0, 1.0)
    tracker_iterations: int = 2

    def __post_init__(self) -> None:
        steps = self.decision_cycle / self.sample_time
        if abs(steps - round(steps)) > 1e-9:
            raise ValueError("decision_cycle must be an integer multiple of sample_time")
        if self.accel_mode not in kinematics.ACCEL_MODES:
            raise ValueError(f"unknown accel_mode {self.accel_mode!r}")
        lo, hi = self.y_track
        if not (lo < hi and lo <= self.opp_y_range[0] <= self.opp_y_range[1] <= hi):
            raise ValueError("opponent start range must lie within the track")

    @property
    def steps_per_cycle(self) -> int:
        return round(self.decision_cycle / self.sample_time)

    @property
    def max_steps(self) -> int:
        return round(self.episode_limit / self.sample_time)

    def v_max(self, role: str) -> float:
        return self.ego_v_max if role == "ego" else self.opp_v_max

    def planning_params(self, role: str) -> PlanningParams:
        return PlanningParams(
            a_set_values=self.a_set_values,
            y_targets=self.y_targets,
            y_track=self.y_track,
            horizon=self.planning_horizon,
            sample_time=self.sample_time,
            v_max=self.v_max(role),
        )

    def tracker_config(self, role: str) -> TrackerConfig:
        return TrackerConfig(
            horizon=self.tracker_horizon,
            dt=self.sample_time,
            state_weights=self.tracker_state_weights,
            input_weights=self.tracker_input_weights,
            v_max=self.v_max(role),
            omega_max=self.omega_max,
            max_iterations=self.tracker_iterations,
        )

    def estimator_params(self) -> EstimatorParams:
        return EstimatorParams(
            belief_increment=self.belief_increment,
            potential_limit=self.potential_limit,
            potential_hold_step=self.potential_hold_step,
            window=self.estimation_window,
        )

    def weights(self) -> reward.RewardWeights:
        w1, w2, w3 = self.reward_weights
        return reward.RewardWeights(progress=w1, relative=w2, blocking=w3)

    def to_dict(self) -> Dict:
        return asdict(self)


# --------------------------------------------------------------------------- #
# Opponent models


@dataclass(frozen=True)
class ConstantLevel:
    level: int

    def __post_init__(self) -> None:
        if self.level not in levelk.OPPONENT_LEVELS:
            raise ValueError(f"constant level must be in {levelk.OPPONENT_LEVELS}")


@dataclass(frozen=True)
class RandomCandidate:
    pass


@dataclass(frozen=True)
class LevelSwitcher:
    schedule: Tuple[Tuple[float, int], ...]  # (time s, level), ascending times

    def __post_init__(self) -> None:
        if not self.schedule:
            raise ValueError("switch schedule must not be empty")
        times = [entry[0] for entry in self.schedule]
        if times != sorted(times):
            raise ValueError("switch schedule times must be ascending")
        if any(entry[1] not in levelk.OPPONENT_LEVELS for entry in self.schedule):
            raise ValueError("switch schedule levels must be 0, 1 or 2")

    def level_at(self, t: float) -> int:
        level = self.schedule[0][1]
        for when, lvl in self.schedule:
            if when <= t + 1e-9:
                level = lvl
            else:
                break
        return level


@dataclass(frozen=True)
class ExternalInputs:
    """Pre-recorded opponent inputs, one per sample step; the last one holds."""

    inputs: Tuple[Tuple[float, float], ...]

    def at(self, k: int) -> Tuple[float, float]:
        if not self.inputs:
            return (0.0, 0.0)
        return self.inputs[min(k, len(self.inputs) - 1)]


class LiveExternal:
    """Externally driven opponent whose current input is set by a host loop."""

    def __init__(self) -> None:
        self.current: Tuple[float, float] = (0.0, 0.0)

    def at(self, k: int) -> Tuple[float, float]:
        return self.current


OpponentModel = Union[ConstantLevel, RandomCandidate, LevelSwitcher, ExternalInputs, LiveExternal]


def opponent_label(model: OpponentModel) -> str:
    if isinstance(model, ConstantLevel):
        return f"constant:{model.level}"
    if isinstance(model, RandomCandidate):
        return "random"
    if isinstance(model, LevelSwitcher):
        return "switcher"
    if isinstance(model, (ExternalInputs, LiveExternal)):
        # Live sessions and their offline replays must serialize identically.
        return "external"
    raise TypeError(f"unknown opponent model {model!r}")


def random_switch_schedule(
    seed: int,
    config: SimConfig,
    min_hold: float = 8.0,
    max_hold: float = 16.0,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[Tuple[float, int], ...]:
    """Seeded schedule of sudden depth switches separated by long holds.

    Holds are long enough for the estimate to lock onto the current depth
    and the level-change potential to saturate before the next switch.
    """
    if rng is None:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, _SWITCH_SALT])))
    levels = list(levelk.OPPONENT_LEVELS)
    current = int(rng.integers(0, 3))
    schedule = [(0.0, current)]
    t = 0.0
    while True:
        hold = float(rng.uniform(min_hold, max_hold))
        t += max(config.decision_cycle, round(hold / config.decision_cycle) * config.decision_cycle)
        if t >= config.episode_limit:
            break
        choices = [lvl for lvl in levels if lvl != current]
        current = int(choices[rng.integers(0, len(choices))])
        schedule.append((t, current))
    return tuple(schedule)


def make_opponent(spec: str, seed: int, config: SimConfig) -> OpponentModel:
    """Parse an opponent spec string into a model for one seeded episode."""
    if spec.startswith("constant:"):
        return ConstantLevel(level=int(spec.split(":", 1)[1]))
    if spec == "random":
        return RandomCandidate()
    if spec == "switcher":
        return LevelSwitcher(schedule=random_switch_schedule(seed, config))
    if spec.startswith("external:"):
        parsed = records.read_episode(Path(spec.split(":", 1)[1]))
        return ExternalInputs(inputs=tuple(records.external_inputs_from_record(parsed)))
    raise ValueError(f"unknown opponent spec {spec!r}")


# --------------------------------------------------------------------------- #
# Collision and classification


def detect_collision(
    state_e: KinodynamicState, state_o: KinodynamicState, footprint: float
) -> bool:
    """Axis-aligned square footprints overlap (strict on both axes)."""
    if not (state_e.is_finite() and state_o.is_finite()):
        raise ValueError("states must be finite")
    return abs(state_e.x - state_o.x) < footprint and abs(state_e.y - state_o.y) < footprint


class EngineError(RuntimeError):
    """A controller or invariant failure that aborts the episode."""


# --------------------------------------------------------------------------- #
# Episode engine


class EpisodeEngine:
    """Steps one duel at the sample rate with replanning each decision cycle.

    Fully deterministic for a given (config, seed): the initial conditions
    and any opponent randomness derive from per-purpose child streams of the
    episode seed.
    """

    def __init__(
        self,
        config: SimConfig,
        controller: str,
        opponent: OpponentModel,
        seed: int,
        opponent_name: Optional[str] = None,
    ):
        if controller not in CONTROLLERS:
            raise ValueError(f"controller must be one of {CONTROLLERS}")
        self.config = config
        self.controller = controller
        self.opponent = opponent
        self.seed = seed

        init_ss, opp_ss = np.random.SeedSequence(seed).spawn(2)
        init_rng = np.random.Generator(np.random.PCG64(init_ss))
        self._opp_rng = np.random.Generator(np.random.PCG64(opp_ss))

        gap = float(init_rng.uniform(*config.gap_range))
        opp_y = float(init_rng.uniform(*config.opp_y_range))
        v0 = config.initial_speed
        self.ego = KinodynamicState(
            x=config.ego_start[0], y=config.ego_start[1], theta=0.0, vx=v0
        )
        self.opp = KinodynamicState(x=config.ego_start[0] - gap, y=opp_y, theta=0.0, vx=v0)

        self._ego_params = config.planning_params("ego")
        self._opp_params = config.planning_params("opponent")
        self._weights = config.weights()
        self._ego_tracker = Tracker(config.tracker_config("ego"))
        self._opp_tracker = Tracker(config.tracker_config("opponent"))

        belief = estimation.init_beliefs(config.estimator_params())
        if controller == "conventional":
            belief = replace(belief, potential=0.0)
        self.belief = belief

        self.k = 0
        self.finished = False
        self._ego_traj: Optional[Trajectory] = None
        self._ego_choice_k = 0
        self._opp_traj: Optional[Trajectory] = None
        self._opp_choice_k = 0
        self._opp_history: List[Tuple[float, float]] = [(self.opp.x, self.opp.y)]

        self.record = EpisodeRecord(
            config=config.to_dict(),
            controller=controller,
            opponent=opponent_name or opponent_label(opponent),
            seed=seed,
        )
        self.record.samples.append(self._sample_row((0.0, 0.0), (0.0, 0.0), False, False, False, False))

    # -- helpers ----------------------------------------------------------- #

    def _sample_row(self, ego_u, opp_u, ego_clamped, opp_clamped, ego_fb, opp_fb):
        return records.SampleRow(
            k=self.k,
            t=self.k * self.config.sample_time,
            ego=(self.ego.x, self.ego.y, self.ego.theta, self.ego.vx, self.ego.vy, self.ego.ax, self.ego.ay),
            opp=(self.opp.x, self.opp.y, self.opp.theta, self.opp.vx, self.opp.vy, self.opp.ax, self.opp.ay),
            ego_u=(ego_u[0], ego_u[1]),
            opp_u=(opp_u[0], opp_u[1]),
            ego_clamped=ego_clamped,
            opp_clamped=opp_clamped,
            ego_fallback=ego_fb,
            opp_fallback=opp_fb,
        )

    def _planning_seed(self, state: KinodynamicState, v_max: float) -> KinodynamicState:
        vx = min(max(state.vx, 0.0), v_max)
        if vx != state.vx:
            state = replace(state, vx=vx)
        return state

    def _external_model(self) -> bool:
        return isinstance(self.opponent, (ExternalInputs, LiveExternal))

    # -- decision cycle ----------------------------------------------------- #

    def _decide(self) -> None:
        t = self.k * self.config.sample_time
        started = time.perf_counter()

        ego_seed = self._planning_seed(self.ego, self.config.ego_v_max)
        opp_seed = self._planning_seed(self.opp, self.config.opp_v_max)
        ego_set = trajectory.build_candidates(ego_seed, self._ego_params)
        opp_set = trajectory.build_candidates(opp_seed, self._opp_params)
        frozen = reward.frozen_reward_vectors(
            ego_set, opp_set, self.ego, self.opp, self._ego_params,
            self._weights, self.config.track_width,
        )
        matrix = reward.build_matrix(ego_set, opp_set, self._weights, self.config.track_width)
        policy = levelk.compute_all_levels(ego_set, opp_set, matrix, frozen)

        window = self.config.estimation_window
        if self.belief.cached_predictions is not None and len(self._opp_history) > window:
            observed = np.asarray(self._opp_history[-window:])
            self.belief = estimation.update_beliefs(
                self.belief, observed, self.belief.cached_predictions
            )
            if self.controller == "mixing":
                self.belief = estimation.update_potential(self.belief)

        k_star = estimation.estimated_level(self.belief.beliefs)
        k_fail = estimation.least_likely_level(self.belief.beliefs)
        best = policy.ego_trajectory(k_star + 1)
        failsafe = policy.ego_trajectory(k_fail + 1)
        mixed = trajectory.blend(best, failsafe, self.belief.potential)
        self.belief = estimation.with_predictions(self.belief, policy.opp_predictions())

        latency_ms = (time.perf_counter() - started) * 1e3

        self._ego_traj = mixed
        self._ego_choice_k = self.k

        opp_level_played: Optional[int] = None
        if isinstance(self.opponent, ConstantLevel):
            opp_level_played = self.opponent.level
        elif isinstance(self.opponent, LevelSwitcher):
            opp_level_played = self.opponent.level_at(t)
        if opp_level_played is not None:
            self._opp_traj = policy.opp_trajectory(opp_level_played)
            self._opp_choice_k = self.k

        meta_of = lambda s: [[c.meta.a_set, c.meta.y_target] for c in s.trajectories]
        self.record.decisions.append(
            records.DecisionRow(
                k=self.k,
                t=t,
                beliefs=self.belief.beliefs,
                potential=self.belief.potential,
                level_star=k_star,
                level_fail=k_fail,
                ego_indices=policy.ego_indices,
                opp_indices=policy.opp_indices,
                best=best.as_triples(),
                failsafe=failsafe.as_triples(),
                mixed=mixed.as_triples(),
                ego_candidates=meta_of(ego_set),
                opp_candidates=meta_of(opp_set),
                opp_level_played=opp_level_played,
                mix_degenerate=(k_star == k_fail),
                latency_ms=latency_ms,
            )
        )

    def _redraw_random(self) -> None:
        opp_seed = self._planning_seed(self.opp, self.config.opp_v_max)
        opp_set = trajectory.build_candidates(opp_seed, self._opp_params)
        idx = int(self._opp_rng.integers(0, len(opp_set)))
        self._opp_traj = opp_set[idx]
        self._opp_choice_k = self.k

    def _tracked_control(
        self, tracker: Tracker, state: KinodynamicState, traj: Trajectory, choice_k: int
    ) -> Tuple[ControlInput, bool]:
        refs = reference_from_trajectory(traj, self.k - choice_k, tracker.config)
        control, info = tracker.control(state, refs)
        return control, info.fallback

    def _advance(self, state: KinodynamicState, control: ControlInput, v_max: float):
        new_state = kinematics.step(state, control, self.config.sample_time, self.config.accel_mode)
        lo, hi = self.config.y_track
        clamped = False
        if new_state.y < lo or new_state.y > hi:
            new_state = replace(new_state, y=min(max(new_state.y, lo), hi))
            clamped = True
            self.record.clamp_events += 1
        if new_state.speed > v_max + 1e-9:
            raise EngineError(
                f"speed invariant violated: {new_state.speed:.6f} > {v_max} at k={self.k}"
            )
        return new_state, clamped

    # -- stepping ----------------------------------------------------------- #

    def step(self) -> bool:
        """Advance one sample step; returns True when the episode finished."""
        if self.finished:
            return True
        if self.k % self.config.steps_per_cycle == 0:
            self._decide()
        if isinstance(self.opponent, RandomCandidate):
            self._redraw_random()

        ego_u, ego_fb = self._tracked_control(
            self._ego_tracker, self.ego, self._ego_traj, self._ego_choice_k
        )
        opp_fb = False
        if self._external_model():
            raw = self.opponent.at(self.k)
            opp_u = ControlInput(v=raw[0], omega=raw[1]).clamped(
                self.config.opp_v_max, self.config.omega_max
            )
        else:
            opp_u, opp_fb = self._tracked_control(
                self._opp_tracker, self.opp, self._opp_traj, self._opp_choice_k
            )

        self.ego, ego_clamped = self._advance(self.ego, ego_u, self.config.ego_v_max)
        self.opp, opp_clamped = self._advance(self.opp, opp_u, self.config.opp_v_max)
        self.k += 1
        self._opp_history.append((self.opp.x, self.opp.y))
        self.record.samples.append(
            self._sample_row(
                (ego_u.v, ego_u.omega), (opp_u.v, opp_u.omega),
                ego_clamped, opp_clamped, ego_fb, opp_fb,
            )
        )

        t = self.k * self.config.sample_time
        if self.opp.x > self.ego.x:
            self._finish(OVERTAKING, collision=False, t=t)
        elif detect_collision(self.ego, self.opp, self.config.footprint):
            self._finish(BLOCKING, collision=True, t=t)
        elif self.k >= self.config.max_steps:
            self._finish(BLOCKING, collision=False, t=t)
        return self.finished

    def _finish(self, outcome: str, collision: bool, t: float) -> None:
        self.finished = True
        self.record.outcome = outcome
        self.record.collision = collision
        self.record.end_time = t

    def run(self) -> EpisodeRecord:
        try:
            while not self.step():
                pass
        except Exception as exc:  # noqa: BLE001 - aborted episodes are recorded
            self.finished = True
            self.record.aborted = True
            self.record.abort_reason = f"{type(exc).__name__}: {exc}"
            self.record.outcome = None
            self.record.end_time = self.k * self.config.sample_time
        return self.record


def run_episode(
    config: SimConfig,
    controller: str,
    opponent: OpponentModel,
    seed: int,
    opponent_name: Optional[str] = None,
) -> EpisodeRecord:
    return EpisodeEngine(config, controller, opponent, seed, opponent_name).run()


# --------------------------------------------------------------------------- #
# Batch experiments

DEFAULT_OPPONENTS = ("constant:0", "constant:1", "constant:2", "random", "switcher")


def _run_cell_episode(args) -> Tuple[Optional[str], bool, bool, float]:
    config, controller, opp_spec, seed, out_dir = args
    model = make_opponent(opp_spec, seed, config)
    rec = run_episode(config, controller, model, seed, opponent_name=opp_spec)
    if out_dir is not None:
        name = f"{controller}_{opp_spec.replace(':', '-')}_{seed}.jsonl"
        rec.write(Path(out_dir) / name)
    return (rec.outcome, rec.collision, rec.aborted, rec.mean_latency_ms())


def run_batch(
    config: SimConfig,
    controllers: Sequence[str] = CONTROLLERS,
    opponents: Sequence[str] = DEFAULT_OPPONENTS,
    n_runs: int = 200,
    base_seed: int = 0,
    out_dir: Optional[Path] = None,
    workers: Optional[int] = None,
) -> BatchSummary:
    """Seeded episode grid over (controller, opponent) cells.

    Episode seeds are ``base_seed .. base_seed + n_runs - 1`` in every cell,
    so controllers face identical scenario draws.  Parallel workers never
    affect results: every episode derives its own random streams from its
    seed.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
    tasks = []
    for controller in controllers:
        for opp_spec in opponents:
            for seed in range(base_seed, base_seed + n_runs):
                tasks.append((config, controller, opp_spec, seed, out_dir))

    if workers is not None and workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell_episode, tasks, chunksize=8))
    else:
        results = [_run_cell_episode(task) for task in tasks]

    rows: List[BatchRow] = []
    idx = 0
    for controller in controllers:
        for opp_spec in opponents:
            cell = results[idx : idx + n_runs]
            idx += n_runs
            aborts = sum(1 for r in cell if r[2])
            completed = [r for r in cell if not r[2]]
            blocks = sum(1 for r in completed if r[0] == BLOCKING)
            collisions = sum(1 for r in completed if r[1])
            latencies = [r[3] for r in completed]
            rate = blocks / len(completed) if completed else 0.0
            rows.append(
                BatchRow(
                    controller=controller,
                    opponent=opp_spec,
                    runs=n_runs,
                    blocks=blocks,
                    blocking_rate=rate,
                    collisions=collisions,
                    aborts=aborts,
                    mean_decision_ms=sum(latencies) / len(latencies) if latencies else 0.0,
                )
            )
    return BatchSummary(rows=rows)

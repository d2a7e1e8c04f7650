"""raceduel: a two-robot racing duel simulator where a speed-handicapped
leader blocks a chasing opponent using depth-limited best-response planning
with adaptive trajectory mixing."""

from .estimation import (
    BeliefState,
    EstimatorParams,
    InsufficientHistoryError,
    init_beliefs,
    select_mixed_trajectory,
    update_beliefs,
    update_potential,
)
from .kinematics import ControlInput, KinodynamicState, step, wrap_heading
from .levelk import LevelPolicy, compute_all_levels, level0_best, levelk_best
from .records import BatchSummary, EpisodeRecord, read_episode
from .reward import (
    RewardMatrix,
    RewardWeights,
    build_matrix,
    ego_reward,
    holistic_reward,
    reward_components,
)
from .sim import (
    ConstantLevel,
    EpisodeEngine,
    ExternalInputs,
    LevelSwitcher,
    LiveExternal,
    RandomCandidate,
    SimConfig,
    detect_collision,
    run_batch,
    run_episode,
)
from .tracking import Tracker, TrackerConfig, reference_from_trajectory, solve
from .trajectory import (
    CandidateSet,
    PlanningParams,
    QuinticCoefficients,
    Trajectory,
    blend,
    build_candidates,
    fit_quintic,
    terminal_state,
)

__version__ = "0.1.0"

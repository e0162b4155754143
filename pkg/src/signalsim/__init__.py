"""Deterministic multi-intersection traffic simulation with fixed-time and
multi-agent DQN signal control, plus the statistics engine that compares
them."""

from .config import Axis, ConfigError, Direction, LightPhase, SimConfig
from .control import (
    ConstraintState,
    FixedTimeController,
    MarlController,
    RewardTerms,
    apply_constraints,
    compute_reward,
    featurize,
    fixed_time_phase,
    run_episode,
)
from .nn import QNetwork, mlp_forward
from .records import RunRecord, load_fixture_runs, read_runs_csv, write_runs_csv
from .rl import (
    AgentState,
    Hyperparams,
    ReplayBuffer,
    Transition,
    epsilon_greedy,
    epsilon_step,
    sync_target,
    td_targets,
    train,
    train_step,
)
from .world import (
    FrameEvents,
    RunMetrics,
    StateError,
    TrafficLight,
    Vehicle,
    WorldState,
    can_move,
    finalize_metrics,
    governing_light,
    new_world,
    spawn_tick,
    step_frame,
)

__version__ = "0.1.0"

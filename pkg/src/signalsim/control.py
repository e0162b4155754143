"""Signal controllers and the observation/reward bridge to the RL engine.

Two controllers share the per-frame ``decide(world) -> phases`` interface:
a fixed-time cycle identical at every intersection, and a multi-agent
controller that re-evaluates greedy Q-network actions on a decision tick
(every 0.1 s of simulated time by default) under dwell-time constraints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .config import (
    APPROACH_OF_DIRECTION,
    APPROACH_ORDER,
    Axis,
    LightPhase,
    SimConfig,
)
from .world import FrameEvents, WorldState, step_frame

# Action indices shared by the Q-networks, the constraint logic and the
# model persistence format.
ACTIONS = (LightPhase.GREEN, LightPhase.RED, LightPhase.YELLOW)
ACTION_INDEX = {phase: i for i, phase in enumerate(ACTIONS)}
N_ACTIONS = len(ACTIONS)

FEATURES_PER_LIGHT = 20
QUEUE_NORMALIZER = 20.0

FIXED_GREEN_S = 5.0
FIXED_YELLOW_S = 2.0
FIXED_RED_S = 5.0
FIXED_CYCLE_S = FIXED_GREEN_S + FIXED_YELLOW_S + FIXED_RED_S

DEFAULT_DECISION_FRAMES = 6


def fixed_time_phase(elapsed: float) -> LightPhase:
    """Phase of the fixed-time schedule at ``elapsed`` seconds.

    12 s period: GREEN on [0, 5), YELLOW on [5, 7), RED on [7, 12).
    """
    if elapsed < 0:
        raise ValueError(f"elapsed must be non-negative, got {elapsed}")
    t = elapsed % FIXED_CYCLE_S
    if t < FIXED_GREEN_S:
        return LightPhase.GREEN
    if t < FIXED_GREEN_S + FIXED_YELLOW_S:
        return LightPhase.YELLOW
    return LightPhase.RED


class FixedTimeController:
    """All lights follow the shared 12 s cycle, synchronised from GREEN."""

    def decide(self, world: WorldState) -> list[LightPhase]:
        phase = fixed_time_phase(world.clock)
        return [phase] * len(world.lights)


def feature_names(n_lights: int) -> list[str]:
    """Stable layout descriptor for the global feature vector."""
    names: list[str] = []
    for k in range(n_lights):
        names.extend(f"light{k}.queue.{d}" for d in APPROACH_ORDER)
        names.extend(f"light{k}.avg_dist.{d}" for d in APPROACH_ORDER)
        names.extend(f"light{k}.move_ratio.{d}" for d in APPROACH_ORDER)
        for d in APPROACH_ORDER:
            names.append(f"light{k}.delta_x.{d}")
            names.append(f"light{k}.delta_y.{d}")
    return names


def observe(world: WorldState) -> tuple[np.ndarray, list[int], list[int]]:
    """One pass over the world: feature vector plus per-light census.

    Returns ``(features, queue, stopped)`` where ``queue[i]`` counts vehicles
    governed by light ``i`` within the detection radius over all approaches
    and ``stopped[i]`` those of them that are currently halted.
    """
    cfg = world.config
    arena = cfg.arena_size
    radius = cfg.detection_radius
    lights = world.lights
    n = len(lights)
    order = sorted(range(n), key=lambda i: (lights[i].pos[1], lights[i].pos[0]))
    slot_of_light = {light_index: row for row, light_index in enumerate(order)}

    count = np.zeros((n, 4), dtype=np.int64)
    moving = np.zeros((n, 4), dtype=np.int64)
    dist_sum = np.zeros((n, 4))
    dx_sum = np.zeros((n, 4))
    dy_sum = np.zeros((n, 4))
    queue = [0] * n
    stopped = [0] * n

    for lane in world.lanes:
        approach = APPROACH_ORDER.index(APPROACH_OF_DIRECTION[lane.direction])
        lane_lights = lane.lights
        n_lane_lights = len(lane_lights)
        for v in lane.vehicles:
            slot = v.next_light_slot
            if slot >= n_lane_lights:
                continue
            light_index, s_light, _ = lane_lights[slot]
            along_gap = s_light - v.progress
            perp_gap = lights[light_index].pos[1 if lane.axis is Axis.HORIZONTAL else 0] - v.perp
            dist = (along_gap * along_gap + perp_gap * perp_gap) ** 0.5
            if dist > radius:
                continue
            row = slot_of_light[light_index]
            count[row, approach] += 1
            if v.moving:
                moving[row, approach] += 1
            dist_sum[row, approach] += dist
            vx, vy = v.pos(arena)
            lx, ly = lights[light_index].pos
            dx_sum[row, approach] += vx - lx
            dy_sum[row, approach] += vy - ly
            queue[light_index] += 1
            if not v.moving:
                stopped[light_index] += 1

    features = np.empty(n * FEATURES_PER_LIGHT)
    for row in range(n):
        base = row * FEATURES_PER_LIGHT
        for a in range(4):
            c = count[row, a]
            features[base + a] = min(c / QUEUE_NORMALIZER, 1.0)
            features[base + 4 + a] = dist_sum[row, a] / (c * radius) if c else 1.0
            features[base + 8 + a] = moving[row, a] / c if c else 0.0
            features[base + 12 + 2 * a] = dx_sum[row, a] / (c * radius) if c else 0.0
            features[base + 12 + 2 * a + 1] = dy_sum[row, a] / (c * radius) if c else 0.0
    return features, queue, stopped


def featurize(world: WorldState) -> np.ndarray:
    """Global state vector: 20 features per light, lights ordered by (y, x)."""
    return observe(world)[0]


@dataclass
class RewardTerms:
    moved: int
    queue: int
    stopped: int
    reward: float


def reward_terms(moved: int, queue: int, stopped: int) -> RewardTerms:
    """Throughput-minus-congestion reward: moved - 0.1*queue - 0.2*stopped."""
    return RewardTerms(moved, queue, stopped, moved - 0.1 * queue - 0.2 * stopped)


def compute_reward(
    events: Sequence[FrameEvents], world: WorldState, light: int
) -> RewardTerms:
    """Reward for one light over the decision interval that just ended.

    ``moved`` sums the interval's crossings at this light on the axis its
    phase permitted; ``queue`` and ``stopped`` census the governed vehicles
    within the detection radius at decision time.
    """
    moved = sum(frame.favorable_moved[light] for frame in events)
    _, queue, stopped = observe(world)
    return reward_terms(moved, queue[light], stopped[light])


@dataclass
class ConstraintState:
    """Per-light dwell bookkeeping for the action constraints."""

    n_lights: int
    t_min: float = 1.0
    t_max: float = 10.0
    previous: list[int] = field(default_factory=list)
    time_in_state: list[float] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.previous:
            self.previous = [ACTION_INDEX[LightPhase.GREEN]] * self.n_lights
        if not self.time_in_state:
            self.time_in_state = [0.0] * self.n_lights


def next_best_action(q_values: Sequence[float], exclude: int) -> int:
    """Highest-Q action other than ``exclude``; ties go to the lowest index."""
    best = -1
    best_q = -np.inf
    for a in range(len(q_values)):
        if a == exclude:
            continue
        if q_values[a] > best_q:
            best_q = q_values[a]
            best = a
    return best


# Slack absorbing float drift when dwell is accumulated in frame-interval
# increments (ten additions of 0.1 fall just short of 1.0).
_DWELL_EPS = 1e-9


def apply_constraints(
    proposed: int,
    q_values: Sequence[float],
    cs: ConstraintState,
    light: int,
    dt: float = 0.0,
) -> int:
    """Enforce dwell-time rules on a proposed action, updating ``cs``.

    ``dt`` is the time elapsed since the previous decision for this light
    and is accumulated before the rules are evaluated. Below ``t_min`` the
    previous action is retained; at or above ``t_max`` the light is forced
    onto the best alternative action; otherwise the proposal passes through.
    """
    cs.time_in_state[light] += dt
    t = cs.time_in_state[light]
    previous = cs.previous[light]
    if t < cs.t_min - _DWELL_EPS:
        applied = previous
    elif t >= cs.t_max - _DWELL_EPS:
        applied = next_best_action(q_values, exclude=previous)
    else:
        applied = proposed
    if applied != previous:
        cs.previous[light] = applied
        cs.time_in_state[light] = 0.0
    return applied


def check_constraint_decision(
    t_at_decision: float,
    previous: int,
    applied: int,
    q_values: Sequence[float],
    t_min: float,
    t_max: float,
) -> bool:
    """Independent audit of one constrained decision.

    Re-derives the mandatory outcomes from the dwell time: retention below
    ``t_min`` and a forced switch to the best alternative at ``t_max``.
    Returns True when the applied action is legal.
    """
    if t_at_decision < t_min - _DWELL_EPS:
        return applied == previous
    if t_at_decision >= t_max - _DWELL_EPS:
        if applied == previous:
            return False
        alternatives = [q for a, q in enumerate(q_values) if a != previous]
        return q_values[applied] == max(alternatives)
    return True


@dataclass
class DecisionRecord:
    """One constrained decision, captured for the legality audit."""

    tick: int
    light: int
    dwell: float
    previous: int
    proposed: int
    applied: int
    q_values: tuple[float, ...]


class QPolicy:
    """Minimal interface the MARL controller needs: q_values(features)."""

    def q_values(self, features: np.ndarray) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError


class MarlController:
    """Greedy (or epsilon-greedy) multi-agent controller over one Q-net per light.

    Decisions are taken every ``decision_frames`` frames from the shared
    global feature vector; between decisions the chosen phases are held.
    """

    def __init__(
        self,
        policies: Sequence[QPolicy],
        decision_frames: int = DEFAULT_DECISION_FRAMES,
        epsilon: float = 0.0,
        rng: np.random.Generator | None = None,
        t_min: float = 1.0,
        t_max: float = 10.0,
        record_decisions: bool = False,
    ):
        self.policies = list(policies)
        self.decision_frames = decision_frames
        self.epsilon = epsilon
        self.rng = rng
        self.constraints = ConstraintState(len(self.policies), t_min=t_min, t_max=t_max)
        self.phases = [LightPhase.GREEN] * len(self.policies)
        self.records: list[DecisionRecord] = []
        self._record = record_decisions
        self._tick = 0

    def decide(self, world: WorldState) -> list[LightPhase]:
        if world.frame % self.decision_frames == 0:
            from .rl import epsilon_greedy  # local import to avoid a cycle

            features = featurize(world)
            dt = 0.0 if self._tick == 0 else self.decision_frames / world.config.fps
            for i, policy in enumerate(self.policies):
                q = policy.q_values(features)
                proposed = epsilon_greedy(q, self.epsilon, self.rng)
                dwell_before = self.constraints.time_in_state[i] + dt
                previous = self.constraints.previous[i]
                applied = apply_constraints(proposed, q, self.constraints, i, dt)
                if self._record:
                    self.records.append(
                        DecisionRecord(
                            tick=self._tick,
                            light=i,
                            dwell=dwell_before,
                            previous=previous,
                            proposed=proposed,
                            applied=applied,
                            q_values=tuple(float(x) for x in q),
                        )
                    )
                self.phases[i] = ACTIONS[applied]
            self._tick += 1
        return list(self.phases)


TraceWriter = Callable[[dict], None]


def run_episode(
    world: WorldState,
    controller,
    trace: TraceWriter | None = None,
) -> WorldState:
    """Drive a world to its configured duration under a controller."""
    total = world.config.total_frames
    while world.frame < total:
        phases = controller.decide(world)
        frame_index = world.frame
        _, events = step_frame(world, phases)
        if trace is not None:
            trace(
                {
                    "frame": frame_index,
                    "phases": [p.value for p in phases],
                    "vehicle_count": world.active_count,
                    "crossings": [
                        [vid, light, direction.name]
                        for vid, light, direction in events.crossings
                    ],
                    "exits": events.exits,
                }
            )
    return world

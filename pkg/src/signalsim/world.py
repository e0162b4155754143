"""Deterministic fixed-step traffic world.

Vehicles travel on fixed lane lines at constant speed, stop for forbidden
signal phases and for halted leaders, and are removed once they leave the
arena. All stochasticity lives in the spawn-point draw, so a run is a pure
function of (config, seed, controller decisions).

Internally each lane stores its vehicles ordered by progress along the
travel axis. Movement decisions for a frame are taken simultaneously from
the frame-start state: followers see their leader's position and motion
flag from the previous frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import Axis, ConfigError, Direction, LightPhase, SimConfig


class StateError(RuntimeError):
    """Raised when an operation is invoked in an invalid world state."""


class Vehicle:
    """A single vehicle travelling along one lane line.

    ``progress`` is the distance travelled since spawn, measured along the
    direction of travel; the lane's perpendicular coordinate never changes.
    """

    __slots__ = (
        "id",
        "direction",
        "lane_index",
        "perp",
        "progress",
        "moving",
        "stopped_time",
        "spawned_at",
        "crossed_lights",
        "next_light_slot",
    )

    def __init__(self, vid: int, direction: Direction, lane_index: int, perp: float, spawned_at: float):
        self.id = vid
        self.direction = direction
        self.lane_index = lane_index
        self.perp = perp
        self.progress = 0.0
        self.moving = False
        self.stopped_time = 0.0
        self.spawned_at = spawned_at
        self.crossed_lights: set[int] = set()
        self.next_light_slot = 0

    def pos(self, arena_size: float) -> tuple[float, float]:
        d = self.direction
        if d is Direction.RIGHT:
            return self.progress, self.perp
        if d is Direction.LEFT:
            return arena_size - self.progress, self.perp
        if d is Direction.DOWN:
            return self.perp, self.progress
        return self.perp, arena_size - self.progress

    def __repr__(self) -> str:  # pragma: no cover
        return (
            f"Vehicle(id={self.id}, dir={self.direction.name}, perp={self.perp}, "
            f"progress={self.progress:.1f}, moving={self.moving})"
        )


@dataclass
class TrafficLight:
    index: int
    pos: tuple[float, float]
    phase: LightPhase = LightPhase.GREEN
    time_in_phase: float = 0.0


@dataclass
class FrameEvents:
    """Per-frame observable events emitted by :func:`step_frame`."""

    crossings: list[tuple[int, int, Direction]] = field(default_factory=list)
    exits: int = 0
    # Crossings at each light whose direction lay on the axis the light's
    # phase permitted during this frame.
    favorable_moved: list[int] = field(default_factory=list)


@dataclass
class RunMetrics:
    vehicles_passed: int
    total_wait: float
    mean_wait_per_vehicle: float
    spawned: int


class _Lane:
    """One directed lane line with its governing lights precomputed."""

    __slots__ = ("index", "direction", "axis", "perp", "lights", "vehicles")

    def __init__(self, index: int, direction: Direction, perp: float):
        self.index = index
        self.direction = direction
        self.axis = direction.axis
        self.perp = perp
        # (light index, axis coordinate along travel, stop-line coordinate)
        self.lights: list[tuple[int, float, float]] = []
        # Ordered by ascending progress: last element is the lane head.
        self.vehicles: list[Vehicle] = []


def _along(direction: Direction, x: float, y: float, arena_size: float) -> float:
    """Travel-axis coordinate of a point for the given heading."""
    if direction is Direction.RIGHT:
        return x
    if direction is Direction.LEFT:
        return arena_size - x
    if direction is Direction.DOWN:
        return y
    return arena_size - y


def _perp_of(direction: Direction, x: float, y: float) -> float:
    return y if direction.axis is Axis.HORIZONTAL else x


class WorldState:
    """Full mutable simulation state for one run."""

    def __init__(self, config: SimConfig, seed: int):
        self.config = config
        self.frame = 0
        self.rng = np.random.default_rng(seed)
        self.lights = [
            TrafficLight(index=i, pos=pos) for i, pos in enumerate(config.light_positions)
        ]
        self.spawned = 0
        self.exited = 0
        self.total_wait = 0.0
        # Incremented if a vehicle's centre ever crosses a stop line during a
        # frame in which its axis is forbidden; must stay 0 by construction.
        self.phase_violations = 0
        self._next_vehicle_id = 0
        self.lanes: list[_Lane] = []
        for i, ((sx, sy), direction) in enumerate(config.spawn_points):
            lane = _Lane(i, direction, _perp_of(direction, sx, sy))
            for light in self.lights:
                lx, ly = light.pos
                if abs(_perp_of(direction, lx, ly) - lane.perp) <= config.governing_band:
                    s_light = _along(direction, lx, ly, config.arena_size)
                    lane.lights.append((light.index, s_light, s_light - config.stop_line_offset))
            lane.lights.sort(key=lambda item: item[1])
            self.lanes.append(lane)

    @property
    def clock(self) -> float:
        return self.frame / self.config.fps

    @property
    def vehicles(self) -> list[Vehicle]:
        out: list[Vehicle] = []
        for lane in self.lanes:
            out.extend(lane.vehicles)
        return out

    @property
    def active_count(self) -> int:
        return sum(len(lane.vehicles) for lane in self.lanes)


def new_world(config: SimConfig, seed: int) -> WorldState:
    """Create an empty world with all lights GREEN and a seeded spawn stream."""
    if not isinstance(config, SimConfig):
        raise ConfigError("config must be a SimConfig")
    return WorldState(config, seed)


def spawn_tick(world: WorldState) -> Vehicle | None:
    """Spawn one vehicle if the current frame is a firing frame.

    Fires every ``spawn_interval`` of simulated time, starting at frame 0.
    The spawn point is drawn uniformly from the configured entry points;
    spawning on top of a stopped vehicle is allowed and the newcomer obeys
    the leader-gap rule from its first frame.
    """
    cfg = world.config
    if world.frame % cfg.spawn_period_frames != 0:
        return None
    lane_index = int(world.rng.integers(len(cfg.spawn_points)))
    lane = world.lanes[lane_index]
    vehicle = Vehicle(
        vid=world._next_vehicle_id,
        direction=lane.direction,
        lane_index=lane_index,
        perp=lane.perp,
        spawned_at=world.clock,
    )
    world._next_vehicle_id += 1
    world.spawned += 1
    # Progress 0 is never ahead of an existing vehicle, so insertion at the
    # tail keeps the lane ordered with the newcomer as the rearmost follower.
    lane.vehicles.insert(0, vehicle)
    return vehicle


def governing_light(vehicle: Vehicle, lights: list[TrafficLight], config: SimConfig) -> int | None:
    """Index of the nearest uncrossed light ahead of the vehicle, if any.

    A light governs a vehicle when it lies ahead along the travel direction,
    within ``governing_band`` of the vehicle's lane line, and the vehicle has
    not yet crossed it.
    """
    arena = config.arena_size
    d = vehicle.direction
    best: int | None = None
    best_gap = math.inf
    for light in lights:
        if light.index in vehicle.crossed_lights:
            continue
        lx, ly = light.pos
        if abs(_perp_of(d, lx, ly) - vehicle.perp) > config.governing_band:
            continue
        gap = _along(d, lx, ly, arena) - vehicle.progress
        if gap <= 0:
            continue
        if gap < best_gap:
            best_gap = gap
            best = light.index
    return best


def _nearest_leader(vehicle: Vehicle, world: WorldState) -> Vehicle | None:
    """Closest vehicle ahead on the same lane line.

    Vehicles at identical progress are ordered by spawn time: an earlier
    spawn is ahead of a later one, and within such a stack the immediate
    leader is the latest-spawned vehicle still ahead.
    """
    best: Vehicle | None = None
    best_gap = math.inf
    for other in world.lanes[vehicle.lane_index].vehicles:
        if other.id == vehicle.id:
            continue
        gap = other.progress - vehicle.progress
        if gap < 0 or (gap == 0 and other.id > vehicle.id):
            continue
        if gap < best_gap or (gap == best_gap and best is not None and other.id > best.id):
            best_gap = gap
            best = other
    return best


def can_move(vehicle: Vehicle, world: WorldState) -> bool:
    """Whether the vehicle may advance this frame, from frame-start state.

    Movement is denied when the vehicle would cross its governing light's
    stop line this frame while the phase forbids its axis, or when the
    nearest leader on its lane sits within ``min_gap + vehicle_length`` and
    is not moving.
    """
    cfg = world.config
    step = cfg.frame_step
    gid = governing_light(vehicle, world.lights, cfg)
    if gid is not None:
        light = world.lights[gid]
        if not light.phase.permits(vehicle.direction.axis):
            lx, ly = light.pos
            s_stop = _along(vehicle.direction, lx, ly, cfg.arena_size) - cfg.stop_line_offset
            if vehicle.progress < s_stop <= vehicle.progress + step:
                return False
    leader = _nearest_leader(vehicle, world)
    if leader is not None:
        if leader.progress - vehicle.progress <= cfg.min_gap + cfg.vehicle_length and not leader.moving:
            return False
    return True


def step_frame(world: WorldState, phases: list[LightPhase]) -> tuple[WorldState, FrameEvents]:
    """Advance the world by one frame under the supplied light phases.

    Applies phases (resetting per-light dwell on change), runs the spawn
    tick, moves every vehicle that :func:`can_move`, records axis crossings
    once per (vehicle, light), removes vehicles that left the arena and
    accumulates wait time. Returns the mutated world plus the frame events.
    """
    cfg = world.config
    if len(phases) != len(world.lights):
        raise ValueError(f"expected {len(world.lights)} phases, got {len(phases)}")

    for light, phase in zip(world.lights, phases):
        if phase is not light.phase:
            light.phase = phase
            light.time_in_phase = 0.0
        else:
            light.time_in_phase += cfg.frame_dt

    spawn_tick(world)

    events = FrameEvents(favorable_moved=[0] * len(world.lights))
    step = cfg.frame_step
    dt = cfg.frame_dt
    gap_block = cfg.min_gap + cfg.vehicle_length
    arena = cfg.arena_size
    crossings = events.crossings
    favorable = events.favorable_moved
    # Phase permission per light for each axis, resolved once per frame.
    permits_h = [light.phase is LightPhase.GREEN for light in world.lights]
    permits_v = [light.phase is LightPhase.RED for light in world.lights]

    for lane in world.lanes:
        permits = permits_h if lane.axis is Axis.HORIZONTAL else permits_v
        lane_lights = lane.lights
        n_lights = len(lane_lights)
        vehicles = lane.vehicles
        n = len(vehicles)
        # Rear to front: each follower reads its leader's previous-frame
        # position and motion flag, giving simultaneous-update semantics.
        for i in range(n):
            v = vehicles[i]
            s = v.progress
            blocked = False
            slot = v.next_light_slot
            if slot < n_lights:
                light_index, s_light, s_stop = lane_lights[slot]
                if not permits[light_index] and s < s_stop <= s + step:
                    blocked = True
            if not blocked and i + 1 < n:
                leader = vehicles[i + 1]
                if leader.progress - s <= gap_block and not leader.moving:
                    blocked = True
            if blocked:
                v.moving = False
                v.stopped_time += dt
                world.total_wait += dt
            else:
                new_s = s + step
                v.progress = new_s
                v.moving = True
                if slot < n_lights:
                    # Per-frame phase-semantics audit: a stop line must never
                    # be crossed during a frame whose phase forbids the axis.
                    light_index, _, s_stop = lane_lights[slot]
                    if not permits[light_index] and s < s_stop <= new_s:
                        world.phase_violations += 1
                while slot < n_lights:
                    light_index, s_light, _ = lane_lights[slot]
                    if new_s < s_light:
                        break
                    # Crossed the light's axis coordinate this frame.
                    crossings.append((v.id, light_index, v.direction))
                    v.crossed_lights.add(light_index)
                    if permits[light_index]:
                        favorable[light_index] += 1
                    slot += 1
                v.next_light_slot = slot
        while vehicles and vehicles[-1].progress > arena:
            vehicles.pop()
            world.exited += 1
            events.exits += 1

    world.frame += 1
    return world, events


def finalize_metrics(world: WorldState) -> RunMetrics:
    """Aggregate run metrics once the configured duration has elapsed."""
    cfg = world.config
    if world.frame < cfg.total_frames:
        raise StateError(
            f"run has only reached {world.clock:.2f}s of {cfg.duration:.2f}s"
        )
    mean_wait = world.total_wait / world.spawned if world.spawned else 0.0
    return RunMetrics(
        vehicles_passed=world.exited,
        total_wait=world.total_wait,
        mean_wait_per_vehicle=mean_wait,
        spawned=world.spawned,
    )

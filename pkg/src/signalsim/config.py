"""World configuration: arena geometry, signal placement, vehicle kinematics.

The default values describe a 900x900 pixel arena with four signalised
intersections and eight boundary spawn points, simulated at 60 frames per
second for ten minutes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum


class ConfigError(ValueError):
    """Raised when a simulation configuration violates its invariants."""


class Axis(Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"


class Direction(IntEnum):
    RIGHT = 0
    LEFT = 1
    DOWN = 2
    UP = 3

    @property
    def axis(self) -> Axis:
        if self in (Direction.RIGHT, Direction.LEFT):
            return Axis.HORIZONTAL
        return Axis.VERTICAL


class LightPhase(Enum):
    """Signal phase for a whole intersection.

    GREEN lets the horizontal axis proceed, RED lets the vertical axis
    proceed, YELLOW halts both.
    """

    GREEN = "GREEN"
    RED = "RED"
    YELLOW = "YELLOW"

    def permits(self, axis: Axis) -> bool:
        if self is LightPhase.GREEN:
            return axis is Axis.HORIZONTAL
        if self is LightPhase.RED:
            return axis is Axis.VERTICAL
        return False


# Side of the intersection a vehicle approaches from, keyed by its heading.
APPROACH_OF_DIRECTION = {
    Direction.DOWN: "N",
    Direction.UP: "S",
    Direction.LEFT: "E",
    Direction.RIGHT: "W",
}

APPROACH_ORDER = ("N", "S", "E", "W")

DEFAULT_LIGHT_POSITIONS = ((300.0, 300.0), (600.0, 300.0), (300.0, 600.0), (600.0, 600.0))

DEFAULT_SPAWN_POINTS = (
    ((0.0, 280.0), Direction.RIGHT),
    ((0.0, 580.0), Direction.RIGHT),
    ((900.0, 320.0), Direction.LEFT),
    ((900.0, 620.0), Direction.LEFT),
    ((320.0, 0.0), Direction.DOWN),
    ((620.0, 0.0), Direction.DOWN),
    ((280.0, 900.0), Direction.UP),
    ((580.0, 900.0), Direction.UP),
)


@dataclass(frozen=True)
class SimConfig:
    arena_size: float = 900.0
    light_positions: tuple[tuple[float, float], ...] = DEFAULT_LIGHT_POSITIONS
    spawn_points: tuple[tuple[tuple[float, float], Direction], ...] = DEFAULT_SPAWN_POINTS
    spawn_interval: float = 0.5
    fps: int = 60
    duration: float = 600.0
    vehicle_speed: float = 120.0
    vehicle_length: float = 20.0
    stop_line_offset: float = 30.0
    min_gap: float = 15.0
    detection_radius: float = 150.0
    governing_band: float = 40.0

    def __post_init__(self) -> None:
        if self.fps <= 0:
            raise ConfigError(f"fps must be positive, got {self.fps}")
        if self.duration <= 0:
            raise ConfigError(f"duration must be positive, got {self.duration}")
        if self.spawn_interval <= 0:
            raise ConfigError(f"spawn_interval must be positive, got {self.spawn_interval}")
        if self.vehicle_speed <= 0:
            raise ConfigError(f"vehicle_speed must be positive, got {self.vehicle_speed}")
        if self.arena_size <= 0:
            raise ConfigError(f"arena_size must be positive, got {self.arena_size}")
        if round(self.spawn_interval * self.fps) < 1:
            raise ConfigError("spawn_interval is shorter than one frame")
        for (x, y), _direction in self.spawn_points:
            on_boundary = (
                x in (0.0, self.arena_size) or y in (0.0, self.arena_size)
            ) and 0.0 <= x <= self.arena_size and 0.0 <= y <= self.arena_size
            if not on_boundary:
                raise ConfigError(f"spawn point ({x}, {y}) is not on the arena boundary")

    @property
    def frame_dt(self) -> float:
        return 1.0 / self.fps

    @property
    def frame_step(self) -> float:
        """Pixels a moving vehicle advances per frame."""
        return self.vehicle_speed / self.fps

    @property
    def total_frames(self) -> int:
        return round(self.duration * self.fps)

    @property
    def spawn_period_frames(self) -> int:
        return round(self.spawn_interval * self.fps)

    @property
    def n_lights(self) -> int:
        return len(self.light_positions)

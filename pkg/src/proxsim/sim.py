"""Deterministic 2D kinematic world: unicycle robot, scripted pedestrians, range sensor."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from proxsim import _kernels
from proxsim.grid import Pose2D, normalize_angle
from proxsim.layers import SensorScan
from proxsim.planner import VelocityCommand
from proxsim.proxemics import ActivityProfile, PersonState

DT = 0.05
PERSON_BODY_RADIUS = 0.2
N_BEAMS = 360
MAX_RANGE = 5.0
VELOCITY_WINDOW = 0.5

ORIENTATION_MODES = ("face-motion", "fixed", "random")

_ARRIVAL_EPS = 1e-9


@dataclass(frozen=True)
class PedestrianScript:
    waypoints: tuple[tuple[float, float], ...]
    speed: float = 0.0
    loop: bool = False
    orientation_mode: str = "face-motion"
    heading: float = 0.0
    start_delay: float = 0.0

    def __post_init__(self):
        object.__setattr__(
            self, "waypoints", tuple((float(x), float(y)) for x, y in self.waypoints)
        )
        if not self.waypoints:
            raise ValueError("a pedestrian script needs at least one waypoint")
        if self.speed < 0:
            raise ValueError("pedestrian speed must be >= 0")
        if self.orientation_mode not in ORIENTATION_MODES:
            raise ValueError(f"orientation_mode must be one of {ORIENTATION_MODES}")

    def initial_heading(self, rng: np.random.Generator | None) -> float:
        if self.orientation_mode == "random":
            if rng is None:
                raise ValueError("random orientation needs an rng")
            return normalize_angle(rng.uniform(-math.pi, math.pi))
        if self.orientation_mode == "face-motion" and len(self.waypoints) > 1:
            (x0, y0), (x1, y1) = self.waypoints[:2]
            return math.atan2(y1 - y0, x1 - x0)
        return self.heading


@dataclass(frozen=True)
class Pedestrian:
    """Scripted pedestrian progress: position, next waypoint index, heading."""

    id: str
    script: PedestrianScript
    profile: ActivityProfile
    x: float
    y: float
    heading: float
    next_wp: int = 1
    finished: bool = False
    elapsed: float = 0.0

    @classmethod
    def start(cls, pid: str, script: PedestrianScript, profile: ActivityProfile, rng=None):
        x, y = script.waypoints[0]
        done = len(script.waypoints) < 2 or script.speed == 0
        return cls(pid, script, profile, x, y, script.initial_heading(rng), 1, done)

    def advance(self, dt: float) -> Pedestrian:
        elapsed = self.elapsed + dt
        if self.finished or elapsed <= self.script.start_delay + 1e-12:
            return replace(self, elapsed=elapsed)
        wps = self.script.waypoints
        x, y, nxt, done = self.x, self.y, self.next_wp, False
        heading = self.heading
        remaining = self.script.speed * min(dt, elapsed - self.script.start_delay)
        while remaining > 0.0:
            tx, ty = wps[nxt]
            dx, dy = tx - x, ty - y
            dist = math.hypot(dx, dy)
            if dist > 0 and self.script.orientation_mode == "face-motion":
                heading = math.atan2(dy, dx)
            # snap on arrival so float drift cannot cost an extra tick
            if dist <= remaining + _ARRIVAL_EPS:
                x, y = tx, ty
                remaining = max(0.0, remaining - dist)
                nxt += 1
                if nxt == len(wps):
                    if not self.script.loop:
                        done = True
                        break
                    nxt = 0
            else:
                x += dx / dist * remaining
                y += dy / dist * remaining
                remaining = 0.0
        return replace(self, x=x, y=y, heading=heading, next_wp=nxt, finished=done, elapsed=elapsed)

    @property
    def pose(self) -> Pose2D:
        return Pose2D(self.x, self.y, self.heading)


def person_velocity_estimate(history, dt: float = DT) -> tuple[float, float]:
    """Mean finite-difference velocity over the trailing window.

    ``history`` is a sequence of (x, y) samples spaced ``dt`` apart, oldest
    first. The component-wise mean of consecutive differences telescopes to
    the net displacement over the window.
    """
    n_window = int(round(VELOCITY_WINDOW / dt)) + 1
    h = list(history)[-n_window:]
    if len(h) < 2:
        return (0.0, 0.0)
    span = (len(h) - 1) * dt
    return ((h[-1][0] - h[0][0]) / span, (h[-1][1] - h[0][1]) / span)


@dataclass(frozen=True)
class WorldState:
    """One simulation instant.

    ``occupancy`` is the static map (bool, rows bottom-up) on the grid given by
    ``resolution`` and ``origin``.
    """

    robot: Pose2D
    occupancy: np.ndarray = field(repr=False)
    resolution: float
    origin: tuple[float, float] = (0.0, 0.0)
    pedestrians: tuple[Pedestrian, ...] = ()
    tick: int = 0
    robot_velocity: VelocityCommand = VelocityCommand()
    history: tuple[tuple[tuple[float, float], ...], ...] = ()
    profile_overrides: tuple[tuple[str, ActivityProfile], ...] = ()
    rng_seed: int = 0

    def __post_init__(self):
        if not self.history:
            object.__setattr__(self, "history", tuple(((p.x, p.y),) for p in self.pedestrians))

    @property
    def time(self) -> float:
        return self.tick * DT

    @property
    def persons(self) -> list[PersonState]:
        overrides = dict(self.profile_overrides)
        out = []
        for ped, hist in zip(self.pedestrians, self.history):
            profile = overrides.get(ped.id, ped.profile)
            out.append(
                PersonState(ped.id, ped.pose, profile, person_velocity_estimate(hist), profile.name)
            )
        return out

    def person(self, pid: str) -> PersonState:
        for p in self.persons:
            if p.id == pid:
                return p
        raise KeyError(pid)

    def pedestrian(self, pid: str) -> Pedestrian:
        for p in self.pedestrians:
            if p.id == pid:
                return p
        raise KeyError(pid)

    def with_profile(self, pid: str, profile: ActivityProfile | None) -> WorldState:
        """Temporarily swap (or with None, restore) a person's active profile."""
        overrides = {k: v for k, v in self.profile_overrides if k != pid}
        if profile is not None:
            overrides[pid] = profile
        return replace(self, profile_overrides=tuple(sorted(overrides.items())))

    def static_blocked(self, x: float, y: float) -> bool:
        h, w = self.occupancy.shape
        col = math.floor((x - self.origin[0]) / self.resolution + 1e-9)
        row = math.floor((y - self.origin[1]) / self.resolution + 1e-9)
        if not (0 <= col < w and 0 <= row < h):
            return True
        return bool(self.occupancy[row, col])


def step(world: WorldState, cmd: VelocityCommand) -> WorldState:
    """Advance one DT: unicycle robot, scripted pedestrians, tick + 1.

    A translation that would end on a static obstacle is dropped (rotation
    still applies) and the recorded linear velocity is zeroed.
    """
    r = world.robot
    nx = r.x + cmd.linear * math.cos(r.theta) * DT
    ny = r.y + cmd.linear * math.sin(r.theta) * DT
    ntheta = r.theta + cmd.angular * DT
    velocity = cmd
    if cmd.linear != 0.0 and world.static_blocked(nx, ny):
        nx, ny = r.x, r.y
        velocity = VelocityCommand(0.0, cmd.angular)
    peds = tuple(p.advance(DT) for p in world.pedestrians)
    n_window = int(round(VELOCITY_WINDOW / DT)) + 1
    history = tuple(
        (hist + ((p.x, p.y),))[-n_window:] for hist, p in zip(world.history, peds)
    )
    return replace(
        world,
        robot=Pose2D(nx, ny, ntheta),
        pedestrians=peds,
        tick=world.tick + 1,
        robot_velocity=velocity,
        history=history,
    )


def sense(world: WorldState, n_beams: int = N_BEAMS, max_range: float = MAX_RANGE) -> SensorScan:
    r = world.robot
    px = np.array([p.x for p in world.pedestrians], dtype=float)
    py = np.array([p.y for p in world.pedestrians], dtype=float)
    bearings, ranges, hits = _kernels.sense_beams(
        world.occupancy,
        world.origin[0],
        world.origin[1],
        world.resolution,
        r.x,
        r.y,
        r.theta,
        n_beams,
        max_range,
        px,
        py,
        PERSON_BODY_RADIUS,
    )
    return SensorScan(r, bearings, ranges, hits, max_range)

"""Grid path search over the master costmap and a pure-pursuit follower."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from proxsim import _kernels
from proxsim.grid import INSCRIBED, LETHAL, Costmap, OutOfBounds, Pose2D, normalize_angle, world_to_cell

COST_WEIGHT = 0.05  # meters per cost unit per entered cell
LOOKAHEAD = 0.4
ANGULAR_GAIN = 2.0
MAX_ANGULAR = 1.0
GOAL_TOL = 0.15
GOAL_HEADING_TOL = 0.3
SLOWDOWN_RADIUS = 0.3
REPLAN_PERIOD = 0.5


class PlanningError(RuntimeError):
    pass


class NoPath(PlanningError):
    pass


class StartBlocked(PlanningError):
    pass


@dataclass
class Path:
    waypoints: list[tuple[float, float]]
    total_cost: float
    cells: np.ndarray | None = None
    goal_theta: float | None = None

    def __len__(self):
        return len(self.waypoints)

    def points(self) -> np.ndarray:
        """Waypoints as an (n, 2) array, cached until the waypoint list changes."""
        cached = getattr(self, "_points", None)
        if cached is None or len(cached) != len(self.waypoints):
            cached = np.asarray(self.waypoints, dtype=float).reshape(-1, 2)
            self._points = cached
        return cached

    @property
    def goal(self) -> tuple[float, float]:
        return self.waypoints[-1]

    def length(self) -> float:
        pts = np.asarray(self.waypoints)
        return float(np.hypot(*np.diff(pts, axis=0).T).sum()) if len(pts) > 1 else 0.0


@dataclass(frozen=True)
class VelocityCommand:
    linear: float = 0.0
    angular: float = 0.0


STOP = VelocityCommand()


def plan(master: Costmap, start, goal, weight: float = COST_WEIGHT) -> Path:
    """Minimum-cost 8-connected path between the cells of ``start`` and ``goal``.

    Entering a cell costs its step length plus ``weight`` times its cost;
    cells at INSCRIBED or above are impassable. ``start``/``goal`` may be
    poses or (x, y) pairs; a goal pose's heading is kept on the path.
    """
    try:
        s = world_to_cell(master, _xy(start))
    except OutOfBounds as exc:
        raise StartBlocked(str(exc)) from None
    try:
        g = world_to_cell(master, _xy(goal))
    except OutOfBounds as exc:
        raise NoPath(str(exc)) from None
    if master.cells[s.row, s.col] >= INSCRIBED:
        raise StartBlocked(f"start cell {tuple(s)} has cost {master.cells[s.row, s.col]}")
    if master.cells[g.row, g.col] >= INSCRIBED:
        raise NoPath(f"goal cell {tuple(g)} has cost {master.cells[g.row, g.col]}")
    cells, total = _kernels.astar(
        master.cells, s.row, s.col, g.row, g.col, master.resolution, weight, INSCRIBED
    )
    if len(cells) == 0:
        raise NoPath(f"no traversable route from {tuple(s)} to {tuple(g)}")
    res = master.resolution
    xs = master.origin[0] + (cells[:, 1] + 0.5) * res
    ys = master.origin[1] + (cells[:, 0] + 0.5) * res
    theta = goal.theta if isinstance(goal, Pose2D) else None
    return Path(list(zip(xs.tolist(), ys.tolist())), float(total), cells, theta)


def path_blocked(path: Path, master: Costmap) -> bool:
    """True if any cell of the path has become LETHAL."""
    if path.cells is None or len(path.cells) == 0:
        return False
    return bool((master.cells[path.cells[:, 0], path.cells[:, 1]] >= LETHAL).any())


def _xy(p) -> tuple[float, float]:
    if isinstance(p, Pose2D):
        return p.xy
    return (float(p[0]), float(p[1]))


def at_goal(path: Path, robot: Pose2D) -> bool:
    gx, gy = path.goal
    if math.hypot(gx - robot.x, gy - robot.y) > GOAL_TOL:
        return False
    if path.goal_theta is None:
        return True
    return abs(normalize_angle(path.goal_theta - robot.theta)) <= GOAL_HEADING_TOL


def _lookahead_point(path: Path, robot: Pose2D) -> tuple[float, float]:
    pts = path.points()
    d = np.hypot(pts[:, 0] - robot.x, pts[:, 1] - robot.y)
    i = int(np.argmin(d))
    # walk forward from the closest waypoint while still inside the lookahead
    j = i
    while j + 1 < len(pts) and d[j + 1] <= LOOKAHEAD:
        j += 1
    return float(pts[j, 0]), float(pts[j, 1])


def follow(path: Path, robot: Pose2D, max_speed: float) -> VelocityCommand:
    """Pure-pursuit command toward the path.

    Inside the goal radius the robot turns in place to the goal heading and
    stops once aligned.
    """
    if not path.waypoints:
        return STOP
    gx, gy = path.goal
    to_goal = math.hypot(gx - robot.x, gy - robot.y)
    if to_goal <= GOAL_TOL:
        if path.goal_theta is None:
            return STOP
        err = normalize_angle(path.goal_theta - robot.theta)
        if abs(err) <= GOAL_HEADING_TOL:
            return STOP
        return VelocityCommand(0.0, _clamp(ANGULAR_GAIN * err, MAX_ANGULAR))
    tx, ty = _lookahead_point(path, robot)
    err = normalize_angle(math.atan2(ty - robot.y, tx - robot.x) - robot.theta)
    angular = _clamp(ANGULAR_GAIN * err, MAX_ANGULAR)
    linear = max_speed * (1.0 - abs(err) / math.pi) * min(1.0, to_goal / SLOWDOWN_RADIUS)
    return VelocityCommand(linear, angular)


def _clamp(v: float, limit: float) -> float:
    return max(-limit, min(limit, v))


def replan_policy(tick: int, last_plan_tick: int | None, dt: float, path: Path | None = None,
                  master: Costmap | None = None) -> bool:
    if last_plan_tick is None:
        return True
    if (tick - last_plan_tick) * dt >= REPLAN_PERIOD - 1e-9:
        return True
    return path is not None and master is not None and path_blocked(path, master)

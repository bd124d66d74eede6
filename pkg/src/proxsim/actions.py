"""Task-level goals around a person and a fixed action sequencer.

Approach puts goals in front of the person facing them, escort on the
person's right with a fallback behind, follow only behind.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

from proxsim.grid import INSCRIBED, Costmap, OutOfBounds, Pose2D, world_to_cell
from proxsim.planner import (
    COST_WEIGHT,
    STOP,
    Path,
    PlanningError,
    StartBlocked,
    VelocityCommand,
    at_goal,
    follow,
    plan,
    replan_policy,
)
from proxsim.proxemics import PersonState

FAIL_TIMEOUT = 120.0
ACTION_KINDS = ("approach", "escort", "follow", "goto_home", "goto")
PERSONLESS = ("goto_home", "goto")
PROFILE_FOR_ACTION = {"approach": "hri_approach", "escort": "escort"}


class NoFeasibleGoal(RuntimeError):
    pass


@dataclass(frozen=True)
class CandidateGoal:
    pose: Pose2D
    rank: int
    feasible: bool = True


class Selection(NamedTuple):
    candidate: CandidateGoal
    path: Path


def _ray_points(person: PersonState, bearing: float, distances, goal_theta: float, first_rank=1):
    px, py = person.position
    return [
        CandidateGoal(Pose2D(px + d * math.cos(bearing), py + d * math.sin(bearing), goal_theta), rank)
        for rank, d in enumerate(distances, start=first_rank)
    ]


def approach_candidates(person: PersonState, robot_radius: float) -> list[CandidateGoal]:
    r_i = person.profile.intimate_radius
    heading = person.pose.theta
    return _ray_points(
        person, heading, (r_i, r_i + robot_radius, r_i + 2 * robot_radius), heading + math.pi
    )


def escort_candidates(person: PersonState, robot_radius: float) -> list[CandidateGoal]:
    r_i = person.profile.intimate_radius
    heading = person.pose.theta
    side = _ray_points(
        person, heading - math.pi / 2, (r_i, r_i + robot_radius, r_i + 2 * robot_radius), heading
    )
    behind = _ray_points(person, heading + math.pi, (r_i + robot_radius,), heading, first_rank=4)
    return side + behind


def follow_candidates(person: PersonState, robot_radius: float) -> list[CandidateGoal]:
    r_i = person.profile.intimate_radius
    heading = person.pose.theta
    return _ray_points(person, heading + math.pi, (r_i + robot_radius,), heading)


CANDIDATES = {
    "approach": approach_candidates,
    "escort": escort_candidates,
    "follow": follow_candidates,
}


def goal_cell_cost(master: Costmap, pose: Pose2D) -> int | None:
    try:
        c = world_to_cell(master, pose.xy)
    except OutOfBounds:
        return None
    return int(master.cells[c.row, c.col])


def select_goal(candidates, master: Costmap, robot: Pose2D, weight: float = COST_WEIGHT) -> Selection:
    """Best-ranked candidate whose cell is below INSCRIBED and that can be planned to.

    Raises StartBlocked if the robot's own cell is impassable (no candidate can
    be judged), NoFeasibleGoal if every candidate fails.
    """
    if not candidates:
        raise NoFeasibleGoal("empty candidate set")
    for cand in sorted(candidates, key=lambda c: c.rank):
        cost = goal_cell_cost(master, cand.pose)
        if cost is None or cost >= INSCRIBED:
            continue
        try:
            path = plan(master, robot, cand.pose, weight)
        except StartBlocked:
            raise
        except PlanningError:
            continue
        return Selection(cand, path)
    raise NoFeasibleGoal(f"none of {len(candidates)} candidates is reachable")


def escape_start(master: Costmap, robot: Pose2D, max_radius: float = 0.6) -> Pose2D | None:
    """Nearest passable cell center to a robot standing on an impassable cell."""
    try:
        c = world_to_cell(master, robot.xy)
    except OutOfBounds:
        return None
    k = int(math.ceil(max_radius / master.resolution))
    r0, r1 = max(0, c.row - k), min(master.height, c.row + k + 1)
    c0, c1 = max(0, c.col - k), min(master.width, c.col + k + 1)
    best, best_d = None, math.inf
    for row in range(r0, r1):
        for col in range(c0, c1):
            if master.cells[row, col] >= INSCRIBED:
                continue
            d = (row - c.row) ** 2 + (col - c.col) ** 2
            if d < best_d:
                best, best_d = (row, col), d
    if best is None:
        return None
    x = master.origin[0] + (best[1] + 0.5) * master.resolution
    y = master.origin[1] + (best[0] + 0.5) * master.resolution
    return Pose2D(x, y, robot.theta)


@dataclass
class ActionState:
    kind: str
    target_person: str | None = None
    phase: str = "selecting"
    chosen_goal: Pose2D | None = None
    rank: int | None = None
    path: Path | None = None
    started_tick: int | None = None
    last_plan_tick: int | None = None
    home: Pose2D | None = None
    goal: Pose2D | None = None
    detail: str = ""
    rank_history: list[tuple[int, int]] = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in ACTION_KINDS:
            raise ValueError(f"unknown action kind {self.kind!r}")
        if self.kind not in PERSONLESS and self.target_person is None:
            raise ValueError(f"{self.kind} needs a target person")
        if self.kind == "goto" and self.goal is None:
            raise ValueError("goto needs a goal pose")

    @property
    def finished(self) -> bool:
        return self.phase in ("done", "failed")


def _plan_from(master, robot, goal, weight):
    try:
        return plan(master, robot, goal, weight)
    except StartBlocked:
        escape = escape_start(master, robot)
        if escape is None:
            raise
        path = plan(master, escape, goal, weight)
        path.waypoints.insert(0, robot.xy)
        return path


def _select_from(candidates, master, robot, weight):
    try:
        return select_goal(candidates, master, robot, weight)
    except StartBlocked:
        escape = escape_start(master, robot)
        if escape is None:
            raise NoFeasibleGoal("robot is boxed in") from None
        sel = select_goal(candidates, master, escape, weight)
        sel.path.waypoints.insert(0, robot.xy)
        return sel


def run_action(
    state: ActionState,
    robot: Pose2D,
    master: Costmap,
    tick: int,
    dt: float,
    person: PersonState | None = None,
    person_finished: bool = False,
    robot_radius: float = 0.25,
    max_speed: float = 0.3,
    weight: float = COST_WEIGHT,
) -> VelocityCommand:
    """Advance one action by one tick and return the velocity command.

    approach / goto_home pick a goal once and replan to it periodically; escort
    and follow re-select against the moving person at every replan.
    """
    if state.finished:
        return STOP
    if state.started_tick is None:
        state.started_tick = tick
    if (tick - state.started_tick) * dt >= FAIL_TIMEOUT:
        state.phase = "failed"
        state.detail = "timeout"
        return STOP

    def candidates():
        if state.kind in PERSONLESS:
            return [CandidateGoal(state.goal if state.kind == "goto" else state.home, 1)]
        return CANDIDATES[state.kind](person, robot_radius)

    dynamic = state.kind in ("escort", "follow")
    due = replan_policy(tick, state.last_plan_tick, dt, state.path, master)
    if due and (dynamic or state.phase == "selecting"):
        state.last_plan_tick = tick
        try:
            sel = _select_from(candidates(), master, robot, weight)
        except NoFeasibleGoal as exc:
            # keep tracking the previous goal, if any
            state.detail = str(exc)
        else:
            state.phase = "navigating"
            # the goal actually driven to is the candidate's cell center
            gx, gy = sel.path.goal
            state.chosen_goal = Pose2D(gx, gy, sel.candidate.pose.theta)
            state.path = sel.path
            if sel.candidate.rank != state.rank:
                state.rank_history.append((tick, sel.candidate.rank))
            state.rank = sel.candidate.rank
    elif due and state.phase == "navigating":
        state.last_plan_tick = tick
        try:
            state.path = _plan_from(master, robot, state.chosen_goal, weight)
        except PlanningError:
            pass
    if state.path is None:
        return STOP

    arrived = at_goal(state.path, robot)
    if arrived and (not dynamic or person_finished):
        state.phase = "done"
        return STOP
    return follow(state.path, robot, max_speed)

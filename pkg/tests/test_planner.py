import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from proxsim.grid import INSCRIBED, LETHAL, Costmap, Pose2D, world_to_cell
from proxsim.layers import LayerPipeline, WorldSnapshot
from proxsim.planner import (
    GOAL_TOL,
    MAX_ANGULAR,
    NoPath,
    Path,
    StartBlocked,
    VelocityCommand,
    at_goal,
    follow,
    path_blocked,
    plan,
    replan_policy,
)
from proxsim.proxemics import PersonState, builtin_profiles
from proxsim.sim import DT, WorldState, step

from oracles import dijkstra


def center(cm, col, row):
    return (cm.origin[0] + (col + 0.5) * cm.resolution, cm.origin[1] + (row + 0.5) * cm.resolution)


def random_costmap(rng, max_side=30):
    h, w = rng.integers(2, max_side + 1, size=2)
    cells = rng.integers(0, 253, size=(h, w))
    # sprinkle impassable cells and some zero-cost corridors
    cells[rng.random((h, w)) < rng.uniform(0, 0.35)] = rng.choice([INSCRIBED, LETHAL])
    cells[rng.random((h, w)) < 0.3] = 0
    return Costmap(int(w), int(h), 0.05, cells=cells.astype(np.uint8))


def check_path_shape(path, cm):
    cells = path.cells
    assert (cm.cells[cells[:, 0], cells[:, 1]] < INSCRIBED).all()
    steps = np.abs(np.diff(cells, axis=0))
    assert (steps.max(axis=1) == 1).all() if len(cells) > 1 else True
    for (x, y), (r, c) in zip(path.waypoints, cells):
        assert (x, y) == pytest.approx(center(cm, c, r))


def test_start_equals_goal():
    cm = Costmap(10, 10, 0.05)
    p = plan(cm, (0.2, 0.2), (0.21, 0.22))
    assert len(p) == 1 and p.total_cost == 0.0


def test_straight_line_on_empty_map():
    cm = Costmap(20, 20, 0.05)
    p = plan(cm, center(cm, 2, 5), center(cm, 17, 5))
    assert len(p) == 16
    assert p.length() == pytest.approx(0.75)
    assert p.total_cost == pytest.approx(0.75)


def test_errors():
    cm = Costmap(10, 10, 0.05)
    cm.cells[:, 5] = LETHAL
    with pytest.raises(NoPath):
        plan(cm, center(cm, 1, 1), center(cm, 8, 8))
    with pytest.raises(StartBlocked):
        plan(cm, center(cm, 5, 1), center(cm, 8, 8))
    with pytest.raises(NoPath):
        plan(cm, center(cm, 1, 1), center(cm, 5, 8))
    with pytest.raises(NoPath):
        plan(cm, center(cm, 1, 1), (5.0, 5.0))
    with pytest.raises(StartBlocked):
        plan(cm, (-1.0, 0.0), center(cm, 1, 1))
    cm.cells[:, 5] = INSCRIBED
    with pytest.raises(NoPath):
        plan(cm, center(cm, 1, 1), center(cm, 8, 8))


def test_goal_heading_kept():
    cm = Costmap(10, 10, 0.05)
    p = plan(cm, center(cm, 1, 1), Pose2D(*center(cm, 8, 8), 1.0))
    assert p.goal_theta == pytest.approx(1.0)
    assert plan(cm, center(cm, 1, 1), center(cm, 8, 8)).goal_theta is None


@pytest.mark.parametrize("seed", range(40))
def test_matches_dijkstra_on_random_maps(seed):
    rng = np.random.default_rng(seed)
    cm = random_costmap(rng)
    free = np.argwhere(cm.cells < INSCRIBED)
    if len(free) < 2:
        return
    (sr, sc), (gr, gc) = free[rng.choice(len(free), 2)]
    best = dijkstra(cm.cells, (sr, sc), (gr, gc), 0.05, 0.05)
    if math.isinf(best):
        with pytest.raises(NoPath):
            plan(cm, center(cm, sc, sr), center(cm, gc, gr))
        return
    p = plan(cm, center(cm, sc, sr), center(cm, gc, gr))
    assert p.total_cost == pytest.approx(best, rel=1e-12, abs=1e-9)
    check_path_shape(p, cm)
    # the reported cost is the sum of its own steps
    cells = p.cells
    recomputed = sum(
        (0.05 * math.sqrt(2) if (a != b).all() else 0.05) + 0.05 * int(cm.cells[b[0], b[1]])
        for a, b in zip(cells, cells[1:])
    )
    assert p.total_cost == pytest.approx(recomputed, rel=1e-12, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 252))
def test_raising_a_cost_never_lowers_the_optimum(seed, bump):
    rng = np.random.default_rng(seed)
    cm = random_costmap(rng, 15)
    free = np.argwhere(cm.cells < INSCRIBED)
    if len(free) < 2:
        return
    (sr, sc), (gr, gc) = free[rng.choice(len(free), 2)]
    try:
        before = plan(cm, center(cm, sc, sr), center(cm, gc, gr)).total_cost
    except NoPath:
        return
    r, c = free[rng.integers(len(free))]
    if (r, c) in ((sr, sc), (gr, gc)):
        return
    cm.cells[r, c] = max(int(cm.cells[r, c]), bump)
    try:
        after = plan(cm, center(cm, sc, sr), center(cm, gc, gr)).total_cost
    except NoPath:
        after = math.inf
    assert after >= before - 1e-12


def test_cooking_person_is_passed_behind():
    occ = np.zeros((120, 200), bool)
    occ[110:, 60:140] = True  # counter in front of the cook
    pipe = LayerPipeline.for_mode("social", occ, 0.05)
    cook = PersonState("c", Pose2D(5.0, 4.6, math.pi / 2), builtin_profiles()["cooking"])
    master = pipe.run(WorldSnapshot([cook]))
    path = plan(master, (1.0, 4.6), (9.0, 4.6))
    pts = np.array(path.waypoints)
    near = np.hypot(pts[:, 0] - 5.0, pts[:, 1] - 4.6) <= 1.5
    assert near.any()
    # rear half-plane of a person facing +y is y < 4.6
    assert (pts[near, 1] < 4.6).all()


# -- controller -----------------------------------------------------------------


def test_follow_at_goal_stops():
    path = Path([(0.0, 0.0), (1.0, 0.0)], 1.0, goal_theta=0.2)
    assert follow(path, Pose2D(0.95, 0.05, 0.0), 0.3) == VelocityCommand(0.0, 0.0)
    assert at_goal(path, Pose2D(0.95, 0.05, 0.0))
    cmd = follow(path, Pose2D(0.95, 0.05, 1.0), 0.3)
    assert cmd.linear == 0.0 and cmd.angular == pytest.approx(-1.0)
    assert not at_goal(path, Pose2D(0.95, 0.05, 1.0))
    assert follow(Path([], 0.0), Pose2D(0, 0, 0), 0.3) == VelocityCommand()


def test_follow_straight_ahead():
    path = Path([(x, 0.0) for x in np.arange(0, 3.0, 0.05)], 0.0)
    cmd = follow(path, Pose2D(0.0, 0.0, 0.0), 0.3)
    assert cmd.angular == 0.0 and cmd.linear == pytest.approx(0.3)


def test_follow_waypoint_behind():
    path = Path([(-x, 0.0) for x in np.arange(0, 3.0, 0.05)], 0.0)
    cmd = follow(path, Pose2D(0.0, 0.0, 0.0), 0.3)
    assert abs(cmd.angular) == MAX_ANGULAR
    assert cmd.linear == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=200)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-math.pi, math.pi), st.floats(0.05, 1.0))
def test_command_bounds(x, y, th, vmax):
    path = Path([(0.0, 0.0), (0.05, 0.05), (1.0, 1.0)], 0.0)
    cmd = follow(path, Pose2D(x, y, th), vmax)
    assert 0.0 <= cmd.linear <= vmax + 1e-12
    assert abs(cmd.angular) <= MAX_ANGULAR


def test_replan_policy():
    assert replan_policy(0, None, DT)
    assert not replan_policy(11, 10, DT)
    assert replan_policy(20, 10, DT)
    cm = Costmap(20, 20, 0.05)
    p = plan(cm, center(cm, 1, 1), center(cm, 18, 1))
    assert not replan_policy(11, 10, DT, p, cm)
    blocked = cm.copy()
    blocked.cells[1, 9] = LETHAL  # a person steps onto the path
    assert path_blocked(p, blocked)
    assert replan_policy(11, 10, DT, p, blocked)
    blocked.cells[1, 9] = INSCRIBED
    assert not path_blocked(p, blocked)


@pytest.mark.parametrize("goal", [(3.0, 1.0), (1.0, 3.2), (0.4, 0.4), (3.5, 3.5), (0.3, 3.6)])
def test_controller_liveness(goal):
    occ = np.zeros((80, 80), bool)
    start = Pose2D(2.0, 2.0, 0.5)
    cm = Costmap(80, 80, 0.05)
    path = plan(cm, start, goal)
    budget = max(2 * path.length() / 0.3, DT)
    world = WorldState(start, occ, 0.05)
    for _ in range(int(math.ceil(budget / DT)) + 1):
        if math.hypot(world.robot.x - path.goal[0], world.robot.y - path.goal[1]) <= GOAL_TOL:
            break
        world = step(world, follow(path, world.robot, 0.3))
    assert math.hypot(world.robot.x - path.goal[0], world.robot.y - path.goal[1]) <= GOAL_TOL


def test_planned_cells_are_inside_map():
    cm = Costmap(30, 30, 0.05, (1.0, -2.0))
    p = plan(cm, (1.1, -1.9), (2.4, -0.6))
    for w in p.waypoints:
        world_to_cell(cm, w)

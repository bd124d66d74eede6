import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from proxsim.grid import (
    LETHAL,
    CellIndex,
    Costmap,
    OutOfBounds,
    Pose2D,
    cell_to_world_center,
    max_combine,
    normalize_angle,
    raycast_cells,
    read_pgm,
    round_cost,
    snapshot_path,
    world_to_cell,
    write_pgm,
)


def test_world_to_cell_examples():
    cm = Costmap(100, 100, 0.05)
    assert world_to_cell(cm, (0.0, 0.0)) == CellIndex(0, 0)
    assert world_to_cell(cm, (1.0, 2.0)) == CellIndex(20, 40)
    cm = Costmap(30, 30, 0.1, (-1.0, -1.0))
    with pytest.raises(OutOfBounds):
        world_to_cell(cm, (-1.05, 0.0))


def test_world_to_cell_upper_edge_is_out_of_bounds():
    cm = Costmap(10, 10, 0.1)
    assert world_to_cell(cm, (0.999, 0.999)) == CellIndex(9, 9)
    with pytest.raises(OutOfBounds):
        world_to_cell(cm, (1.0, 0.5))


def test_cell_to_world_center_examples():
    assert cell_to_world_center(Costmap(10, 10, 0.05), (0, 0)) == pytest.approx((0.025, 0.025))
    assert cell_to_world_center(Costmap(10, 10, 0.1), (9, 9)) == pytest.approx((0.95, 0.95))
    with pytest.raises(OutOfBounds):
        cell_to_world_center(Costmap(10, 10, 0.1), (10, 0))


def test_round_trip_exhaustive_50x50():
    cm = Costmap(50, 50, 0.05, (-1.3, 0.7))
    for col in range(50):
        for row in range(50):
            assert world_to_cell(cm, cell_to_world_center(cm, (col, row))) == (col, row)


def test_max_combine_examples():
    assert max_combine(0, 100) == 100
    assert max_combine(254, 10) == 254
    assert max_combine(200, 200) == 200


@given(st.lists(st.integers(0, 254), min_size=1, max_size=8), st.randoms())
def test_max_combine_order_free(values, rnd):
    a = 0
    for v in values:
        a = max_combine(a, v)
    shuffled = list(values)
    rnd.shuffle(shuffled)
    b = 0
    for v in shuffled:
        b = max_combine(b, v)
    assert a == b == max(values)
    assert max_combine(a, a) == a


def test_costmap_validation():
    with pytest.raises(ValueError):
        Costmap(0, 5, 0.05)
    with pytest.raises(ValueError):
        Costmap(5, 5, 0.0)
    with pytest.raises(ValueError):
        Costmap(2, 2, 0.05, cells=np.zeros(3))
    with pytest.raises(ValueError):
        Costmap(2, 2, 0.05, cells=np.array([0, 0, 0, 300]))
    cm = Costmap(3, 2, 0.05, cells=[0, 1, 2, 3, 4, 254])
    assert cm.cells.dtype == np.uint8 and cm.shape == (2, 3)
    assert cm.cells[1, 2] == LETHAL


def test_pose_theta_is_normalized():
    assert Pose2D(0, 0, 3 * math.pi).theta == pytest.approx(math.pi)
    assert Pose2D(0, 0, -math.pi).theta == pytest.approx(math.pi)
    assert Pose2D(0, 0, 2 * math.pi).theta == pytest.approx(0.0)


@given(st.floats(-100, 100, allow_nan=False))
def test_normalize_angle_range(a):
    n = normalize_angle(a)
    assert -math.pi < n <= math.pi
    assert math.isclose(math.cos(n), math.cos(a), abs_tol=1e-9)
    assert math.isclose(math.sin(n), math.sin(a), abs_tol=1e-9)


def test_round_cost_is_half_up():
    assert round_cost(126.0) == 126
    assert round_cost(0.5) == 1
    assert round_cost(1.5) == 2
    assert round_cost(2.5) == 3
    assert list(round_cost([0.49, 252.0])) == [0, 252]


def test_raycast_examples():
    cm = Costmap(40, 40, 0.05)
    assert raycast_cells(cm, (0.51, 0.51), (0.52, 0.52)) == [CellIndex(10, 10)]
    line = raycast_cells(cm, (0.025, 0.525), (0.525, 0.525))
    assert len(line) == 11
    assert all(c.row == 10 for c in line)
    assert [c.col for c in line] == list(range(11))


def _segment_distance(p, a, b):
    ax, ay = a
    bx, by = b
    vx, vy = bx - ax, by - ay
    L2 = vx * vx + vy * vy
    t = 0.0 if L2 == 0 else max(0.0, min(1.0, ((p[0] - ax) * vx + (p[1] - ay) * vy) / L2))
    return math.hypot(p[0] - ax - t * vx, p[1] - ay - t * vy)


coord = st.floats(0.0, 1.99, allow_nan=False)


@settings(max_examples=200)
@given(coord, coord, coord, coord)
def test_raycast_properties(x0, y0, x1, y1):
    cm = Costmap(40, 40, 0.05)
    line = raycast_cells(cm, (x0, y0), (x1, y1))
    assert line[0] == world_to_cell(cm, (x0, y0))
    assert line[-1] == world_to_cell(cm, (x1, y1))
    assert len(set(line)) == len(line)
    for a, b in zip(line, line[1:]):
        assert max(abs(a.col - b.col), abs(a.row - b.row)) == 1
    # centers stay close to the segment joining the endpoint cell centers
    a = cell_to_world_center(cm, line[0])
    b = cell_to_world_center(cm, line[-1])
    for c in line:
        assert _segment_distance(cell_to_world_center(cm, c), a, b) <= 0.05 * math.sqrt(2)
    assert set(raycast_cells(cm, (x1, y1), (x0, y0))) == set(line)


def test_pgm_round_trip(tmp_path):
    cells = np.arange(12, dtype=np.uint8).reshape(3, 4) * 20
    cm = Costmap(4, 3, 0.05, cells=cells)
    path = write_pgm(cm, tmp_path / "m.pgm")
    assert path.read_bytes().startswith(b"P5\n4 3\n255\n")
    img = read_pgm(path)
    # image rows are top-down, map rows bottom-up
    np.testing.assert_array_equal(img[::-1], cells)


def test_read_ascii_pgm_with_comment(tmp_path):
    p = tmp_path / "a.pgm"
    p.write_text("P2\n# made by hand\n3 2\n255\n0 1 2\n3 4 5\n")
    np.testing.assert_array_equal(read_pgm(p), [[0, 1, 2], [3, 4, 5]])


def test_snapshot_path():
    assert snapshot_path("out/social_it000", 40).name == "social_it000_40.pgm"

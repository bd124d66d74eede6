"""Layered costmap: static -> obstacle -> people filter -> inflation -> social.

Each tick the working map is rebuilt from FREE and every enabled stage writes
into it in order. Static, obstacle, inflation and social writes max-combine;
the people filter is the only stage that lowers costs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from proxsim import _kernels
from proxsim.grid import FREE, INSCRIBED, LETHAL, MAX_PENALTY, Costmap, Pose2D, round_cost
from proxsim.proxemics import (
    PersonState,
    cooperation_mask,
    gaussian_field,
    support_radius,
)

ROBOT_RADIUS = 0.25
DECAY_RADIUS = 1.0
INFLATION_GAIN = 3.0
SOCIAL_CUTOFF = 0.05
STAGE_ORDER = ("static", "obstacle", "people_filter", "inflation", "social")

# distance comparisons at zone/inflation boundaries
_DIST_EPS = 1e-9


class DimensionMismatch(ValueError):
    pass


@dataclass
class SensorScan:
    origin: Pose2D
    bearings: np.ndarray
    ranges: np.ndarray
    hits: np.ndarray
    max_range: float

    @property
    def beams(self) -> list[tuple[float, float, bool]]:
        return [(float(b), float(r), bool(h)) for b, r, h in zip(self.bearings, self.ranges, self.hits)]


@dataclass
class WorldSnapshot:
    """Everything the pipeline reads in one tick."""

    persons: list[PersonState] = field(default_factory=list)
    scan: SensorScan | None = None


# -- stage operations -------------------------------------------------------


def static_update(occupancy: np.ndarray, working: Costmap) -> None:
    occupancy = np.asarray(occupancy, dtype=bool)
    if occupancy.shape != working.shape:
        raise DimensionMismatch(f"map definition is {occupancy.shape}, working map is {working.shape}")
    working.cells[occupancy] = LETHAL


def obstacle_update(scan: SensorScan, working: Costmap, buffer: np.ndarray | None = None) -> np.ndarray:
    """Clear traversed cells and mark beam endpoints in ``buffer``, then apply it.

    The buffer is a boolean obstacle memory that persists across ticks; pass
    the returned array back in on the next call.
    """
    if buffer is None:
        buffer = np.zeros(working.shape, dtype=bool)
    o = scan.origin
    _kernels.mark_and_clear(
        buffer,
        working.origin[0],
        working.origin[1],
        working.resolution,
        o.x,
        o.y,
        o.theta,
        np.asarray(scan.bearings, dtype=float),
        np.asarray(scan.ranges, dtype=float),
        np.asarray(scan.hits, dtype=bool),
    )
    working.cells[buffer] = LETHAL
    return buffer


def people_filter_update(persons, working: Costmap, robot_radius: float = ROBOT_RADIUS) -> None:
    for p in persons:
        r = p.profile.intimate_radius + robot_radius
        box = _box(working, p.pose.x, p.pose.y, r)
        if box is None:
            continue
        gx, gy = _box_centers(working, box)
        near = np.hypot(gx - p.pose.x, gy - p.pose.y) <= r + _DIST_EPS
        working.cells[box[0] : box[1], box[2] : box[3]][near] = FREE


def inflation_lut(resolution: float, robot_radius: float, decay_radius: float) -> np.ndarray:
    """Cost by squared cell distance to the nearest lethal cell.

    The last entry is 0 and serves every distance beyond ``decay_radius``.
    """
    kmax = int(math.ceil(decay_radius / resolution))
    q = np.arange(kmax * kmax + 2)
    d = np.sqrt(q) * resolution
    decayed = round_cost(MAX_PENALTY * np.exp(-INFLATION_GAIN * (d - robot_radius)))
    lut = np.where(d <= decay_radius + _DIST_EPS, decayed, 0)
    lut = np.where(d <= robot_radius + _DIST_EPS, INSCRIBED, lut)
    lut[-1] = 0
    return lut.astype(np.uint8)


def _squared_distance_to(mask: np.ndarray, cap: int) -> np.ndarray:
    """Exact squared cell distance to the nearest True cell, clipped to ``cap``."""
    if not mask.any():
        return np.full(mask.shape, cap, dtype=np.int64)
    _, (ir, ic) = ndimage.distance_transform_edt(~mask, return_indices=True)
    rows, cols = np.indices(mask.shape)
    d2 = (rows - ir) ** 2 + (cols - ic) ** 2
    return np.minimum(d2, cap)


def inflation_update(
    working: Costmap, robot_radius: float = ROBOT_RADIUS, decay_radius: float = DECAY_RADIUS
) -> None:
    if robot_radius >= decay_radius:
        raise ValueError("robot_radius must be below decay_radius")
    lethal = working.cells == LETHAL
    if not lethal.any():
        return
    lut = inflation_lut(working.resolution, robot_radius, decay_radius)
    d2 = _squared_distance_to(lethal, len(lut) - 1)
    np.maximum(working.cells, lut[d2], out=working.cells)


def _box(costmap: Costmap, x: float, y: float, radius: float):
    """Row/col slice bounds of cells whose centers may lie within ``radius``."""
    res = costmap.resolution
    c0 = max(0, int(math.floor((x - radius - costmap.origin[0]) / res)))
    c1 = min(costmap.width, int(math.floor((x + radius - costmap.origin[0]) / res)) + 1)
    r0 = max(0, int(math.floor((y - radius - costmap.origin[1]) / res)))
    r1 = min(costmap.height, int(math.floor((y + radius - costmap.origin[1]) / res)) + 1)
    if c0 >= c1 or r0 >= r1:
        return None
    return r0, r1, c0, c1


def _box_centers(costmap: Costmap, box):
    r0, r1, c0, c1 = box
    res = costmap.resolution
    xs = costmap.origin[0] + (np.arange(c0, c1) + 0.5) * res
    ys = costmap.origin[1] + (np.arange(r0, r1) + 0.5) * res
    return np.meshgrid(xs, ys)


def person_stamp(person: PersonState, costmap: Costmap):
    """Social costs of one person over its bounding box.

    Returns ``(r0, r1, c0, c1, values)`` or None when the box is off-map.
    ``values`` is LETHAL on the intimate disc, 0 inside cooperation wedges and
    where the field is below the cutoff, round(252 * g) elsewhere, so the
    stamp can be max-combined directly.
    """
    radius = max(support_radius(person, SOCIAL_CUTOFF), person.profile.intimate_radius)
    box = _box(costmap, person.pose.x, person.pose.y, radius)
    if box is None:
        return None
    r0, r1, c0, c1 = box
    gx, gy = _box_centers(costmap, box)
    g = gaussian_field(person, gx, gy)
    values = np.where(g >= SOCIAL_CUTOFF, round_cost(MAX_PENALTY * g), 0)
    dist = np.hypot(gx - person.pose.x, gy - person.pose.y)
    values[dist <= person.profile.intimate_radius] = LETHAL
    values[cooperation_mask(person, gx, gy)] = 0
    return r0, r1, c0, c1, values.astype(np.uint8)


def social_update(persons, working: Costmap, _cache: dict | None = None) -> None:
    for p in persons:
        stamp = None
        if _cache is not None:
            stamp = _cache.get(p)
        if stamp is None:
            stamp = person_stamp(p, working)
            if _cache is not None:
                if len(_cache) > 256:
                    _cache.clear()
                _cache[p] = stamp
        if stamp is None:
            continue
        r0, r1, c0, c1, values = stamp
        sub = working.cells[r0:r1, c0:c1]
        np.maximum(sub, values, out=sub)


# -- pipeline ---------------------------------------------------------------

MODES = {
    # mode: (people_filter, social, strip cooperation zones)
    "social": (True, True, False),
    "baseline": (False, False, False),
    "nocoop": (True, True, True),
}


class LayerPipeline:
    """Ordered costmap stages producing a master map per tick.

    The obstacle buffer is the only state kept between ticks; ``reset`` drops
    it. Inflation reuses a precomputed distance field for the static map
    whenever no static obstacle has been filtered away this tick.
    """

    def __init__(
        self,
        occupancy: np.ndarray,
        resolution: float,
        origin=(0.0, 0.0),
        robot_radius: float = ROBOT_RADIUS,
        decay_radius: float = DECAY_RADIUS,
        enabled: dict[str, bool] | None = None,
        order=STAGE_ORDER,
        strip_cooperation: bool = False,
    ):
        self.occupancy = np.asarray(occupancy, dtype=bool)
        h, w = self.occupancy.shape
        self.template = Costmap(w, h, resolution, origin)
        self.robot_radius = robot_radius
        self.decay_radius = decay_radius
        if robot_radius >= decay_radius:
            raise ValueError("robot_radius must be below decay_radius")
        if sorted(order) != sorted(STAGE_ORDER):
            raise ValueError(f"order must be a permutation of {STAGE_ORDER}")
        self.order = tuple(order)
        self.enabled = {name: True for name in STAGE_ORDER}
        self.enabled.update(enabled or {})
        self.strip_cooperation = strip_cooperation
        self._lut = inflation_lut(resolution, robot_radius, decay_radius)
        self._cap = len(self._lut) - 1
        self._kmax = int(math.ceil(decay_radius / resolution))
        self._static_d2 = _squared_distance_to(self.occupancy, self._cap)
        self._static_cells = np.where(self.occupancy, LETHAL, FREE).astype(np.uint8)
        self._stamp_cache: dict = {}
        self.reset()

    @classmethod
    def for_mode(cls, mode: str, occupancy, resolution, origin=(0.0, 0.0), enabled=None, **kw):
        try:
            people_filter, social, strip = MODES[mode]
        except KeyError:
            raise ValueError(f"unknown mode {mode!r}; expected one of {sorted(MODES)}") from None
        flags = dict(enabled or {})
        flags["people_filter"] = flags.get("people_filter", True) and people_filter
        flags["social"] = flags.get("social", True) and social
        return cls(occupancy, resolution, origin, enabled=flags, strip_cooperation=strip, **kw)

    def reset(self) -> None:
        self.buffer = np.zeros(self.occupancy.shape, dtype=bool)

    def _persons(self, snapshot: WorldSnapshot):
        if not self.strip_cooperation:
            return snapshot.persons
        return [p.with_profile(p.profile.without_cooperation()) for p in snapshot.persons]

    def _inflate(self, working: Costmap) -> None:
        ok = _kernels.inflate_from_static(working.cells, self.occupancy, self._static_d2, self._lut, self._kmax)
        if not ok:
            # a static cell was filtered away: full distance transform
            d2 = _squared_distance_to(working.cells == LETHAL, self._cap)
            np.maximum(working.cells, self._lut[d2], out=working.cells)

    def run(self, snapshot: WorldSnapshot) -> Costmap:
        """Compose this tick's master map (read-only)."""
        working = Costmap.like(self.template)
        cells = working.cells
        for name in self.order:
            if not self.enabled[name]:
                continue
            if name == "static":
                np.maximum(cells, self._static_cells, out=cells)
            elif name == "obstacle":
                if snapshot.scan is not None:
                    sc = snapshot.scan
                    o = sc.origin
                    _kernels.mark_and_clear(
                        self.buffer, working.origin[0], working.origin[1], working.resolution,
                        o.x, o.y, o.theta, sc.bearings, sc.ranges, sc.hits,
                    )
                    _kernels.set_where(cells, self.buffer, LETHAL)
            elif name == "people_filter":
                if snapshot.persons:
                    px = np.array([p.pose.x for p in snapshot.persons])
                    py = np.array([p.pose.y for p in snapshot.persons])
                    rad = np.array([p.profile.intimate_radius + self.robot_radius for p in snapshot.persons])
                    _kernels.clear_discs(
                        cells, working.origin[0], working.origin[1], working.resolution, px, py, rad, _DIST_EPS
                    )
            elif name == "inflation":
                self._inflate(working)
            elif name == "social":
                social_update(self._persons(snapshot), working, self._stamp_cache)
        cells.flags.writeable = False
        return working

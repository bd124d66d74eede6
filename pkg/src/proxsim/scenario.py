"""Scenario files: YAML text with ``scenario_version: 1``.

A scenario fixes the map, the robot, the scripted people, the action list and
the experiment protocol (iterations, seed, modes). See the README for the full
field reference; every field except ``map`` and ``robot`` has a default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from proxsim.actions import ACTION_KINDS, PERSONLESS
from proxsim.grid import Pose2D, read_pgm
from proxsim.layers import MODES, ROBOT_RADIUS, STAGE_ORDER
from proxsim.proxemics import (
    DEFAULT_INTIMATE_RADIUS,
    DEFAULT_PERSONAL_RADIUS,
    DEFAULT_WEDGE_HALF_WIDTH,
    ActivityProfile,
    CooperationZoneSpec,
    builtin_profiles,
)
from proxsim.sim import ORIENTATION_MODES, PedestrianScript

SCENARIO_VERSION = 1
DEFAULT_RESOLUTION = 0.05
DEFAULT_MAX_SPEED = 0.3
BUNDLED = ("approach", "escort_door", "follow", "cooking_passby", "bathroom")


class ScenarioError(Exception):
    pass


class ParseError(ScenarioError):
    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        where = f"{source or '<scenario>'}" + (f":{line}" if line is not None else "")
        super().__init__(f"{where}: {message}")


class ValidationError(ScenarioError):
    def __init__(self, problems: list[str], source: str | None = None):
        self.problems = list(problems)
        head = f"{source or '<scenario>'}: {len(self.problems)} problem(s)"
        super().__init__("\n  ".join([head, *self.problems]))


@dataclass
class MapConfig:
    resolution: float
    occupancy: np.ndarray  # bool, row 0 = bottom
    origin: tuple[float, float] = (0.0, 0.0)
    cell_scale: int = 1
    source_rows: list[str] | None = None

    @property
    def width_m(self) -> float:
        return self.occupancy.shape[1] * self.resolution

    @property
    def height_m(self) -> float:
        return self.occupancy.shape[0] * self.resolution


@dataclass
class RobotConfig:
    start: Pose2D
    radius: float = ROBOT_RADIUS
    max_speed: float = DEFAULT_MAX_SPEED
    start_jitter: float = 0.0


@dataclass
class PersonConfig:
    id: str
    script: PedestrianScript
    activity: str = "standing"
    profile_overrides: dict = field(default_factory=dict)


@dataclass
class ActionConfig:
    kind: str
    target: str | None = None
    params: dict = field(default_factory=dict)


@dataclass
class ScenarioConfig:
    name: str
    map: MapConfig
    robot: RobotConfig
    persons: list[PersonConfig] = field(default_factory=list)
    actions: list[ActionConfig] = field(default_factory=list)
    intimate_radius: float = DEFAULT_INTIMATE_RADIUS
    personal_radius: float = DEFAULT_PERSONAL_RADIUS
    iterations: int = 1
    seed: int = 0
    modes: list[str] = field(default_factory=lambda: ["social", "baseline"])
    layers: dict[str, bool] = field(default_factory=dict)
    profiles: dict[str, ActivityProfile] = field(default_factory=dict)
    regions: dict[str, tuple[float, float, float, float]] = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False)
    path: Path | None = None

    def profile_for(self, person: PersonConfig) -> ActivityProfile:
        base = self.profiles[person.activity]
        if person.profile_overrides:
            base = replace(base, **person.profile_overrides)
        return base

    def with_overrides(self, iterations=None, seed=None, modes=None) -> ScenarioConfig:
        out = replace(self)
        if iterations is not None:
            if iterations < 1:
                raise ValidationError([f"iterations: must be >= 1, got {iterations}"])
            out.iterations = iterations
        if seed is not None:
            out.seed = seed
        if modes is not None:
            bad = [m for m in modes if m not in MODES]
            if bad or not modes:
                raise ValidationError([f"modes: unknown mode(s) {bad}; choose from {sorted(MODES)}"])
            out.modes = list(modes)
        return out


_TOP_KEYS = {
    "scenario_version", "name", "map", "robot", "persons", "actions", "radii",
    "iterations", "seed", "modes", "layers", "profiles", "regions",
}


class _Checker:
    """Collects every validation problem instead of stopping at the first."""

    def __init__(self):
        self.problems: list[str] = []

    def fail(self, where: str, msg: str):
        self.problems.append(f"{where}: {msg}")

    def mapping(self, value, where) -> dict:
        if value is None:
            return {}
        if not isinstance(value, dict):
            self.fail(where, f"expected a mapping, got {type(value).__name__}")
            return {}
        return value

    def unknown(self, d: dict, allowed: set, where: str):
        for k in d:
            if k not in allowed:
                self.fail(f"{where}.{k}" if where else str(k), "unknown field")

    def number(self, d, key, where, default=None, positive=False, minimum=None):
        if key not in d or d[key] is None:
            if default is None:
                self.fail(f"{where}.{key}", "required")
            return default
        v = d[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(f"{where}.{key}", f"expected a number, got {v!r}")
            return default
        v = float(v)
        if not math.isfinite(v):
            self.fail(f"{where}.{key}", "must be finite")
        if positive and not v > 0:
            self.fail(f"{where}.{key}", f"must be > 0, got {v}")
        if minimum is not None and v < minimum:
            self.fail(f"{where}.{key}", f"must be >= {minimum}, got {v}")
        return v

    def point(self, v, where, n=2):
        ok = (
            isinstance(v, (list, tuple))
            and len(v) in (n, 2)
            and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v)
        )
        if not ok:
            self.fail(where, f"expected [x, y{', theta' if n == 3 else ''}], got {v!r}")
            return None
        return tuple(float(c) for c in v)


def _parse_map(c: _Checker, m: dict, base_dir: Path | None) -> MapConfig | None:
    c.unknown(m, {"resolution", "origin", "ascii_rows", "ascii_cell", "pgm_path", "occupied_threshold"}, "map")
    res = c.number(m, "resolution", "map", default=DEFAULT_RESOLUTION, positive=True)
    origin = c.point(m.get("origin", [0.0, 0.0]), "map.origin") or (0.0, 0.0)
    has_ascii, has_pgm = "ascii_rows" in m, "pgm_path" in m
    if has_ascii == has_pgm:
        c.fail("map", "give exactly one of ascii_rows or pgm_path")
        return None
    scale = 1
    rows = None
    if has_ascii:
        rows = m["ascii_rows"]
        if not isinstance(rows, list) or not rows or not all(isinstance(r, str) for r in rows):
            c.fail("map.ascii_rows", "expected a non-empty list of strings")
            return None
        if len({len(r) for r in rows}) != 1 or not rows[0]:
            c.fail("map.ascii_rows", "all rows must have the same non-zero length")
            return None
        bad = sorted({ch for r in rows for ch in r} - {"#", "."})
        if bad:
            c.fail("map.ascii_rows", f"unexpected characters {bad}; use '#' and '.'")
            return None
        cell = c.number(m, "ascii_cell", "map", default=res, positive=True)
        ratio = cell / res
        scale = int(round(ratio))
        if scale < 1 or abs(ratio - scale) > 1e-6:
            c.fail("map.ascii_cell", f"must be a whole multiple of resolution {res}")
            return None
        top_down = np.array([[ch == "#" for ch in r] for r in rows], dtype=bool)
        occ = np.kron(top_down[::-1], np.ones((scale, scale), dtype=bool))
    else:
        pgm = Path(m["pgm_path"])
        if base_dir is not None and not pgm.is_absolute():
            pgm = base_dir / pgm
        thr = c.number(m, "occupied_threshold", "map", default=128.0, minimum=0)
        try:
            img = read_pgm(pgm)
        except (OSError, ValueError) as exc:
            c.fail("map.pgm_path", str(exc))
            return None
        occ = (img < thr)[::-1]
    return MapConfig(res, np.ascontiguousarray(occ), origin, scale, rows)


def _parse_zone(c: _Checker, z, where, intimate, personal) -> CooperationZoneSpec | None:
    z = c.mapping(z, where)
    c.unknown(z, {"bearing", "half_width", "outer_radius"}, where)
    bearing = c.number(z, "bearing", where)
    hw = c.number(z, "half_width", where, default=DEFAULT_WEDGE_HALF_WIDTH, positive=True)
    outer = c.number(z, "outer_radius", where, default=personal, positive=True)
    if bearing is None:
        return None
    return CooperationZoneSpec(bearing, hw, intimate, outer)


_PROFILE_FIELDS = {"sigma_h", "sigma_s", "sigma_r", "theta_offset", "orientation_known", "cooperation_zones"}


def _parse_profiles(c: _Checker, raw: dict, intimate, personal) -> dict[str, ActivityProfile]:
    profiles = {k: v.with_radii(intimate, personal) for k, v in builtin_profiles().items()}
    for name, entry in raw.items():
        where = f"profiles.{name}"
        entry = c.mapping(entry, where)
        c.unknown(entry, _PROFILE_FIELDS, where)
        base = profiles.get(name)
        kw = {}
        for key in ("sigma_h", "sigma_s", "sigma_r"):
            if key in entry or base is None:
                kw[key] = c.number(entry, key, where, positive=True)
        if "theta_offset" in entry:
            kw["theta_offset"] = c.number(entry, "theta_offset", where)
        if "orientation_known" in entry:
            kw["orientation_known"] = bool(entry["orientation_known"])
        if "cooperation_zones" in entry:
            zones = entry["cooperation_zones"] or []
            if not isinstance(zones, list):
                c.fail(f"{where}.cooperation_zones", "expected a list")
                zones = []
            kw["cooperation_zones"] = tuple(
                zone for i, raw_zone in enumerate(zones)
                if (zone := _parse_zone(c, raw_zone, f"{where}.cooperation_zones[{i}]", intimate, personal))
            )
        if any(v is None for v in kw.values()):
            continue
        try:
            if base is None:
                profiles[name] = ActivityProfile(
                    name, intimate_radius=intimate, personal_radius=personal, **kw
                )
            else:
                profiles[name] = replace(base, **kw)
        except ValueError as exc:
            c.fail(where, str(exc))
    return profiles


def _parse_person(c: _Checker, p, i: int) -> PersonConfig | None:
    where = f"persons[{i}]"
    p = c.mapping(p, where)
    c.unknown(p, {"id", "script", "activity", "profile_overrides"}, where)
    pid = p.get("id")
    if not isinstance(pid, str) or not pid:
        c.fail(f"{where}.id", "required string")
        return None
    s = c.mapping(p.get("script"), f"{where}.script")
    sw = f"{where}.script"
    c.unknown(s, {"waypoints", "speed", "loop", "orientation_mode", "heading", "start_delay"}, sw)
    wps = s.get("waypoints")
    if not isinstance(wps, list) or not wps:
        c.fail(f"{sw}.waypoints", "expected a non-empty list of [x, y]")
        return None
    pts = [c.point(w, f"{sw}.waypoints[{j}]") for j, w in enumerate(wps)]
    if any(pt is None for pt in pts):
        return None
    mode = s.get("orientation_mode", "face-motion")
    if mode not in ORIENTATION_MODES:
        c.fail(f"{sw}.orientation_mode", f"expected one of {list(ORIENTATION_MODES)}, got {mode!r}")
        return None
    script = PedestrianScript(
        waypoints=tuple(pt[:2] for pt in pts),
        speed=c.number(s, "speed", sw, default=0.0, minimum=0.0),
        loop=bool(s.get("loop", False)),
        orientation_mode=mode,
        heading=c.number(s, "heading", sw, default=0.0),
        start_delay=c.number(s, "start_delay", sw, default=0.0, minimum=0.0),
    )
    overrides = c.mapping(p.get("profile_overrides"), f"{where}.profile_overrides")
    c.unknown(overrides, _PROFILE_FIELDS - {"cooperation_zones"}, f"{where}.profile_overrides")
    return PersonConfig(pid, script, p.get("activity", "standing"), dict(overrides))


def parse_scenario(data, source: str | None = None, base_dir: Path | None = None) -> ScenarioConfig:
    """Validate an already-loaded mapping and fill in defaults."""
    c = _Checker()
    if not isinstance(data, dict):
        raise ValidationError(["<root>: expected a mapping"], source)
    c.unknown(data, _TOP_KEYS, "")
    version = data.get("scenario_version")
    if version != SCENARIO_VERSION:
        c.fail("scenario_version", f"must be {SCENARIO_VERSION}, got {version!r}")

    radii = c.mapping(data.get("radii"), "radii")
    c.unknown(radii, {"intimate", "personal"}, "radii")
    intimate = c.number(radii, "intimate", "radii", default=DEFAULT_INTIMATE_RADIUS, positive=True)
    personal = c.number(radii, "personal", "radii", default=DEFAULT_PERSONAL_RADIUS, positive=True)
    if intimate >= personal:
        c.fail("radii", "intimate must be smaller than personal")
        # keep validating the rest against the default ring
        intimate, personal = DEFAULT_INTIMATE_RADIUS, DEFAULT_PERSONAL_RADIUS

    if "map" not in data:
        c.fail("map", "required")
        map_cfg = None
    else:
        map_cfg = _parse_map(c, c.mapping(data["map"], "map"), base_dir)

    robot_raw = c.mapping(data.get("robot"), "robot")
    if "robot" not in data:
        c.fail("robot", "required")
    c.unknown(robot_raw, {"start", "radius", "max_speed", "start_jitter"}, "robot")
    start = c.point(robot_raw.get("start"), "robot.start", n=3) if "robot" in data else None
    robot = RobotConfig(
        Pose2D(*start) if start else Pose2D(0, 0),
        radius=c.number(robot_raw, "radius", "robot", default=ROBOT_RADIUS, positive=True),
        max_speed=c.number(robot_raw, "max_speed", "robot", default=DEFAULT_MAX_SPEED, positive=True),
        start_jitter=c.number(robot_raw, "start_jitter", "robot", default=0.0, minimum=0.0),
    )

    profiles = _parse_profiles(c, c.mapping(data.get("profiles"), "profiles"), intimate, personal)

    persons_raw = data.get("persons") or []
    if not isinstance(persons_raw, list):
        c.fail("persons", "expected a list")
        persons_raw = []
    persons = [pc for i, p in enumerate(persons_raw) if (pc := _parse_person(c, p, i))]
    ids = [p.id for p in persons]
    if len(set(ids)) != len(ids):
        c.fail("persons", f"duplicate ids in {ids}")
    for i, p in enumerate(persons):
        if p.activity not in profiles:
            c.fail(f"persons[{i}].activity", f"unknown activity {p.activity!r}; known: {sorted(profiles)}")
        elif p.profile_overrides:
            try:
                replace(profiles[p.activity], **p.profile_overrides)
            except (TypeError, ValueError) as exc:
                c.fail(f"persons[{i}].profile_overrides", str(exc))

    actions_raw = data.get("actions") or []
    if not isinstance(actions_raw, list):
        c.fail("actions", "expected a list")
        actions_raw = []
    actions = []
    for i, a in enumerate(actions_raw):
        where = f"actions[{i}]"
        a = c.mapping(a, where)
        c.unknown(a, {"kind", "target", "params"}, where)
        kind = a.get("kind")
        if kind not in ACTION_KINDS:
            c.fail(f"{where}.kind", f"expected one of {list(ACTION_KINDS)}, got {kind!r}")
            continue
        target = a.get("target")
        params = dict(c.mapping(a.get("params"), f"{where}.params"))
        if kind in PERSONLESS:
            if target is not None:
                c.fail(f"{where}.target", f"{kind} takes no target")
        elif target not in ids:
            c.fail(f"{where}.target", f"unknown person id {target!r}")
        if kind == "goto":
            c.unknown(params, {"goal"}, f"{where}.params")
            goal = c.point(params.get("goal"), f"{where}.params.goal", n=3)
            if goal is None:
                continue
            params["goal"] = Pose2D(*goal)
            if map_cfg is not None:
                _check_inside(c, map_cfg, goal, f"{where}.params.goal")
        elif params:
            c.unknown(params, set(), f"{where}.params")
        actions.append(ActionConfig(kind, target, params))

    iterations = data.get("iterations", 1)
    if isinstance(iterations, bool) or not isinstance(iterations, int) or iterations < 1:
        c.fail("iterations", f"must be an integer >= 1, got {iterations!r}")
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        c.fail("seed", f"must be an integer, got {seed!r}")
    modes = data.get("modes", ["social", "baseline"])
    if not isinstance(modes, list) or not modes or any(m not in MODES for m in modes):
        c.fail("modes", f"expected a non-empty subset of {sorted(MODES)}, got {modes!r}")

    layers = c.mapping(data.get("layers"), "layers")
    c.unknown(layers, set(STAGE_ORDER), "layers")
    for k, v in layers.items():
        if not isinstance(v, bool):
            c.fail(f"layers.{k}", "expected true/false")

    regions = {}
    for name, box in c.mapping(data.get("regions"), "regions").items():
        if not (isinstance(box, list) and len(box) == 4 and all(isinstance(v, (int, float)) for v in box)):
            c.fail(f"regions.{name}", "expected [xmin, ymin, xmax, ymax]")
        else:
            regions[name] = tuple(float(v) for v in box)

    if map_cfg is not None:
        _check_inside(c, map_cfg, robot.start.xy, "robot.start")
        for i, p in enumerate(persons):
            for j, w in enumerate(p.script.waypoints):
                _check_inside(c, map_cfg, w, f"persons[{i}].script.waypoints[{j}]")

    if c.problems:
        raise ValidationError(c.problems, source)
    return ScenarioConfig(
        name=str(data.get("name", Path(source).stem if source else "scenario")),
        map=map_cfg,
        robot=robot,
        persons=persons,
        actions=actions,
        intimate_radius=intimate,
        personal_radius=personal,
        iterations=iterations,
        seed=seed,
        modes=list(modes),
        layers=dict(layers),
        profiles=profiles,
        regions=regions,
        raw=data,
    )


def _check_inside(c: _Checker, m: MapConfig, p, where):
    x, y = p[0] - m.origin[0], p[1] - m.origin[1]
    if not (0 <= x < m.width_m and 0 <= y < m.height_m):
        c.fail(where, f"({p[0]}, {p[1]}) lies outside the {m.width_m:g} x {m.height_m:g} m map")
        return
    col, row = int(x / m.resolution), int(y / m.resolution)
    if m.occupancy[row, col]:
        c.fail(where, f"({p[0]}, {p[1]}) lies on an occupied cell")


def load_scenario(path) -> ScenarioConfig:
    path = Path(path)
    text = path.read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark else None
        raise ParseError(str(exc.problem or exc), line, str(path)) from None
    except yaml.YAMLError as exc:
        raise ParseError(str(exc), None, str(path)) from None
    cfg = parse_scenario(data, str(path), path.parent)
    cfg.path = path
    return cfg


def bundled_path(name: str) -> Path:
    """Path to a scenario shipped with the package, e.g. ``approach``."""
    stem = name[:-4] if name.endswith(".scn") else name
    ref = resources.files("proxsim") / "scenarios" / f"{stem}.scn"
    return Path(str(ref))


def resolve_scenario(arg: str) -> Path:
    p = Path(arg)
    if p.exists():
        return p
    candidate = bundled_path(arg)
    if candidate.exists():
        return candidate
    return p

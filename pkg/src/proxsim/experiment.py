"""Seeded batch experiments: N iterations x modes over one scenario."""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from proxsim.actions import PROFILE_FOR_ACTION, ActionState, run_action
from proxsim.grid import Pose2D, snapshot_path, write_pgm
from proxsim.layers import LayerPipeline, WorldSnapshot
from proxsim.metrics import (
    METRIC_FIELDS,
    MetricsRecord,
    TrajectoryLog,
    aggregate,
    compute_metrics,
    distance_series,
    read_metrics_csv,
    write_metrics_csv,
    write_series_csv,
)
from proxsim.planner import COST_WEIGHT
from proxsim.scenario import ScenarioConfig
from proxsim.sim import DT, Pedestrian, WorldState, sense, step

STATUS_HEADER = ["iteration", "mode", "status", "detail"]
COMPARE_HEADER = ["metric", "mean_a", "sd_a", "mean_b", "sd_b", "delta"]
log = logging.getLogger("proxsim")
_METRIC_COLUMNS = dict(zip(METRIC_FIELDS, ("tau_s", "dt_m", "dmin_m", "psi_personal_pct", "psi_intimate_pct")))


@dataclass
class EpisodeResult:
    log: TrajectoryLog
    status: str
    detail: str = ""
    plans: list = field(default_factory=list)
    snapshots: list[Path] = field(default_factory=list)
    world: WorldState | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass
class RunReport:
    scenario: str
    seed: int
    iterations: int
    aggregates: dict[str, dict[str, tuple[float, float]]]
    csv_paths: list[Path]
    snapshot_paths: list[Path]
    figure_paths: list[Path]
    failures: dict[str, int]
    config: dict = field(repr=False, default_factory=dict)

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "iterations": self.iterations,
            "aggregates": {
                m: {k: {"mean": v[0], "sd": v[1]} for k, v in agg.items()}
                for m, agg in self.aggregates.items()
            },
            "csv": [p.name if p.parent.name == "" else str(p) for p in self.csv_paths],
            "snapshots": len(self.snapshot_paths),
            "failures": self.failures,
            "config": self.config,
        }


def initial_world(config: ScenarioConfig, iteration: int) -> WorldState:
    """World at tick 0 for ``iteration``; the rng is seeded with seed + iteration."""
    seed = config.seed + iteration
    rng = np.random.default_rng(seed)
    peds = tuple(
        Pedestrian.start(p.id, p.script, config.profile_for(p), rng) for p in config.persons
    )
    start = config.robot.start
    if config.robot.start_jitter > 0:
        jx, jy = rng.uniform(-config.robot.start_jitter, config.robot.start_jitter, size=2)
        candidate = Pose2D(start.x + jx, start.y + jy, start.theta)
        probe = WorldState(candidate, config.map.occupancy, config.map.resolution, config.map.origin)
        if not probe.static_blocked(candidate.x, candidate.y):
            start = candidate
    return WorldState(
        robot=start,
        occupancy=config.map.occupancy,
        resolution=config.map.resolution,
        origin=config.map.origin,
        pedestrians=peds,
        rng_seed=seed,
    )


def _activate(world: WorldState, config: ScenarioConfig, action: ActionState) -> WorldState:
    name = PROFILE_FOR_ACTION.get(action.kind)
    if name is None or action.target_person is None:
        return world
    return world.with_profile(action.target_person, config.profiles[name])


def _deactivate(world: WorldState, action: ActionState) -> WorldState:
    if action.kind in PROFILE_FOR_ACTION and action.target_person is not None:
        return world.with_profile(action.target_person, None)
    return world


def run_episode(
    config: ScenarioConfig,
    mode: str,
    iteration: int,
    snapshot_every: int | None = None,
    snapshot_prefix=None,
    weight: float = COST_WEIGHT,
) -> EpisodeResult:
    """Run the scenario's action list once and log every tick.

    Switching to the next action happens within the same tick, so the log has
    exactly one sample per tick. The run ends when the last action finishes or
    any action fails.
    """
    world = initial_world(config, iteration)
    pipeline = LayerPipeline.for_mode(
        mode,
        config.map.occupancy,
        config.map.resolution,
        config.map.origin,
        enabled=config.layers,
        robot_radius=config.robot.radius,
    )
    home = world.robot
    actions = [
        ActionState(a.kind, a.target, home=home, goal=a.params.get("goal")) for a in config.actions
    ]
    ids = [p.id for p in world.pedestrians]
    samples, plans, snaps = [], [], []
    if not actions:
        log = TrajectoryLog.from_samples([_sample(world, "", 0)], ids, iteration, mode)
        return EpisodeResult(log, "ok", world=world)

    idx = 0
    world = _activate(world, config, actions[0])
    last_path = None
    while True:
        scan = sense(world)
        master = pipeline.run(WorldSnapshot(world.persons, scan))
        act = actions[idx]
        cmd = _tick(act, world, master, config, weight)
        while act.phase == "done" and idx + 1 < len(actions):
            world = _deactivate(world, act)
            idx += 1
            act = actions[idx]
            world = _activate(world, config, act)
            master = pipeline.run(WorldSnapshot(world.persons, scan))
            cmd = _tick(act, world, master, config, weight)
        if snapshot_every and snapshot_prefix is not None and world.tick % snapshot_every == 0:
            snaps.append(write_pgm(master, snapshot_path(snapshot_prefix, world.tick)))
        if act.path is not None and act.path is not last_path:
            plans.append((world.tick, act.kind, act.path, world.persons))
            last_path = act.path
        samples.append(_sample(world, act.kind, act.rank or 0))
        if act.finished:
            break
        world = step(world, cmd)

    status = "failed" if act.phase == "failed" else "ok"
    log = TrajectoryLog.from_samples(samples, ids, iteration, mode)
    return EpisodeResult(log, status, act.detail if status == "failed" else "", plans, snaps, world)


def _tick(act: ActionState, world: WorldState, master, config: ScenarioConfig, weight: float):
    person = ped = None
    if act.target_person is not None:
        person = world.person(act.target_person)
        ped = world.pedestrian(act.target_person)
    return run_action(
        act,
        world.robot,
        master,
        world.tick,
        DT,
        person=person,
        person_finished=ped.finished if ped is not None else True,
        robot_radius=config.robot.radius,
        max_speed=config.robot.max_speed,
        weight=weight,
    )


def _sample(world: WorldState, kind: str, rank: int):
    r = world.robot
    return (world.time, (r.x, r.y, r.theta), [(p.x, p.y) for p in world.pedestrians], kind, rank)


def primary_target(config: ScenarioConfig) -> str | None:
    for a in config.actions:
        if a.target is not None:
            return a.target
    return config.persons[0].id if config.persons else None


def run_mode(config: ScenarioConfig, mode: str, snapshot_every=None, snapshot_dir=None):
    """All iterations of one mode: (iteration, EpisodeResult, MetricsRecord | None)."""
    out = []
    for it in range(config.iterations):
        prefix = None
        if snapshot_every and snapshot_dir is not None and it == 0:
            prefix = Path(snapshot_dir) / f"{mode}_it{it:03d}"
        ep = run_episode(config, mode, it, snapshot_every, prefix)
        rec = None
        if ep.ok:
            rec = compute_metrics(ep.log, config.intimate_radius, config.personal_radius)
        log.info("%s %s iteration %d: %s %s", config.name, mode, it, ep.status, ep.detail)
        out.append((it, ep, rec))
    return out


def run_experiment(config: ScenarioConfig, out_dir, snapshot_every: int | None = None, figures: bool = True) -> RunReport:
    """Run every mode x iteration and write the result files into ``out_dir``.

    Writes ``metrics_<mode>.csv`` (every iteration, failed ones as nan, plus
    mean/sd rows over the successful ones),
    ``status_<mode>.csv`` (every iteration), ``aggregate.csv``, per-iteration
    distance series under ``series/``, optional PGM snapshots of iteration 0
    under ``snapshots/``, figures under ``figures/`` and ``report.json``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    series_dir = out / "series"
    series_dir.mkdir(exist_ok=True)
    snap_dir = None
    if snapshot_every:
        snap_dir = out / "snapshots"
        snap_dir.mkdir(exist_ok=True)

    target = primary_target(config)
    csvs, snaps, aggregates, failures, results = [], [], {}, {}, {}
    for mode in config.modes:
        rows = run_mode(config, mode, snapshot_every, snap_dir)
        results[mode] = rows
        good = [(it, rec) for it, _, rec in rows if rec is not None]
        failures[mode] = len(rows) - len(good)
        csvs.append(write_metrics_csv(out / f"metrics_{mode}.csv", mode, [r for _, _, r in rows], [i for i, _, _ in rows]))
        csvs.append(_write_status(out / f"status_{mode}.csv", mode, rows))
        if good:
            aggregates[mode] = aggregate(r for _, r in good)
        for it, ep, _ in rows:
            snaps.extend(ep.snapshots)
            if target is not None:
                t, d = distance_series(ep.log, target)
                csvs.append(write_series_csv(series_dir / f"{mode}_it{it:03d}_{target}.csv", t, d))
    csvs.append(_write_aggregate(out / "aggregate.csv", aggregates))

    figs = []
    if figures:
        from proxsim import plotting

        figs = plotting.experiment_figures(config, results, out / "figures", target)

    report = RunReport(
        scenario=config.name,
        seed=config.seed,
        iterations=config.iterations,
        aggregates=aggregates,
        csv_paths=[p.relative_to(out) for p in csvs],
        snapshot_paths=snaps,
        figure_paths=figs,
        failures=failures,
        config=_config_echo(config),
    )
    (out / "report.json").write_text(json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n")
    return report


def _write_status(path: Path, mode: str, rows) -> Path:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(STATUS_HEADER)
        for it, ep, _ in rows:
            w.writerow([it, mode, ep.status, ep.detail])
    return path


def _write_aggregate(path: Path, aggregates) -> Path:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["mode", "stat", *_METRIC_COLUMNS.values()])
        for mode, agg in aggregates.items():
            w.writerow([mode, "mean", *(f"{agg[f][0]:.6f}" for f in METRIC_FIELDS)])
            w.writerow([mode, "sd", *(f"{agg[f][1]:.6f}" for f in METRIC_FIELDS)])
    return path


def _config_echo(config: ScenarioConfig) -> dict:
    raw = dict(config.raw)
    raw["iterations"] = config.iterations
    raw["seed"] = config.seed
    raw["modes"] = list(config.modes)
    return json.loads(json.dumps(raw, default=str))


# -- comparison -------------------------------------------------------------


def load_aggregates(run_dir) -> dict[str, dict[str, tuple[float, float]]]:
    """Per-mode (mean, sd) read back from the metrics CSVs of a run directory."""
    run_dir = Path(run_dir)
    files = sorted(run_dir.glob("metrics_*.csv"))
    if not files:
        raise FileNotFoundError(f"no metrics_*.csv in {run_dir}")
    out = {}
    for f in files:
        _, agg = read_metrics_csv(f)
        mode = f.stem[len("metrics_"):]
        if "mean" in agg:
            out[mode] = {
                field_: (agg["mean"][col], agg["sd"][col]) for field_, col in _METRIC_COLUMNS.items()
            }
    return out


@dataclass
class Comparison:
    label_a: str
    label_b: str
    rows: list[tuple[str, float, float, float, float, float]]

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(COMPARE_HEADER)
            for name, *vals in self.rows:
                w.writerow([name, *(f"{v:.6f}" for v in vals)])
        return path

    def to_text(self) -> str:
        head = ["metric", f"{self.label_a} mean(sd)", f"{self.label_b} mean(sd)", "delta (b - a)"]
        body = [
            [name, f"{ma:.3f} ({sa:.3f})", f"{mb:.3f} ({sb:.3f})", f"{d:+.3f}"]
            for name, ma, sa, mb, sb, d in self.rows
        ]
        widths = [max(len(r[i]) for r in [head, *body]) for i in range(4)]
        lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in [head, *body]]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines)


def compare(agg_a: dict[str, tuple[float, float]], agg_b: dict[str, tuple[float, float]],
            label_a: str = "a", label_b: str = "b") -> Comparison:
    """Side-by-side mean and sd per metric, with delta = mean_b - mean_a."""
    rows = []
    for f in METRIC_FIELDS:
        ma, sa = agg_a[f]
        mb, sb = agg_b[f]
        delta = mb - ma if math.isfinite(ma) and math.isfinite(mb) else math.nan
        rows.append((_METRIC_COLUMNS[f], ma, sa, mb, sb, delta))
    return Comparison(label_a, label_b, rows)


def compare_dirs(dir_a, dir_b) -> list[Comparison]:
    """Compare two run directories.

    Modes present in both are compared pairwise. If the directories share
    no mode but each holds exactly one, those two are compared.
    """
    a, b = load_aggregates(dir_a), load_aggregates(dir_b)
    shared = [m for m in a if m in b]
    if shared:
        return [compare(a[m], b[m], f"{Path(dir_a).name}:{m}", f"{Path(dir_b).name}:{m}") for m in shared]
    if len(a) == 1 and len(b) == 1:
        (ma, va), (mb, vb) = next(iter(a.items())), next(iter(b.items()))
        return [compare(va, vb, f"{Path(dir_a).name}:{ma}", f"{Path(dir_b).name}:{mb}")]
    raise ValueError(f"no common mode between {sorted(a)} and {sorted(b)}")


def record_from_row(row: dict) -> MetricsRecord:
    return MetricsRecord(*(row[c] for c in _METRIC_COLUMNS.values()))

"""Command line entry point: ``proxsim run | compare | render-profile``.

Exit codes: 0 success, 1 invalid scenario or arguments, 2 file system error.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from proxsim.grid import Costmap, Pose2D, write_pgm
from proxsim.layers import MODES, social_update
from proxsim.proxemics import PersonState, builtin_profiles
from proxsim.scenario import ScenarioError, load_scenario, resolve_scenario

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2

log = logging.getLogger("proxsim")


def _modes(text: str) -> list[str]:
    modes = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in modes if m not in MODES]
    if bad or not modes:
        raise argparse.ArgumentTypeError(f"unknown mode(s) {bad}; choose from {sorted(MODES)}")
    return modes


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="proxsim", description="Proxemics-aware costmap navigation experiments.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario for N iterations in each mode")
    run.add_argument("--scenario", required=True, help="scenario file, or the name of a bundled one")
    run.add_argument("--out", required=True, type=Path, help="output directory (created if missing)")
    run.add_argument("--modes", type=_modes, help="comma list of social, baseline, nocoop (default: from scenario)")
    run.add_argument("--iterations", type=_positive_int, help="override the scenario iteration count")
    run.add_argument("--seed", type=int, help="override the scenario base seed")
    run.add_argument("--snapshot-every", type=_positive_int, metavar="K", help="write a master-costmap PGM every K ticks of iteration 0")
    run.add_argument("--no-figures", action="store_true", help="skip the matplotlib report figures")

    cmp_ = sub.add_parser("compare", help="compare the aggregate metrics of two run directories")
    cmp_.add_argument("dir_a", type=Path, help="reference run directory")
    cmp_.add_argument("dir_b", type=Path, help="run directory compared against dir_a")
    cmp_.add_argument("--csv", type=Path, help="also write the comparison table as CSV")

    rp = sub.add_parser("render-profile", help="rasterize one activity's social cost field")
    rp.add_argument("activity", help="activity profile name, e.g. cooking")
    rp.add_argument("--out", required=True, type=Path, help="output PGM path")
    rp.add_argument("--heading", type=float, default=0.0, help="person heading [rad]")
    rp.add_argument("--speed", type=float, default=0.0, help="person speed [m/s] along the heading")
    rp.add_argument("--size", type=float, default=8.0, help="square raster side [m]")
    rp.add_argument("--resolution", type=float, default=0.05, help="cell size [m]")
    rp.add_argument("--scenario", help="take profiles (and radii) from this scenario")
    rp.add_argument("--png", type=Path, help="also save a color figure")
    return p


def cmd_run(args) -> int:
    config = load_scenario(resolve_scenario(args.scenario))
    config = config.with_overrides(args.iterations, args.seed, args.modes)
    from proxsim.experiment import run_experiment

    report = run_experiment(config, args.out, args.snapshot_every, figures=not args.no_figures)
    for mode, agg in report.aggregates.items():
        parts = ", ".join(f"{k}={m:.3f}({s:.3f})" for k, (m, s) in agg.items())
        print(f"{mode}: {parts}")
    for mode, n in report.failures.items():
        if n:
            print(f"{mode}: {n} failed iteration(s), see status_{mode}.csv")
    print(f"wrote {len(report.csv_paths)} CSV files to {args.out}")
    return EXIT_OK


def cmd_compare(args) -> int:
    from proxsim.experiment import compare_dirs

    for d in (args.dir_a, args.dir_b):
        if not d.is_dir():
            raise FileNotFoundError(f"not a directory: {d}")
    try:
        tables = compare_dirs(args.dir_a, args.dir_b)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    for i, t in enumerate(tables):
        print(t.to_text())
        print()
        if args.csv:
            path = args.csv if len(tables) == 1 else args.csv.with_name(f"{args.csv.stem}_{i}{args.csv.suffix}")
            t.to_csv(path)
    return EXIT_OK


def render_profile(activity: str, heading=0.0, speed=0.0, size=8.0, resolution=0.05, profiles=None) -> Costmap:
    """Social cost raster of one person at the center of an empty square map."""
    profiles = profiles or builtin_profiles()
    if activity not in profiles:
        raise KeyError(activity)
    n = int(round(size / resolution))
    half = n * resolution / 2
    cm = Costmap(n, n, resolution, (-half, -half))
    person = PersonState(
        "p", Pose2D(0.0, 0.0, heading), profiles[activity],
        (speed * math.cos(heading), speed * math.sin(heading)), activity,
    )
    social_update([person], cm)
    return cm


def cmd_render_profile(args) -> int:
    profiles = None
    if args.scenario:
        profiles = load_scenario(resolve_scenario(args.scenario)).profiles
    if args.resolution <= 0 or args.size <= 0:
        print("error: --size and --resolution must be positive", file=sys.stderr)
        return EXIT_INVALID
    try:
        cm = render_profile(args.activity, args.heading, args.speed, args.size, args.resolution, profiles)
    except KeyError:
        known = sorted(profiles or builtin_profiles())
        print(f"error: unknown activity {args.activity!r}; known: {known}", file=sys.stderr)
        return EXIT_INVALID
    write_pgm(cm, args.out)
    if args.png:
        from proxsim.plotting import profile_figure

        h = cm.height * cm.resolution
        ext = (cm.origin[0], cm.origin[0] + h, cm.origin[1], cm.origin[1] + h)
        profile_figure(cm.cells, ext, args.activity, args.png)
    print(f"wrote {args.out}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    handler = {"run": cmd_run, "compare": cmd_compare, "render-profile": cmd_render_profile}[args.command]
    try:
        return handler(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

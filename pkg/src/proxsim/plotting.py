"""Matplotlib figures written next to an experiment's CSV output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from proxsim.metrics import METRIC_FIELDS, distance_series  # noqa: E402

_LABELS = {
    "tau": "tau [s]",
    "d_t": "d_t [m]",
    "d_min": "d_min [m]",
    "psi_personal": "Psi personal [%]",
    "psi_intimate": "Psi intimate [%]",
}


def _extent(config):
    m = config.map
    return (m.origin[0], m.origin[0] + m.width_m, m.origin[1], m.origin[1] + m.height_m)


def trajectory_figure(config, results, path):
    """Robot paths of every iteration over the static map, one panel per mode."""
    modes = list(results)
    fig, axes = plt.subplots(1, len(modes), figsize=(5 * len(modes), 4.2), squeeze=False)
    for ax, mode in zip(axes[0], modes):
        ax.imshow(config.map.occupancy, origin="lower", cmap="Greys", extent=_extent(config), vmin=0, vmax=1.5)
        for _, ep, _ in results[mode]:
            r = ep.log.robot
            ax.plot(r[:, 0], r[:, 1], lw=0.6, alpha=0.5, color="tab:blue")
            ax.plot(ep.log.persons[0, :, 0], ep.log.persons[0, :, 1], "o", ms=4, color="tab:red")
        ax.set_title(mode)
        ax.set_aspect("equal")
        ax.set_xlabel("x [m]")
        ax.set_ylabel("y [m]")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def distance_figure(results, target, path):
    """Mean robot-target distance over time per mode, with a +-1 sd band."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for mode, rows in results.items():
        series = [distance_series(ep.log, target)[1] for _, ep, _ in rows]
        n = max(len(s) for s in series)
        # pad finished runs with their final distance so the mean covers every run
        table = np.array([np.pad(s, (0, n - len(s)), mode="edge") for s in series])
        t = np.arange(n) * (rows[0][1].log.times[1] - rows[0][1].log.times[0] if n > 1 else 0.05)
        mean, sd = table.mean(axis=0), table.std(axis=0)
        ax.plot(t, mean, label=mode)
        ax.fill_between(t, mean - sd, mean + sd, alpha=0.2)
    ax.set_xlabel("time [s]")
    ax.set_ylabel(f"distance to {target} [m]")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def metrics_figure(results, path):
    modes = list(results)
    fig, axes = plt.subplots(1, len(METRIC_FIELDS), figsize=(3 * len(METRIC_FIELDS), 3))
    for ax, name in zip(axes, METRIC_FIELDS):
        data = [[getattr(rec, name) for _, _, rec in results[m] if rec is not None] for m in modes]
        ax.boxplot(data)
        ax.set_xticks(range(1, len(modes) + 1), modes)
        ax.set_title(_LABELS[name], fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def experiment_figures(config, results, out_dir, target=None) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [trajectory_figure(config, results, out / "trajectories.png")]
    if any(rec is not None for rows in results.values() for _, _, rec in rows):
        paths.append(metrics_figure(results, out / "metrics.png"))
    if target is not None:
        paths.append(distance_figure(results, target, out / "distance.png"))
    return paths


def profile_figure(field: np.ndarray, extent, title: str, path) -> Path:
    fig, ax = plt.subplots(figsize=(4, 4))
    ax.imshow(field, origin="lower", extent=extent, cmap="viridis")
    ax.set_title(title)
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return Path(path)

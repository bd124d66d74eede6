"""Comfort and performance metrics over recorded trajectories."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

METRICS_HEADER = ["iteration", "mode", "tau_s", "dt_m", "dmin_m", "psi_personal_pct", "psi_intimate_pct"]
SERIES_HEADER = ["time_s", "distance_m"]
METRIC_FIELDS = ("tau", "d_t", "d_min", "psi_personal", "psi_intimate")


class EmptyLog(ValueError):
    pass


class EmptyInput(ValueError):
    pass


class UnknownPerson(KeyError):
    pass


@dataclass
class TrajectoryLog:
    """Per-tick samples of one iteration.

    ``persons`` has shape (n_samples, n_persons, 2); ``robot`` is (n, 3) with
    x, y, theta. ``actions`` and ``ranks`` label every sample with the active
    action kind and the currently selected candidate rank (0 if none).
    """

    times: np.ndarray
    robot: np.ndarray
    persons: np.ndarray
    person_ids: list[str]
    actions: list[str] = field(default_factory=list)
    ranks: np.ndarray | None = None
    iteration: int = 0
    mode: str = "social"

    def __len__(self):
        return len(self.times)

    @classmethod
    def from_samples(cls, samples, person_ids, iteration=0, mode="social") -> TrajectoryLog:
        """Build from an iterable of (time, (x, y, theta), [(px, py), ...], action, rank)."""
        samples = list(samples)
        n, k = len(samples), len(person_ids)
        persons = np.zeros((n, k, 2))
        for i, s in enumerate(samples):
            if k:
                persons[i] = np.asarray(s[2], dtype=float).reshape(k, 2)
        return cls(
            times=np.array([s[0] for s in samples], dtype=float),
            robot=np.array([s[1] for s in samples], dtype=float).reshape(n, 3),
            persons=persons,
            person_ids=list(person_ids),
            actions=[s[3] if len(s) > 3 else "" for s in samples],
            ranks=np.array([s[4] if len(s) > 4 else 0 for s in samples], dtype=int),
            iteration=iteration,
            mode=mode,
        )

    def distances(self) -> np.ndarray:
        """Robot-center to person-center distance, shape (n_samples, n_persons)."""
        diff = self.persons - self.robot[:, None, :2]
        return np.hypot(diff[..., 0], diff[..., 1])


@dataclass(frozen=True)
class MetricsRecord:
    tau: float
    d_t: float
    d_min: float
    psi_personal: float
    psi_intimate: float

    def as_row(self) -> list[float]:
        return [self.tau, self.d_t, self.d_min, self.psi_personal, self.psi_intimate]


def compute_metrics(log: TrajectoryLog, intimate_radius: float = 0.4, personal_radius: float = 1.2) -> MetricsRecord:
    n = len(log)
    if n == 0:
        raise EmptyLog("trajectory log has no samples")
    tau = float(log.times[-1] - log.times[0])
    steps = np.diff(log.robot[:, :2], axis=0)
    d_t = float(np.hypot(steps[:, 0], steps[:, 1]).sum())
    if log.persons.shape[1] == 0:
        return MetricsRecord(tau, d_t, math.inf, 0.0, 0.0)
    nearest = log.distances().min(axis=1)
    return MetricsRecord(
        tau=tau,
        d_t=d_t,
        d_min=float(nearest.min()),
        psi_personal=100.0 * np.count_nonzero(nearest <= personal_radius) / n,
        psi_intimate=100.0 * np.count_nonzero(nearest <= intimate_radius) / n,
    )


def aggregate(records) -> dict[str, tuple[float, float]]:
    """Mean and population standard deviation per metric."""
    records = list(records)
    if not records:
        raise EmptyInput("no records to aggregate")
    table = np.array([r.as_row() for r in records], dtype=float)
    return {
        name: (float(table[:, i].mean()), float(table[:, i].std()))
        for i, name in enumerate(METRIC_FIELDS)
    }


def distance_series(log: TrajectoryLog, person_id: str) -> tuple[np.ndarray, np.ndarray]:
    try:
        k = log.person_ids.index(person_id)
    except ValueError:
        raise UnknownPerson(person_id) from None
    return log.times.copy(), log.distances()[:, k]


def _fmt(v: float) -> str:
    return f"{v:.6f}"


def write_metrics_csv(path, mode: str, records, iterations=None) -> Path:
    """One row per iteration followed by ``mean`` and ``sd`` rows.

    A ``None`` record marks a failed iteration: its row holds ``nan`` values
    and it is left out of the aggregate rows.
    """
    records = list(records)
    iterations = list(iterations) if iterations is not None else list(range(len(records)))
    path = Path(path)
    good = [r for r in records if r is not None]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(METRICS_HEADER)
        for it, rec in zip(iterations, records):
            values = rec.as_row() if rec is not None else [math.nan] * len(METRIC_FIELDS)
            w.writerow([it, mode, *map(_fmt, values)])
        if good:
            agg = aggregate(good)
            w.writerow(["mean", mode, *(_fmt(agg[f][0]) for f in METRIC_FIELDS)])
            w.writerow(["sd", mode, *(_fmt(agg[f][1]) for f in METRIC_FIELDS)])
    return path


def read_metrics_csv(path) -> tuple[list[dict], dict[str, dict[str, float]]]:
    """Parse a metrics CSV into (per-iteration rows, {'mean': ..., 'sd': ...})."""
    rows, agg = [], {}
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            values = {k: float(row[k]) for k in METRICS_HEADER[2:]}
            if row["iteration"] in ("mean", "sd"):
                agg[row["iteration"]] = values
            else:
                rows.append({"iteration": int(row["iteration"]), "mode": row["mode"], **values})
    return rows, agg


def write_series_csv(path, times, distances) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SERIES_HEADER)
        for t, d in zip(times, distances):
            w.writerow([_fmt(t), _fmt(d)])
    return path


def record_dict(rec: MetricsRecord) -> dict[str, float]:
    return asdict(rec)

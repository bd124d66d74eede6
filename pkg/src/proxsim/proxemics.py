"""Asymmetric-Gaussian personal space, activity profiles and cooperation zones."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from proxsim.grid import Pose2D, normalize_angle

LOOKAHEAD_SECONDS = 1.5
DEFAULT_INTIMATE_RADIUS = 0.4
DEFAULT_PERSONAL_RADIUS = 1.2
DEFAULT_WEDGE_HALF_WIDTH = math.pi / 6


@dataclass(frozen=True)
class CooperationZoneSpec:
    bearing: float
    half_width: float = DEFAULT_WEDGE_HALF_WIDTH
    inner_radius: float = DEFAULT_INTIMATE_RADIUS
    outer_radius: float = DEFAULT_PERSONAL_RADIUS

    def contains(self, distance: float, bearing: float) -> bool:
        if not self.inner_radius < distance <= self.outer_radius:
            return False
        return abs(normalize_angle(bearing - self.bearing)) <= self.half_width


@dataclass(frozen=True)
class ActivityProfile:
    """Gaussian shape for one activity.

    ``orientation_known=False`` evaluates the field with the heading ignored,
    which with equal variances is an isotropic Gaussian.
    """

    name: str
    sigma_h: float
    sigma_s: float
    sigma_r: float
    theta_offset: float = 0.0
    cooperation_zones: tuple[CooperationZoneSpec, ...] = ()
    intimate_radius: float = DEFAULT_INTIMATE_RADIUS
    personal_radius: float = DEFAULT_PERSONAL_RADIUS
    orientation_known: bool = True

    def __post_init__(self):
        object.__setattr__(self, "cooperation_zones", tuple(self.cooperation_zones))
        problems = self.problems()
        if problems:
            raise ValueError(f"profile {self.name!r}: " + "; ".join(problems))

    def problems(self) -> list[str]:
        out = []
        for attr in ("sigma_h", "sigma_s", "sigma_r"):
            if not getattr(self, attr) > 0:
                out.append(f"{attr} must be > 0")
        if len(self.cooperation_zones) > 2:
            out.append("at most 2 cooperation zones per person")
        if not 0 < self.intimate_radius < self.personal_radius:
            out.append("need 0 < intimate_radius < personal_radius")
        for i, z in enumerate(self.cooperation_zones):
            if not math.isclose(z.inner_radius, self.intimate_radius):
                out.append(f"zone {i}: inner_radius must equal intimate_radius")
            if z.outer_radius > self.personal_radius + 1e-12:
                out.append(f"zone {i}: outer_radius exceeds personal_radius")
            if not 0 < z.half_width <= math.pi / 2:
                out.append(f"zone {i}: half_width must be in (0, pi/2]")
        return out

    def with_radii(self, intimate: float, personal: float) -> ActivityProfile:
        """Same shape with new zone radii; wedges are re-fitted to the ring."""
        zones = []
        for z in self.cooperation_zones:
            # wedges spanning the whole ring keep spanning it
            outer = personal if z.outer_radius == self.personal_radius else min(z.outer_radius, personal)
            zones.append(replace(z, inner_radius=intimate, outer_radius=outer))
        return replace(
            self, intimate_radius=intimate, personal_radius=personal, cooperation_zones=tuple(zones)
        )

    def without_cooperation(self) -> ActivityProfile:
        return replace(self, cooperation_zones=())


@dataclass(frozen=True)
class PersonState:
    id: str
    pose: Pose2D
    profile: ActivityProfile
    velocity: tuple[float, float] = (0.0, 0.0)
    activity: str = field(default="")

    def __post_init__(self):
        if not self.activity:
            object.__setattr__(self, "activity", self.profile.name)
        object.__setattr__(self, "velocity", (float(self.velocity[0]), float(self.velocity[1])))

    @property
    def speed(self) -> float:
        return math.hypot(*self.velocity)

    @property
    def position(self) -> tuple[float, float]:
        return self.pose.xy

    def with_profile(self, profile: ActivityProfile) -> PersonState:
        return replace(self, profile=profile, activity=profile.name)


def effective_sigma_h(profile: ActivityProfile, speed: float) -> float:
    """Front variance stretched by a fixed lookahead of the person's speed."""
    return max(profile.sigma_h, speed * LOOKAHEAD_SECONDS)


def field_heading(person: PersonState) -> float:
    if not person.profile.orientation_known:
        return 0.0
    return person.pose.theta + person.profile.theta_offset


def gaussian_field(person: PersonState, xs, ys) -> np.ndarray:
    """Vectorized asymmetric Gaussian at world points (xs, ys)."""
    prof = person.profile
    theta = field_heading(person)
    dx = np.asarray(xs, dtype=float) - person.pose.x
    dy = np.asarray(ys, dtype=float) - person.pose.y
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    sin_2t = math.sin(2.0 * theta)
    ahead = dx * cos_t + dy * sin_t >= 0.0
    sigma = np.where(ahead, effective_sigma_h(prof, person.speed), prof.sigma_r)
    ss2 = prof.sigma_s**2
    a = cos_t**2 / (2 * sigma**2) + sin_t**2 / (2 * ss2)
    b = sin_2t / (4 * sigma**2) - sin_2t / (4 * ss2)
    c = sin_t**2 / (2 * sigma**2) + cos_t**2 / (2 * ss2)
    return np.exp(-(a * dx * dx + 2 * b * dx * dy + c * dy * dy))


def asymmetric_gaussian(person: PersonState, q) -> float:
    return float(gaussian_field(person, q[0], q[1]))


def support_radius(person: PersonState, cutoff: float) -> float:
    """Distance beyond which the field is below ``cutoff`` in every direction."""
    prof = person.profile
    sigma = max(effective_sigma_h(prof, person.speed), prof.sigma_s, prof.sigma_r)
    return sigma * math.sqrt(2.0 * math.log(1.0 / cutoff))


def in_cooperation_zone(person: PersonState, q) -> bool:
    dx = q[0] - person.pose.x
    dy = q[1] - person.pose.y
    dist = math.hypot(dx, dy)
    bearing = math.atan2(dy, dx) - person.pose.theta
    return any(z.contains(dist, bearing) for z in person.profile.cooperation_zones)


def cooperation_mask(person: PersonState, xs, ys) -> np.ndarray:
    """Vectorized ``in_cooperation_zone`` over world points."""
    dx = np.asarray(xs, dtype=float) - person.pose.x
    dy = np.asarray(ys, dtype=float) - person.pose.y
    mask = np.zeros(np.broadcast(dx, dy).shape, dtype=bool)
    if not person.profile.cooperation_zones:
        return mask
    dist = np.hypot(dx, dy)
    bearing = np.arctan2(dy, dx) - person.pose.theta
    for z in person.profile.cooperation_zones:
        off = np.remainder(bearing - z.bearing + np.pi, 2 * np.pi) - np.pi
        mask |= (dist > z.inner_radius) & (dist <= z.outer_radius) & (np.abs(off) <= z.half_width)
    return mask


def builtin_profiles() -> dict[str, ActivityProfile]:
    standing = ActivityProfile("standing", sigma_h=0.8, sigma_s=1.0, sigma_r=1.0)
    return {
        "cooking": ActivityProfile("cooking", sigma_h=0.5, sigma_s=1.5, sigma_r=0.5),
        "running": ActivityProfile("running", sigma_h=2.0, sigma_s=0.7, sigma_r=0.7),
        "standing": standing,
        "bathroom": ActivityProfile(
            "bathroom", sigma_h=2.5, sigma_s=2.5, sigma_r=2.5, orientation_known=False
        ),
        "hri_approach": replace(
            standing, name="hri_approach", cooperation_zones=(CooperationZoneSpec(bearing=0.0),)
        ),
        "escort": replace(
            standing,
            name="escort",
            cooperation_zones=(
                CooperationZoneSpec(bearing=-math.pi / 2),
                CooperationZoneSpec(bearing=math.pi / 2),
            ),
        ),
    }

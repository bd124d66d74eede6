"""Random small worlds shared by the pipeline tests and the acceptance suite."""

import math

import numpy as np

from proxsim.grid import Pose2D
from proxsim.proxemics import PersonState, builtin_profiles, effective_sigma_h, field_heading
from proxsim.sim import Pedestrian, PedestrianScript, WorldState, sense


def random_world(rng, max_side=60, max_persons=3, n_beams=90):
    """(occupancy, origin, resolution, persons, robot pose, scan) for one tick."""
    h, w = rng.integers(15, max_side + 1, size=2)
    res = float(rng.choice([0.05, 0.1]))
    origin = (float(rng.uniform(-2, 2)), float(rng.uniform(-2, 2)))
    occ = np.zeros((h, w), dtype=bool)
    for _ in range(rng.integers(0, 6)):
        r, c = rng.integers(0, h), rng.integers(0, w)
        occ[r : r + rng.integers(1, 6), c : c + rng.integers(1, 6)] = True
    free = np.argwhere(~occ)
    profiles = list(builtin_profiles().values())

    def free_point():
        r, c = free[rng.integers(len(free))]
        return (origin[0] + (c + rng.uniform(0.05, 0.95)) * res, origin[1] + (r + rng.uniform(0.05, 0.95)) * res)

    persons = []
    for i in range(rng.integers(0, max_persons + 1)):
        x, y = free_point()
        prof = profiles[rng.integers(len(profiles))]
        vel = (0.0, 0.0) if rng.random() < 0.5 else tuple(rng.uniform(-1.5, 1.5, size=2))
        persons.append(PersonState(f"p{i}", Pose2D(x, y, rng.uniform(-math.pi, math.pi)), prof, vel))
    rx, ry = free_point()
    robot = Pose2D(rx, ry, rng.uniform(-math.pi, math.pi))
    peds = tuple(
        Pedestrian(p.id, PedestrianScript(((p.pose.x, p.pose.y),)), p.profile, p.pose.x, p.pose.y, p.pose.theta)
        for p in persons
    )
    world = WorldState(robot, occ, res, origin, peds)
    scan = sense(world, n_beams=n_beams, max_range=float(rng.uniform(0.5, 3.0)))
    return occ, origin, res, persons, robot, scan


def oracle_persons(persons):
    """PersonState list flattened into the tuples ``oracles.pipeline_ref`` takes."""
    return [
        (
            p.pose.x,
            p.pose.y,
            field_heading(p),
            p.pose.theta,
            effective_sigma_h(p.profile, p.speed),
            p.profile.sigma_s,
            p.profile.sigma_r,
            p.profile.intimate_radius,
            p.profile.cooperation_zones,
        )
        for p in persons
    ]


def oracle_scan(scan):
    o = scan.origin
    return ((o.x, o.y, o.theta), scan.bearings, scan.ranges, scan.hits)

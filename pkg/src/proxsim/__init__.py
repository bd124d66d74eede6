"""Proxemics-aware layered costmaps for socially acceptable robot navigation."""

from proxsim.grid import FREE, INSCRIBED, LETHAL, Costmap, Pose2D
from proxsim.layers import LayerPipeline, WorldSnapshot
from proxsim.proxemics import ActivityProfile, PersonState, builtin_profiles
from proxsim.scenario import load_scenario

__all__ = [
    "FREE",
    "INSCRIBED",
    "LETHAL",
    "ActivityProfile",
    "Costmap",
    "LayerPipeline",
    "PersonState",
    "Pose2D",
    "WorldSnapshot",
    "builtin_profiles",
    "load_scenario",
]

__version__ = "0.1.0"

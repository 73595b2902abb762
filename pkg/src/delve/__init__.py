"""Dungeon exploration workbench.

Procedural NetHack-style levels, a turn-based simulation with stochastic
secret-door search, an occupancy-map exploration agent and greedy
baselines, an exact full-information route oracle, and a seeded batch
harness for parameter studies.
"""

from ._kernels import HAVE_NATIVE
from .engine import AgentState, AgentView, SimConfig
from .episode import EpisodeResult
from .level import LevelMap, Position, Room, Tile, TileKind
from .mapgen import GenConfig, GenStats, MapGenError, generate, stats
from .occmap import ExplorationParams
from .occupancy import OccupancyGrid

__version__ = "0.1.0"

__all__ = [
    "AgentState", "AgentView", "EpisodeResult", "ExplorationParams",
    "GenConfig", "GenStats", "HAVE_NATIVE", "LevelMap", "MapGenError",
    "OccupancyGrid", "Position", "Room", "SimConfig", "Tile", "TileKind",
    "generate", "stats", "__version__",
]

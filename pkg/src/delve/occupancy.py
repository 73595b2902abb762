"""Occupancy grid: per-cell probability of belonging to an unvisited room.

The grid starts uniform at 1/(width*height) (optionally damped along the
map border), is zeroed wherever observation rules a cell out, and is
smoothed by 4-neighbour diffusion whenever new map information arrives:

    P_t(n) = (1 - lam) * P_{t-1}(n) + (lam / 4) * sum of P_{t-1} over
             orthogonal neighbours

Zeroed cells are clamped: once observation sets a cell to 0 it can never
come back (except for an explicit reset when a secret tile is revealed).
Every public operation renormalizes, so total mass stays 1 within 1e-9.

Thresholds throughout are expressed as multiples of the uniform baseline,
keeping them comparable across map sizes.
"""

from __future__ import annotations

import numpy as np

from ._kernels import diffuse_pass
from .engine import UNKNOWN, AgentView
from .level import Position, TileKind


class ExplorationComplete(Exception):
    """Every cell is ruled out; there is nothing left to explore."""


class OccupancyGrid:
    def __init__(self, width: int, height: int):
        self.width = width
        self.height = height
        self.baseline = 1.0 / (width * height)
        self.prob = np.full((height, width), self.baseline, dtype=np.float64)
        self.clamped = np.zeros((height, width), dtype=np.uint8)

    def mass(self) -> float:
        return float(np.sum(self.prob))

    def renormalize(self):
        total = np.sum(self.prob)
        if total <= 0.0:
            raise ExplorationComplete
        self.prob /= total

    def copy(self) -> "OccupancyGrid":
        dup = OccupancyGrid(self.width, self.height)
        dup.prob = self.prob.copy()
        dup.clamped = self.clamped.copy()
        return dup


def init(view: AgentView, border_multiplier: float = 1.0) -> OccupancyGrid:
    """Uniform grid with damped borders; already-seen obstacles zeroed."""
    level = view.level
    grid = OccupancyGrid(level.width, level.height)
    border = np.zeros_like(grid.prob, dtype=bool)
    border[0, :] = border[-1, :] = True
    border[:, 0] = border[:, -1] = True
    grid.prob[border] *= border_multiplier
    _clamp_observed(grid, view)
    grid.prob[grid.clamped.astype(bool)] = 0.0
    grid.renormalize()
    return grid


def update_observation(grid: OccupancyGrid, view: AgentView) -> OccupancyGrid:
    """Zero out cells observation has ruled out, then renormalize.

    Ruled out: seen walls and rock, seen corridors, anything visited
    (floors of entered rooms in particular).  Raises ExplorationComplete
    if no probability mass remains.
    """
    _clamp_observed(grid, view)
    grid.prob[grid.clamped.astype(bool)] = 0.0
    grid.renormalize()
    return grid


def _clamp_observed(grid: OccupancyGrid, view: AgentView):
    apparent = view.apparent
    ruled_out = (
        (apparent == TileKind.WALL)
        | (apparent == TileKind.ROCK)
        | (apparent == TileKind.CORRIDOR)
        | view.visited
        | view.claimed
    )
    grid.clamped |= ruled_out.astype(np.uint8)


def reset_cell(grid: OccupancyGrid, pos: Position):
    """A revealed secret tile gets its probability back (mapped baseline)."""
    x, y = pos
    grid.clamped[y, x] = 0
    grid.prob[y, x] = grid.baseline
    grid.renormalize()


def diffuse(grid: OccupancyGrid, lam: float, passes: int = 1) -> OccupancyGrid:
    """Synchronous diffusion passes; clamped cells stay at exactly 0."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError("diffusion factor must lie in [0, 1]")
    for _ in range(passes):
        grid.prob = diffuse_pass(grid.prob, grid.clamped, lam)
    grid.renormalize()
    return grid


def frontier_is_low_utility(grid: OccupancyGrid, view: AgentView, frontier: Position,
                            radius: int, threshold: float) -> bool:
    """True iff every unknown cell within Chebyshev `radius` of the
    frontier has probability below threshold * baseline."""
    x, y = frontier
    x0, x1 = max(0, x - radius), min(grid.width - 1, x + radius)
    y0, y1 = max(0, y - radius), min(grid.height - 1, y + radius)
    window_prob = grid.prob[y0:y1 + 1, x0:x1 + 1]
    window_unknown = view.apparent[y0:y1 + 1, x0:x1 + 1] == UNKNOWN
    cutoff = threshold * grid.baseline
    return bool(np.all(window_prob[window_unknown] < cutoff))


def explored_fraction(view: AgentView) -> float:
    return float((view.apparent != UNKNOWN).mean())


def unknown_inflation(grid: OccupancyGrid, view: AgentView) -> float:
    """Mean unknown-cell probability, in baseline units.

    Renormalization concentrates the fixed total mass on ever fewer
    unknown cells, so the average unknown cell drifts above baseline as
    exploration progresses.  Thresholds quoted in baseline units are
    multiplied by this factor so their bite stays constant: "0.45" then
    always means 45% of the current average unknown cell.
    """
    unknown = view.apparent == UNKNOWN
    n = int(unknown.sum())
    if n == 0:
        return 1.0
    mean = float(grid.prob[unknown].sum()) / n
    return max(mean / grid.baseline, 1.0)


def live_inflation(grid: OccupancyGrid, view: AgentView) -> float:
    """Mass-weighted mean probability of unknown cells, in baseline units.

    Sum of p^2 over sum of p: the probability level the remaining mass
    actually sits at.  Equals the baseline on the untouched uniform grid;
    late in an episode it tracks the surviving warm pockets instead of
    being dragged down by the drained ocean around them, which makes it
    the right reference for deciding that a frontier's surroundings are
    no longer worth a trip.
    """
    unknown = view.apparent == UNKNOWN
    p = grid.prob[unknown]
    total = float(p.sum())
    if total <= 0.0:
        return 1.0
    level = float((p * p).sum()) / total
    return max(level / grid.baseline, 1.0)


def effective_threshold(base: float, view: AgentView, vary: bool) -> float:
    """Fixed threshold, or one that tightens as more of the map is known.

    The varying schedule interpolates linearly from `base` when nothing is
    explored to `2 * base` when everything is.
    """
    if not vary:
        return base
    return base * (1.0 + explored_fraction(view))

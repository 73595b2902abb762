"""The occupancy-map exploration agent, with optional secret discovery.

Planning loop: observe, zero out ruled-out cells, diffuse on new
information, decompose unexplored space into components, drop frontiers
whose surroundings have decayed below the utility threshold, and head for
the best component.  Reachable components are scored by

    (1 - distance_weight) * norm_prob + distance_weight * (1 - norm_dist)

and hidden components (no reachable frontier) are serviced by walking to
a wall or dead-end corridor next to them and issuing search bursts; spots
are scored by the analogous minimization over normalized search counts
and distances.  Exploration ends when no component offers anything to do.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, fields

import numpy as np

from . import occupancy as occ
from .components import (
    Component,
    associate_frontier_reachable,
    closest_cell,
    corridor_end_room_component,
    decompose,
    find_frontiers,
    rescue_area_threshold,
)
from .engine import (
    DIR_NAME,
    UNKNOWN,
    AgentState,
    AgentView,
    SimConfig,
    distance_map,
    shortest_path,
    start_episode,
    step_move,
    step_search,
    travel,
)
from .episode import EpisodeResult, default_step_budget, finish_episode
from .level import OFFSETS_8, LevelMap, Position, TileKind
from .components import bresenham


@dataclass(frozen=True)
class ExplorationParams:
    """Everything the occupancy-map agent can be tuned with.

    Thresholds are multiples of the uniform baseline probability.
    Defaults are the best-performing exhaustive set.
    """

    diffusion_factor: float = 0.65
    distance_weight: float = 1.0         # component evaluation balance
    search_distance_weight: float = 1.0  # search-spot evaluation balance
    border_multiplier: float = 0.35
    frontier_threshold: float = 0.35
    component_threshold: float = 0.45
    vary_threshold: bool = False
    frontier_radius: int = 2
    min_room_size: int = 5
    min_secret_room_size: int = 5
    component_min_neighbors: int = 7
    max_wall_distance: int = 10
    max_searches_per_spot: int = 10
    searches_per_visit: int = 10
    secrets_enabled: bool = False
    diffusion_passes: int = 1
    # Reference level for thresholds: the lenient mean over unknown cells,
    # or the sharper mass-weighted level that tracks surviving pockets.
    component_inflation_live: bool = False
    stop_burst_on_reveal: bool = True
    abort_travel_on_low_utility: bool = False

    def __post_init__(self):
        for name in ("diffusion_factor", "distance_weight", "search_distance_weight",
                     "border_multiplier"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        for name in ("frontier_radius", "min_room_size", "min_secret_room_size",
                     "component_min_neighbors", "max_wall_distance",
                     "max_searches_per_spot", "searches_per_visit"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


# Paper-style defaults above reproduce the published parameterization; the
# set below is what our own grid search found best for exhaustive room
# exploration on this generator (fastest mean actions at >=95% exhaustive).
BEST_PARAMS = ExplorationParams(
    diffusion_passes=3,
    component_threshold=0.6,
    frontier_threshold=0.3,
    component_inflation_live=True,
    border_multiplier=0.5,
    abort_travel_on_low_utility=True,
)


def params_to_text(params: ExplorationParams) -> str:
    lines = [f"{f.name} = {getattr(params, f.name)}" for f in fields(params)]
    return "\n".join(lines) + "\n"


def params_from_text(text: str) -> ExplorationParams:
    """Parse the flat key = value parameter file format."""
    parser = configparser.ConfigParser()
    parser.read_string("[params]\n" + text)
    kwargs = {}
    for f in fields(ExplorationParams):
        if not parser.has_option("params", f.name):
            continue
        raw = parser.get("params", f.name)
        if f.type == "bool":
            kwargs[f.name] = raw.strip().lower() in ("1", "true", "yes", "on")
        elif f.type == "int":
            kwargs[f.name] = int(raw)
        else:
            kwargs[f.name] = float(raw)
    return ExplorationParams(**kwargs)


def params_from_file(path) -> ExplorationParams:
    with open(path, "r", encoding="utf-8") as fh:
        return params_from_text(fh.read())


# ---------------------------------------------------------------------------
# component evaluation

def evaluate_components(components: list[Component], grid: occ.OccupancyGrid,
                        state: AgentState, view: AgentView,
                        distance_weight: float,
                        dists: dict[int, int] | None = None) -> Component | None:
    """Pick the component maximizing the utility/distance combination.

    `dists` maps id(component) -> walk distance to its anchor; missing
    entries are computed from a BFS at the agent's position.  A priority
    (partially seen room) component wins outright.  With a single
    candidate the distance term degenerates to 0.
    """
    if not components:
        return None
    for comp in components:
        if comp.priority:
            return comp
    if dists is None:
        dists = {}
    dmap = None
    entries = []
    for comp in components:
        d = dists.get(id(comp))
        if d is None:
            if dmap is None:
                dmap = distance_map(view, state.pos)
            ax, ay = comp.anchor_pos()
            d = int(dmap[ay, ax])
        if d < 0:
            continue
        entries.append((comp, d))
    if not entries:
        return None
    total = sum(d for _, d in entries)
    best = None
    best_key = None
    for comp, d in entries:
        norm_dist = d / total if len(entries) > 1 and total > 0 else 0.0
        score = (1.0 - distance_weight) * comp.utility + distance_weight * (1.0 - norm_dist)
        ax, ay = comp.anchor_pos()
        key = (-score, ay, ax)
        if best_key is None or key < best_key:
            best, best_key = comp, key
    return best


# ---------------------------------------------------------------------------
# search-spot selection for hidden components

def _is_blank(view: AgentView, pos: Position) -> bool:
    """Cells that read as blank to the agent: unknown or bare rock."""
    x, y = pos
    if not (0 <= x < view.level.width and 0 <= y < view.level.height):
        return False
    return view.apparent[y, x] in (UNKNOWN, TileKind.ROCK)


def has_empty_space_beyond(view: AgentView, spot: Position, toward: Position,
                           required: int = 3) -> bool:
    """Could a secret passage exist on the far side of this spot?

    Yes when the cell beyond is already a known passage (a secret door
    opening onto a visible corridor), or when it is blank with at least
    `required` blank cells around it -- room enough for an undiscovered
    corridor.
    """
    sx, sy = spot
    tx, ty = toward
    dx = 0 if tx == sx else (1 if tx > sx else -1)
    dy = 0 if ty == sy else (1 if ty > sy else -1)
    beyond = (sx + dx, sy + dy)
    if beyond == spot:
        return False
    bx, by = beyond
    if not (0 <= bx < view.level.width and 0 <= by < view.level.height):
        return False
    if view.apparent[by, bx] in (TileKind.CORRIDOR, TileKind.DOOR, TileKind.FLOOR):
        return True
    if not _is_blank(view, beyond):
        return False
    empties = sum(
        1 for ox, oy in OFFSETS_8
        if _is_blank(view, (beyond[0] + ox, beyond[1] + oy))
    )
    return empties >= required


def line_through_empty(view: AgentView, a: Position, b: Position) -> bool:
    for x, y in bresenham(a, b)[1:-1]:
        if view.apparent[y, x] not in (UNKNOWN, TileKind.ROCK):
            return False
    return True


def spot_search_count(view: AgentView, spot: Position) -> int:
    """Searches already spent on a spot: standing searches for a
    traversable dead-end, coverage by adjacent searches for a wall."""
    x, y = spot
    if view.is_traversable(spot):
        return int(view.search_count[y, x])
    return int(view.searched_count[y, x])


def choose_stand_position(view: AgentView, spot: Position, dmap: np.ndarray,
                          max_searches: int) -> tuple[Position, int] | None:
    """Closest reachable cell adjacent to the search spot (the spot itself
    when it is traversable, e.g. a dead-end corridor).

    Distance ties go to the cell touching the most walls that can still be
    searched, so one burst covers several targets; remaining ties by (y, x).
    Returns (cell, path distance) or None when the spot is unapproachable.
    """
    if view.is_traversable(spot):
        sx, sy = spot
        if dmap[sy, sx] >= 0:
            return spot, int(dmap[sy, sx])
        return None
    best = None
    best_key = None
    for dx, dy in OFFSETS_8:
        nx, ny = spot[0] + dx, spot[1] + dy
        if not (0 <= nx < view.level.width and 0 <= ny < view.level.height):
            continue
        if not view.is_traversable((nx, ny)) or dmap[ny, nx] < 0:
            continue
        walls = sum(
            1 for ox, oy in OFFSETS_8
            if 0 <= nx + ox < view.level.width and 0 <= ny + oy < view.level.height
            and view.apparent[ny + oy, nx + ox] == TileKind.WALL
            and view.searched_count[ny + oy, nx + ox] < max_searches
        )
        key = (int(dmap[ny, nx]), -walls, ny, nx)
        if best_key is None or key < best_key:
            best_key = key
            best = ((nx, ny), int(dmap[ny, nx]))
    return best


def select_search_spot(component: Component, view: AgentView, state: AgentState,
                       params: ExplorationParams,
                       dmap: np.ndarray) -> tuple[Position, Position, int] | None:
    """Wall or dead-end corridor to search for a way into a hidden component.

    Returns (spot, stand_cell, walk_distance) minimizing the weighted
    search-count/distance score, or None when no viable target remains.
    Candidates must still be searchable, lie close enough to the component
    with a straight blank line to it, and have room beyond for a passage.
    """
    x0, y0, x1, y1 = component.rect
    pad = params.max_wall_distance
    cx0, cy0 = max(0, x0 - pad), max(0, y0 - pad)
    cx1 = min(view.level.width - 1, x1 + pad)
    cy1 = min(view.level.height - 1, y1 + pad)

    candidates = []
    for y in range(cy0, cy1 + 1):
        for x in range(cx0, cx1 + 1):
            spot = (x, y)
            a = view.apparent[y, x]
            if a == TileKind.WALL:
                pass
            elif a == TileKind.CORRIDOR and view.is_dead_end(spot):
                pass
            else:
                continue
            if spot_search_count(view, spot) >= params.max_searches_per_spot:
                continue
            cell, dist = closest_cell(component, spot)
            if dist > params.max_wall_distance or dist >= 10:
                continue
            if not line_through_empty(view, spot, cell):
                continue
            if not has_empty_space_beyond(view, spot, cell):
                continue
            stand = choose_stand_position(view, spot, dmap, params.max_searches_per_spot)
            if stand is None:
                continue
            stand_cell, stand_dist = stand
            walk = stand_dist if stand_cell == spot else stand_dist + 1
            candidates.append((spot, stand_cell, walk))
    if not candidates:
        return None
    total_count = sum(spot_search_count(view, c[0]) for c in candidates)
    total_dist = sum(c[2] for c in candidates)
    sigma = params.search_distance_weight
    best = None
    best_key = None
    for spot, stand_cell, walk in candidates:
        count = spot_search_count(view, spot)
        norm_count = count / total_count if total_count > 0 else 0.0
        norm_dist = walk / total_dist if total_dist > 0 else 0.0
        score = (1.0 - sigma) * norm_count + sigma * norm_dist
        key = (score, spot[1], spot[0])
        if best_key is None or key < best_key:
            best_key = key
            best = (spot, stand_cell, walk)
    return best


# ---------------------------------------------------------------------------
# main loop

def explore(level: LevelMap, params: ExplorationParams | None = None,
            sim: SimConfig | None = None,
            step_budget: int | None = None) -> EpisodeResult:
    """Run one occupancy-map episode to termination."""
    params = params or ExplorationParams()
    sim = sim or SimConfig()
    budget = step_budget if step_budget is not None else default_step_budget(level)

    state, view = start_episode(level)
    grid = occ.init(view, params.border_multiplier)
    seen_version = -1
    failed = False

    while True:
        if state.actions > budget:
            failed = True
            break
        if view.version != seen_version:
            try:
                occ.update_observation(grid, view)
                occ.diffuse(grid, params.diffusion_factor, params.diffusion_passes)
            except occ.ExplorationComplete:
                break
            seen_version = view.version

        priority = corridor_end_room_component(grid, view)
        if priority is not None:
            if not _goto(level, state, view, priority.frontier):
                break
            continue

        all_frontiers = find_frontiers(view)
        live = occ.live_inflation(grid, view)
        inflation = live if params.component_inflation_live else occ.unknown_inflation(grid, view)
        fthr = occ.effective_threshold(params.frontier_threshold, view,
                                       params.vary_threshold) * live
        frontiers = [
            f for f in all_frontiers
            if not occ.frontier_is_low_utility(grid, view, f, params.frontier_radius, fthr)
        ]
        comps = decompose(
            grid, view, frontiers,
            min_neighbors=params.component_min_neighbors,
            component_threshold=params.component_threshold * inflation,
            min_room_size=params.min_room_size,
            # With secrets off, hidden components are kept only at rescue
            # size: they are not searchable, but a big one still signals
            # an unexplored area worth a last-resort walk.
            min_secret_room_size=(params.min_secret_room_size
                                  if params.secrets_enabled
                                  else rescue_area_threshold(level.width, level.height)),
            secrets_enabled=True,
            fallback_frontiers=all_frontiers,
            fallback_min_area=3 * params.min_room_size,
        )
        dmap = distance_map(view, state.pos)
        dists: dict[int, int] = {}
        stands: dict[int, Position] = {}
        eligible = []
        for comp in comps:
            if comp.hidden:
                if not params.secrets_enabled:
                    continue
                picked = select_search_spot(comp, view, state, params, dmap)
                if picked is None:
                    continue
                spot, stand_cell, walk = picked
                comp.search_spot = spot
                stands[id(comp)] = stand_cell
                dists[id(comp)] = walk
            else:
                fx, fy = comp.frontier
                d = int(dmap[fy, fx])
                if d < 0:
                    continue
                dists[id(comp)] = d
            eligible.append(comp)

        best = evaluate_components(eligible, grid, state, view,
                                   params.distance_weight, dists)
        if best is None:
            # Nothing anchored.  Two cheap certainties before giving up:
            # a door we have seen but never passed always fronts a room,
            # and a huge unanchored region (straight lines all crossing
            # explored threads) is worth one geodesic walk.  Anything
            # else is a pocket whose probability died honestly.
            rescue = _rescue_unentered_door(view, dmap)
            if rescue is None:
                rescue = _rescue_big_component(comps, all_frontiers, view, dmap, params)
            if rescue is None:
                break
            if not _goto(level, state, view, rescue):
                break
            continue

        if best.hidden:
            stand = stands[id(best)]
            if stand != state.pos and not _goto(level, state, view, stand):
                break
            _search_burst(level, state, view, grid, sim, params, best.search_spot)
        else:
            if not _goto(level, state, view, best.frontier,
                         abort_check=_make_abort_check(grid, view, params)
                         if params.abort_travel_on_low_utility else None):
                break
            if params.secrets_enabled:
                _maybe_search_dead_end(level, state, view, grid, sim, params)

    return finish_episode(level, state, view, failed=failed)


def _rescue_unentered_door(view: AgentView, dmap):
    """Nearest door seen only from its corridor side.

    A door with no observed floor next to it belongs to a room nobody has
    entered: walking through it is guaranteed to pay off.  Doors of
    already-visited rooms (floor in sight) merely lead back out and are
    not worth an endgame trip.
    """
    doors = (view.apparent == TileKind.DOOR) & ~view.visited
    if not doors.any():
        return None
    floor = view.apparent == TileKind.FLOOR
    near_floor = np.zeros_like(floor)
    near_floor[1:, :] |= floor[:-1, :]
    near_floor[:-1, :] |= floor[1:, :]
    near_floor[:, 1:] |= floor[:, :-1]
    near_floor[:, :-1] |= floor[:, 1:]
    ys, xs = np.nonzero(doors & ~near_floor)
    best = None
    for x, y in zip(xs.tolist(), ys.tolist()):
        d = int(dmap[y, x])
        if d <= 0:
            continue
        key = (d, y, x)
        if best is None or key < best:
            best = key
    if best is None:
        return None
    return (best[2], best[1])


def _rescue_big_component(comps, all_frontiers, view: AgentView, dmap,
                          params: ExplorationParams):
    """Frontier geodesically connected to a huge unanchored region; None
    when no region crosses the rescue size (see RESCUE_AREA_FRACTION)."""
    threshold = rescue_area_threshold(view.level.width, view.level.height)
    candidates = [c for c in comps if c.hidden and c.area >= threshold]
    candidates.sort(key=lambda c: (-c.area, c.rect[1], c.rect[0]))
    for comp in candidates:
        frontier = associate_frontier_reachable(comp, all_frontiers, view)
        if frontier is None:
            continue
        fx, fy = frontier
        if dmap[fy, fx] > 0:
            return frontier
    return None


def _goto(level, state: AgentState, view: AgentView, target: Position,
          abort_check=None) -> bool:
    """Travel to target; False signals a stuck plan (caller terminates).

    With an abort_check, travel re-plans early once new observations make
    the remaining walk pointless (the trip so far still counts as
    progress, so True is returned).
    """
    path = shortest_path(view, state.pos, target)
    if path is None or len(path) < 2:
        return False
    if abort_check is None:
        travel(level, state, view, path)
        return True
    version = view.version
    for cell in path[1:]:
        dx = cell[0] - state.pos[0]
        dy = cell[1] - state.pos[1]
        step_move(level, state, view, DIR_NAME[(dx, dy)])
        if view.version != version:
            version = view.version
            if abort_check(target):
                break
    return True


def _make_abort_check(grid, view: AgentView, params: ExplorationParams):
    def check(target: Position) -> bool:
        fthr = occ.effective_threshold(params.frontier_threshold, view,
                                       params.vary_threshold) * occ.live_inflation(grid, view)
        return occ.frontier_is_low_utility(grid, view, target,
                                           params.frontier_radius, fthr)
    return check


def _search_burst(level, state: AgentState, view: AgentView, grid, sim: SimConfig,
                  params: ExplorationParams, spot: Position):
    """Search for up to searches_per_visit turns against one spot."""
    for _ in range(params.searches_per_visit):
        if spot_search_count(view, spot) >= params.max_searches_per_spot:
            break
        revealed = step_search(level, state, view, sim)
        for pos in revealed:
            occ.reset_cell(grid, pos)
        if revealed and params.stop_burst_on_reveal:
            break


def _maybe_search_dead_end(level, state, view, grid, sim: SimConfig,
                           params: ExplorationParams):
    """Dead-end corridors are searched as soon as the agent stands in one;
    non-secret dead-ends are rare enough that a burst is always worth it."""
    if not view.is_dead_end(state.pos):
        return
    _search_burst(level, state, view, grid, sim, params, state.pos)

"""Baseline agents: closest-frontier exploration, with and without
secret searching.

The plain greedy agent repeatedly walks the shortest path to the nearest
frontier until none remain; by construction it uncovers every traversable
cell on a secret-free map.  The secret-searching variant additionally
searches every eligible wall of each room it enters (nearest unsearched
wall first, standing where the most walls are covered at once) and every
dead-end corridor it reaches, a fixed number of times per spot.
"""

from __future__ import annotations

import numpy as np

from .components import find_frontiers
from .engine import (
    UNKNOWN,
    AgentState,
    AgentView,
    SimConfig,
    distance_map,
    shortest_path,
    start_episode,
    step_search,
    travel,
)
from .episode import EpisodeResult, default_step_budget, finish_episode
from .level import OFFSETS_8, LevelMap, Position, TileKind
from .occmap import choose_stand_position, has_empty_space_beyond


def explore_greedy(level: LevelMap, step_budget: int | None = None) -> EpisodeResult:
    """Always move to the frontier closest to the agent."""
    return _greedy_loop(level, searches_per_wall=0, sim=None, step_budget=step_budget)


def explore_greedy_secret(level: LevelMap, searches_per_wall: int,
                          sim: SimConfig | None = None,
                          step_budget: int | None = None) -> EpisodeResult:
    """Greedy exploration that also searches walls and dead-ends.

    With searches_per_wall = 0 this reduces to the plain greedy agent.
    """
    if searches_per_wall < 0:
        raise ValueError("searches_per_wall must be >= 0")
    return _greedy_loop(level, searches_per_wall, sim or SimConfig(),
                        step_budget=step_budget)


def _greedy_loop(level: LevelMap, searches_per_wall: int, sim: SimConfig | None,
                 step_budget: int | None) -> EpisodeResult:
    budget = step_budget if step_budget is not None else default_step_budget(level)
    state, view = start_episode(level)
    searching = searches_per_wall > 0 and sim is not None
    processed_rooms: set[int] = set()
    failed = False

    while state.actions <= budget:
        if searching:
            for ri in sorted(view.visited_rooms - processed_rooms):
                processed_rooms.add(ri)
                _search_room_walls(level, state, view, ri, searches_per_wall, sim)
            if view.is_dead_end(state.pos):
                _search_here(level, state, view, searches_per_wall, sim)

        frontiers = find_frontiers(view)
        dmap = distance_map(view, state.pos)
        ranked = sorted(
            (int(dmap[fy, fx]), fy, fx) for fx, fy in frontiers if dmap[fy, fx] > 0
        )
        if ranked:
            d, fy, fx = ranked[0]
            path = shortest_path(view, state.pos, (fx, fy))
            if path is None or len(path) < 2:
                break
            travel(level, state, view, path)
            continue
        if not searching:
            break
        # No frontiers left: sweep the dead-end corridors that still have
        # search budget (many are observed in passing without ever being
        # stood on).
        target = _nearest_searchable_dead_end(view, dmap, searches_per_wall)
        if target is None:
            break
        path = shortest_path(view, state.pos, target)
        if path is None or len(path) < 2:
            break
        travel(level, state, view, path)
        _search_here(level, state, view, searches_per_wall, sim)
    else:
        failed = True

    return finish_episode(level, state, view, failed=failed)


def _nearest_searchable_dead_end(view: AgentView, dmap, budget_per_spot: int):
    """Closest seen corridor cell that looks like a dead end and still has
    search budget.

    Unknown neighbours are tolerated here (unlike the strict dead-end
    test): standing on the cell observes them, after which it either turns
    out to be a true dead end and gets searched, or sprouts frontiers.
    """
    corridors = view.apparent == TileKind.CORRIDOR
    ys, xs = np.nonzero(corridors)
    best = None
    for x, y in zip(xs.tolist(), ys.tolist()):
        if view.search_count[y, x] >= budget_per_spot:
            continue
        d = int(dmap[y, x])
        if d <= 0:
            continue
        open_n = sum(
            1 for nx, ny in (
                (x + ox, y + oy) for ox, oy in OFFSETS_8
            )
            if 0 <= nx < view.level.width and 0 <= ny < view.level.height
            and view.is_traversable((nx, ny))
        )
        if open_n != 1:
            continue
        if not _has_blank_neighbor(view, (x, y)):
            continue
        key = (d, y, x)
        if best is None or key < best:
            best = key
    if best is None:
        return None
    return (best[2], best[1])


def _has_blank_neighbor(view: AgentView, pos: Position) -> bool:
    x, y = pos
    for dx, dy in OFFSETS_8:
        nx, ny = x + dx, y + dy
        if not (0 <= nx < view.level.width and 0 <= ny < view.level.height):
            continue
        a = view.apparent[ny, nx]
        if a == UNKNOWN or a == TileKind.ROCK:
            return True
    return False


def _search_here(level, state: AgentState, view: AgentView, budget_per_spot: int,
                 sim: SimConfig):
    """Search while standing; used for dead-end corridor cells."""
    x, y = state.pos
    while view.search_count[y, x] < budget_per_spot:
        revealed = step_search(level, state, view, sim)
        if revealed and not view.is_dead_end(state.pos):
            break


def _eligible_wall(view: AgentView, room, wall: Position, budget_per_spot: int) -> bool:
    """A wall is worth searching while it still looks like a wall, has not
    used up its budget, and has room beyond it for a secret passage."""
    x, y = wall
    if view.apparent[y, x] != TileKind.WALL:
        return False
    if view.searched_count[y, x] >= budget_per_spot:
        return False
    # Beyond: straight out from the room side the wall belongs to.
    if y == room.y0 - 1:
        toward = (x, y - 1)
    elif y == room.y1 + 1:
        toward = (x, y + 1)
    elif x == room.x0 - 1:
        toward = (x - 1, y)
    else:
        toward = (x + 1, y)
    return has_empty_space_beyond(view, wall, toward)


def _search_room_walls(level, state: AgentState, view: AgentView, room_index: int,
                       budget_per_spot: int, sim: SimConfig):
    """Search every eligible wall of a just-entered room.

    Repeatedly: take the unsearched eligible wall nearest the agent, stand
    next to it on the cell that covers the most walls still in need, and
    search until its budget is spent (re-checking after every action since
    reveals change what counts as a wall).
    """
    room = level.rooms[room_index]
    walls = [
        (x, y) for x, y in room.perimeter_cells()
        if 0 <= x < level.width and 0 <= y < level.height
        # Corners cannot hide doors.
        and not ((x < room.x0 or x > room.x1) and (y < room.y0 or y > room.y1))
    ]
    while True:
        dmap = distance_map(view, state.pos)
        todo = [w for w in walls if _eligible_wall(view, room, w, budget_per_spot)]
        if not todo:
            return
        stands = []
        for w in todo:
            stand = choose_stand_position(view, w, dmap, budget_per_spot)
            if stand is not None:
                stands.append((stand[1], w[1], w[0], stand[0], w))
        if not stands:
            return
        stands.sort()
        _, _, _, stand_cell, wall = stands[0]
        if stand_cell != state.pos:
            path = shortest_path(view, state.pos, stand_cell)
            if path is None or len(path) < 2:
                return
            travel(level, state, view, path)
        guard = 0
        while (_eligible_wall(view, room, wall, budget_per_spot)
               and guard < budget_per_spot):
            step_search(level, state, view, sim)
            guard += 1

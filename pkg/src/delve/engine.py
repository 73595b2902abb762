"""Turn-based simulation of one agent on a LevelMap.

The engine owns the agent's partial knowledge (AgentView), the NetHack
field-of-view rules (whole room on entry, 8-neighbourhood in corridors,
straight sight lines to open doors), movement, and the stochastic search
action.  Moves and searches each cost exactly one action; diagonal moves
cost the same as orthogonal ones.

Hidden tiles are never revealed by observation: they are seen as walls
(doors) or rock (corridors) until a search reveals them.  Reveal draws are
counter-based per tile (see delve.rng), so replays and cross-agent
comparisons are exactly reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import grid_bfs
from .level import (
    OFFSETS_8,
    TRAVERSABLE_KINDS,
    LevelMap,
    Position,
    TileKind,
)
from .rng import reveal_roll

UNKNOWN = 255

DIRECTIONS = {
    "N": (0, -1), "NE": (1, -1), "E": (1, 0), "SE": (1, 1),
    "S": (0, 1), "SW": (-1, 1), "W": (-1, 0), "NW": (-1, -1),
}
DIR_NAME = {delta: name for name, delta in DIRECTIONS.items()}


class MoveError(Exception):
    """A planner asked for an illegal move."""


@dataclass(frozen=True)
class SimConfig:
    p_reveal: float = 1 / 3
    reveal_seed: int = 0
    # Chance that simply moving next to a hidden tile reveals it.  Kept at
    # 0 so the core stays deterministic; the accidental-discovery effect
    # can be switched on for ablations.
    p_bump: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.p_reveal <= 1.0:
            raise ValueError("p_reveal must lie in (0, 1]")


class AgentView:
    """The agent's knowledge of the level.

    apparent[y, x] is UNKNOWN or the TileKind the agent believes is there;
    hidden tiles show their disguise until revealed.  Knowledge only ever
    grows: seen cells never revert, search counts only increase.
    """

    def __init__(self, level: LevelMap):
        self.level = level
        h, w = level.height, level.width
        self.apparent = np.full((h, w), UNKNOWN, dtype=np.uint8)
        self.visited = np.zeros((h, w), dtype=bool)
        self.claimed = np.zeros((h, w), dtype=bool)  # cells of entered rooms
        self.search_count = np.zeros((h, w), dtype=np.int32)   # while standing here
        self.searched_count = np.zeros((h, w), dtype=np.int32)  # covered by a search
        self.attempts = np.zeros((h, w), dtype=np.int32)  # reveal rolls per hidden tile
        self.visited_rooms: set[int] = set()
        self.revealed: list[Position] = []
        self._revealed_set: set[Position] = set()
        self.version = 0  # bumps whenever knowledge actually grows

    # -- knowledge queries ------------------------------------------------

    def is_seen(self, pos: Position) -> bool:
        x, y = pos
        return self.apparent[y, x] != UNKNOWN

    def seen_traversable_mask(self) -> np.ndarray:
        return np.isin(self.apparent, TRAVERSABLE_KINDS)

    def unknown_mask(self) -> np.ndarray:
        return self.apparent == UNKNOWN

    def is_traversable(self, pos: Position) -> bool:
        x, y = pos
        return self.apparent[y, x] in (TileKind.FLOOR, TileKind.DOOR, TileKind.CORRIDOR)

    def is_dead_end(self, pos: Position) -> bool:
        """Seen corridor cell with one traversable neighbour, none unknown."""
        x, y = pos
        if self.apparent[y, x] != TileKind.CORRIDOR:
            return False
        open_n = 0
        for dx, dy in OFFSETS_8:
            nx, ny = x + dx, y + dy
            if not (0 <= nx < self.level.width and 0 <= ny < self.level.height):
                continue
            a = self.apparent[ny, nx]
            if a == UNKNOWN:
                return False
            if a in (TileKind.FLOOR, TileKind.DOOR, TileKind.CORRIDOR):
                open_n += 1
        return open_n == 1

    def coverage(self) -> float:
        """Fraction of the open (non-hidden traversable) world that is seen."""
        open_world = self.level.traversable_mask(secrets_revealed=False)
        seen = self.apparent != UNKNOWN
        return float((open_world & seen).sum() / open_world.sum())

    # -- knowledge updates -------------------------------------------------

    def mark_seen(self, pos: Position):
        x, y = pos
        if self.apparent[y, x] == UNKNOWN:
            self.version += 1
        level = self.level
        if level.hidden[y, x] and pos not in self._revealed_set:
            disguise = TileKind.WALL if level.kind[y, x] == TileKind.DOOR else TileKind.ROCK
            self.apparent[y, x] = disguise
        else:
            self.apparent[y, x] = level.kind[y, x]

    def reveal(self, pos: Position):
        x, y = pos
        self._revealed_set.add(pos)
        self.revealed.append(pos)
        self.apparent[y, x] = self.level.kind[y, x]
        # A revealed door stops being mere room boundary; it is a passage
        # again and may carry probability.
        self.claimed[y, x] = False
        self.version += 1


@dataclass
class AgentState:
    pos: Position
    actions: int = 0
    trace: list[str] = field(default_factory=list)


# ---------------------------------------------------------------------------
# observation

SIGHT_DEPTH = 2  # room cells visible past a door at the end of a corridor


def observe(level: LevelMap, view: AgentView, pos: Position):
    """Apply the field of view at pos.

    Inside a room: the whole room, its walls and doors become seen and the
    room counts as visited.  On a door or corridor: the 8 neighbours, plus
    straight corridor sight lines ending at an open door (the door and a
    couple of room cells past it).
    """
    x, y = pos
    kind = level.kind[y, x]
    view.mark_seen(pos)
    if kind == TileKind.FLOOR:
        ri = level.room_index_at(pos)
        if ri is not None and ri not in view.visited_rooms:
            _observe_room(level, view, ri)
        return
    for dx, dy in OFFSETS_8:
        nx, ny = x + dx, y + dy
        if 0 <= nx < level.width and 0 <= ny < level.height:
            view.mark_seen((nx, ny))
    _observe_sight_lines(level, view, pos)


def _observe_room(level: LevelMap, view: AgentView, room_index: int):
    room = level.rooms[room_index]
    view.visited_rooms.add(room_index)
    view.version += 1
    view.apparent[room.y0:room.y1 + 1, room.x0:room.x1 + 1] = TileKind.FLOOR
    view.visited[room.y0:room.y1 + 1, room.x0:room.x1 + 1] = True
    view.claimed[room.y0:room.y1 + 1, room.x0:room.x1 + 1] = True
    for cell in room.perimeter_cells():
        cx, cy = cell
        if 0 <= cx < level.width and 0 <= cy < level.height:
            view.mark_seen(cell)
            view.claimed[cy, cx] = True


def _observe_sight_lines(level: LevelMap, view: AgentView, pos: Position):
    """From a corridor/door cell, look down straight corridor runs; an open
    door at the end is seen along with a sliver of the room behind it."""
    px, py = pos
    for dx, dy in OFFSETS_8:
        run = []
        x, y = px + dx, py + dy
        while (0 <= x < level.width and 0 <= y < level.height
               and level.kind[y, x] == TileKind.CORRIDOR and not level.hidden[y, x]):
            run.append((x, y))
            x, y = x + dx, y + dy
        if not run:
            continue
        if not (0 <= x < level.width and 0 <= y < level.height):
            continue
        if level.kind[y, x] == TileKind.DOOR and not level.hidden[y, x]:
            for cell in run:
                view.mark_seen(cell)
            view.mark_seen((x, y))
            for _ in range(SIGHT_DEPTH):
                x, y = x + dx, y + dy
                if not (0 <= x < level.width and 0 <= y < level.height):
                    break
                if level.kind[y, x] != TileKind.FLOOR:
                    break
                view.mark_seen((x, y))


# ---------------------------------------------------------------------------
# actions

def step_move(level: LevelMap, state: AgentState, view: AgentView, direction: str):
    dx, dy = DIRECTIONS[direction]
    x, y = state.pos
    nx, ny = x + dx, y + dy
    if not (0 <= nx < level.width and 0 <= ny < level.height):
        raise MoveError(f"move {direction} from {state.pos} leaves the map")
    if not view.is_traversable((nx, ny)):
        raise MoveError(f"move {direction} from {state.pos} into non-traversable cell")
    state.pos = (nx, ny)
    state.actions += 1
    state.trace.append(f"step {state.actions}: move {direction}")
    view.visited[ny, nx] = True
    observe(level, view, state.pos)


def step_search(level: LevelMap, state: AgentState, view: AgentView,
                config: SimConfig) -> list[Position]:
    """One search action: may reveal each adjacent hidden tile."""
    x, y = state.pos
    state.actions += 1
    view.search_count[y, x] += 1
    revealed = []
    for dx, dy in OFFSETS_8:
        nx, ny = x + dx, y + dy
        if not (0 <= nx < level.width and 0 <= ny < level.height):
            continue
        view.searched_count[ny, nx] += 1
        if level.hidden[ny, nx] and (nx, ny) not in view._revealed_set:
            view.attempts[ny, nx] += 1
            roll = reveal_roll(config.reveal_seed, nx, ny, int(view.attempts[ny, nx]))
            if roll < config.p_reveal:
                view.reveal((nx, ny))
                revealed.append((nx, ny))
    parts = "; ".join(
        f"{rx},{ry} {'door' if level.kind[ry, rx] == TileKind.DOOR else 'corridor'}"
        for rx, ry in revealed
    )
    state.trace.append(f"step {state.actions}: search [{parts}]")
    return revealed


# ---------------------------------------------------------------------------
# pathfinding over the agent's knowledge

def distance_map(view: AgentView, frm: Position) -> np.ndarray:
    """8-connected BFS distances over seen traversable cells."""
    passable = view.seen_traversable_mask().astype(np.uint8)
    return grid_bfs(np.ascontiguousarray(passable), frm[0], frm[1])


def shortest_path(view: AgentView, frm: Position, to: Position) -> list[Position] | None:
    """Minimum-length 8-connected path over seen traversable cells.

    Returns the cell sequence from frm to to inclusive, or None if
    unreachable.  Unit cost, diagonals included.
    """
    if frm == to:
        return [frm]
    dist = distance_map(view, frm)
    tx, ty = to
    if dist[ty, tx] < 0:
        return None
    path = [to]
    x, y = to
    d = int(dist[ty, tx])
    while d > 0:
        for dx, dy in OFFSETS_8:
            nx, ny = x + dx, y + dy
            if (0 <= nx < view.level.width and 0 <= ny < view.level.height
                    and dist[ny, nx] == d - 1):
                x, y, d = nx, ny, d - 1
                path.append((x, y))
                break
        else:
            raise AssertionError("broken BFS distance field")
    return path[::-1]


def travel(level: LevelMap, state: AgentState, view: AgentView, path: list[Position]):
    """Walk a precomputed path (first cell must be the current position)."""
    for cell in path[1:]:
        dx = cell[0] - state.pos[0]
        dy = cell[1] - state.pos[1]
        step_move(level, state, view, DIR_NAME[(dx, dy)])


def start_episode(level: LevelMap) -> tuple[AgentState, AgentView]:
    """Fresh state and view with the initial observation applied."""
    view = AgentView(level)
    state = AgentState(pos=level.start)
    sx, sy = level.start
    view.visited[sy, sx] = True
    observe(level, view, level.start)
    return state, view

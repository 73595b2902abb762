"""Procedural generator for NetHack-like levels.

Rectangular rooms are placed by rejection sampling inside a 3x3 region
grid, joined by meandering corridors (spanning tree plus a few extra
links), decorated with deliberate dead-end stubs, and sprinkled with
hidden doors and corridor cells.  The target is not any specific
generator's code but its observable statistics: room count, hidden-spot
count, and the fraction of maps whose hidden spots actually cut off rooms.

Everything is a pure function of GenConfig; the same seed yields a
byte-identical map.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .level import DEFAULT_HEIGHT, DEFAULT_WIDTH, OFFSETS_8, LevelMap, Room, TileKind
from .rng import mix, make_rng


class MapGenError(Exception):
    """Raised when a level cannot be generated under the given config."""


class _Retry(Exception):
    pass


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    width: int = DEFAULT_WIDTH
    height: int = DEFAULT_HEIGHT
    room_count_range: tuple[int, int] = (6, 9)
    secrets_enabled: bool = True
    p_hidden_door: float = 1 / 8
    p_hidden_corridor: float = 1 / 100
    # Texture knobs, tuned against the target statistics (mean rooms 7-8,
    # mean hidden spots ~7+-2, about half of maps with a secret room).
    extra_connection_range: tuple[int, int] = (1, 2)
    bonus_door_prob: float = 3.2
    bonus_connect_frac: float = 0.18
    stub_count_range: tuple[int, int] = (22, 28)
    stub_len_range: tuple[int, int] = (16, 26)
    winding: float = 0.8
    reuse_door_prob: float = 0.8
    min_room_width: int = 3
    min_room_height: int = 2
    max_retries: int = 40

    def __post_init__(self):
        if not 0.0 <= self.p_hidden_door <= 1.0 or not 0.0 <= self.p_hidden_corridor <= 1.0:
            raise ValueError("hidden probabilities must lie in [0, 1]")
        lo, hi = self.room_count_range
        if lo < 1 or hi < lo:
            raise ValueError("room_count_range must be a non-empty range >= 1")


@dataclass
class GenStats:
    n_maps: int
    mean_rooms: float
    mean_hidden_spots: float
    frac_with_secret_rooms: float
    mean_corridor_cells: float = 0.0
    mean_doors: float = 0.0


def stats(maps: list[LevelMap]) -> GenStats:
    """Aggregate generator statistics used for calibration."""
    if not maps:
        raise ValueError("stats needs at least one map")
    rooms = [len(m.rooms) for m in maps]
    hidden = [int(m.hidden.sum()) for m in maps]
    secretful = [1 if m.secret_room_indices() else 0 for m in maps]
    corridors = [int((m.kind == TileKind.CORRIDOR).sum()) for m in maps]
    doors = [int((m.kind == TileKind.DOOR).sum()) for m in maps]
    n = len(maps)
    return GenStats(
        n_maps=n,
        mean_rooms=sum(rooms) / n,
        mean_hidden_spots=sum(hidden) / n,
        frac_with_secret_rooms=sum(secretful) / n,
        mean_corridor_cells=sum(corridors) / n,
        mean_doors=sum(doors) / n,
    )


def generate(config: GenConfig) -> LevelMap:
    """Generate one level; deterministic in config.seed."""
    for attempt in range(config.max_retries):
        rng = make_rng(mix(config.seed, attempt))
        try:
            return _generate_once(config, rng)
        except _Retry:
            continue
    raise MapGenError(f"could not generate a level for seed {config.seed}; "
                      "config is likely degenerate (rooms cannot fit)")


# ---------------------------------------------------------------------------
# generation passes

_SIDES = ("N", "S", "W", "E")


def _regions(width: int, height: int) -> list[tuple[int, int, int, int]]:
    """3x3 grid of (x0, y0, x1, y1) regions covering the map."""
    xs = [0, width // 3, 2 * width // 3, width]
    ys = [0, height // 3, 2 * height // 3, height]
    return [
        (xs[c], ys[r], xs[c + 1] - 1, ys[r + 1] - 1)
        for r in range(3)
        for c in range(3)
    ]


def _place_rooms(config: GenConfig, rng) -> list[Room]:
    lo, hi = config.room_count_range
    n = int(rng.integers(lo, hi + 1))
    slots = _regions(config.width, config.height)
    if n > len(slots):
        raise _Retry
    order = rng.permutation(len(slots))
    rooms = []
    for i in range(n):
        rx0, ry0, rx1, ry1 = slots[order[i]]
        # Interior plus wall ring plus one rock margin must fit the region.
        w_max = min(13, rx1 - rx0 - 3)
        h_max = min(4, ry1 - ry0 - 3)
        if w_max < config.min_room_width or h_max < config.min_room_height:
            raise _Retry
        w = int(rng.integers(config.min_room_width, w_max + 1))
        h = int(rng.integers(config.min_room_height, h_max + 1))
        x0 = int(rng.integers(rx0 + 2, rx1 - 2 - w + 2))
        y0 = int(rng.integers(ry0 + 2, ry1 - 2 - h + 2))
        rooms.append(Room(x0, y0, x0 + w - 1, y0 + h - 1))
    return rooms


def _carve_rooms(kind: np.ndarray, disguise: np.ndarray, rooms: list[Room]):
    for room in rooms:
        kind[room.y0:room.y1 + 1, room.x0:room.x1 + 1] = TileKind.FLOOR
        disguise[room.y0:room.y1 + 1, room.x0:room.x1 + 1] = ord(".")
        for x, y in room.perimeter_cells():
            kind[y, x] = TileKind.WALL
            disguise[y, x] = ord(_wall_glyph(room, (x, y)))


def _wall_glyph(room: Room, pos) -> str:
    x, y = pos
    if y == room.y0 - 1 or y == room.y1 + 1:
        return "-"
    return "|"


def _connection_edges(rooms: list[Room], config: GenConfig, rng) -> list[tuple[int, int]]:
    """Spanning tree over room centers plus a few extra links."""
    n = len(rooms)
    centers = [r.center for r in rooms]
    pairs = sorted(
        (abs(centers[a][0] - centers[b][0]) + abs(centers[a][1] - centers[b][1]), a, b)
        for a in range(n) for b in range(a + 1, n)
    )
    parent = list(range(n))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    edges = []
    rest = []
    for _, a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            edges.append((a, b))
        else:
            rest.append((a, b))
    lo, hi = config.extra_connection_range
    n_extra = min(int(rng.integers(lo, hi + 1)), len(rest))
    # Prefer short extra links; they create realistic local cycles.
    for i in range(n_extra):
        edges.append(rest[i])
    return edges


def _door_side(room: Room, toward) -> str:
    dx = toward[0] - room.center[0]
    dy = toward[1] - room.center[1]
    if abs(dx) * room.height >= abs(dy) * room.width * 2:
        return "E" if dx > 0 else "W"
    return "S" if dy > 0 else "N"


def _side_cells(room: Room, side: str):
    if side == "N":
        return [(x, room.y0 - 1) for x in range(room.x0, room.x1 + 1)]
    if side == "S":
        return [(x, room.y1 + 1) for x in range(room.x0, room.x1 + 1)]
    if side == "W":
        return [(room.x0 - 1, y) for y in range(room.y0, room.y1 + 1)]
    return [(room.x1 + 1, y) for y in range(room.y0, room.y1 + 1)]


_OUTWARD = {"N": (0, -1), "S": (0, 1), "W": (-1, 0), "E": (1, 0)}


def _pick_door(kind: np.ndarray, room: Room, side: str, config: GenConfig, rng,
               reuse: bool = True, rock_only: bool = False):
    """Choose (or reuse) a door cell on the given wall side.

    Returns (door_pos, outside_pos) or None if the side cannot host one.
    rock_only rejects spots with a corridor directly outside, so bonus
    doors cannot silently become extra network connections.
    """
    height, width = kind.shape
    dx, dy = _OUTWARD[side]
    existing = [
        (x, y) for x, y in room.doors
        if (side in ("N", "S") and y == (room.y0 - 1 if side == "N" else room.y1 + 1))
        or (side in ("W", "E") and x == (room.x0 - 1 if side == "W" else room.x1 + 1))
    ]
    if existing and reuse and rng.random() < config.reuse_door_prob:
        x, y = existing[int(rng.integers(len(existing)))]
        return (x, y), (x + dx, y + dy)
    allowed = (TileKind.ROCK,) if rock_only else (TileKind.ROCK, TileKind.CORRIDOR)
    candidates = []
    for x, y in _side_cells(room, side):
        ox, oy = x + dx, y + dy
        if not (0 <= ox < width and 0 <= oy < height):
            continue
        if kind[y, x] == TileKind.WALL and kind[oy, ox] in allowed:
            candidates.append(((x, y), (ox, oy)))
    if not candidates:
        if existing and not rock_only:
            x, y = existing[0]
            return (x, y), (x + dx, y + dy)
        return None
    return candidates[int(rng.integers(len(candidates)))]


def _route_corridor(kind: np.ndarray, start, goal, jitter: np.ndarray,
                    wall_penalty: np.ndarray) -> list | None:
    """Cheapest orthogonal path over rock/corridor cells, with jitter so
    corridors meander instead of running straight."""
    height, width = kind.shape
    dist = {start: 0.0}
    prev = {}
    heap = [(0.0, start)]
    while heap:
        d, cur = heapq.heappop(heap)
        if cur == goal:
            path = [cur]
            while cur in prev:
                cur = prev[cur]
                path.append(cur)
            return path[::-1]
        if d > dist.get(cur, np.inf):
            continue
        x, y = cur
        for nx, ny in ((x, y - 1), (x - 1, y), (x + 1, y), (x, y + 1)):
            if not (0 <= nx < width and 0 <= ny < height):
                continue
            if (nx, ny) != goal and kind[ny, nx] not in (TileKind.ROCK, TileKind.CORRIDOR):
                continue
            nd = d + 1.0 + jitter[ny, nx] + wall_penalty[ny, nx]
            if nd < dist.get((nx, ny), np.inf):
                dist[(nx, ny)] = nd
                prev[(nx, ny)] = cur
                heapq.heappush(heap, (nd, (nx, ny)))
    return None


def _carve_corridor(kind: np.ndarray, disguise: np.ndarray, cells):
    for x, y in cells:
        if kind[y, x] == TileKind.ROCK:
            kind[y, x] = TileKind.CORRIDOR
            disguise[y, x] = ord("#")


def _set_door(kind: np.ndarray, disguise: np.ndarray, room: Room, pos):
    x, y = pos
    if kind[y, x] != TileKind.DOOR:
        kind[y, x] = TileKind.DOOR
        disguise[y, x] = ord("+")
        room.doors.append(pos)


def _walk_stub(kind: np.ndarray, rng, start, length: int) -> list:
    """Self-avoiding orthogonal walk into rock; stops when boxed in.

    The walk keeps one cell of rock between itself and every existing
    corridor (and its own earlier cells), so stubs are true dead ends
    rather than accidental shortcuts.
    """
    height, width = kind.shape
    cells = []
    walked = {start}
    x, y = start
    heading = None
    for _ in range(length):
        options = []
        for dx, dy in ((0, -1), (-1, 0), (1, 0), (0, 1)):
            nx, ny = x + dx, y + dy
            if not (0 <= nx < width and 0 <= ny < height):
                continue
            if kind[ny, nx] != TileKind.ROCK or (nx, ny) in walked:
                continue
            # Diagonal contact counts: movement is 8-connected, so a stub
            # touching another corridor even corner-to-corner would merge
            # with the network instead of dead-ending.
            blocked = False
            for ax, ay in OFFSETS_8:
                px, py = nx + ax, ny + ay
                if (px, py) == (x, y):
                    continue
                if (px, py) in walked:
                    blocked = True
                    break
                if (0 <= px < width and 0 <= py < height
                        and kind[py, px] in (TileKind.CORRIDOR, TileKind.DOOR)):
                    blocked = True
                    break
            if blocked:
                continue
            weight = 8.0 if heading == (dx, dy) else 1.0
            options.append(((dx, dy), weight))
        if not options:
            break
        weights = np.array([w for _, w in options])
        pick = int(rng.choice(len(options), p=weights / weights.sum()))
        heading = options[pick][0]
        x, y = x + heading[0], y + heading[1]
        walked.add((x, y))
        cells.append((x, y))
    return cells


_TRAVERSABLE_GEN = (TileKind.CORRIDOR, TileKind.DOOR, TileKind.FLOOR)


def _mid_run_cell(kind: np.ndarray, x: int, y: int) -> bool:
    """Corridor cell that leaves searchable dead ends when hidden.

    Mid-run: exactly two orthogonal traversable neighbours, opposite each
    other, neither a door -- and each of those flanking cells must have no
    other traversable contact (8-way), so hiding this cell turns both into
    clean single-neighbour dead ends that the search routines target.
    """
    height, width = kind.shape
    open_dirs = []
    for dx, dy in ((0, -1), (-1, 0), (1, 0), (0, 1)):
        nx, ny = x + dx, y + dy
        if not (0 <= nx < width and 0 <= ny < height):
            continue
        k = kind[ny, nx]
        if k == TileKind.DOOR:
            return False
        if k in (TileKind.CORRIDOR, TileKind.FLOOR):
            open_dirs.append((dx, dy))
    if len(open_dirs) != 2:
        return False
    (ax, ay), (bx, by) = open_dirs
    if ax != -bx or ay != -by:
        return False
    for dx, dy in open_dirs:
        sx, sy = x + dx, y + dy
        contacts = 0
        for ox, oy in OFFSETS_8:
            px, py = sx + ox, sy + oy
            if (px, py) == (x, y):
                continue
            if (0 <= px < width and 0 <= py < height
                    and kind[py, px] in _TRAVERSABLE_GEN):
                contacts += 1
        if contacts != 1:
            return False
    return True




def _add_bonus_door(kind, disguise, room, config: GenConfig, rng, jitter, wall_penalty):
    side = _SIDES[int(rng.integers(4))]
    picked = _pick_door(kind, room, side, config, rng, reuse=False, rock_only=True)
    if picked is None:
        return
    door, outside = picked
    ox, oy = outside
    corridor_cells = sorted(zip(*np.nonzero(kind == TileKind.CORRIDOR)[::-1]))
    if rng.random() < config.bonus_connect_frac and corridor_cells:
        dists = [abs(cx - ox) + abs(cy - oy) for cx, cy in corridor_cells]
        target = corridor_cells[int(np.argmin(dists))]
        path = _route_corridor(kind, outside, target, jitter, wall_penalty)
        if path is None:
            return
        _set_door(kind, disguise, room, door)
        _carve_corridor(kind, disguise, path)
    else:
        lo, hi = config.stub_len_range
        cells = [outside] + _walk_stub(kind, rng, outside, int(rng.integers(lo, hi + 1)))
        _set_door(kind, disguise, room, door)
        _carve_corridor(kind, disguise, cells)


def _generate_once(config: GenConfig, rng) -> LevelMap:
    width, height = config.width, config.height
    if width < 16 or height < 12:
        raise _Retry
    kind = np.zeros((height, width), dtype=np.uint8)
    disguise = np.full((height, width), ord(" "), dtype=np.uint8)

    rooms = _place_rooms(config, rng)
    _carve_rooms(kind, disguise, rooms)

    jitter = rng.random((height, width)) * config.winding
    wall_penalty = np.where(kind == TileKind.WALL, np.inf, 0.0)
    # Strong penalty for hugging walls: corridors stay out in the rock and
    # approach doors head-on, the way NetHack digs them.  Without this,
    # hidden doors end up flanked by pass-through corridor cells that no
    # search rule ever targets.
    hug = np.zeros((height, width))
    wall = kind == TileKind.WALL
    hug[1:, :] += wall[:-1, :]
    hug[:-1, :] += wall[1:, :]
    hug[:, 1:] += wall[:, :-1]
    hug[:, :-1] += wall[:, 1:]
    wall_penalty = wall_penalty + 2.5 * hug

    for a, b in _connection_edges(rooms, config, rng):
        da = _pick_door(kind, rooms[a], _door_side(rooms[a], rooms[b].center), config, rng)
        db = _pick_door(kind, rooms[b], _door_side(rooms[b], rooms[a].center), config, rng)
        if da is None or db is None:
            raise _Retry
        path = _route_corridor(kind, da[1], db[1], jitter, wall_penalty)
        if path is None:
            raise _Retry
        _set_door(kind, disguise, rooms[a], da[0])
        _set_door(kind, disguise, rooms[b], db[0])
        _carve_corridor(kind, disguise, path)

    # Bonus doors: a fraction join the corridor network, the rest dead-end.
    # bonus_door_prob may exceed 1 (integer part = guaranteed attempts).
    for room in rooms:
        rounds = int(config.bonus_door_prob)
        if rng.random() < config.bonus_door_prob - rounds:
            rounds += 1
        for _ in range(rounds):
            _add_bonus_door(kind, disguise, room, config, rng, jitter, wall_penalty)

    # Dead-end stubs off the corridor network.
    corridor_cells = sorted(zip(*np.nonzero(kind == TileKind.CORRIDOR)[::-1]))
    if corridor_cells:
        lo, hi = config.stub_count_range
        for _ in range(int(rng.integers(lo, hi + 1))):
            sx, sy = corridor_cells[int(rng.integers(len(corridor_cells)))]
            lo_l, hi_l = config.stub_len_range
            cells = _walk_stub(kind, rng, (sx, sy), int(rng.integers(lo_l, hi_l + 1)))
            _carve_corridor(kind, disguise, cells)

    hidden = np.zeros((height, width), dtype=bool)
    if config.secrets_enabled:
        for room in rooms:
            for x, y in room.doors:
                if rng.random() < config.p_hidden_door:
                    hidden[y, x] = True
                    disguise[y, x] = ord(_wall_glyph(room, (x, y)))
        # Secret corridor cells only appear mid-run (straight through,
        # away from junctions and doorways), like cells marked during
        # NetHack's linear corridor digging.  A hidden cell then leaves a
        # clean searchable dead end on each side.
        ys, xs = np.nonzero(kind == TileKind.CORRIDOR)
        for x, y in zip(xs, ys):
            if not _mid_run_cell(kind, x, y):
                continue
            if rng.random() < config.p_hidden_corridor:
                hidden[y, x] = True
                disguise[y, x] = ord(" ")

    start_room = rooms[int(rng.integers(len(rooms)))]
    start = start_room.center

    if any(not room.doors for room in rooms):
        raise _Retry
    level = LevelMap(kind, hidden, disguise, sorted(rooms, key=lambda r: (r.y0, r.x0)), start)
    if len(level.rooms_reachable_with_secrets()) != len(rooms):
        raise _Retry
    return level


def config_for_episode(base: GenConfig, seed: int) -> GenConfig:
    """The same generator settings bound to a specific derived seed."""
    return replace(base, seed=seed)


@lru_cache(maxsize=4096)
def generate_cached(config: GenConfig) -> LevelMap:
    """Memoized generate; safe because LevelMap is immutable.  Lets several
    agents or parameter cells share the same run's map cheaply."""
    return generate(config)

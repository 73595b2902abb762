"""Ground-truth dungeon level: tiles, rooms, hidden spots, reachability.

Grids are numpy arrays indexed [y, x]; positions travel through the API as
(x, y) tuples.  A LevelMap is immutable after construction and safe to
share between concurrently running episodes.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

DEFAULT_WIDTH = 80
DEFAULT_HEIGHT = 20

Position = tuple[int, int]


class TileKind(IntEnum):
    ROCK = 0      # ' ' non-traversable empty space
    FLOOR = 1     # '.'
    WALL = 2      # '|' or '-'
    DOOR = 3      # '+'
    CORRIDOR = 4  # '#'


TRAVERSABLE_KINDS = (TileKind.FLOOR, TileKind.DOOR, TileKind.CORRIDOR)

KIND_GLYPH = {
    TileKind.ROCK: " ",
    TileKind.FLOOR: ".",
    TileKind.DOOR: "+",
    TileKind.CORRIDOR: "#",
}

# 4-neighbourhood (diffusion) and 8-neighbourhood (movement, searching).
OFFSETS_4 = ((0, -1), (-1, 0), (1, 0), (0, 1))
OFFSETS_8 = ((-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1))


@dataclass(frozen=True)
class Tile:
    kind: TileKind
    hidden: bool = False

    def __post_init__(self):
        if self.hidden and self.kind not in (TileKind.DOOR, TileKind.CORRIDOR):
            raise ValueError("only doors and corridors can be hidden")


def is_traversable(tile: Tile, secrets_revealed: bool) -> bool:
    """Walls and rock never; hidden tiles only once secrets are revealed."""
    if tile.kind not in TRAVERSABLE_KINDS:
        return False
    return not tile.hidden or secrets_revealed


def neighbors(pos: Position, width: int, height: int, connectivity: int = 8) -> list[Position]:
    """In-bounds neighbours; connectivity is 4 (orthogonal) or 8."""
    if connectivity == 4:
        offsets = OFFSETS_4
    elif connectivity == 8:
        offsets = OFFSETS_8
    else:
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    x, y = pos
    return [
        (x + dx, y + dy)
        for dx, dy in offsets
        if 0 <= x + dx < width and 0 <= y + dy < height
    ]


@dataclass
class Room:
    """Axis-aligned room: interior floor rectangle plus its perimeter doors."""

    x0: int
    y0: int
    x1: int  # inclusive
    y1: int  # inclusive
    doors: list[Position] = field(default_factory=list)

    @property
    def width(self) -> int:
        return self.x1 - self.x0 + 1

    @property
    def height(self) -> int:
        return self.y1 - self.y0 + 1

    @property
    def area(self) -> int:
        return self.width * self.height

    @property
    def center(self) -> Position:
        return ((self.x0 + self.x1) // 2, (self.y0 + self.y1) // 2)

    def contains(self, pos: Position) -> bool:
        x, y = pos
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1

    def floor_cells(self) -> list[Position]:
        return [(x, y) for y in range(self.y0, self.y1 + 1) for x in range(self.x0, self.x1 + 1)]

    def perimeter_cells(self) -> list[Position]:
        """The wall ring one cell outside the interior rectangle."""
        cells = []
        for x in range(self.x0 - 1, self.x1 + 2):
            cells.append((x, self.y0 - 1))
            cells.append((x, self.y1 + 1))
        for y in range(self.y0, self.y1 + 1):
            cells.append((self.x0 - 1, y))
            cells.append((self.x1 + 1, y))
        return cells


class LevelMap:
    """Immutable ground-truth level.

    kind/hidden are [height, width] numpy arrays.  ``disguise`` holds the
    glyph each cell presents before secrets are revealed: hidden doors keep
    their wall glyph, hidden corridors look like rock.  Non-hidden walls
    also use it to remember '|' vs '-' across serialize/parse round trips.
    """

    def __init__(self, kind: np.ndarray, hidden: np.ndarray, disguise: np.ndarray,
                 rooms: list[Room], start: Position):
        self.kind = kind
        self.hidden = hidden
        self.disguise = disguise
        self.rooms = rooms
        self.start = start
        self.height, self.width = kind.shape
        kind.setflags(write=False)
        hidden.setflags(write=False)
        disguise.setflags(write=False)
        self._validate()

    def _validate(self):
        sx, sy = self.start
        if not (0 <= sx < self.width and 0 <= sy < self.height):
            raise ValueError("start out of bounds")
        if self.kind[sy, sx] != TileKind.FLOOR or self.hidden[sy, sx]:
            raise ValueError("start must be a non-hidden room floor tile")
        bad = self.hidden & ~np.isin(self.kind, (TileKind.DOOR, TileKind.CORRIDOR))
        if bad.any():
            raise ValueError("hidden flag on a non-door, non-corridor tile")

    def tile(self, pos: Position) -> Tile:
        x, y = pos
        return Tile(TileKind(int(self.kind[y, x])), bool(self.hidden[y, x]))

    def traversable_mask(self, secrets_revealed: bool) -> np.ndarray:
        mask = np.isin(self.kind, TRAVERSABLE_KINDS)
        if not secrets_revealed:
            mask &= ~self.hidden
        return mask

    def room_index_at(self, pos: Position) -> int | None:
        for i, room in enumerate(self.rooms):
            if room.contains(pos):
                return i
        return None

    @property
    def hidden_positions(self) -> list[Position]:
        ys, xs = np.nonzero(self.hidden)
        return [(int(x), int(y)) for x, y in zip(xs, ys)]

    # -- reachability ---------------------------------------------------

    def rooms_reachable_without_secrets(self) -> set[int]:
        """Indices of rooms connected to start through non-hidden tiles.

        The complement is the level's secret rooms.
        """
        return self._reachable_rooms(self.traversable_mask(secrets_revealed=False))

    def rooms_reachable_with_secrets(self) -> set[int]:
        return self._reachable_rooms(self.traversable_mask(secrets_revealed=True))

    def secret_room_indices(self) -> set[int]:
        return set(range(len(self.rooms))) - self.rooms_reachable_without_secrets()

    def _reachable_rooms(self, mask: np.ndarray) -> set[int]:
        seen = np.zeros_like(mask, dtype=bool)
        sx, sy = self.start
        seen[sy, sx] = True
        queue = deque([(sx, sy)])
        while queue:
            x, y = queue.popleft()
            for nx, ny in neighbors((x, y), self.width, self.height, 8):
                if mask[ny, nx] and not seen[ny, nx]:
                    seen[ny, nx] = True
                    queue.append((nx, ny))
        reached = set()
        for i, room in enumerate(self.rooms):
            if seen[room.y0:room.y1 + 1, room.x0:room.x1 + 1].any():
                reached.add(i)
        return reached

    # -- serialization ---------------------------------------------------

    def serialize(self) -> str:
        """Text form: disguised glyph grid, then hidden and start lines."""
        lines = []
        for y in range(self.height):
            row = []
            for x in range(self.width):
                if (x, y) == self.start:
                    row.append("@")
                else:
                    row.append(chr(self.disguise[y, x]))
            lines.append("".join(row))
        for x, y in sorted(self.hidden_positions, key=lambda p: (p[1], p[0])):
            kind = "door" if self.kind[y, x] == TileKind.DOOR else "corridor"
            lines.append(f"hidden: {x},{y} {kind}")
        lines.append(f"start: {self.start[0]},{self.start[1]}")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "LevelMap":
        glyph_lines = []
        hidden_specs = []
        start = None
        for line in text.splitlines():
            if line.startswith("hidden:"):
                coords, kind_name = line[len("hidden:"):].split()
                x, y = (int(v) for v in coords.split(","))
                hidden_specs.append((x, y, kind_name))
            elif line.startswith("start:"):
                x, y = (int(v) for v in line[len("start:"):].strip().split(","))
                start = (x, y)
            elif line or not glyph_lines:
                glyph_lines.append(line)
        if start is None:
            raise ValueError("map file missing start line")
        height = len(glyph_lines)
        width = len(glyph_lines[0])
        if any(len(row) != width for row in glyph_lines):
            raise ValueError("ragged glyph grid")

        kind = np.zeros((height, width), dtype=np.uint8)
        hidden = np.zeros((height, width), dtype=bool)
        disguise = np.zeros((height, width), dtype=np.uint8)
        glyph_kind = {
            " ": TileKind.ROCK, ".": TileKind.FLOOR, "#": TileKind.CORRIDOR,
            "+": TileKind.DOOR, "|": TileKind.WALL, "-": TileKind.WALL,
        }
        for y, row in enumerate(glyph_lines):
            for x, ch in enumerate(row):
                if ch == "@":
                    if (x, y) != start:
                        raise ValueError("'@' glyph does not match start line")
                    ch = "."
                if ch not in glyph_kind:
                    raise ValueError(f"bad glyph {ch!r} at {x},{y}")
                kind[y, x] = glyph_kind[ch]
                disguise[y, x] = ord(ch)
        for x, y, kind_name in hidden_specs:
            kind[y, x] = TileKind.DOOR if kind_name == "door" else TileKind.CORRIDOR
            hidden[y, x] = True

        rooms = _rebuild_rooms(kind)
        return cls(kind, hidden, disguise, rooms, start)


def _rebuild_rooms(kind: np.ndarray) -> list[Room]:
    """Recover room rectangles from the floor cells.

    Generated rooms are separated by at least one non-floor cell, so each
    4-connected floor component is exactly one rectangular interior.
    """
    height, width = kind.shape
    seen = np.zeros((height, width), dtype=bool)
    rooms = []
    for y in range(height):
        for x in range(width):
            if kind[y, x] != TileKind.FLOOR or seen[y, x]:
                continue
            queue = deque([(x, y)])
            seen[y, x] = True
            xs, ys = [x], [y]
            while queue:
                cx, cy = queue.popleft()
                for nx, ny in neighbors((cx, cy), width, height, 4):
                    if kind[ny, nx] == TileKind.FLOOR and not seen[ny, nx]:
                        seen[ny, nx] = True
                        xs.append(nx)
                        ys.append(ny)
                        queue.append((nx, ny))
            room = Room(min(xs), min(ys), max(xs), max(ys))
            if room.area != len(xs):
                raise ValueError("non-rectangular floor component")
            room.doors = [
                (px, py) for px, py in room.perimeter_cells()
                if 0 <= px < width and 0 <= py < height and kind[py, px] == TileKind.DOOR
            ]
            rooms.append(room)
    rooms.sort(key=lambda r: (r.y0, r.x0))
    return rooms

"""Decompose unexplored space into rectangular candidate destinations.

Unknown cells that are deep inside unexplored space (enough unknown
neighbours) and still carry enough probability are grouped, split into
maximal rectangles, and matched to the frontier best placed to reach
them.  A rectangle no frontier can reach in a straight line through
unexplored space is a hidden component: if it hides anything, it is
behind a secret door or corridor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import grid_bfs_multi, label_regions, largest_rect
from .engine import UNKNOWN, AgentView
from .level import OFFSETS_8, Position, TileKind
from .occupancy import OccupancyGrid


@dataclass
class Component:
    rect: tuple[int, int, int, int]  # x0, y0, x1, y1 inclusive
    cells: list[Position]
    utility: float
    frontier: Position | None = None      # anchor when reachable
    search_spot: Position | None = None   # anchor when hidden (set by planner)
    priority: bool = False                # partially seen room: always wins

    @property
    def hidden(self) -> bool:
        return self.frontier is None

    @property
    def area(self) -> int:
        return len(self.cells)

    def anchor_pos(self) -> Position:
        return self.frontier if self.frontier is not None else self.search_spot


def find_frontiers(view: AgentView) -> list[Position]:
    """Seen traversable cells bordering unknown space, plus unentered
    doors of visited rooms.  Sorted by (y, x) for determinism."""
    seen_trav = view.seen_traversable_mask()
    unknown = view.unknown_mask()
    near_unknown = np.zeros_like(unknown)
    near_unknown[1:, :] |= unknown[:-1, :]
    near_unknown[:-1, :] |= unknown[1:, :]
    near_unknown[:, 1:] |= unknown[:, :-1]
    near_unknown[:, :-1] |= unknown[:, 1:]
    ys, xs = np.nonzero(seen_trav & near_unknown)
    frontiers = {(int(x), int(y)) for x, y in zip(xs, ys)}
    for ri in view.visited_rooms:
        for door in view.level.rooms[ri].doors:
            dx, dy = door
            if view.apparent[dy, dx] == TileKind.DOOR and not view.visited[dy, dx]:
                frontiers.add(door)
    return sorted(frontiers, key=lambda p: (p[1], p[0]))


def maximal_rectangles(cells: set[Position]) -> list[tuple[int, int, int, int]]:
    """Greedy largest-first split of a cell set into maximal rectangles.

    Each returned rectangle is the largest axis-aligned rectangle fully
    inside the not-yet-covered remainder (ties broken by top-left corner,
    then by height), so rectangles are disjoint and their union is exact.
    """
    if not cells:
        return []
    xs = [x for x, _ in cells]
    ys = [y for _, y in cells]
    bx0, bx1 = min(xs), max(xs)
    by0, by1 = min(ys), max(ys)
    if len(cells) == (bx1 - bx0 + 1) * (by1 - by0 + 1):
        return [(bx0, by0, bx1, by1)]  # already one full rectangle
    mask = np.zeros((by1 - by0 + 1, bx1 - bx0 + 1), dtype=np.uint8)
    for x, y in cells:
        mask[y - by0, x - bx0] = 1
    rects = []
    while True:
        found = largest_rect(np.ascontiguousarray(mask))
        if found is None:
            return rects
        x0, y0, x1, y1 = found
        mask[y0:y1 + 1, x0:x1 + 1] = 0
        rects.append((x0 + bx0, y0 + by0, x1 + bx0, y1 + by0))


def bresenham(a: Position, b: Position) -> list[Position]:
    """All grid cells on the line from a to b, inclusive."""
    x0, y0 = a
    x1, y1 = b
    dx, dy = abs(x1 - x0), abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx - dy
    out = []
    x, y = x0, y0
    while True:
        out.append((x, y))
        if (x, y) == (x1, y1):
            return out
        e2 = 2 * err
        if e2 > -dy:
            err -= dy
            x += sx
        if e2 < dx:
            err += dx
            y += sy


def blank_mask(view: AgentView) -> np.ndarray:
    """Cells that read as ' ' to the agent: unknown or bare rock.
    Observed rock next to a walked corridor looks exactly like unexplored
    space, so both count as blank."""
    return (view.apparent == UNKNOWN) | (view.apparent == TileKind.ROCK)


def _clear_line(view: AgentView, a: Position, b: Position) -> bool:
    """Straight line from a to b passes only through blank cells
    (endpoints excluded).  Inline Bresenham walk with early exit."""
    x, y = a
    x1, y1 = b
    dx, dy = abs(x1 - x), abs(y1 - y)
    if dx <= 1 and dy <= 1:
        return True  # adjacent: nothing in between
    sx = 1 if x < x1 else -1
    sy = 1 if y < y1 else -1
    err = dx - dy
    apparent = view.apparent
    while True:
        e2 = 2 * err
        if e2 > -dy:
            err -= dy
            x += sx
        if e2 < dx:
            err += dx
            y += sy
        if x == x1 and y == y1:
            return True
        if apparent[y, x] != UNKNOWN and apparent[y, x] != TileKind.ROCK:
            return False


# Detour allowance for the geodesic rescue of large components: blank-space
# path at most DETOUR_FACTOR times the straight-line distance plus slack.
DETOUR_FACTOR = 2.0
DETOUR_SLACK = 4

# Unanchored regions covering at least this fraction of the map get the
# last-resort geodesic rescue: an area that big almost certainly has real
# access (and rooms) even when every straight line crosses some explored
# thread, while smaller pockets are cheaper to abandon than to chase.
RESCUE_AREA_FRACTION = 0.2


def rescue_area_threshold(width: int, height: int) -> int:
    return max(1, int(RESCUE_AREA_FRACTION * width * height))


def component_blank_distances(component: Component, view: AgentView) -> np.ndarray:
    """Blank-space geodesic distance from the component to every cell."""
    h, w = view.apparent.shape
    seeds = np.zeros((h, w), dtype=np.uint8)
    for x, y in component.cells:
        seeds[y, x] = 1
    passable = np.ascontiguousarray(blank_mask(view).astype(np.uint8))
    return grid_bfs_multi(passable, seeds)


def closest_cell(component: Component, pos: Position) -> tuple[Position, float]:
    """The component cell nearest to pos (Euclidean; ties by (y, x)).

    Components from decompose are exact rectangles, so the nearest cell is
    pos clamped into the rect; irregular (priority) components fall back
    to a scan.
    """
    px, py = pos
    x0, y0, x1, y1 = component.rect
    if component.area == (x1 - x0 + 1) * (y1 - y0 + 1):
        cx = min(max(px, x0), x1)
        cy = min(max(py, y0), y1)
        d = ((cx - px) ** 2 + (cy - py) ** 2) ** 0.5
        return (cx, cy), d
    best = min(
        component.cells,
        key=lambda c: ((c[0] - px) ** 2 + (c[1] - py) ** 2, c[1], c[0]),
    )
    d = ((best[0] - px) ** 2 + (best[1] - py) ** 2) ** 0.5
    return best, d


def associate_frontier(component: Component, frontiers: list[Position],
                       view: AgentView) -> Position | None:
    """Nearest frontier with a straight line through blank space to the
    component's closest cell; None marks the component hidden.  Ties in
    distance resolve by frontier (y, x)."""
    if not frontiers:
        return None
    x0, y0, x1, y1 = component.rect
    full_rect = component.area == (x1 - x0 + 1) * (y1 - y0 + 1)
    fx = np.fromiter((f[0] for f in frontiers), dtype=np.int64, count=len(frontiers))
    fy = np.fromiter((f[1] for f in frontiers), dtype=np.int64, count=len(frontiers))
    cx = np.clip(fx, x0, x1)
    cy = np.clip(fy, y0, y1)
    d2 = (fx - cx) ** 2 + (fy - cy) ** 2
    for i in np.lexsort((fx, fy, d2)).tolist():
        f = frontiers[i]
        if full_rect:
            cell = (int(cx[i]), int(cy[i]))
        else:
            cell, _ = closest_cell(component, f)
        if _clear_line(view, f, cell):
            return f
    return None


def associate_frontier_reachable(component: Component, frontiers: list[Position],
                                 view: AgentView) -> Position | None:
    """Nearest frontier connected to the component through blank space
    without a long detour.  Used to rescue large components whose straight
    lines all happen to cross explored threads; walls and room floors
    still cut blank space, so a walled-off component stays hidden."""
    if not frontiers:
        return None
    blank_dist = component_blank_distances(component, view)
    x0, y0, x1, y1 = component.rect
    fx = np.fromiter((f[0] for f in frontiers), dtype=np.int64, count=len(frontiers))
    fy = np.fromiter((f[1] for f in frontiers), dtype=np.int64, count=len(frontiers))
    cx = np.clip(fx, x0, x1)
    cy = np.clip(fy, y0, y1)
    d2 = (fx - cx) ** 2 + (fy - cy) ** 2
    h, w = blank_dist.shape
    for i in np.lexsort((fx, fy, d2)).tolist():
        f = frontiers[i]
        cap = DETOUR_FACTOR * float(d2[i]) ** 0.5 + DETOUR_SLACK
        for dx, dy in OFFSETS_8:
            nx, ny = f[0] + dx, f[1] + dy
            if not (0 <= nx < w and 0 <= ny < h):
                continue
            d = int(blank_dist[ny, nx])
            if 0 <= d <= cap - 1:
                return f
    return None


def decompose(grid: OccupancyGrid, view: AgentView, frontiers: list[Position],
              *, min_neighbors: int = 7, component_threshold: float = 0.45,
              min_room_size: int = 5, min_secret_room_size: int = 5,
              secrets_enabled: bool = False,
              fallback_frontiers: list[Position] | None = None,
              fallback_min_area: int = 0) -> list[Component]:
    """Split unexplored space into anchored rectangular components.

    Cells qualify when unknown, with at least `min_neighbors` unknown
    cells around them (kills one-cell-wide alleys), and probability at or
    above component_threshold * baseline.  Rectangles below the minimum
    room size are dropped; hidden rectangles below the minimum secret room
    size likewise.

    Association prefers `frontiers` (typically pre-filtered for utility),
    but a component of at least `fallback_min_area` cells that only
    connects through `fallback_frontiers` keeps that anchor rather than
    being wrongly classified hidden: a region that big should not be
    starved by the frontier filter, while smaller pockets whose own
    frontiers were filtered are deliberately left to die out.
    """
    unknown = view.unknown_mask()
    count = np.zeros(unknown.shape, dtype=np.int8)
    u = unknown.astype(np.int8)
    count[1:, :] += u[:-1, :]
    count[:-1, :] += u[1:, :]
    count[:, 1:] += u[:, :-1]
    count[:, :-1] += u[:, 1:]
    count[1:, 1:] += u[:-1, :-1]
    count[1:, :-1] += u[:-1, 1:]
    count[:-1, 1:] += u[1:, :-1]
    count[:-1, :-1] += u[1:, 1:]
    eligible = unknown & (count >= min_neighbors) & (
        grid.prob >= component_threshold * grid.baseline)

    min_keep = min(min_room_size, min_secret_room_size) if secrets_enabled else min_room_size
    components = []
    for group in _connected_groups(eligible):
        if len(group) < min_keep:
            continue
        for x0, y0, x1, y1 in maximal_rectangles(group):
            cells = [(x, y) for y in range(y0, y1 + 1) for x in range(x0, x1 + 1)]
            mass = float(grid.prob[y0:y1 + 1, x0:x1 + 1].sum())
            comp = Component(rect=(x0, y0, x1, y1), cells=cells,
                             utility=mass / grid.mass())
            comp.frontier = associate_frontier(comp, frontiers, view)
            if (comp.frontier is None and fallback_frontiers
                    and comp.area >= fallback_min_area):
                comp.frontier = associate_frontier(comp, fallback_frontiers, view)
            if comp.frontier is None:
                if not secrets_enabled or comp.area < min_secret_room_size:
                    continue
            elif comp.area < min_room_size:
                continue
            components.append(comp)
    return components


def _connected_groups(mask: np.ndarray) -> list[set[Position]]:
    """4-connected groups of True cells, in scan order."""
    labels = label_regions(np.ascontiguousarray(mask.astype(np.uint8)), 4)
    n = int(labels.max()) + 1
    groups: list[set[Position]] = [set() for _ in range(n)]
    ys, xs = np.nonzero(labels >= 0)
    for x, y, lab in zip(xs.tolist(), ys.tolist(), labels[ys, xs].tolist()):
        groups[lab].add((x, y))
    return groups


def corridor_end_room_component(grid: OccupancyGrid, view: AgentView) -> Component | None:
    """Partially observed, unentered room seen down a corridor.

    Its floor cells form a priority component exempt from size limits;
    reaching any of them enters the room, so the anchor is the cluster
    cell itself.
    """
    candidate = (view.apparent == TileKind.FLOOR) & ~view.visited
    if not candidate.any():
        return None
    groups = _connected_groups(candidate)
    groups.sort(key=lambda g: min((y, x) for x, y in g))
    group = groups[0]
    cells = sorted(group, key=lambda p: (p[1], p[0]))
    xs = [x for x, _ in cells]
    ys = [y for _, y in cells]
    rect = (min(xs), min(ys), max(xs), max(ys))
    mass = float(sum(grid.prob[y, x] for x, y in cells))
    comp = Component(rect=rect, cells=cells, utility=mass / grid.mass(),
                     frontier=cells[0], priority=True)
    return comp

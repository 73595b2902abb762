"""Full-information lower bound on room-visiting cost.

The shortest route that starts at the centre of the starting room and
touches at least one door of every room is a generalized shortest
Hamiltonian path problem: doors are vertices, each room's doors form a
cluster, the start cell is a singleton cluster, and edge costs are true
shortest-path lengths on the fully revealed map.  Adding two dummy
vertices (one connected to everything for free, one connected only to the
start and the first dummy) turns it into a generalized TSP whose optimal
cycle cost equals the optimal path cost; the cycle is found exactly by
dynamic programming over (cluster subset, endpoint) states.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import grid_bfs
from .level import LevelMap, Position

SENTINEL = 10 ** 6  # finite stand-in for "no edge"
MAX_EXACT_CLUSTERS = 14


class OracleError(Exception):
    pass


class InstanceTooLarge(OracleError):
    """Exact DP refused; use solve_gtsp (heuristic fallback) instead."""


@dataclass
class GtspInstance:
    vertices: list[Position]          # door cells, start cell, dummies
    clusters: list[list[int]]         # vertex indices, disjoint cover
    cost: np.ndarray                  # symmetric int64 matrix
    start_index: int
    dummy1: int | None = None
    dummy2: int | None = None
    labels: list[str] = field(default_factory=list)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)


def build_gshp(level: LevelMap) -> GtspInstance:
    """One vertex per door, one cluster per room, start cell by itself.

    Costs are 8-connected shortest paths on the map with every hidden tile
    revealed (identical to the plain map when secrets are disabled).
    """
    if not level.rooms:
        raise OracleError("map has no rooms")
    start_room_index = level.room_index_at(level.start)
    if start_room_index is None:
        raise OracleError("start is not inside a room")
    start_cell = level.rooms[start_room_index].center

    vertices: list[Position] = [start_cell]
    labels = ["start"]
    clusters: list[list[int]] = [[0]]
    for ri, room in enumerate(level.rooms):
        cluster = []
        for door in room.doors:
            cluster.append(len(vertices))
            labels.append(f"room{ri}")
            vertices.append(door)
        if cluster:
            clusters.append(cluster)

    passable = np.ascontiguousarray(
        level.traversable_mask(secrets_revealed=True).astype(np.uint8))
    n = len(vertices)
    cost = np.zeros((n, n), dtype=np.int64)
    for i, (x, y) in enumerate(vertices):
        dist = grid_bfs(passable, x, y)
        for j, (tx, ty) in enumerate(vertices):
            d = int(dist[ty, tx])
            if d < 0 and i != j:
                raise OracleError(f"vertex {vertices[j]} unreachable from {vertices[i]}")
            cost[i, j] = max(d, 0)
    return GtspInstance(vertices=vertices, clusters=clusters, cost=cost,
                        start_index=0, labels=labels)


def reduce_to_gtsp(instance: GtspInstance) -> GtspInstance:
    """Append the two dummy vertices that turn the path problem into a
    cycle problem: dummy1 reaches everything for free, dummy2 reaches only
    the start vertex and dummy1."""
    n = instance.n_vertices
    cost = np.full((n + 2, n + 2), SENTINEL, dtype=np.int64)
    cost[:n, :n] = instance.cost
    d1, d2 = n, n + 1
    cost[d1, :] = 0
    cost[:, d1] = 0
    cost[d2, :] = SENTINEL
    cost[:, d2] = SENTINEL
    for other in (instance.start_index, d1):
        cost[d2, other] = 0
        cost[other, d2] = 0
    np.fill_diagonal(cost, 0)
    return GtspInstance(
        vertices=instance.vertices + [(-1, -1), (-2, -2)],
        clusters=[list(c) for c in instance.clusters] + [[d1], [d2]],
        cost=cost,
        start_index=instance.start_index,
        dummy1=d1,
        dummy2=d2,
        labels=instance.labels + ["dummy1", "dummy2"],
    )


def solve_gtsp_exact(instance: GtspInstance) -> tuple[list[int], int]:
    """Minimum-cost cycle visiting exactly one vertex per cluster.

    Dynamic programming over (visited-cluster subset, endpoint vertex).
    Deterministic; refuses instances beyond MAX_EXACT_CLUSTERS.
    """
    clusters = instance.clusters
    k = len(clusters)
    if k > MAX_EXACT_CLUSTERS:
        raise InstanceTooLarge(f"{k} clusters > {MAX_EXACT_CLUSTERS}")
    cost = instance.cost.astype(np.float64)
    if k == 1:
        v = min(clusters[0])
        return [v], 0

    # Anchor on the smallest cluster; cycle cost does not depend on the
    # anchor, and a singleton keeps the outer loop short.
    anchor_ci = min(range(k), key=lambda i: (len(clusters[i]), i))
    rest = [c for i, c in enumerate(clusters) if i != anchor_ci]
    m = len(rest)
    nv = instance.n_vertices

    best_total = None
    best_tour = None
    for a in clusters[anchor_ci]:
        dp = np.full((1 << m, nv), np.inf)
        parent = np.full((1 << m, nv), -1, dtype=np.int32)
        for ci, cluster in enumerate(rest):
            s = 1 << ci
            for v in cluster:
                dp[s, v] = cost[a, v]
        full = (1 << m) - 1
        for s in range(1, 1 << m):
            row = dp[s]
            if not np.isfinite(row).any():
                continue
            for cj, cluster in enumerate(rest):
                if s & (1 << cj):
                    continue
                ns = s | (1 << cj)
                cand = row[:, None] + cost[:, cluster]
                idx = np.argmin(cand, axis=0)
                vals = cand[idx, np.arange(len(cluster))]
                better = vals < dp[ns, cluster]
                if better.any():
                    targets = np.asarray(cluster)[better]
                    dp[ns, targets] = vals[better]
                    parent[ns, targets] = idx[better]
        closing = dp[full] + cost[:, a]
        end = int(np.argmin(closing))
        total = closing[end]
        if not np.isfinite(total):
            continue
        if best_total is None or total < best_total:
            # Walk parents back to recover the vertex order.
            order = [end]
            s = full
            v = end
            while parent[s, v] >= 0:
                pv = int(parent[s, v])
                s ^= 1 << _cluster_bit(rest, v)
                order.append(pv)
                v = pv
            order.append(a)
            best_total = total
            best_tour = order[::-1]
    if best_total is None or not np.isfinite(best_total):
        raise OracleError("no feasible tour")
    return best_tour, int(round(best_total))


def _cluster_bit(rest: list[list[int]], vertex: int) -> int:
    for i, cluster in enumerate(rest):
        if vertex in cluster:
            return i
    raise AssertionError("vertex not in any cluster")


def solve_gtsp(instance: GtspInstance) -> tuple[list[int], int]:
    """Exact when feasible, local-search fallback for larger instances."""
    try:
        return solve_gtsp_exact(instance)
    except InstanceTooLarge:
        return solve_gtsp_local_search(instance)


def solve_gtsp_local_search(instance: GtspInstance) -> tuple[list[int], int]:
    """Cluster-order 2-opt plus best-representative reassignment.

    Deterministic heuristic for instances too big for the DP.
    """
    clusters = instance.clusters
    k = len(clusters)
    cost = instance.cost
    order = list(range(k))
    reps = [c[0] for c in clusters]

    def tour_cost() -> int:
        return int(sum(
            cost[reps[order[i]], reps[order[(i + 1) % k]]] for i in range(k)
        ))

    improved = True
    while improved:
        improved = False
        # Best representative per cluster given its neighbours.
        for pos in range(k):
            ci = order[pos]
            prev_v = reps[order[pos - 1]]
            next_v = reps[order[(pos + 1) % k]]
            best_v = min(
                clusters[ci],
                key=lambda v: (cost[prev_v, v] + cost[v, next_v], v),
            )
            if best_v != reps[ci]:
                reps[ci] = best_v
                improved = True
        # 2-opt on the cluster order.
        base = tour_cost()
        for i in range(k - 1):
            for j in range(i + 1, k):
                candidate = order[:i] + order[i:j + 1][::-1] + order[j + 1:]
                saved_order = order
                order = candidate
                c = tour_cost()
                if c < base:
                    base = c
                    improved = True
                else:
                    order = saved_order
    tour = [reps[ci] for ci in order]
    return tour, tour_cost()


def tour_to_door_sequence(instance: GtspInstance, tour: list[int]) -> list[int]:
    """Rotate the cycle to start at the start vertex and drop the dummies."""
    if instance.dummy2 is None:
        return tour
    si = tour.index(instance.start_index)
    rotated = tour[si:] + tour[:si]
    return [v for v in rotated if v not in (instance.dummy1, instance.dummy2)]


def optimal_actions(level: LevelMap) -> int:
    """Minimum moves to touch at least one door of every room."""
    instance = build_gshp(level)
    reduced = reduce_to_gtsp(instance)
    tour, cost = solve_gtsp(reduced)
    return cost


def optimal_route(level: LevelMap) -> tuple[int, list[Position]]:
    """Cost plus the start-and-door sequence realizing it."""
    instance = build_gshp(level)
    reduced = reduce_to_gtsp(instance)
    tour, cost = solve_gtsp(reduced)
    seq = tour_to_door_sequence(reduced, tour)
    return cost, [instance.vertices[v] for v in seq]

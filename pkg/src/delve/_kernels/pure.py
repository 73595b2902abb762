"""Pure-numpy fallback for the compiled kernels.

Same contracts as _core.pyx.  BFS runs as a synchronous wavefront (one
vectorized dilation per distance ring) rather than a cell queue, which
keeps it usable for full batches when the extension is unavailable.
"""

from __future__ import annotations

import numpy as np


def diffuse_pass(prob: np.ndarray, clamped: np.ndarray, lam: float) -> np.ndarray:
    # Zero-flux boundary: edge cells see their own value in place of the
    # missing neighbour, matching the compiled kernel.
    padded = np.pad(prob, 1, mode="edge")
    acc = (padded[:-2, 1:-1] + padded[2:, 1:-1]
           + padded[1:-1, :-2] + padded[1:-1, 2:])
    out = (1.0 - lam) * prob + (lam / 4.0) * acc
    out[clamped.astype(bool)] = 0.0
    return out


def largest_rect(mask: np.ndarray):
    """Largest all-True rectangle as (x0, y0, x1, y1); None when empty.

    Same tie-breaking as the compiled kernel: area, then top, then left,
    then taller.
    """
    h, w = mask.shape
    heights = [0] * w
    best = None  # (-area, y0, x0, -height, x1, y1)
    for y in range(h):
        row = mask[y]
        for i in range(w):
            heights[i] = heights[i] + 1 if row[i] else 0
        stack: list[tuple[int, int]] = []
        for i in range(w + 1):
            cur = heights[i] if i < w else 0
            start = i
            while stack and stack[-1][1] >= cur:
                s, sh = stack.pop()
                area = sh * (i - s)
                if area > 0:
                    key = (-area, y - sh + 1, s, -sh)
                    if best is None or key < best[:4]:
                        best = key + (i - 1, y)
                start = s
            if not stack or stack[-1][1] < cur:
                stack.append((start, cur))
    if best is None:
        return None
    return best[2], best[1], best[4], best[5]


def label_regions(mask: np.ndarray, connectivity: int) -> np.ndarray:
    """Connected labels (4 or 8) via min-label propagation to a fixed
    point, then renumbered to scan order to match the compiled kernel."""
    h, w = mask.shape
    m = mask.astype(bool)
    labels = np.where(m, np.arange(h * w, dtype=np.int32).reshape(h, w), np.int32(-1))
    big = np.int32(h * w)
    work = np.where(m, labels, big)
    while True:
        nxt = work.copy()
        nxt[1:, :] = np.minimum(nxt[1:, :], work[:-1, :])
        nxt[:-1, :] = np.minimum(nxt[:-1, :], work[1:, :])
        nxt[:, 1:] = np.minimum(nxt[:, 1:], work[:, :-1])
        nxt[:, :-1] = np.minimum(nxt[:, :-1], work[:, 1:])
        if connectivity == 8:
            nxt[1:, 1:] = np.minimum(nxt[1:, 1:], work[:-1, :-1])
            nxt[1:, :-1] = np.minimum(nxt[1:, :-1], work[:-1, 1:])
            nxt[:-1, 1:] = np.minimum(nxt[:-1, 1:], work[1:, :-1])
            nxt[:-1, :-1] = np.minimum(nxt[:-1, :-1], work[1:, 1:])
        nxt[~m] = big
        if np.array_equal(nxt, work):
            break
        work = nxt
    out = np.full((h, w), -1, dtype=np.int32)
    # A group's propagated root is not always its scan-order first cell
    # under 8-connectivity, so renumber by first appearance in scan order.
    remap: dict[int, int] = {}
    flat = work[m].tolist()
    for r in flat:
        if r not in remap:
            remap[r] = len(remap)
    out[m] = [remap[r] for r in flat]
    return out


def grid_bfs_multi(passable: np.ndarray, seeds: np.ndarray) -> np.ndarray:
    h, w = passable.shape
    dist = np.full((h, w), -1, dtype=np.int32)
    open_mask = passable.astype(bool) & ~seeds.astype(bool)
    front = seeds.astype(bool).copy()
    d = 0
    while front.any():
        dist[front] = d
        grown = np.zeros((h, w), dtype=bool)
        grown[1:, :] |= front[:-1, :]
        grown[:-1, :] |= front[1:, :]
        grown[:, 1:] |= front[:, :-1]
        grown[:, :-1] |= front[:, 1:]
        grown[1:, 1:] |= front[:-1, :-1]
        grown[1:, :-1] |= front[:-1, 1:]
        grown[:-1, 1:] |= front[1:, :-1]
        grown[:-1, :-1] |= front[1:, 1:]
        front = grown & open_mask
        open_mask &= ~front
        d += 1
    return dist


def grid_bfs(passable: np.ndarray, sx: int, sy: int) -> np.ndarray:
    h, w = passable.shape
    dist = np.full((h, w), -1, dtype=np.int32)
    open_mask = passable.astype(bool).copy()
    front = np.zeros((h, w), dtype=bool)
    front[sy, sx] = True
    open_mask[sy, sx] = False
    d = 0
    while front.any():
        dist[front] = d
        grown = np.zeros((h, w), dtype=bool)
        grown[1:, :] |= front[:-1, :]
        grown[:-1, :] |= front[1:, :]
        grown[:, 1:] |= front[:, :-1]
        grown[:, :-1] |= front[:, 1:]
        grown[1:, 1:] |= front[:-1, :-1]
        grown[1:, :-1] |= front[:-1, 1:]
        grown[:-1, 1:] |= front[1:, :-1]
        grown[:-1, :-1] |= front[1:, 1:]
        front = grown & open_mask
        open_mask &= ~front
        d += 1
    return dist

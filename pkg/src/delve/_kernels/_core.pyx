# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: one diffusion pass and 8-connected grid BFS.

Must stay numerically identical to delve._kernels.pure -- the fallback is
selected at import time and results may not depend on which one loaded.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def diffuse_pass(double[:, ::1] prob, unsigned char[:, ::1] clamped, double lam):
    """One synchronous 4-neighbour diffusion pass; clamped cells stay 0.

    Zero-flux boundary: a missing neighbour beyond the map edge
    contributes the cell's own value, so the map border itself does not
    drain mass (only clamped zero cells do).
    """
    cdef Py_ssize_t h = prob.shape[0]
    cdef Py_ssize_t w = prob.shape[1]
    out_arr = np.zeros((h, w), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t y, x
    cdef double keep = 1.0 - lam
    cdef double frac = lam / 4.0
    cdef double acc, own
    for y in range(h):
        for x in range(w):
            if clamped[y, x]:
                continue
            own = prob[y, x]
            acc = 0.0
            acc = acc + (prob[y - 1, x] if y > 0 else own)
            acc = acc + (prob[y + 1, x] if y < h - 1 else own)
            acc = acc + (prob[y, x - 1] if x > 0 else own)
            acc = acc + (prob[y, x + 1] if x < w - 1 else own)
            out[y, x] = keep * own + frac * acc
    return out_arr


def label_regions(unsigned char[:, ::1] mask, int connectivity):
    """Connected-component labels over True cells; -1 elsewhere.

    connectivity is 4 or 8.  Labels are assigned in scan order (top-left
    cell of each group first), so output is deterministic.
    """
    cdef Py_ssize_t h = mask.shape[0]
    cdef Py_ssize_t w = mask.shape[1]
    labels_arr = np.full((h, w), -1, dtype=np.int32)
    cdef int[:, ::1] labels = labels_arr
    cdef cnp.ndarray[cnp.int32_t, ndim=1] stack_arr = np.empty(h * w, dtype=np.int32)
    cdef int[::1] stack = stack_arr
    cdef Py_ssize_t top, x, y, cx, cy, nx, ny, cur
    cdef bint diag = connectivity == 8
    cdef int next_label = 0
    for y in range(h):
        for x in range(w):
            if not mask[y, x] or labels[y, x] >= 0:
                continue
            labels[y, x] = next_label
            top = 0
            stack[top] = <int> (y * w + x)
            top += 1
            while top > 0:
                top -= 1
                cur = stack[top]
                cy = cur // w
                cx = cur - cy * w
                for ny in range(cy - 1, cy + 2):
                    if ny < 0 or ny >= h:
                        continue
                    for nx in range(cx - 1, cx + 2):
                        if nx < 0 or nx >= w:
                            continue
                        if not diag and nx != cx and ny != cy:
                            continue
                        if mask[ny, nx] and labels[ny, nx] < 0:
                            labels[ny, nx] = next_label
                            stack[top] = <int> (ny * w + nx)
                            top += 1
            next_label += 1
    return labels_arr


def largest_rect(unsigned char[:, ::1] mask):
    """Largest all-True axis-aligned rectangle, histogram-stack method.

    Returns (x0, y0, x1, y1) or None for an empty mask.  Ties resolved by
    (area desc, y0, x0, height desc) so results are deterministic.
    """
    cdef Py_ssize_t h = mask.shape[0]
    cdef Py_ssize_t w = mask.shape[1]
    cdef cnp.ndarray[cnp.int32_t, ndim=1] heights_arr = np.zeros(w, dtype=np.int32)
    cdef int[::1] heights = heights_arr
    cdef cnp.ndarray[cnp.int32_t, ndim=1] stack_s = np.empty(w + 1, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] stack_h = np.empty(w + 1, dtype=np.int32)
    cdef int[::1] ss = stack_s
    cdef int[::1] sh = stack_h
    cdef Py_ssize_t y, i
    cdef int top, start, cur_h, area, cand_y0, cand_x0, cand_h
    cdef int best_area = 0, best_y0 = 0, best_x0 = 0, best_h = 0, best_x1 = -1, best_y1 = -1
    cdef bint better
    for y in range(h):
        for i in range(w):
            if mask[y, i]:
                heights[i] += 1
            else:
                heights[i] = 0
        top = 0
        for i in range(w + 1):
            cur_h = heights[i] if i < w else 0
            start = <int> i
            while top > 0 and sh[top - 1] >= cur_h:
                top -= 1
                start = ss[top]
                area = sh[top] * (<int> i - start)
                if area > 0:
                    cand_y0 = <int> y - sh[top] + 1
                    cand_x0 = start
                    cand_h = sh[top]
                    better = False
                    if area > best_area:
                        better = True
                    elif area == best_area:
                        if cand_y0 < best_y0:
                            better = True
                        elif cand_y0 == best_y0:
                            if cand_x0 < best_x0:
                                better = True
                            elif cand_x0 == best_x0 and cand_h > best_h:
                                better = True
                    if better:
                        best_area = area
                        best_y0 = cand_y0
                        best_x0 = cand_x0
                        best_h = cand_h
                        best_x1 = <int> i - 1
                        best_y1 = <int> y
            if top == 0 or sh[top - 1] < cur_h:
                ss[top] = start
                sh[top] = cur_h
                top += 1
    if best_area == 0:
        return None
    return best_x0, best_y0, best_x1, best_y1


def grid_bfs_multi(unsigned char[:, ::1] passable, unsigned char[:, ::1] seeds):
    """8-connected BFS distances from all seed cells at once.

    Seeds start at distance 0 (whether or not passable); expansion runs
    through passable cells only.  -1 marks unreached cells.
    """
    cdef Py_ssize_t h = passable.shape[0]
    cdef Py_ssize_t w = passable.shape[1]
    dist_arr = np.full((h, w), -1, dtype=np.int32)
    cdef int[:, ::1] dist = dist_arr
    cdef cnp.ndarray[cnp.int32_t, ndim=1] queue_arr = np.empty(h * w, dtype=np.int32)
    cdef int[::1] queue = queue_arr
    cdef Py_ssize_t head = 0, tail = 0
    cdef Py_ssize_t x, y, nx, ny, cur
    cdef int d
    for y in range(h):
        for x in range(w):
            if seeds[y, x]:
                dist[y, x] = 0
                queue[tail] = <int> (y * w + x)
                tail += 1
    while head < tail:
        cur = queue[head]
        head += 1
        y = cur // w
        x = cur - y * w
        d = dist[y, x] + 1
        for ny in range(y - 1, y + 2):
            if ny < 0 or ny >= h:
                continue
            for nx in range(x - 1, x + 2):
                if nx < 0 or nx >= w:
                    continue
                if passable[ny, nx] and dist[ny, nx] < 0:
                    dist[ny, nx] = d
                    queue[tail] = <int> (ny * w + nx)
                    tail += 1
    return dist_arr


def grid_bfs(unsigned char[:, ::1] passable, Py_ssize_t sx, Py_ssize_t sy):
    """8-connected unit-cost BFS distances from (sx, sy).

    Returns an int32 grid; unreachable (or impassable) cells hold -1.
    The start cell itself need not be passable (distance 0 regardless).
    """
    cdef Py_ssize_t h = passable.shape[0]
    cdef Py_ssize_t w = passable.shape[1]
    dist_arr = np.full((h, w), -1, dtype=np.int32)
    cdef int[:, ::1] dist = dist_arr
    cdef cnp.ndarray[cnp.int32_t, ndim=1] queue_arr = np.empty(h * w, dtype=np.int32)
    cdef int[::1] queue = queue_arr
    cdef Py_ssize_t head = 0, tail = 0
    cdef Py_ssize_t x, y, nx, ny, cur
    cdef int d
    dist[sy, sx] = 0
    queue[tail] = <int> (sy * w + sx)
    tail += 1
    while head < tail:
        cur = queue[head]
        head += 1
        y = cur // w
        x = cur - y * w
        d = dist[y, x] + 1
        for ny in range(y - 1, y + 2):
            if ny < 0 or ny >= h:
                continue
            for nx in range(x - 1, x + 2):
                if nx < 0 or nx >= w:
                    continue
                if passable[ny, nx] and dist[ny, nx] < 0:
                    dist[ny, nx] = d
                    queue[tail] = <int> (ny * w + nx)
                    tail += 1
    return dist_arr

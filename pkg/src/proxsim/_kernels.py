"""Compiled inner loops: line traversal, range sensing, obstacle marking, A*.

Everything here works on raw numpy arrays and integer cell indices so it can be
jitted; the public modules wrap these with world-coordinate APIs.
"""

import math

import numpy as np
from numba import njit

LETHAL = 254
INSCRIBED = 253


@njit(cache=True)
def _bresenham_forward(r0, c0, r1, c1):
    dr = abs(r1 - r0)
    dc = abs(c1 - c0)
    n = max(dr, dc) + 1
    out = np.empty((n, 2), dtype=np.int64)
    sr = 1 if r1 >= r0 else -1
    sc = 1 if c1 >= c0 else -1
    err = dc - dr
    r, c = r0, c0
    for i in range(n):
        out[i, 0] = r
        out[i, 1] = c
        e2 = 2 * err
        if e2 > -dr:
            err -= dr
            c += sc
        if e2 < dc:
            err += dc
            r += sr
    return out


@njit(cache=True)
def bresenham(r0, c0, r1, c1):
    """8-connected cell line from (r0, c0) to (r1, c1), both inclusive.

    The traversal is always computed from the lexicographically smaller end, so
    a->b and b->a visit the same cells.
    """
    if (r0, c0) <= (r1, c1):
        return _bresenham_forward(r0, c0, r1, c1)
    return _bresenham_forward(r1, c1, r0, c0)[::-1].copy()


@njit(cache=True)
def _dda_wall_distance(occ, ox, oy, res, x, y, dx, dy, max_range):
    """Distance along (dx, dy) from (x, y) to the first occupied cell, or -1."""
    h, w = occ.shape
    fx = (x - ox) / res
    fy = (y - oy) / res
    col = int(math.floor(fx))
    row = int(math.floor(fy))
    if col < 0 or row < 0 or col >= w or row >= h:
        return -1.0
    if occ[row, col]:
        return 0.0
    step_c = 1 if dx > 0 else -1
    step_r = 1 if dy > 0 else -1
    inf = 1e300
    if dx != 0.0:
        edge = col + 1 if dx > 0 else col
        t_max_c = (edge - fx) * res / dx
        t_delta_c = res / abs(dx)
    else:
        t_max_c = inf
        t_delta_c = inf
    if dy != 0.0:
        edge = row + 1 if dy > 0 else row
        t_max_r = (edge - fy) * res / dy
        t_delta_r = res / abs(dy)
    else:
        t_max_r = inf
        t_delta_r = inf
    while True:
        if t_max_c < t_max_r:
            t = t_max_c
            col += step_c
            t_max_c += t_delta_c
        else:
            t = t_max_r
            row += step_r
            t_max_r += t_delta_r
        if t > max_range:
            return -1.0
        if col < 0 or row < 0 or col >= w or row >= h:
            return -1.0
        if occ[row, col]:
            return t


@njit(cache=True)
def sense_beams(occ, ox, oy, res, x, y, theta, n_beams, max_range, px, py, pr):
    """Cast ``n_beams`` evenly spaced beams; return (bearings, ranges, hits)."""
    bearings = np.empty(n_beams)
    ranges = np.empty(n_beams)
    hits = np.zeros(n_beams, dtype=np.bool_)
    for b in range(n_beams):
        bearing = 2.0 * math.pi * b / n_beams
        if bearing > math.pi:
            bearing -= 2.0 * math.pi
        bearings[b] = bearing
        a = theta + bearing
        dx = math.cos(a)
        dy = math.sin(a)
        best = max_range
        hit = False
        tw = _dda_wall_distance(occ, ox, oy, res, x, y, dx, dy, max_range)
        if tw >= 0.0 and tw <= best:
            best = tw
            hit = True
        for k in range(px.shape[0]):
            fx = x - px[k]
            fy = y - py[k]
            c = fx * fx + fy * fy - pr * pr
            if c <= 0.0:
                continue
            bq = fx * dx + fy * dy
            disc = bq * bq - c
            if disc < 0.0:
                continue
            t = -bq - math.sqrt(disc)
            if t >= 0.0 and t <= best:
                best = t
                hit = True
        ranges[b] = best
        hits[b] = hit
    return bearings, ranges, hits


@njit(cache=True)
def _clear_line(buf, r0, c0, r1, c1, keep_end):
    """Set the Bresenham cells from (r0, c0) to (r1, c1) to False.

    Walks from the lexicographically smaller end like ``bresenham``; with
    ``keep_end`` the (r1, c1) cell is left alone.
    """
    if (r0, c0) > (r1, c1):
        r0, c0, r1, c1 = r1, c1, r0, c0
        er, ec = r0, c0
    else:
        er, ec = r1, c1
    dr = abs(r1 - r0)
    dc = abs(c1 - c0)
    sr = 1 if r1 >= r0 else -1
    sc = 1 if c1 >= c0 else -1
    err = dc - dr
    r, c = r0, c0
    for _ in range(max(dr, dc) + 1):
        if not (keep_end and r == er and c == ec):
            buf[r, c] = False
        e2 = 2 * err
        if e2 > -dr:
            err -= dr
            c += sc
        if e2 < dc:
            err += dc
            r += sr


@njit(cache=True)
def mark_and_clear(buf, ox, oy, res, x, y, theta, bearings, ranges, hits):
    """Update a boolean obstacle buffer with one scan (clear along, mark ends)."""
    h, w = buf.shape
    r0 = int(math.floor((y - oy) / res + 1e-9))
    c0 = int(math.floor((x - ox) / res + 1e-9))
    if r0 < 0 or c0 < 0 or r0 >= h or c0 >= w:
        return
    xmax = ox + w * res
    ymax = oy + h * res
    nudge = res * 1e-3
    for b in range(bearings.shape[0]):
        a = theta + bearings[b]
        rng = ranges[b] + (nudge if hits[b] else 0.0)
        ex = x + rng * math.cos(a)
        ey = y + rng * math.sin(a)
        ex = min(max(ex, ox), xmax - nudge)
        ey = min(max(ey, oy), ymax - nudge)
        r1 = int(math.floor((ey - oy) / res + 1e-9))
        c1 = int(math.floor((ex - ox) / res + 1e-9))
        r1 = min(max(r1, 0), h - 1)
        c1 = min(max(c1, 0), w - 1)
        _clear_line(buf, r0, c0, r1, c1, hits[b])
        if hits[b]:
            buf[r1, c1] = True


@njit(cache=True)
def set_where(cells, mask, value):
    h, w = cells.shape
    for r in range(h):
        for c in range(w):
            if mask[r, c]:
                cells[r, c] = value


@njit(cache=True)
def clear_discs(cells, ox, oy, res, px, py, radius, eps):
    """Set to 0 every cell whose center is within radius[k] of (px[k], py[k])."""
    h, w = cells.shape
    for k in range(px.shape[0]):
        rad = radius[k]
        c_lo = max(0, int(math.floor((px[k] - rad - ox) / res)))
        c_hi = min(w, int(math.floor((px[k] + rad - ox) / res)) + 1)
        r_lo = max(0, int(math.floor((py[k] - rad - oy) / res)))
        r_hi = min(h, int(math.floor((py[k] + rad - oy) / res)) + 1)
        for r in range(r_lo, r_hi):
            cy = oy + (r + 0.5) * res - py[k]
            for c in range(c_lo, c_hi):
                cx = ox + (c + 0.5) * res - px[k]
                if math.sqrt(cx * cx + cy * cy) <= rad + eps:
                    cells[r, c] = 0


@njit(cache=True)
def inflate_from_static(cells, occ, static_d2, lut, kmax):
    """Inflate ``cells`` reusing the static map's squared distance field.

    Only valid while every static cell is still LETHAL; returns False without
    touching ``cells`` otherwise. LETHAL cells that are not static are stamped
    into a copy of the field before the lookup.
    """
    h, w = cells.shape
    n_extra = 0
    for r in range(h):
        for c in range(w):
            lethal = cells[r, c] == LETHAL
            if occ[r, c] and not lethal:
                return False
            if lethal and not occ[r, c]:
                n_extra += 1
    d2 = static_d2
    if n_extra > 0:
        d2 = static_d2.copy()
        extra = np.empty((n_extra, 2), dtype=np.int64)
        i = 0
        for r in range(h):
            for c in range(w):
                if cells[r, c] == LETHAL and not occ[r, c]:
                    extra[i, 0] = r
                    extra[i, 1] = c
                    i += 1
        stamp_min_sqdist(d2, extra, kmax)
    for r in range(h):
        for c in range(w):
            v = lut[d2[r, c]]
            if v > cells[r, c]:
                cells[r, c] = v
    return True


@njit(cache=True)
def stamp_min_sqdist(d2, cells, kmax):
    """Lower ``d2`` (squared cell distance field) around each listed cell."""
    h, w = d2.shape
    k2 = kmax * kmax
    for i in range(cells.shape[0]):
        r = cells[i, 0]
        c = cells[i, 1]
        for rr in range(max(0, r - kmax), min(h, r + kmax + 1)):
            dr = rr - r
            for cc in range(max(0, c - kmax), min(w, c + kmax + 1)):
                dc = cc - c
                q = dr * dr + dc * dc
                if q <= k2 and q < d2[rr, cc]:
                    d2[rr, cc] = q


@njit(cache=True)
def _heap_push(keys, vals, size, key, val):
    i = size
    keys[i] = key
    vals[i] = val
    while i > 0:
        parent = (i - 1) >> 1
        if keys[parent] < key or (keys[parent] == key and vals[parent] <= val):
            break
        keys[i] = keys[parent]
        vals[i] = vals[parent]
        i = parent
    keys[i] = key
    vals[i] = val
    return size + 1


@njit(cache=True)
def _heap_pop(keys, vals, size):
    top_key = keys[0]
    top_val = vals[0]
    size -= 1
    key = keys[size]
    val = vals[size]
    i = 0
    while True:
        child = 2 * i + 1
        if child >= size:
            break
        other = child + 1
        if other < size and (
            keys[other] < keys[child] or (keys[other] == keys[child] and vals[other] < vals[child])
        ):
            child = other
        if key < keys[child] or (key == keys[child] and val <= vals[child]):
            break
        keys[i] = keys[child]
        vals[i] = vals[child]
        i = child
    if size > 0:
        keys[i] = key
        vals[i] = val
    return top_key, top_val, size


@njit(cache=True)
def astar(cost, sr, sc, gr, gc, res, weight, blocked_from):
    """8-connected A* over a uint8 costmap.

    Entering cell c costs step_length + weight * cost[c]; cells with cost >=
    ``blocked_from`` are never entered. Returns (path cells, total cost) with an
    empty path when the goal is unreachable.
    """
    h, w = cost.shape
    n = h * w
    g = np.full(n, np.inf)
    parent = np.full(n, -1, dtype=np.int64)
    closed = np.zeros(n, dtype=np.bool_)
    start = sr * w + sc
    goal = gr * w + gc
    g[start] = 0.0
    diag = res * math.sqrt(2.0)
    # every improvement pushes one entry; 8 per cell bounds the heap
    keys = np.empty(8 * n + 1)
    vals = np.empty(8 * n + 1, dtype=np.int64)
    size = _heap_push(keys, vals, 0, 0.0, start)
    while size > 0:
        f, u, size = _heap_pop(keys, vals, size)
        if closed[u]:
            continue
        closed[u] = True
        if u == goal:
            break
        ur = u // w
        uc = u - ur * w
        for dr in range(-1, 2):
            rr = ur + dr
            if rr < 0 or rr >= h:
                continue
            for dc in range(-1, 2):
                if dr == 0 and dc == 0:
                    continue
                cc = uc + dc
                if cc < 0 or cc >= w:
                    continue
                cv = cost[rr, cc]
                if cv >= blocked_from:
                    continue
                v = rr * w + cc
                if closed[v]:
                    continue
                step = diag if (dr != 0 and dc != 0) else res
                nd = g[u] + step + weight * cv
                if nd < g[v]:
                    g[v] = nd
                    parent[v] = u
                    hy = (gr - rr) * res
                    hx = (gc - cc) * res
                    size = _heap_push(keys, vals, size, nd + math.sqrt(hx * hx + hy * hy), v)
    if not closed[goal]:
        return np.empty((0, 2), dtype=np.int64), np.inf
    count = 1
    v = goal
    while v != start:
        v = parent[v]
        count += 1
    out = np.empty((count, 2), dtype=np.int64)
    v = goal
    for i in range(count - 1, -1, -1):
        out[i, 0] = v // w
        out[i, 1] = v - (v // w) * w
        if i > 0:
            v = parent[v]
    return out, g[goal]

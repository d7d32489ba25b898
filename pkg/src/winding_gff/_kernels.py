"""Compiled inner loops for walk sampling and Brownian exit estimates.

All kernels consume the CSR layout produced by WiredDomainGraph
(indptr / e_dst / e_cum with the root encoded as index n) and a numpy
Generator.  They are implementation details; the public API lives in
walk.py and conformal.py.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _pick_edge(indptr, e_cum, v, r):
    lo = indptr[v]
    hi = indptr[v + 1]
    for k in range(lo, hi):
        if r <= e_cum[k]:
            return k
    return hi - 1


@njit(cache=True)
def wilson_parents(indptr, e_dst, e_cum, n, order, rng):
    """Wilson's algorithm: loop-erased walks from `order` until the tree
    spans all n interior vertices.  Returns (parent_edge, total_steps)."""
    parent_edge = np.full(n, -1, np.int64)
    in_tree = np.zeros(n + 1, np.uint8)
    in_tree[n] = 1
    visited = np.full(n, -1, np.int64)
    path_v = np.empty(n + 1, np.int64)
    path_e = np.empty(n + 1, np.int64)
    steps = 0
    for oi in range(len(order)):
        start = order[oi]
        if in_tree[start]:
            continue
        v = start
        plen = 1
        path_v[0] = v
        visited[v] = 0
        while True:
            e = _pick_edge(indptr, e_cum, v, rng.random())
            steps += 1
            u = e_dst[e]
            path_e[plen - 1] = e
            if u == n or in_tree[u] == 1:
                for k in range(plen):
                    w = path_v[k]
                    parent_edge[w] = path_e[k]
                    in_tree[w] = 1
                    visited[w] = -1
                break
            j = visited[u]
            if j >= 0:
                # chronological loop erasure: fall back to the first visit
                for k in range(j + 1, plen):
                    visited[path_v[k]] = -1
                plen = j + 1
                v = u
            else:
                path_v[plen] = u
                visited[u] = plen
                plen += 1
                v = u
    return parent_edge, steps


@njit(cache=True)
def lerw_path(indptr, e_dst, e_cum, n, start, absorb, rng):
    """Loop-erased random walk from start until absorption.

    absorb is a uint8 mask over 0..n (the root n should be set).  Returns
    (vertices, edges, hit): vertices[i] is the i-th vertex of the erased
    path, edges[i] the edge taken from it; hit is the absorbing index."""
    visited = np.full(n, -1, np.int64)
    path_v = np.empty(n + 1, np.int64)
    path_e = np.empty(n + 1, np.int64)
    v = start
    plen = 1
    path_v[0] = v
    visited[v] = 0
    while True:
        e = _pick_edge(indptr, e_cum, v, rng.random())
        u = e_dst[e]
        path_e[plen - 1] = e
        if u == n or absorb[u] == 1:
            return path_v[:plen].copy(), path_e[:plen].copy(), u
        j = visited[u]
        if j >= 0:
            for k in range(j + 1, plen):
                visited[path_v[k]] = -1
            plen = j + 1
            v = u
        else:
            path_v[plen] = u
            visited[u] = plen
            plen += 1
            v = u


@njit(cache=True)
def walk_endpoint(indptr, e_dst, e_cum, n, start, absorb, max_steps, rng):
    """Plain walk until absorption; returns (hit, steps) with hit = -1 when
    max_steps is exhausted."""
    v = start
    for step in range(max_steps):
        e = _pick_edge(indptr, e_cum, v, rng.random())
        u = e_dst[e]
        if u == n or absorb[u] == 1:
            return u, step + 1
        v = u
    return -1, max_steps


@njit(cache=True)
def walk_record(indptr, e_dst, e_cum, n, start, absorb, rng, out_v, out_e):
    """Plain walk recording every step.  out_v needs one more slot than
    out_e.  Returns (n_edges_taken, hit); hit = -1 means the buffer filled
    before absorption."""
    cap = out_e.shape[0]
    v = start
    out_v[0] = v
    for i in range(cap):
        e = _pick_edge(indptr, e_cum, v, rng.random())
        u = e_dst[e]
        out_e[i] = e
        if u == n or absorb[u] == 1:
            out_v[i + 1] = u
            return i + 1, u
        out_v[i + 1] = u
        v = u
    return cap, -1


# ----------------------------------------------------------------------
# Brownian exit estimators


@njit(cache=True)
def _slit_nearest(wx, wy, slit, nslit):
    """Squared distance from (wx, wy) to the slit polyline and the nearest
    point on it.  nslit = number of points actually used."""
    best = 1e300
    bx = 0.0
    by = 0.0
    if nslit == 1:
        dx = wx - slit[0, 0]
        dy = wy - slit[0, 1]
        return dx * dx + dy * dy, slit[0, 0], slit[0, 1]
    for i in range(nslit - 1):
        ax = slit[i, 0]
        ay = slit[i, 1]
        ex = slit[i + 1, 0] - ax
        ey = slit[i + 1, 1] - ay
        len2 = ex * ex + ey * ey
        t = 0.0
        if len2 > 0.0:
            t = ((wx - ax) * ex + (wy - ay) * ey) / len2
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
        px = ax + t * ex
        py = ay + t * ey
        dx = wx - px
        dy = wy - py
        d2 = dx * dx + dy * dy
        if d2 < best:
            best = d2
            bx = px
            by = py
    return best, bx, by


@njit(cache=True)
def wos_disc(zx, zy, cx, cy, R, slit, nslit, n_samples, eps, max_steps, rng):
    """Walk-on-spheres exit from disc(c, R) minus a slit polyline, started
    at z.  Accumulates log|exit - z|.  Returns (sum, sum_sq, n_capped)."""
    two_pi = 2.0 * math.pi
    s1 = 0.0
    s2 = 0.0
    capped = 0
    for _ in range(n_samples):
        wx = zx
        wy = zy
        done = False
        for _ in range(max_steps):
            dx = wx - cx
            dy = wy - cy
            rad = math.sqrt(dx * dx + dy * dy)
            d_circ = R - rad
            d2s, bx, by = _slit_nearest(wx, wy, slit, nslit)
            ds = math.sqrt(d2s)
            d = d_circ if d_circ < ds else ds
            if d < eps:
                if d_circ < ds:
                    if rad > 0.0:
                        ex = cx + dx * (R / rad)
                        ey = cy + dy * (R / rad)
                    else:
                        ex = cx + R
                        ey = cy
                else:
                    ex = bx
                    ey = by
                lx = ex - zx
                ly = ey - zy
                val = 0.5 * math.log(lx * lx + ly * ly)
                s1 += val
                s2 += val * val
                done = True
                break
            th = two_pi * rng.random()
            wx += d * math.cos(th)
            wy += d * math.sin(th)
        if not done:
            # absorb at the nearest boundary object; the walker was stuck
            capped += 1
            dx = wx - cx
            dy = wy - cy
            rad = math.sqrt(dx * dx + dy * dy)
            d_circ = R - rad
            d2s, bx, by = _slit_nearest(wx, wy, slit, nslit)
            if d_circ < math.sqrt(d2s) and rad > 0.0:
                ex = cx + dx * (R / rad)
                ey = cy + dy * (R / rad)
            else:
                ex = bx
                ey = by
            lx = ex - zx
            ly = ey - zy
            val = 0.5 * math.log(lx * lx + ly * ly)
            s1 += val
            s2 += val * val
    return s1, s2, capped


@njit(cache=True)
def wos_segments(zx, zy, bnd, slit, nslit, n_samples, eps, max_steps, rng):
    """Walk-on-spheres exit where the domain boundary is the closed polyline
    bnd ((B, 2), first point repeated at the end) and an optional slit.
    Returns (sum, sum_sq, n_capped) of log|exit - z|."""
    two_pi = 2.0 * math.pi
    nb = bnd.shape[0]
    s1 = 0.0
    s2 = 0.0
    capped = 0
    for _ in range(n_samples):
        wx = zx
        wy = zy
        done = False
        for _ in range(max_steps):
            d2b, ex_b, ey_b = _slit_nearest(wx, wy, bnd, nb)
            if nslit > 0:
                d2s, ex_s, ey_s = _slit_nearest(wx, wy, slit, nslit)
            else:
                d2s, ex_s, ey_s = 1e300, 0.0, 0.0
            if d2b < d2s:
                d2 = d2b
                ex = ex_b
                ey = ey_b
            else:
                d2 = d2s
                ex = ex_s
                ey = ey_s
            d = math.sqrt(d2)
            if d < eps:
                lx = ex - zx
                ly = ey - zy
                val = 0.5 * math.log(lx * lx + ly * ly)
                s1 += val
                s2 += val * val
                done = True
                break
            th = two_pi * rng.random()
            wx += d * math.cos(th)
            wy += d * math.sin(th)
        if not done:
            capped += 1
            d2b, ex, ey = _slit_nearest(wx, wy, bnd, nb)
            if nslit > 0:
                d2s, ex_s, ey_s = _slit_nearest(wx, wy, slit, nslit)
                if d2s < d2b:
                    ex = ex_s
                    ey = ey_s
            lx = ex - zx
            ly = ey - zy
            val = 0.5 * math.log(lx * lx + ly * ly)
            s1 += val
            s2 += val * val
    return s1, s2, capped


@njit(cache=True)
def _seg_cross_param(px, py, qx, qy, ax, ay, bx, by):
    """Parameter t in [0, 1] where segment p->q crosses segment a->b,
    or 2.0 when they do not cross."""
    rx = qx - px
    ry = qy - py
    sx = bx - ax
    sy = by - ay
    rxs = rx * sy - ry * sx
    if rxs == 0.0:
        return 2.0
    qpx = ax - px
    qpy = ay - py
    t = (qpx * sy - qpy * sx) / rxs
    u = (qpx * ry - qpy * rx) / rxs
    if 0.0 <= u <= 1.0 and 0.0 < t <= 1.0:
        return t
    return 2.0


@njit(cache=True)
def lattice_exit_disc(zx, zy, h, cx, cy, R, slit, nslit, n_samples, max_steps, rng):
    """Fine-lattice random walk exit from disc(c, R) minus a slit: steps of
    size h on z + h*Z^2, absorbed where the step segment first crosses the
    circle or the slit.  Returns (sum, sum_sq, n_capped) of log|exit - z|."""
    s1 = 0.0
    s2 = 0.0
    capped = 0
    for _ in range(n_samples):
        wx = zx
        wy = zy
        done = False
        for _ in range(max_steps):
            r = rng.random()
            if r < 0.25:
                nx = wx + h
                ny = wy
            elif r < 0.5:
                nx = wx - h
                ny = wy
            elif r < 0.75:
                nx = wx
                ny = wy + h
            else:
                nx = wx
                ny = wy - h
            tmin = 2.0
            # circle crossing
            dx = nx - wx
            dy = ny - wy
            fx = wx - cx
            fy = wy - cy
            a = dx * dx + dy * dy
            b = 2.0 * (fx * dx + fy * dy)
            c = fx * fx + fy * fy - R * R
            disc = b * b - 4.0 * a * c
            if disc >= 0.0 and a > 0.0:
                t = (-b + math.sqrt(disc)) / (2.0 * a)
                if 0.0 < t <= 1.0:
                    tmin = t
            if nslit >= 2:
                for i in range(nslit - 1):
                    t = _seg_cross_param(
                        wx, wy, nx, ny,
                        slit[i, 0], slit[i, 1], slit[i + 1, 0], slit[i + 1, 1],
                    )
                    if t < tmin:
                        tmin = t
            if tmin <= 1.0:
                ex = wx + tmin * dx
                ey = wy + tmin * dy
                lx = ex - zx
                ly = ey - zy
                val = 0.5 * math.log(lx * lx + ly * ly)
                s1 += val
                s2 += val * val
                done = True
                break
            wx = nx
            wy = ny
        if not done:
            capped += 1
    return s1, s2, capped


@njit(cache=True)
def propagate_winding(ch_indptr, ch_list, top, h, dx, dy, posx, posy):
    """Depth-first propagation of intrinsic winding down a tree.

    h, dx, dy must hold the value and incoming direction for the `top`
    vertices; children get h[child] = h[u] + turn(d_in(u), u->child)."""
    n = posx.shape[0]
    stack = np.empty(n, np.int64)
    for i in range(top.shape[0]):
        sp = 0
        stack[0] = top[i]
        while sp >= 0:
            u = stack[sp]
            sp -= 1
            for k in range(ch_indptr[u], ch_indptr[u + 1]):
                w = ch_list[k]
                ex = posx[w] - posx[u]
                ey = posy[w] - posy[u]
                h[w] = h[u] + np.arctan2(
                    dx[u] * ey - dy[u] * ex, dx[u] * ex + dy[u] * ey
                )
                dx[w] = ex
                dy[w] = ey
                sp += 1
                stack[sp] = w

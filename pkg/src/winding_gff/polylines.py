"""Winding functionals of planar polylines.

A polyline is an (n, 2) float array of vertices joined by straight
segments.  Two notions of winding are used throughout:

* topological winding around a point p: the increment of the continuous
  argument of gamma(t) - p along the curve, and
* intrinsic winding: the total signed turning of the tangent, i.e. the sum
  of exterior angles at the interior vertices.

Both are accumulated as per-segment atan2(cross, dot) increments, which are
exact for straight segments: the argument of gamma(t) - p sweeps strictly
less than pi over a segment not containing p, so each increment is the
principal angle between the endpoint vectors.
"""

import numpy as np


def _as_points(points):
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ValueError("polyline must be an (n, 2) array with n >= 2")
    if not np.all(np.isfinite(pts)):
        raise ValueError("polyline has non-finite coordinates")
    return pts


def path_scale(points):
    """Coordinate scale of a polyline, used for relative tolerances."""
    pts = np.asarray(points, dtype=float)
    return max(1.0, float(np.abs(pts).max()))


def segment_distances(points, p):
    """Distance from p to each segment of the polyline, as an (n-1,) array."""
    pts = _as_points(points)
    p = np.asarray(p, dtype=float)
    a = pts[:-1]
    d = pts[1:] - a
    len2 = (d * d).sum(axis=1)
    # degenerate segments fall back to endpoint distance
    t = np.zeros(len(a))
    ok = len2 > 0
    t[ok] = ((p - a[ok]) * d[ok]).sum(axis=1) / len2[ok]
    t = np.clip(t, 0.0, 1.0)
    closest = a + t[:, None] * d
    return np.hypot(*(p - closest).T)


def winding_increments(points, p):
    """Per-segment increments of the continuous argument of gamma - p.

    A vertex exactly at p contributes zero increments (the straight-
    approach limit); avoids atan2's signed-zero artifacts there."""
    pts = _as_points(points)
    v = pts - np.asarray(p, dtype=float)
    cross = v[:-1, 0] * v[1:, 1] - v[:-1, 1] * v[1:, 0]
    dot = (v[:-1] * v[1:]).sum(axis=1)
    r2 = (v * v).sum(axis=1)
    live = (r2[:-1] > 0.0) & (r2[1:] > 0.0)
    return np.where(live, np.arctan2(cross, dot), 0.0)


def topological_winding(points, p, tol_factor=1e-12):
    """Total winding of the polyline around p.

    p must stay off the curve: if p lies within tol_factor * path_scale of
    any segment the winding is ill defined and a ValueError is raised.
    """
    pts = _as_points(points)
    tol = tol_factor * path_scale(pts)
    if segment_distances(pts, p).min() <= tol:
        raise ValueError("winding point lies on (or touches) the path")
    return float(winding_increments(pts, p).sum())


def turning_angles(points, closed=False):
    """Signed exterior angles at the interior vertices of the polyline.

    Exact 180-degree reversals have no well-defined turning sign and are
    rejected.  closed=True appends the turn joining the last segment back
    to the first (the polyline must then end where it starts).
    """
    pts = _as_points(points)
    d = np.diff(pts, axis=0)
    lens = np.hypot(d[:, 0], d[:, 1])
    if np.any(lens == 0.0):
        raise ValueError("polyline has a zero-length segment")
    if closed:
        if not np.allclose(pts[0], pts[-1], rtol=0, atol=0):
            raise ValueError("closed polyline must end at its start point")
        d = np.vstack([d, d[:1]])
    a, b = d[:-1], d[1:]
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    dot = (a * b).sum(axis=1)
    reversal = (dot < 0) & (np.abs(cross) <= 1e-14 * np.abs(dot))
    if np.any(reversal):
        raise ValueError("exact reversal: turning angle is ill defined")
    return np.arctan2(cross, dot)


def intrinsic_winding(points, closed=False):
    """Total tangent rotation of the polyline (sum of turning angles)."""
    return float(turning_angles(points, closed=closed).sum())


def winding_around_endpoint(points, which):
    """Topological winding of the polyline around one of its endpoints.

    The limit of the argument of gamma(t) - endpoint exists because the
    adjacent segment approaches the endpoint along a straight line and
    contributes nothing; the winding is accumulated over the remaining
    segments.  which is "start" or "end".
    """
    pts = _as_points(points)
    if pts.shape[0] < 3:
        return 0.0
    if which == "end":
        return topological_winding(pts[:-1], pts[-1])
    if which == "start":
        return topological_winding(pts[1:], pts[0])
    raise ValueError("which must be 'start' or 'end'")


def intrinsic_to_topological_residual(points):
    """Residual of the identity linking intrinsic and topological winding.

    For a simple polyline the intrinsic winding equals the sum of the
    topological windings around its two endpoints.  Both sides are computed
    by independent accumulations; the residual is their difference.
    """
    lhs = intrinsic_winding(points)
    rhs = winding_around_endpoint(points, "end") + winding_around_endpoint(
        points, "start"
    )
    return lhs - rhs


def refine_polyline(points, max_len):
    """Subdivide segments so that none is longer than max_len."""
    pts = _as_points(points)
    out = [pts[:1]]
    for i in range(len(pts) - 1):
        a, b = pts[i], pts[i + 1]
        seg = np.hypot(*(b - a))
        k = max(1, int(np.ceil(seg / max_len)))
        t = np.arange(1, k + 1)[:, None] / k
        out.append(a + t * (b - a))
    return np.vstack(out)


def is_simple_polyline(points, tol=0.0):
    """True if no two non-adjacent segments intersect (endpoints shared by
    consecutive segments are allowed)."""
    pts = _as_points(points)
    n = len(pts) - 1
    a = pts[:-1]
    b = pts[1:]
    for i in range(n):
        # vectorized segment-vs-segment orientation test against j > i + 1
        j0 = i + 2
        if j0 >= n:
            break
        p, r = a[i], b[i] - a[i]
        q = a[j0:]
        s = b[j0:] - q
        rxs = r[0] * s[:, 1] - r[1] * s[:, 0]
        qmp = q - p
        qpxr = qmp[:, 0] * r[1] - qmp[:, 1] * r[0]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (qmp[:, 0] * s[:, 1] - qmp[:, 1] * s[:, 0]) / rxs
            u = qpxr / rxs
        hit = (np.abs(rxs) > 0) & (t >= -tol) & (t <= 1 + tol) & (u >= -tol) & (u <= 1 + tol)
        if np.any(hit):
            return False
        # collinear overlapping segments
        collinear = (rxs == 0) & (qpxr == 0)
        if np.any(collinear):
            return False
    return True


# ----------------------------------------------------------------------
# fuzz generators for the deterministic identity suites


def fuzz_simple_polyline(rng, kind=None, max_tries=200):
    """Random simple polyline for identity fuzzing.

    Three families: x-monotone graph paths (simple by construction),
    inward spirals (many turns, stresses large windings), and short
    random walks kept only when simple.
    """
    if kind is None:
        kind = ("graph", "spiral", "walk")[rng.integers(3)]
    for _ in range(max_tries):
        if kind == "graph":
            n = int(rng.integers(3, 40))
            dx = rng.uniform(0.05, 1.0, n - 1)
            x = np.concatenate([[0.0], np.cumsum(dx)])
            y = np.cumsum(rng.normal(0.0, 0.7, n))
            pts = np.column_stack([x, y])
            return pts
        if kind == "spiral":
            n = int(rng.integers(8, 60))
            sgn = 1.0 if rng.random() < 0.5 else -1.0
            dth = sgn * rng.uniform(0.15, 1.2, n - 1)
            th = np.concatenate([[rng.uniform(0, 2 * np.pi)], ]) + np.concatenate(
                [[0.0], np.cumsum(dth)])
            r = np.exp(np.linspace(0.0, rng.uniform(-3.0, -0.8), n))
            pts = np.column_stack([r * np.cos(th), r * np.sin(th)])
        else:
            n = int(rng.integers(3, 12))
            step = np.exp(rng.normal(-0.3, 0.6, (n - 1, 1)))
            ang = rng.uniform(-np.pi, np.pi, n - 1)
            d = step * np.column_stack([np.cos(ang), np.sin(ang)])
            pts = np.vstack([[0.0, 0.0], np.cumsum(d, axis=0)])
        if is_simple_polyline(pts):
            return pts
    raise RuntimeError(f"no simple polyline of kind {kind!r} after "
                       f"{max_tries} tries")


def fuzz_disc_path(rng, r_tip_max=0.75, max_tries=200):
    """Simple polyline from the marked boundary point (1, 0) to a random
    interior tip, staying in the closed unit disc (waypoints in the disc,
    which is convex)."""
    for _ in range(max_tries):
        rt = np.sqrt(rng.uniform(0.0, r_tip_max ** 2))
        at = rng.uniform(-np.pi, np.pi)
        tip = np.array([rt * np.cos(at), rt * np.sin(at)])
        k = int(rng.integers(1, 7))
        rm = np.sqrt(rng.uniform(0.0, 0.9 ** 2, k))
        am = rng.uniform(-np.pi, np.pi, k)
        mid = np.column_stack([rm * np.cos(am), rm * np.sin(am)])
        pts = np.vstack([[1.0, 0.0], mid, tip])
        if is_simple_polyline(pts):
            return pts
    raise RuntimeError(f"no simple disc path after {max_tries} tries")

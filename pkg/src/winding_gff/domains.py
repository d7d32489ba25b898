"""Planar domains with a marked boundary point.

A Domain is a disc, an axis-aligned rectangle, or a simple polygon
(anticlockwise), together with a marked boundary point x.  The boundary is
oriented anticlockwise and parametrized from x; for a disc the parameter is
the subtended angle in [0, 2pi), for the others it is arclength.

The boundary arc from x to a parameter s (traversed anticlockwise, i.e. in
the order x -> s) is the deterministic prefix attached to tree branches by
the winding field: the domain exposes its intrinsic winding (total tangent
rotation), its end tangent, and its exact topological winding around
interior points.
"""

import numpy as np

from .polylines import topological_winding, winding_increments

_TWO_PI = 2.0 * np.pi


def _wrap_pi(a):
    """Wrap angle(s) to (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(a), _TWO_PI)


class Domain:
    """Bounded planar domain (disc, axis-rect, or simple polygon) with a
    marked boundary point x (default: rightmost boundary point)."""

    def __init__(self, kind, params, x=None):
        self.kind = kind
        if kind == "disc":
            self.center = np.asarray(params["center"], dtype=float)
            self.radius = float(params["radius"])
            if self.radius <= 0:
                raise ValueError("disc radius must be positive")
            if x is None:
                x = self.center + [self.radius, 0.0]
            x = np.asarray(x, dtype=float)
            d = np.hypot(*(x - self.center))
            if abs(d - self.radius) > 1e-9 * self.radius:
                raise ValueError("marked point x must lie on the circle")
            # snap exactly onto the circle
            x = self.center + (x - self.center) * (self.radius / d)
            self._theta_x = float(np.arctan2(*(x - self.center)[::-1]))
        elif kind in ("rect", "polygon"):
            if kind == "rect":
                x0, y0, x1, y1 = (float(v) for v in params["bounds"])
                if not (x1 > x0 and y1 > y0):
                    raise ValueError("rectangle bounds must be ordered")
                self.bounds = (x0, y0, x1, y1)
                verts = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
                if x is None:
                    x = np.array([x1, 0.5 * (y0 + y1)])
            else:
                verts = np.asarray(params["vertices"], dtype=float)
                if verts.ndim != 2 or verts.shape[1] != 2 or len(verts) < 3:
                    raise ValueError("polygon needs at least 3 vertices")
                if np.allclose(verts[0], verts[-1]):
                    verts = verts[:-1]
                area2 = np.sum(
                    verts[:, 0] * np.roll(verts[:, 1], -1)
                    - np.roll(verts[:, 0], -1) * verts[:, 1]
                )
                if area2 <= 0:
                    raise ValueError("polygon vertices must be anticlockwise")
                if x is None:
                    i = np.lexsort((verts[:, 1], -verts[:, 0]))[0]
                    x = verts[i]
            self._verts = verts
            x = np.asarray(x, dtype=float)
            self._build_boundary(x)
        else:
            raise ValueError(f"unknown domain kind: {kind}")
        self.x = np.asarray(x, dtype=float)

    # ------------------------------------------------------------------
    # constructors

    @classmethod
    def disc(cls, center=(0.0, 0.0), radius=1.0, x=None):
        return cls("disc", {"center": center, "radius": radius}, x=x)

    @classmethod
    def rect(cls, x0, y0, x1, y1, x=None):
        return cls("rect", {"bounds": (x0, y0, x1, y1)}, x=x)

    @classmethod
    def polygon(cls, vertices, x=None):
        return cls("polygon", {"vertices": vertices}, x=x)

    # ------------------------------------------------------------------
    # polygon/rect boundary bookkeeping

    def _build_boundary(self, x):
        """Store the boundary loop anticlockwise starting (and ending) at x."""
        verts = self._verts
        n = len(verts)
        seg_a = verts
        seg_b = np.roll(verts, -1, axis=0)
        d = seg_b - seg_a
        len2 = (d * d).sum(axis=1)
        t = np.clip(((x - seg_a) * d).sum(axis=1) / len2, 0.0, 1.0)
        proj = seg_a + t[:, None] * d
        dist = np.hypot(*(x - proj).T)
        i = int(np.argmin(dist))
        scale = max(1.0, float(np.abs(verts).max()))
        if dist[i] > 1e-9 * scale:
            raise ValueError("marked point x must lie on the polygon boundary")
        x = proj[i]
        ti = t[i]
        # rebuild the loop starting at x on edge i
        pts = [x]
        if ti < 1.0 - 1e-12:
            pts.append(seg_b[i])
        for k in range(1, n):
            pts.append(seg_b[(i + k) % n])
        pts.append(x)
        loop = np.array(pts)
        # drop consecutive duplicates (x coinciding with a vertex)
        keep = np.ones(len(loop), dtype=bool)
        keep[1:] = np.hypot(*np.diff(loop, axis=0).T) > 1e-12 * scale
        loop = loop[keep]
        self._loop = loop
        segs = np.diff(loop, axis=0)
        self._seg_len = np.hypot(segs[:, 0], segs[:, 1])
        self._seg_dir = segs / self._seg_len[:, None]
        self._cum = np.concatenate([[0.0], np.cumsum(self._seg_len)])
        a, b = self._seg_dir[:-1], self._seg_dir[1:]
        cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
        dot = (a * b).sum(axis=1)
        self._corner_turn = np.arctan2(cross, dot)  # turn entering loop[k+1]

    # ------------------------------------------------------------------
    # geometry queries

    def bbox(self):
        if self.kind == "disc":
            cx, cy = self.center
            r = self.radius
            return (cx - r, cy - r, cx + r, cy + r)
        if self.kind == "rect":
            return self.bounds
        v = self._verts
        return (v[:, 0].min(), v[:, 1].min(), v[:, 0].max(), v[:, 1].max())

    def contains(self, points, strict=True, tol=0.0):
        """Strict interior test (points on the boundary count as exterior);
        with strict=False points within tol of the closure count as inside."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.kind == "disc":
            r = np.hypot(*(pts - self.center).T)
            out = r < self.radius if strict else r <= self.radius + tol
        elif self.kind == "rect":
            x0, y0, x1, y1 = self.bounds
            if strict:
                out = (
                    (pts[:, 0] > x0) & (pts[:, 0] < x1)
                    & (pts[:, 1] > y0) & (pts[:, 1] < y1)
                )
            else:
                out = (
                    (pts[:, 0] >= x0 - tol) & (pts[:, 0] <= x1 + tol)
                    & (pts[:, 1] >= y0 - tol) & (pts[:, 1] <= y1 + tol)
                )
        else:
            out = self._polygon_contains(pts, strict, tol)
        return out if np.asarray(points).ndim == 2 else bool(out[0])

    def _polygon_contains(self, pts, strict, tol):
        verts = self._verts
        a = verts
        b = np.roll(verts, -1, axis=0)
        inside = np.zeros(len(pts), dtype=bool)
        on_bnd = np.zeros(len(pts), dtype=bool)
        scale = max(1.0, float(np.abs(verts).max()))
        btol = max(tol, 1e-12 * scale)
        for k in range(len(verts)):
            ax, ay = a[k]
            bx, by = b[k]
            # even-odd ray crossing, ray towards +x
            cond = (ay > pts[:, 1]) != (by > pts[:, 1])
            with np.errstate(divide="ignore", invalid="ignore"):
                xint = ax + (pts[:, 1] - ay) / (by - ay) * (bx - ax)
            inside ^= cond & (xint > pts[:, 0])
            # distance to the edge for boundary detection
            d = np.array([bx - ax, by - ay])
            len2 = float(d @ d)
            t = np.clip(((pts - [ax, ay]) @ d) / len2, 0.0, 1.0)
            closest = np.array([ax, ay]) + t[:, None] * d
            on_bnd |= np.hypot(*(pts - closest).T) <= btol
        return (inside & ~on_bnd) if strict else (inside | on_bnd)

    def first_exit(self, p, q):
        """Parameter t in (0, 1] of the first boundary crossing of the
        segment p -> q, or nan when the segment stays inside.  p is assumed
        to lie strictly inside."""
        t = self.first_exit_batch(np.asarray(p, float)[None], np.asarray(q, float)[None])
        return float(t[0])

    def first_exit_batch(self, P, Q):
        P = np.asarray(P, dtype=float)
        Q = np.asarray(Q, dtype=float)
        if self.kind == "disc":
            d = Q - P
            f = P - self.center
            a = (d * d).sum(axis=1)
            b = 2.0 * (f * d).sum(axis=1)
            c = (f * f).sum(axis=1) - self.radius**2
            disc = b * b - 4 * a * c
            t = np.full(len(P), np.nan)
            ok = (disc >= 0) & (a > 0)
            sq = np.sqrt(np.where(ok, disc, 0.0))
            t_hi = (-b + sq) / (2 * a)
            # interior start: c < 0, single positive root t_hi; tolerate
            # endpoints landing exactly on the circle
            hit = ok & (t_hi > 0) & (t_hi <= 1.0 + 1e-12)
            t[hit] = np.minimum(t_hi[hit], 1.0)
            return t
        # rect and polygon: intersect against each boundary segment
        loop_a = self._loop[:-1]
        loop_b = self._loop[1:]
        t_best = np.full(len(P), np.inf)
        r = Q - P
        for k in range(len(loop_a)):
            q0 = loop_a[k]
            s = loop_b[k] - q0
            rxs = r[:, 0] * s[1] - r[:, 1] * s[0]
            qmp = q0 - P
            with np.errstate(divide="ignore", invalid="ignore"):
                t = (qmp[:, 0] * s[1] - qmp[:, 1] * s[0]) / rxs
                u = (qmp[:, 0] * r[:, 1] - qmp[:, 1] * r[:, 0]) / rxs
            hit = (
                (np.abs(rxs) > 0)
                & (t > 0) & (t <= 1 + 1e-12)
                & (u >= -1e-12) & (u <= 1 + 1e-12)
            )
            t_best = np.where(hit & (t < t_best), np.minimum(t, 1.0), t_best)
        t_best[~np.isfinite(t_best)] = np.nan
        return t_best

    def distance_to_boundary(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.kind == "disc":
            return self.radius - np.hypot(*(pts - self.center).T)
        best = np.full(len(pts), np.inf)
        for k in range(len(self._loop) - 1):
            a = self._loop[k]
            d = self._loop[k + 1] - a
            len2 = float(d @ d)
            t = np.clip(((pts - a) @ d) / len2, 0.0, 1.0)
            closest = a + t[:, None] * d
            best = np.minimum(best, np.hypot(*(pts - closest).T))
        return best

    def area(self):
        if self.kind == "disc":
            return np.pi * self.radius**2
        if self.kind == "rect":
            x0, y0, x1, y1 = self.bounds
            return (x1 - x0) * (y1 - y0)
        v = self._verts
        return 0.5 * float(
            np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1])
        )

    def conformal_radius(self, z):
        """Exact conformal radius from z, available for discs only."""
        if self.kind != "disc":
            return None
        z = np.asarray(z, dtype=float)
        rho = np.hypot(*(z - self.center)) / self.radius
        if rho >= 1:
            raise ValueError("point is not inside the disc")
        return self.radius * (1.0 - rho**2)

    # ------------------------------------------------------------------
    # boundary parametrization (anticlockwise from x)

    def boundary_length(self):
        return _TWO_PI if self.kind == "disc" else float(self._cum[-1])

    def boundary_coord(self, point):
        """Parameter s in [0, L) of a point on the boundary."""
        p = np.asarray(point, dtype=float)
        if self.kind == "disc":
            th = np.arctan2(*(p - self.center)[::-1])
            return float(np.mod(th - self._theta_x, _TWO_PI))
        d = self._loop[1:] - self._loop[:-1]
        len2 = (d * d).sum(axis=1)
        t = np.clip(((p - self._loop[:-1]) * d).sum(axis=1) / len2, 0.0, 1.0)
        proj = self._loop[:-1] + t[:, None] * d
        dist = np.hypot(*(p - proj).T)
        k = int(np.argmin(dist))
        scale = max(1.0, float(np.abs(self._loop).max()))
        if dist[k] > 1e-7 * scale:
            raise ValueError("point is not on the domain boundary")
        s = self._cum[k] + t[k] * self._seg_len[k]
        return float(s % self._cum[-1])

    def boundary_point(self, s):
        if self.kind == "disc":
            th = self._theta_x + s
            return self.center + self.radius * np.array([np.cos(th), np.sin(th)])
        s = float(np.mod(s, self._cum[-1]))
        k = int(np.searchsorted(self._cum, s, side="right") - 1)
        k = min(k, len(self._seg_len) - 1)
        return self._loop[k] + (s - self._cum[k]) * self._seg_dir[k]

    def boundary_tangent(self, s):
        """Anticlockwise unit tangent at parameter s (at a corner: the
        outgoing edge's direction)."""
        if self.kind == "disc":
            th = self._theta_x + s
            return np.array([-np.sin(th), np.cos(th)])
        s = float(np.mod(s, self._cum[-1]))
        k = int(np.searchsorted(self._cum, s, side="right") - 1)
        k = min(k, len(self._seg_len) - 1)
        return self._seg_dir[k].copy()

    def tangent_at_x(self):
        return self.boundary_tangent(0.0)

    # ------------------------------------------------------------------
    # the boundary arc from x to s, traversed x -> s (anticlockwise)

    def arc_intrinsic_winding(self, s):
        """Total tangent rotation of the arc from x to parameter s."""
        if self.kind == "disc":
            return float(s)
        s = float(np.mod(s, self._cum[-1]))
        # corner at cumulative length _cum[k+1] contributes turn k
        inside = self._cum[1:-1] < s - 1e-12 * max(1.0, self._cum[-1])
        return float(self._corner_turn[: len(inside)][inside].sum())

    def arc_points(self, s, max_step):
        """The arc from x to parameter s as a polyline with segments no
        longer than max_step."""
        if self.kind == "disc":
            n = max(2, int(np.ceil(s * self.radius / max_step)) + 1)
            th = self._theta_x + np.linspace(0.0, s, n)
            return self.center + self.radius * np.stack(
                [np.cos(th), np.sin(th)], axis=1
            )
        s = float(np.mod(s, self._cum[-1]))
        k = int(np.searchsorted(self._cum, s, side="right") - 1)
        k = min(k, len(self._seg_len) - 1)
        pts = np.vstack([self._loop[: k + 1], self.boundary_point(s)[None]])
        from .polylines import refine_polyline

        dedup = np.hypot(*np.diff(pts, axis=0).T) > 1e-12
        pts = np.vstack([pts[:1], pts[1:][dedup]])
        if len(pts) < 2:
            return pts
        return refine_polyline(pts, max_step)

    def arc_winding_around(self, s, p):
        """Exact topological winding of the arc x -> s around an interior
        point p (the argument increment of arc(t) - p)."""
        p = np.asarray(p, dtype=float)
        if self.kind == "disc":
            if s <= 0:
                return 0.0
            # subdivide so each sub-arc subtends < pi/2 as seen from p;
            # per-piece endpoint increments are then exact
            d = self.radius - np.hypot(*(p - self.center))
            if d <= 0:
                raise ValueError("winding point must be inside the disc")
            step = min(0.5, 0.5 * d / self.radius)
            n = max(2, int(np.ceil(s / step)) + 1)
            th = self._theta_x + np.linspace(0.0, s, n)
            pts = self.center + self.radius * np.stack(
                [np.cos(th), np.sin(th)], axis=1
            )
            return float(winding_increments(pts, p).sum())
        pts = self.arc_points(s, max_step=np.inf)
        if len(pts) < 2:
            return 0.0
        return topological_winding(pts, p)

    def arc_winding_around_x(self, s, extra=None):
        """Topological winding around x of the arc x -> s (endpoint limit at
        the start), optionally continued by a polyline `extra` appended at
        the arc's end.  The limit direction at x is the boundary tangent."""
        tx = self.tangent_at_x()
        th0 = float(np.arctan2(tx[1], tx[0]))
        if s <= 0:
            pts = self.x[None]
        elif self.kind == "disc":
            step = 0.25
            n = max(2, int(np.ceil(s / step)) + 1)
            th = self._theta_x + np.linspace(0.0, s, n)
            pts = self.center + self.radius * np.stack(
                [np.cos(th), np.sin(th)], axis=1
            )
        else:
            pts = self.arc_points(s, max_step=np.inf)
        if extra is not None and len(extra):
            pts = np.vstack([pts, extra])
        if len(pts) < 2:
            return 0.0
        if s <= 0:
            # empty arc: the curve leaves x along its first segment, whose
            # own increment around x vanishes in the endpoint limit
            v1 = pts[1] - self.x
            th0 = float(np.arctan2(v1[1], v1[0]))
        # increment from the tangent limit to the first chord, then exact
        # per-segment increments; every piece stays within (-pi, pi)
        v0 = pts[1] - self.x
        w = float(_wrap_pi(np.arctan2(v0[1], v0[0]) - th0))
        return w + float(winding_increments(pts[1:], self.x).sum())

    # ------------------------------------------------------------------
    # argument branch on x - D

    def arg_from_x(self, points):
        """Continuous argument of x - z for z in the domain, normalized to
        agree with Arg in the direction opposite the boundary tangent at x.
        For the unit disc with x = 1 this is Arg(1 - z) in (-pi/2, pi/2)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        w = self.x - pts
        tx = self.tangent_at_x()
        u0 = np.arctan2(-tx[1], -tx[0])
        val = u0 + _wrap_pi(np.arctan2(w[:, 1], w[:, 0]) - u0)
        return val if np.asarray(points).ndim == 2 else float(val[0])

    # ------------------------------------------------------------------
    # conversions

    def shapely_polygon(self, disc_segments=512):
        from shapely.geometry import Polygon

        if self.kind == "disc":
            th = np.linspace(0, _TWO_PI, disc_segments, endpoint=False)
            ring = self.center + self.radius * np.stack(
                [np.cos(th), np.sin(th)], axis=1
            )
            return Polygon(ring)
        if self.kind == "rect":
            x0, y0, x1, y1 = self.bounds
            return Polygon([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])
        return Polygon(self._verts)

    def to_dict(self):
        d = {"kind": self.kind, "x": [float(self.x[0]), float(self.x[1])]}
        if self.kind == "disc":
            d["center"] = [float(self.center[0]), float(self.center[1])]
            d["radius"] = self.radius
        elif self.kind == "rect":
            d["bounds"] = [float(v) for v in self.bounds]
        else:
            d["vertices"] = [[float(a), float(b)] for a, b in self._verts]
        return d

    @classmethod
    def from_dict(cls, d):
        kind = d["kind"]
        x = d.get("x")
        if kind == "disc":
            return cls.disc(d["center"], d["radius"], x=x)
        if kind == "rect":
            return cls.rect(*d["bounds"], x=x)
        return cls.polygon(d["vertices"], x=x)

    def __repr__(self):
        if self.kind == "disc":
            return f"Domain.disc(center={tuple(self.center)}, radius={self.radius})"
        if self.kind == "rect":
            return f"Domain.rect{self.bounds}"
        return f"Domain.polygon(<{len(self._verts)} vertices>)"

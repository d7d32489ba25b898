"""Pairing of per-vertex fields with continuum test functions.

A field taking the value h(v) on the Voronoi cell of v is a function on
the domain; (h, f) = sum_v h(v) int_{cell(v)} f.  Cells are clipped to the
domain; integrals use a degree-5 rule on a centroid fan, or centroid times
area for cells smaller than the mesh.
"""

import weakref

import numpy as np
from scipy.spatial import Voronoi

# Radon's 7-point degree-5 rule on the triangle, barycentric coordinates
_A1 = (6.0 + np.sqrt(15.0)) / 21.0
_A2 = (6.0 - np.sqrt(15.0)) / 21.0
_TRI_BARY = np.array(
    [[1 / 3, 1 / 3, 1 / 3]]
    + [[_A1, _A1, 1 - 2 * _A1], [_A1, 1 - 2 * _A1, _A1], [1 - 2 * _A1, _A1, _A1]]
    + [[_A2, _A2, 1 - 2 * _A2], [_A2, 1 - 2 * _A2, _A2], [1 - 2 * _A2, _A2, _A2]]
)
_TRI_W = np.array(
    [9 / 40]
    + [(155.0 + np.sqrt(15.0)) / 1200.0] * 3
    + [(155.0 - np.sqrt(15.0)) / 1200.0] * 3
)


def _poly_area_centroid(pts):
    x, y = pts[:, 0], pts[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cr = x * yn - xn * y
    a = 0.5 * cr.sum()
    if abs(a) < 1e-300:
        return 0.0, pts.mean(axis=0)
    cx = ((x + xn) * cr).sum() / (6 * a)
    cy = ((y + yn) * cr).sum() / (6 * a)
    return a, np.array([cx, cy])


def _guard_points(domain, spacing):
    """Ring of dummy sites just outside the domain so every interior
    Voronoi region is bounded and hugs the boundary before clipping."""
    if domain.kind == "disc":
        r = domain.radius + spacing
        n = max(16, int(np.ceil(2 * np.pi * r / spacing)))
        th = np.linspace(0, 2 * np.pi, n, endpoint=False)
        return domain.center + r * np.stack([np.cos(th), np.sin(th)], axis=1)
    ring = domain.shapely_polygon().buffer(spacing).exterior
    n = max(16, int(np.ceil(ring.length / spacing)))
    return np.asarray(
        [ring.interpolate(i * ring.length / n).coords[0] for i in range(n)]
    )


class VoronoiPairing:
    """Precomputed quadrature for pairing fields on a wired graph with
    test functions: nodes, weights and owning cell for the whole domain."""

    def __init__(self, graph, clip_tol=None):
        dom = graph.domain
        pos = graph.pos
        n = graph.n_interior
        from .winding import _graph_step

        delta = _graph_step(graph)
        vor = Voronoi(np.vstack([pos, _guard_points(dom, 1.5 * delta)]))
        poly_dom = dom.shapely_polygon()
        cells = []
        self.cell_area = np.zeros(n)
        for i in range(n):
            reg = vor.regions[vor.point_region[i]]
            if -1 in reg or len(reg) < 3:
                raise RuntimeError(f"unbounded Voronoi cell for vertex {i}")
            cell = vor.vertices[reg]
            # clip cells that can poke outside; interior cells are left alone
            d_bnd = dom.distance_to_boundary(pos[i])
            if d_bnd < 2.0 * delta:
                from shapely.geometry import Polygon

                clipped = Polygon(cell).intersection(poly_dom)
                if clipped.is_empty:
                    cell = None
                elif clipped.geom_type == "Polygon":
                    cell = np.asarray(clipped.exterior.coords)[:-1]
                else:  # MultiPolygon: keep the piece containing the site
                    from shapely.geometry import Point

                    best = max(clipped.geoms, key=lambda g: g.area)
                    for gpart in clipped.geoms:
                        if gpart.contains(Point(pos[i])):
                            best = gpart
                            break
                    cell = np.asarray(best.exterior.coords)[:-1]
            cells.append(cell)
        nodes, weights, owner = [], [], []
        for i, cell in enumerate(cells):
            if cell is None:
                continue
            a, c = _poly_area_centroid(cell)
            if a < 0:
                cell = cell[::-1]
                a = -a
            self.cell_area[i] = a
            if a == 0.0:
                continue
            diam = max(
                np.hypot(*(cell.max(axis=0) - cell.min(axis=0))), 0.0
            )
            if diam < delta:
                nodes.append(c[None])
                weights.append(np.array([a]))
                owner.append(np.full(1, i))
                continue
            # centroid fan, degree-5 rule per triangle
            m = len(cell)
            tris = np.stack(
                [np.broadcast_to(c, (m, 2)), cell, np.roll(cell, -1, axis=0)],
                axis=1,
            )
            ta = 0.5 * np.abs(
                (tris[:, 1, 0] - tris[:, 0, 0]) * (tris[:, 2, 1] - tris[:, 0, 1])
                - (tris[:, 2, 0] - tris[:, 0, 0]) * (tris[:, 1, 1] - tris[:, 0, 1])
            )
            pts = np.einsum("qb,mbx->mqx", _TRI_BARY, tris).reshape(-1, 2)
            w = (ta[:, None] * _TRI_W[None]).reshape(-1)
            nodes.append(pts)
            weights.append(w)
            owner.append(np.full(len(w), i))
        self.graph = graph
        self.delta = delta
        self.nodes = np.concatenate(nodes)
        self.weights = np.concatenate(weights)
        self.owner = np.concatenate(owner)
        self._cache = weakref.WeakKeyDictionary()

    def cell_integrals(self, f):
        """Per-vertex integrals int_{cell(v)} f, vectorized over all
        quadrature nodes; cached per function object."""
        hit = self._cache.get(f)
        if hit is not None:
            return hit
        vals = np.asarray(f(self.nodes), float)
        out = np.bincount(self.owner, weights=self.weights * vals,
                          minlength=self.graph.n_interior)
        self._cache[f] = out
        return out

    def pair(self, values, f):
        """(h, f) = sum_v h(v) int_{cell(v)} f."""
        values = np.asarray(values, float)
        return float(values @ self.cell_integrals(f))

    def total_area(self):
        return float(self.cell_area.sum())


def pair_with_test_function(field, f, pairing=None):
    """Pair a WindingField (or raw values on a graph) with a test function."""
    from .winding import WindingField

    if isinstance(field, WindingField):
        graph, values = field.graph, field.values
    else:
        raise TypeError("field must be a WindingField; use VoronoiPairing.pair "
                        "for raw arrays")
    if pairing is None:
        pairing = VoronoiPairing(graph)
    return pairing.pair(values, f)


# ----------------------------------------------------------------------
# built-in test functions


def radial_bump(center, radius):
    """Smooth bump exp(1 - 1/(1-r^2)) supported on the open disc of the
    given center and radius, with peak value 1."""
    c = np.asarray(center, float).reshape(2)
    radius = float(radius)

    def f(x):
        x = np.atleast_2d(np.asarray(x, float))
        r2 = ((x - c) ** 2).sum(axis=1) / radius**2
        out = np.zeros(len(x))
        m = r2 < 1.0
        out[m] = np.exp(1.0 - 1.0 / (1.0 - r2[m]))
        return out

    f.support_center = c
    f.support_radius = radius
    f.params = {"kind": "radial-bump", "center": list(map(float, c)),
                "radius": radius}
    return f


def poly_bump(center, radius, px=0, py=0):
    """x^px * y^py times a radial bump (coordinates absolute)."""
    base = radial_bump(center, radius)
    px, py = int(px), int(py)

    def f(x):
        x = np.atleast_2d(np.asarray(x, float))
        return x[:, 0] ** px * x[:, 1] ** py * base(x)

    f.support_center = base.support_center
    f.support_radius = radius
    f.params = {"kind": "poly-bump", "center": base.params["center"],
                "radius": float(radius), "px": px, "py": py}
    return f


_REGISTRY = {"radial-bump": radial_bump, "poly-bump": poly_bump}


def make_test_function(kind, **params):
    """Registry constructor for the built-in test functions."""
    try:
        builder = _REGISTRY[kind]
    except KeyError:
        raise ValueError(f"unknown test function kind: {kind}") from None
    return builder(**params)


def reference_integral(f, center, radius, n_r=64, n_th=128):
    """Quadrature of f over a disc of the given center and radius by
    Gauss-Legendre in r^2 and trapezoid in angle (independent reference
    for the cell-sum pairing)."""
    u, wu = np.polynomial.legendre.leggauss(n_r)
    # substitute r^2 = radius^2 * (u+1)/2 so the Jacobian is constant
    r = radius * np.sqrt((u + 1.0) / 2.0)
    wr = wu * (radius**2 / 4.0)
    th = np.linspace(0.0, 2 * np.pi, n_th, endpoint=False)
    cx = np.asarray(center, float)
    pts = cx + np.stack(
        [np.outer(r, np.cos(th)).ravel(), np.outer(r, np.sin(th)).ravel()],
        axis=1,
    )
    vals = np.asarray(f(pts), float).reshape(len(r), n_th)
    return float((wr @ vals.sum(axis=1)) * (2 * np.pi / n_th))

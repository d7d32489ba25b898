"""Embedded planar graphs and the wired-domain surgery.

PlanarGraph is a directed weighted graph with an explicit straight-segment
embedding (optional per-edge polylines are carried but the built-in lattices
use straight edges).  WiredDomainGraph is the result of clipping a graph to
a domain: vertices strictly inside survive, every outgoing edge that meets
the boundary is cut at its first crossing and re-targeted to a single
absorbing root, and the crossing point (the auxiliary vertex) is remembered
together with its boundary coordinate.
"""

import json

import numpy as np

from .domains import Domain

GRAPH_FORMAT_VERSION = "winding-gff/graph/1"

ROOT = -1  # parent/dst sentinel for the wired root in serialized form


class PlanarGraph:
    """Directed weighted graph embedded in the plane.

    Vertices are indexed 0..n-1 with positions pos (n, 2).  Edges are
    directed; edge_polyline[k], when present, is the embedded path of edge k
    (including both endpoints).  Every vertex must have at least one
    outgoing edge of positive weight (dead ends are rejected).
    """

    def __init__(self, pos, edge_src, edge_dst, edge_weight,
                 edge_polyline=None, p_vert=None, bipartite_class=None,
                 meta=None, validate=True):
        self.pos = np.asarray(pos, dtype=float)
        self.edge_src = np.asarray(edge_src, dtype=np.int32)
        self.edge_dst = np.asarray(edge_dst, dtype=np.int32)
        self.edge_weight = np.asarray(edge_weight, dtype=float)
        self.edge_polyline = edge_polyline
        self.p_vert = None if p_vert is None else np.asarray(p_vert, dtype=float)
        self.bipartite_class = (
            None if bipartite_class is None
            else np.asarray(bipartite_class, dtype=np.int8)
        )
        self.meta = dict(meta or {})
        if validate:
            self.validate()

    @property
    def n_vertices(self):
        return len(self.pos)

    @property
    def n_edges(self):
        return len(self.edge_src)

    def validate(self):
        n = self.n_vertices
        if self.pos.ndim != 2 or self.pos.shape[1] != 2:
            raise ValueError("pos must be (n, 2)")
        if not np.all(np.isfinite(self.pos)):
            raise ValueError("non-finite vertex position")
        if len(self.edge_dst) != len(self.edge_src) or len(self.edge_weight) != len(self.edge_src):
            raise ValueError("edge arrays must have equal length")
        if self.n_edges and (self.edge_src.min() < 0 or self.edge_src.max() >= n
                             or self.edge_dst.min() < 0 or self.edge_dst.max() >= n):
            raise ValueError("edge endpoint out of range")
        if np.any(self.edge_weight <= 0) or not np.all(np.isfinite(self.edge_weight)):
            raise ValueError("edge weights must be positive and finite")
        if np.any(self.edge_src == self.edge_dst):
            raise ValueError("self-loops are not allowed")
        out_deg = np.bincount(self.edge_src, minlength=n)
        if np.any(out_deg == 0):
            dead = int(np.argmin(out_deg))
            raise ValueError(f"dead-end vertex {dead} has no outgoing edge")

    def edge_points(self, k):
        """Embedded polyline of edge k (straight segment by default)."""
        if self.edge_polyline is not None and self.edge_polyline[k] is not None:
            return np.asarray(self.edge_polyline[k], dtype=float)
        return np.stack([self.pos[self.edge_src[k]], self.pos[self.edge_dst[k]]])

    def to_json(self):
        edges = []
        for k in range(self.n_edges):
            e = {
                "src": int(self.edge_src[k]),
                "dst": int(self.edge_dst[k]),
                "w": float(self.edge_weight[k]),
            }
            if self.edge_polyline is not None and self.edge_polyline[k] is not None:
                e["polyline"] = [[float(a), float(b)] for a, b in self.edge_polyline[k]]
            edges.append(e)
        doc = {
            "version": GRAPH_FORMAT_VERSION,
            "kind": "planar",
            "vertices": [[float(a), float(b)] for a, b in self.pos],
            "edges": edges,
        }
        if self.p_vert is not None:
            doc["p_vert"] = [float(v) for v in self.p_vert]
        if self.bipartite_class is not None:
            doc["bipartite"] = [int(v) for v in self.bipartite_class]
        if self.meta:
            doc["meta"] = self.meta
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        if doc.get("version") != GRAPH_FORMAT_VERSION:
            raise ValueError(f"unsupported graph format: {doc.get('version')!r}")
        if doc.get("kind") == "wired":
            return WiredDomainGraph.from_json(text)
        pos = np.array(doc["vertices"], dtype=float)
        src = [e["src"] for e in doc["edges"]]
        dst = [e["dst"] for e in doc["edges"]]
        w = [e["w"] for e in doc["edges"]]
        poly = None
        if any("polyline" in e for e in doc["edges"]):
            poly = [
                np.array(e["polyline"], dtype=float) if "polyline" in e else None
                for e in doc["edges"]
            ]
        return cls(
            pos, src, dst, w, edge_polyline=poly,
            p_vert=doc.get("p_vert"), bipartite_class=doc.get("bipartite"),
            meta=doc.get("meta"),
        )


# ----------------------------------------------------------------------
# generators


def _index_range(lo, hi, delta):
    tol = 1e-9 * delta
    i0 = int(np.ceil((lo - tol) / delta))
    i1 = int(np.floor((hi + tol) / delta))
    return i0, i1


def gen_square_lattice(delta, box, weight=1.0):
    """Unit-weight square lattice delta*Z^2 restricted to a closed box.

    box is (x0, y0, x1, y1); vertices on the box boundary are included.
    Every present nearest-neighbour pair carries both directed edges with
    the given weight.
    """
    x0, y0, x1, y1 = box
    i0, i1 = _index_range(x0, x1, delta)
    j0, j1 = _index_range(y0, y1, delta)
    if i1 < i0 or j1 < j0:
        raise ValueError("box contains no lattice vertex")
    nx, ny = i1 - i0 + 1, j1 - j0 + 1
    ii, jj = np.meshgrid(np.arange(i0, i1 + 1), np.arange(j0, j1 + 1))
    pos = np.stack([ii.ravel() * delta, jj.ravel() * delta], axis=1)

    def vid(i, j):
        return (j - j0) * nx + (i - i0)

    src, dst = [], []
    for j in range(j0, j1 + 1):
        for i in range(i0, i1 + 1):
            v = vid(i, j)
            for di, dj in ((1, 0), (0, 1), (-1, 0), (0, -1)):
                ni, nj = i + di, j + dj
                if i0 <= ni <= i1 and j0 <= nj <= j1:
                    src.append(v)
                    dst.append(vid(ni, nj))
    w = np.full(len(src), float(weight))
    return PlanarGraph(pos, src, dst, w, meta={"lattice": "square", "delta": delta})


def gen_random_environment(delta, box, eps, seed=None, rng=None):
    """Square lattice with i.i.d. per-vertex drift-free random weights.

    Each vertex v draws p(v) ~ Uniform[eps, 1-eps] (symmetric about 1/2);
    its up and down edges get weight p(v)/2 and its left and right edges
    (1-p(v))/2, so the total outgoing weight is 1.
    """
    if not (0 < eps <= 0.5):
        raise ValueError("eps must lie in (0, 1/2]")
    g = gen_square_lattice(delta, box)
    if rng is None:
        rng = np.random.default_rng(seed)
    p = rng.uniform(eps, 1.0 - eps, size=g.n_vertices)
    dxy = g.pos[g.edge_dst] - g.pos[g.edge_src]
    vertical = np.abs(dxy[:, 1]) > np.abs(dxy[:, 0])
    pv = p[g.edge_src]
    w = np.where(vertical, pv / 2.0, (1.0 - pv) / 2.0)
    meta = {"lattice": "square-env", "delta": delta, "eps": eps}
    return PlanarGraph(g.pos, g.edge_src, g.edge_dst, w, p_vert=p, meta=meta)


def gen_hex_lattice(delta, region):
    """Honeycomb lattice with side delta clipped to a closed region.

    region is a Domain or a polygon vertex list; vertices within a small
    tolerance of the region's closure are kept.  The bipartite class of each
    vertex is recorded.
    """
    if not isinstance(region, Domain):
        region = Domain.polygon(region)
    x0, y0, x1, y1 = region.bbox()
    pad = 2.0 * delta
    # flat-top hexagon centers: horizontal pitch 1.5*delta, vertical sqrt(3)*delta
    q0 = int(np.floor((x0 - pad) / (1.5 * delta))) - 1
    q1 = int(np.ceil((x1 + pad) / (1.5 * delta))) + 1
    r0 = int(np.floor((y0 - pad) / (np.sqrt(3) * delta))) - 2
    r1 = int(np.ceil((y1 + pad) / (np.sqrt(3) * delta))) + 2
    corner_angles = np.arange(6) * (np.pi / 3.0)
    cornering = delta * np.stack([np.cos(corner_angles), np.sin(corner_angles)], axis=1)
    seen = {}
    pos = []
    cls = []
    for q in range(q0, q1 + 1):
        cx = 1.5 * delta * q
        yoff = 0.5 * np.sqrt(3) * delta * (q % 2)
        for r in range(r0, r1 + 1):
            cy = np.sqrt(3) * delta * r + yoff
            for k in range(6):
                p = (cx + cornering[k, 0], cy + cornering[k, 1])
                key = (int(round(2 * p[0] / delta)), int(round(2 * p[1] / (np.sqrt(3) * delta))))
                if key not in seen:
                    seen[key] = len(pos)
                    pos.append(p)
                    cls.append(k % 2)
    pos = np.array(pos)
    cls = np.array(cls, dtype=np.int8)
    keep = region.contains(pos, strict=False, tol=1e-9 * max(1.0, delta))
    pos, cls = pos[keep], cls[keep]
    order = np.lexsort((pos[:, 0], pos[:, 1]))
    pos, cls = pos[order], cls[order]
    from scipy.spatial import cKDTree

    tree = cKDTree(pos)
    pairs = sorted(tree.query_pairs(delta * (1 + 1e-6)))
    src, dst = [], []
    for a, b in pairs:
        d = np.hypot(*(pos[a] - pos[b]))
        if abs(d - delta) <= 1e-6 * delta:
            if cls[a] == cls[b]:
                raise AssertionError("honeycomb bipartition inconsistent")
            src += [a, b]
            dst += [b, a]
    w = np.ones(len(src))
    meta = {"lattice": "hex", "delta": delta}
    return PlanarGraph(pos, src, dst, w, bipartite_class=cls, meta=meta)


# ----------------------------------------------------------------------
# wiring


class WiredDomainGraph:
    """A graph clipped to a domain with all boundary crossings wired to a
    single absorbing root.

    Interior vertices are re-indexed 0..n-1; the root is index n.  Edge k
    goes from e_src[k] to e_dst[k] (possibly the root) with weight
    e_weight[k]; truncated edges also carry the auxiliary crossing point
    e_aux_pos[k] and its boundary coordinate e_aux_s[k].  Edges are grouped
    by source; indptr[v]:indptr[v+1] slices vertex v's out-edges.
    """

    def __init__(self, domain, pos, orig_ids, e_src, e_dst, e_weight,
                 e_aux_s, e_aux_pos, meta=None, validate=True):
        self.domain = domain
        self.pos = np.asarray(pos, dtype=float)
        self.orig_ids = np.asarray(orig_ids, dtype=np.int64)
        order = np.lexsort((np.arange(len(e_src)), np.asarray(e_src)))
        self.e_src = np.asarray(e_src, dtype=np.int32)[order]
        self.e_dst = np.asarray(e_dst, dtype=np.int32)[order]
        self.e_weight = np.asarray(e_weight, dtype=float)[order]
        self.e_aux_s = np.asarray(e_aux_s, dtype=float)[order]
        self.e_aux_pos = np.asarray(e_aux_pos, dtype=float)[order]
        n = len(self.pos)
        counts = np.bincount(self.e_src, minlength=n)
        self.indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self.meta = dict(meta or {})
        # cumulative jump probabilities within each source slice
        self.w_total = np.zeros(n)
        np.add.at(self.w_total, self.e_src, self.e_weight)
        cum = np.cumsum(self.e_weight)
        block = cum[self.indptr[1:] - 1]
        offs = np.concatenate([[0.0], cum[self.indptr[1:] - 1]])[:-1]
        denom = block - offs
        self.e_cum = (cum - np.repeat(offs, counts)) / np.repeat(denom, counts)
        self._kdtree = None
        if validate:
            self.validate()

    @property
    def n_interior(self):
        return len(self.pos)

    @property
    def root(self):
        return self.n_interior

    @property
    def n_edges(self):
        return len(self.e_src)

    def validate(self):
        n = self.n_interior
        if np.any(np.diff(self.indptr) == 0):
            dead = int(np.argmin(np.diff(self.indptr)))
            raise ValueError(f"dead-end interior vertex {dead}")
        if np.any(self.e_weight <= 0):
            raise ValueError("edge weights must be positive")
        to_root = self.e_dst == self.root
        if not np.any(to_root):
            raise ValueError("no edge reaches the boundary: nothing is wired")
        if np.any(~to_root & ~np.isnan(self.e_aux_s)):
            raise ValueError("aux data on an interior edge")
        if np.any(to_root & np.isnan(self.e_aux_s)):
            raise ValueError("truncated edge lacks aux data")
        # every vertex must reach the root through positive-weight edges
        reach = np.zeros(n + 1, dtype=bool)
        reach[n] = True
        rev = [[] for _ in range(n + 1)]
        for k in range(self.n_edges):
            rev[self.e_dst[k]].append(self.e_src[k])
        stack = [n]
        while stack:
            v = stack.pop()
            for u in rev[v]:
                if not reach[u]:
                    reach[u] = True
                    stack.append(u)
        if not reach.all():
            bad = int(np.flatnonzero(~reach)[0])
            raise ValueError(f"vertex {bad} cannot reach the wired root")

    def out_slice(self, v):
        return slice(int(self.indptr[v]), int(self.indptr[v + 1]))

    def nearest_vertex(self, point):
        from scipy.spatial import cKDTree

        if self._kdtree is None:
            self._kdtree = cKDTree(self.pos)
        return int(self._kdtree.query(np.asarray(point, dtype=float))[1])

    def vertex_at(self, point, tol=1e-9):
        v = self.nearest_vertex(point)
        scale = max(1.0, float(np.abs(self.pos).max()))
        if np.hypot(*(self.pos[v] - np.asarray(point, dtype=float))) > tol * scale:
            raise KeyError(f"no vertex at {point}")
        return v

    def kernel_arrays(self):
        """(indptr, e_dst, e_cum, root) in the layout the walk kernels use."""
        return self.indptr, self.e_dst, self.e_cum, self.root

    def to_json(self):
        edges = []
        for k in range(self.n_edges):
            e = {
                "src": int(self.e_src[k]),
                "dst": ROOT if self.e_dst[k] == self.root else int(self.e_dst[k]),
                "w": float(self.e_weight[k]),
            }
            if not np.isnan(self.e_aux_s[k]):
                e["aux_s"] = float(self.e_aux_s[k])
                e["aux"] = [float(self.e_aux_pos[k, 0]), float(self.e_aux_pos[k, 1])]
            edges.append(e)
        doc = {
            "version": GRAPH_FORMAT_VERSION,
            "kind": "wired",
            "domain": self.domain.to_dict(),
            "vertices": [[float(a), float(b)] for a, b in self.pos],
            "orig_ids": [int(i) for i in self.orig_ids],
            "edges": edges,
        }
        if self.meta:
            doc["meta"] = self.meta
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        if doc.get("version") != GRAPH_FORMAT_VERSION:
            raise ValueError(f"unsupported graph format: {doc.get('version')!r}")
        if doc.get("kind") != "wired":
            raise ValueError("not a wired graph document")
        pos = np.array(doc["vertices"], dtype=float)
        n = len(pos)
        m = len(doc["edges"])
        e_src = np.empty(m, dtype=np.int32)
        e_dst = np.empty(m, dtype=np.int32)
        e_w = np.empty(m)
        e_s = np.full(m, np.nan)
        e_p = np.full((m, 2), np.nan)
        for k, e in enumerate(doc["edges"]):
            e_src[k] = e["src"]
            e_dst[k] = n if e["dst"] == ROOT else e["dst"]
            e_w[k] = e["w"]
            if "aux_s" in e:
                e_s[k] = e["aux_s"]
                e_p[k] = e["aux"]
        return cls(
            Domain.from_dict(doc["domain"]), pos, doc["orig_ids"],
            e_src, e_dst, e_w, e_s, e_p, meta=doc.get("meta"),
        )


def clip_and_wire(graph, domain):
    """Clip a PlanarGraph to a domain and wire the boundary.

    Vertices strictly inside the domain survive (points on the boundary
    count as exterior).  Each outgoing edge whose embedding meets the
    boundary is cut at the first crossing along the edge; the crossing
    becomes an auxiliary point and the edge is re-targeted to the common
    root, keeping its weight.  Edges entering from outside are dropped.
    """
    pos = graph.pos
    inside = domain.contains(pos, strict=True)
    if not np.any(inside):
        raise ValueError("domain contains no vertex")
    new_id = np.full(len(pos), -1, dtype=np.int64)
    new_id[inside] = np.arange(int(inside.sum()))
    orig_ids = np.flatnonzero(inside)
    n = len(orig_ids)

    src_in = inside[graph.edge_src]
    keep_edges = np.flatnonzero(src_in)
    has_poly = graph.edge_polyline is not None

    # straight edges handled in one vectorized pass
    straight = keep_edges
    if has_poly:
        straight = np.array(
            [k for k in keep_edges if graph.edge_polyline[k] is None], dtype=np.int64
        )
    P = pos[graph.edge_src[straight]]
    Q = pos[graph.edge_dst[straight]]
    dst_in = inside[graph.edge_dst[straight]]
    t = np.full(len(straight), np.nan)
    if domain.kind in ("disc", "rect"):
        check = ~dst_in
    else:
        check = np.ones(len(straight), dtype=bool)  # non-convex: check all
    if np.any(check):
        t[check] = domain.first_exit_batch(P[check], Q[check])
    crossing = np.isfinite(t)
    bad = ~dst_in & ~crossing
    if np.any(bad):
        raise ValueError("edge leaves the domain without a boundary crossing")

    e_src, e_dst, e_w = [], [], []
    e_s, e_p = [], []
    for idx in range(len(straight)):
        k = straight[idx]
        u = new_id[graph.edge_src[k]]
        if crossing[idx]:
            a = P[idx] + t[idx] * (Q[idx] - P[idx])
            e_src.append(u)
            e_dst.append(n)
            e_w.append(graph.edge_weight[k])
            e_s.append(domain.boundary_coord(a))
            e_p.append(a)
        else:
            e_src.append(u)
            e_dst.append(new_id[graph.edge_dst[k]])
            e_w.append(graph.edge_weight[k])
            e_s.append(np.nan)
            e_p.append((np.nan, np.nan))

    if has_poly:
        for k in keep_edges:
            pl = graph.edge_polyline[k]
            if pl is None:
                continue
            pl = np.asarray(pl, dtype=float)
            u = new_id[graph.edge_src[k]]
            hit = None
            for i in range(len(pl) - 1):
                ti = domain.first_exit(pl[i], pl[i + 1])
                if np.isfinite(ti):
                    hit = pl[i] + ti * (pl[i + 1] - pl[i])
                    break
            if hit is None:
                if not inside[graph.edge_dst[k]]:
                    raise ValueError("edge leaves the domain without a crossing")
                e_src.append(u)
                e_dst.append(new_id[graph.edge_dst[k]])
                e_w.append(graph.edge_weight[k])
                e_s.append(np.nan)
                e_p.append((np.nan, np.nan))
            else:
                e_src.append(u)
                e_dst.append(n)
                e_w.append(graph.edge_weight[k])
                e_s.append(domain.boundary_coord(hit))
                e_p.append(hit)

    meta = dict(graph.meta)
    return WiredDomainGraph(
        domain, pos[inside], orig_ids,
        np.array(e_src), np.array(e_dst), np.array(e_w),
        np.array(e_s), np.array(e_p, dtype=float), meta=meta,
    )

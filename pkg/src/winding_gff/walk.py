"""Random walks, loop erasure and wired spanning trees.

The sampling entry points take an explicit numpy Generator.  For streams
that must be reproducible across worker counts use `rng_for_sample`,
which derives one Generator per (master seed, sample index) pair.
"""

import numpy as np

from . import _kernels
from .graphs import WiredDomainGraph


def rng_for_sample(master_seed, sample_index):
    """Generator for one Monte Carlo sample, independent of how samples
    are batched over workers."""
    return np.random.default_rng(
        np.random.SeedSequence((int(master_seed), int(sample_index)))
    )


def loop_erase(path):
    """Chronological loop erasure of a vertex sequence (pure reference
    implementation; the samplers erase on the fly)."""
    out = []
    seen = {}
    for v in path:
        v = int(v)
        if v in seen:
            for w in out[seen[v] + 1:]:
                del seen[w]
            del out[seen[v] + 1:]
        else:
            seen[v] = len(out)
            out.append(v)
    return out


def run_walk(graph, start, rng, absorb_vertices=None, max_steps=1 << 22):
    """Walk from `start` until hitting the root or a vertex in
    absorb_vertices.  Returns (vertices, edges, hit); hit is the absorbing
    vertex index (graph.root for the boundary)."""
    indptr, e_dst, e_cum, n = graph.kernel_arrays()
    absorb = np.zeros(n + 1, np.uint8)
    absorb[n] = 1
    if absorb_vertices is not None:
        absorb[np.asarray(absorb_vertices, dtype=np.int64)] = 1
    cap = 1 << 12
    while True:
        out_v = np.empty(cap + 1, np.int64)
        out_e = np.empty(cap, np.int64)
        plen, hit = _kernels.walk_record(
            indptr, e_dst, e_cum, n, int(start), absorb, rng, out_v, out_e
        )
        if hit != -1:
            return out_v[: plen + 1].copy(), out_e[:plen].copy(), hit
        if cap >= max_steps:
            raise RuntimeError("walk did not get absorbed within max_steps")
        cap *= 4


def walk_hits(graph, start, rng, absorb_vertices, max_steps=1 << 22):
    """Endpoint-only walk: returns (hit, steps) where hit is the absorbing
    index, graph.root for the boundary, or -1 if max_steps ran out."""
    indptr, e_dst, e_cum, n = graph.kernel_arrays()
    absorb = np.zeros(n + 1, np.uint8)
    absorb[n] = 1
    absorb[np.asarray(absorb_vertices, dtype=np.int64)] = 1
    return _kernels.walk_endpoint(
        indptr, e_dst, e_cum, n, int(start), absorb, int(max_steps), rng
    )


class SpanningTree:
    """Spanning tree of a wired graph, stored as one parent edge per
    interior vertex (the root has none)."""

    def __init__(self, graph, parent_edge, meta=None):
        self.graph = graph
        self.parent_edge = np.asarray(parent_edge, dtype=np.int64)
        if self.parent_edge.shape != (graph.n_interior,):
            raise ValueError("parent_edge must have one entry per interior vertex")
        self.meta = dict(meta or {})
        self._children = None

    @property
    def parent_vertex(self):
        """Parent of each interior vertex (graph.root for tree edges that
        leave through the boundary)."""
        return self.graph.e_dst[self.parent_edge]

    def branch(self, v):
        """Tree path from v to the root.  Returns (vertices, edges): the
        interior vertices visited, and the edge taken from each."""
        g = self.graph
        verts = [int(v)]
        edges = []
        u = int(v)
        for _ in range(g.n_interior + 1):
            e = self.parent_edge[u]
            edges.append(int(e))
            u = int(g.e_dst[e])
            if u == g.root:
                return np.array(verts, np.int64), np.array(edges, np.int64)
            verts.append(u)
        raise RuntimeError("parent pointers contain a cycle")

    def branch_points(self, v):
        """Geometric polyline of the branch from v: vertex positions, then
        the boundary point where the final edge leaves the domain."""
        verts, edges = self.branch(v)
        g = self.graph
        pts = np.empty((len(verts) + 1, 2))
        pts[: len(verts)] = g.pos[verts]
        pts[len(verts)] = g.e_aux_pos[edges[-1]]
        return pts

    def exit_coord(self, v):
        """Boundary coordinate where the branch from v reaches the
        boundary."""
        _, edges = self.branch(v)
        return float(self.graph.e_aux_s[edges[-1]])

    def children(self):
        """CSR arrays (indptr, child_vertex) of children per vertex, with
        the root in slot n_interior."""
        if self._children is None:
            g = self.graph
            par = self.parent_vertex
            order = np.argsort(par, kind="stable")
            counts = np.bincount(par, minlength=g.n_interior + 1)
            indptr = np.concatenate([[0], np.cumsum(counts)])
            self._children = (indptr.astype(np.int64), order.astype(np.int64))
        return self._children

    def validate(self):
        """Check that parent pointers form a tree spanning every interior
        vertex into the root."""
        g = self.graph
        if np.any(g.e_src[self.parent_edge] != np.arange(g.n_interior)):
            raise ValueError("parent edge does not leave its vertex")
        depth = np.full(g.n_interior, -1, np.int64)
        for v in range(g.n_interior):
            chain = []
            u = v
            while u != g.root and depth[u] < 0:
                chain.append(u)
                u = int(self.parent_vertex[u])
            base = 0 if u == g.root else depth[u] + 1
            if u != g.root and u in chain:
                raise ValueError("cycle in parent pointers")
            for i, w in enumerate(reversed(chain)):
                depth[w] = base + i
        return depth


def wilson_ust(graph, rng, order=None):
    """Sample a wired uniform spanning tree by Wilson's algorithm.

    order gives the sequence of starting vertices (default 0..n-1); the
    resulting tree law does not depend on it."""
    indptr, e_dst, e_cum, n = graph.kernel_arrays()
    if order is None:
        order = np.arange(n, dtype=np.int64)
    else:
        order = np.asarray(order, dtype=np.int64)
    parent_edge, steps = _kernels.wilson_parents(indptr, e_dst, e_cum, n, order, rng)
    return SpanningTree(graph, parent_edge, meta={"walk_steps": int(steps)})


def sample_branch(graph, v, rng, absorb_vertices=None):
    """Sample just the tree branch from v: a loop-erased walk from v to the
    boundary (equivalent to the branch of a Wilson tree started at v).

    Returns (vertices, edges, hit)."""
    indptr, e_dst, e_cum, n = graph.kernel_arrays()
    absorb = np.zeros(n + 1, np.uint8)
    absorb[n] = 1
    if absorb_vertices is not None:
        absorb[np.asarray(absorb_vertices, dtype=np.int64)] = 1
    return _kernels.lerw_path(indptr, e_dst, e_cum, n, int(v), absorb, rng)


def branch_polyline(graph, verts, edges):
    """Geometric polyline of a sampled branch ending at the boundary."""
    pts = np.empty((len(verts) + 1, 2))
    pts[: len(verts)] = graph.pos[np.asarray(verts, np.int64)]
    pts[len(verts)] = graph.e_aux_pos[edges[-1]]
    return pts


def make_order(graph, kind, rng=None, center=None, radius=None):
    """Vertex order for Wilson's algorithm: 'natural', 'random', or
    'multiscale' (which needs center and radius)."""
    n = graph.n_interior
    if kind == "natural":
        return np.arange(n, dtype=np.int64)
    if kind == "random":
        if rng is None:
            raise ValueError("random order needs an rng")
        return rng.permutation(n).astype(np.int64)
    if kind == "multiscale":
        if center is None or radius is None:
            raise ValueError("multiscale order needs center and radius")
        head = multiscale_order(graph, center, radius)
        mask = np.ones(n, bool)
        mask[head] = False
        return np.concatenate([head, np.flatnonzero(mask)]).astype(np.int64)
    raise ValueError(f"unknown order kind: {kind}")


def multiscale_order(graph, center, radius, base=6.0):
    """Coarse-to-fine vertex order around `center`.

    Scale j uses the grid of mesh (radius/2) * base^-j; each cell
    contributes its farthest not-yet-chosen vertex from `center` within
    distance (radius/2) * (1 + 2^-j).  Scales are appended until every
    vertex within radius/2 has been chosen."""
    center = np.asarray(center, float)
    pos = graph.pos
    dist = np.hypot(pos[:, 0] - center[0], pos[:, 1] - center[1])
    must_cover = dist <= radius / 2.0
    chosen_mask = np.zeros(graph.n_interior, bool)
    order = []
    r2 = radius / 2.0
    for j in range(64):
        mesh = r2 * base ** (-j)
        reach = r2 * (1.0 + 2.0 ** (-j))
        cand = np.flatnonzero((dist <= reach) & ~chosen_mask)
        if len(cand) > 0:
            cells = np.floor(pos[cand] / mesh).astype(np.int64)
            # group candidates by cell; pick the farthest from center
            keys = cells[:, 0] * np.int64(1 << 32) + cells[:, 1]
            seq = np.lexsort((-dist[cand], cand))  # deterministic ties
            best = {}
            for idx in seq:
                k = keys[idx]
                prev = best.get(k)
                if prev is None or dist[cand[idx]] > dist[cand[prev]]:
                    best[k] = idx
            picks = sorted(
                (int(cand[i]) for i in best.values()),
                key=lambda v: (-dist[v], v),
            )
            for v in picks:
                order.append(v)
                chosen_mask[v] = True
        if np.all(chosen_mask[must_cover]):
            break
    else:
        raise RuntimeError("multiscale order did not converge")
    return np.array(order, np.int64)


def crossing_probability(graph, ball1, ball2, n_samples, master_seed,
                         sample_offset=0, max_steps=1 << 22):
    """Estimate the probability that a walk started at the vertex nearest
    the center of ball1 reaches ball2 before the wired boundary.

    ball1, ball2: (center_xy, radius).  Returns a dict with the estimate,
    its standard error and the raw counts."""
    (c1, _r1) = ball1
    (c2, r2) = ball2
    pos = graph.pos
    start = graph.nearest_vertex(c1)
    inside2 = np.flatnonzero(
        np.hypot(pos[:, 0] - c2[0], pos[:, 1] - c2[1]) <= r2
    )
    if len(inside2) == 0:
        raise ValueError("target ball contains no vertices")
    hits = 0
    for i in range(n_samples):
        rng = rng_for_sample(master_seed, sample_offset + i)
        hit, _steps = walk_hits(graph, start, rng, inside2, max_steps=max_steps)
        if hit == -1:
            raise RuntimeError("walk exceeded max_steps")
        if hit != graph.root:
            hits += 1
    p = hits / n_samples
    se = float(np.sqrt(max(p * (1.0 - p), 1.0 / n_samples) / n_samples))
    return {
        "estimate": p,
        "se": se,
        "n_samples": int(n_samples),
        "hits": int(hits),
        "start_vertex": int(start),
    }

"""Temperley bijection between rooted spanning trees and dimer covers.

A finite planar piece with a marked vertex on its outer boundary is
superposed with its dual: dual vertices sit at bounded-face barycenters,
an edge-midpoint vertex joins each primal edge's endpoints to the faces
on its two sides, and the marked vertex together with the outer face is
dropped.  Perfect matchings of the result correspond one-to-one with
spanning trees of the piece rooted at the marked vertex: every primal
vertex is matched into the midpoint of its tree parent edge, every dual
vertex into the midpoint of its parent edge in the complementary dual
tree.  The matching law with edge weights is the pushforward of the
weighted tree law, so Wilson's algorithm doubles as a dimer sampler.

Heights come along for free: the height of a matched configuration at a
primal vertex is the intrinsic winding of the tree branch reaching it,
in units of one full turn.  For honeycomb hosts the classical integer
lozenge height (stacked-cubes rule) is also provided.
"""

import itertools
from collections import deque

import numpy as np

from . import _kernels
from .graphs import PlanarGraph
from .walk import SpanningTree, wilson_ust


# ----------------------------------------------------------------------
# faces of a straight-line embedding


def _trace_faces(pos, pairs):
    """Face cycles of an embedded graph, read off the rotation system.

    Returns (faces, outer, face_of): the face cycles as vertex arrays in
    traversal order (bounded faces counterclockwise), the index of the
    outer face, and the face on the left of each directed edge as a dict
    keyed by (u, v).  Bridges put the same face on both sides.
    """
    pos = np.asarray(pos, dtype=float)
    n = len(pos)
    if len(pairs) == 0:
        # a single vertex bounds only the outer face
        return [np.empty(0, np.int64)], 0, {}
    nbrs = [[] for _ in range(n)]
    for u, v in pairs:
        nbrs[int(u)].append(int(v))
        nbrs[int(v)].append(int(u))
    rot = []
    rank = []
    for v in range(n):
        vn = np.array(nbrs[v], np.int64)
        if len(vn):
            d = pos[vn] - pos[v]
            vn = vn[np.argsort(np.arctan2(d[:, 1], d[:, 0]))]
        rot.append(vn)
        r = {int(u): i for i, u in enumerate(vn)}
        if len(r) != len(vn):
            raise ValueError("parallel edges are not supported")
        rank.append(r)
    face_of = {}
    faces = []
    for a, b in pairs:
        for u0, v0 in ((int(a), int(b)), (int(b), int(a))):
            if (u0, v0) in face_of:
                continue
            cyc = []
            u, v = u0, v0
            while True:
                face_of[(u, v)] = len(faces)
                cyc.append(u)
                r = rot[v]
                u, v = v, int(r[(rank[v][u] - 1) % len(r)])
                if (u, v) == (u0, v0):
                    break
            faces.append(np.array(cyc, np.int64))
    if len(faces) != len(pairs) - n + 2:
        raise ValueError(
            "face count violates Euler's formula; the embedding is not a "
            "crossing-free drawing of a connected graph"
        )
    areas = np.empty(len(faces))
    for f, cyc in enumerate(faces):
        p = pos[cyc]
        q = pos[np.roll(cyc, -1)]
        areas[f] = 0.5 * np.sum(p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1])
    outer = int(np.argmin(areas))
    scale = max(1.0, float(np.abs(areas).max()))
    if np.sum(areas < -1e-12 * scale) != 1:
        raise ValueError("embedding has several clockwise faces; edges cross")
    return faces, outer, face_of


# ----------------------------------------------------------------------
# planar pieces and their rooted kernel view


class PlanarPiece:
    """Embedded planar graph piece with a marked outer-boundary vertex.

    pairs lists each undirected edge once; the straight-segment drawing
    must be crossing-free and connected.  Spanning trees are rooted at
    the marked vertex x, which the walk kernels treat as absorbing.
    """

    def __init__(self, pos, pairs, weights=None, x=0, meta=None):
        self.pos = np.asarray(pos, dtype=float).reshape(-1, 2)
        self.pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        n = self.n_vertices
        if self.pairs.size:
            if self.pairs.min() < 0 or self.pairs.max() >= n:
                raise ValueError("edge endpoint out of range")
            if np.any(self.pairs[:, 0] == self.pairs[:, 1]):
                raise ValueError("self-loops are not allowed")
            key = self.pairs.min(axis=1) * n + self.pairs.max(axis=1)
            if len(np.unique(key)) != len(key):
                raise ValueError("parallel edges are not supported")
        if weights is None:
            weights = np.ones(len(self.pairs))
        self.pair_weight = np.asarray(weights, dtype=float)
        if self.pair_weight.shape != (len(self.pairs),):
            raise ValueError("one weight per edge required")
        if np.any(self.pair_weight <= 0) or not np.all(np.isfinite(self.pair_weight)):
            raise ValueError("edge weights must be positive and finite")
        self.x = int(x)
        if not 0 <= self.x < n:
            raise ValueError("marked vertex out of range")
        self.meta = dict(meta or {})
        self._faces = None
        self._rooted = None
        self._superposed = None
        self._check_connected()
        if self.n_pairs and self.x not in set(int(v) for v in self.outer_cycle()):
            raise ValueError("marked vertex must lie on the outer boundary")

    @property
    def n_vertices(self):
        return len(self.pos)

    @property
    def n_pairs(self):
        return len(self.pairs)

    def _check_connected(self):
        n = self.n_vertices
        if n == 1:
            return
        if self.n_pairs == 0:
            raise ValueError("piece with several vertices has no edges")
        adj = [[] for _ in range(n)]
        for u, v in self.pairs:
            adj[int(u)].append(int(v))
            adj[int(v)].append(int(u))
        seen = np.zeros(n, bool)
        seen[0] = True
        q = deque([0])
        while q:
            u = q.popleft()
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    q.append(v)
        if not seen.all():
            raise ValueError("piece is not connected")

    def faces(self):
        """(faces, outer, face_of) of the piece's embedding, cached."""
        if self._faces is None:
            self._faces = _trace_faces(self.pos, self.pairs)
        return self._faces

    def outer_cycle(self):
        """Vertex cycle of the outer face, in traversal order."""
        faces, outer, _ = self.faces()
        return faces[outer]

    def boundary_is_simple(self):
        """Whether the outer face visits no vertex twice."""
        cyc = self.outer_cycle()
        return len(set(int(v) for v in cyc)) == len(cyc)

    def marked_at(self, x):
        """The same piece with a different marked vertex."""
        if int(x) == self.x:
            return self
        return PlanarPiece(self.pos, self.pairs, self.pair_weight, x=int(x),
                           meta=self.meta)

    def rooted(self):
        """Absorbing-root kernel view (cached; trees reference it)."""
        if self._rooted is None:
            self._rooted = _RootedPiece(self)
        return self._rooted

    def superpose(self):
        """Temperleyan superposition with the marked vertex removed."""
        if self._superposed is None:
            self._superposed = DimerGraph._from_piece(self)
        return self._superposed


class _RootedPiece:
    """Kernel view of a piece: vertices other than the marked one are
    renumbered 0..n-2 and the marked vertex becomes the absorbing root
    in slot n-1, matching the wired-graph layout the walk kernels use."""

    def __init__(self, piece):
        self.piece = piece
        n = piece.n_vertices
        x = piece.x
        orig = np.concatenate([np.arange(x), np.arange(x + 1, n)]).astype(np.int64)
        self.orig_of = orig
        self.slot_of = np.empty(n, np.int64)
        self.slot_of[orig] = np.arange(n - 1)
        self.slot_of[x] = n - 1
        src, dst, wts, pid = [], [], [], []
        for k in range(piece.n_pairs):
            a, b = int(piece.pairs[k, 0]), int(piece.pairs[k, 1])
            w = float(piece.pair_weight[k])
            for u, v in ((a, b), (b, a)):
                if u == x:
                    continue
                src.append(self.slot_of[u])
                dst.append(self.slot_of[v])
                wts.append(w)
                pid.append(k)
        src = np.array(src, np.int32)
        order = np.lexsort((np.arange(len(src)), src))
        self.e_src = src[order]
        self.e_dst = np.array(dst, np.int32)[order]
        self.e_weight = np.array(wts, float)[order]
        self.edge_pair = np.array(pid, np.int64)[order]
        counts = np.bincount(self.e_src, minlength=n - 1)
        self.indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        if len(self.e_weight):
            cum = np.cumsum(self.e_weight)
            block = cum[self.indptr[1:] - 1]
            offs = np.concatenate([[0.0], block])[:-1]
            self.e_cum = (cum - np.repeat(offs, counts)) / np.repeat(block - offs, counts)
        else:
            self.e_cum = np.zeros(0)
        self.pos = piece.pos[orig]
        self.root_pos = np.array(piece.pos[x], dtype=float)
        # directed kernel edge of each pair: column 0 runs pairs[k,0]->pairs[k,1]
        self.dir_edge = np.full((piece.n_pairs, 2), -1, np.int64)
        a_slot = self.slot_of[piece.pairs[:, 0]]
        for e in range(len(self.e_src)):
            k = self.edge_pair[e]
            self.dir_edge[k, 0 if self.e_src[e] == a_slot[k] else 1] = e

    @property
    def n_interior(self):
        return self.piece.n_vertices - 1

    @property
    def root(self):
        return self.piece.n_vertices - 1

    def kernel_arrays(self):
        """(indptr, e_dst, e_cum, root) in the walk kernels' layout."""
        return self.indptr, self.e_dst, self.e_cum, self.root


def grid_piece(rows, cols, delta=1.0, weight=1.0, x=0):
    """rows x cols square-grid piece with spacing delta; the marked
    vertex defaults to the lower-left corner."""
    if rows < 1 or cols < 1:
        raise ValueError("grid must have at least one vertex")
    ii, jj = np.meshgrid(np.arange(cols), np.arange(rows))
    pos = np.stack([ii.ravel() * delta, jj.ravel() * delta], axis=1).astype(float)

    def vid(i, j):
        return j * cols + i

    prs = []
    for j in range(rows):
        for i in range(cols):
            if i + 1 < cols:
                prs.append((vid(i, j), vid(i + 1, j)))
            if j + 1 < rows:
                prs.append((vid(i, j), vid(i, j + 1)))
    w = np.full(len(prs), float(weight))
    meta = {"lattice": "square", "delta": float(delta), "rows": rows, "cols": cols}
    return PlanarPiece(pos, prs, weights=w, x=x, meta=meta)


def piece_from_wired(graph, x=None):
    """Interior of a wired graph as a planar piece.

    Vertices keep their wired indices; root edges are dropped.  Edge
    weights must be symmetric (one weight per undirected edge).  The
    marked vertex defaults to the rightmost interior vertex, which
    necessarily lies on the outer boundary.
    """
    keep = graph.e_dst != graph.root
    a = np.asarray(graph.e_src[keep], np.int64)
    b = np.asarray(graph.e_dst[keep], np.int64)
    w = np.asarray(graph.e_weight[keep], float)
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    key = lo * graph.n_interior + hi
    order = np.argsort(key, kind="stable")
    key, lo, hi, w = key[order], lo[order], hi[order], w[order]
    first = np.concatenate([[True], key[1:] != key[:-1]])
    if not np.all(np.bincount(np.cumsum(first) - 1) == 2):
        raise ValueError("wired graph is not symmetric: a one-way interior edge")
    wa, wb = w[first], w[~first]
    if not np.allclose(wa, wb, rtol=1e-12, atol=0.0):
        raise ValueError("asymmetric edge weights cannot seed a dimer piece")
    pairs = np.stack([lo[first], hi[first]], axis=1)
    if x is None:
        x = int(np.lexsort((graph.pos[:, 1], graph.pos[:, 0]))[-1])
    return PlanarPiece(graph.pos, pairs, weights=wa, x=x, meta=dict(graph.meta))


# ----------------------------------------------------------------------
# superposition and matchings


class DimerGraph:
    """Bipartite planar graph hosting dimer covers.

    Two flavours share the type: Temperleyan superpositions built by
    temperley_superpose, which remember their primal piece and the
    bijection bookkeeping, and plain bipartite hosts such as honeycomb
    patches wrapped by from_planar.  pairs lists each edge once.
    """

    PRIMAL, DUAL, MIDPOINT = 0, 1, 2

    def __init__(self, pos, pairs, weights, bipartite_class, meta=None):
        self.pos = np.asarray(pos, dtype=float).reshape(-1, 2)
        self.pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        self.pair_weight = np.asarray(weights, dtype=float)
        self.bipartite_class = np.asarray(bipartite_class, dtype=np.int8)
        if self.bipartite_class.shape != (self.n_vertices,):
            raise ValueError("one bipartite class per vertex required")
        if self.pairs.size:
            cls = self.bipartite_class
            if np.any(cls[self.pairs[:, 0]] == cls[self.pairs[:, 1]]):
                raise ValueError("an edge joins two vertices of the same class")
        self.meta = dict(meta or {})
        self._pair_index = {}
        for k in range(self.n_pairs):
            u, v = int(self.pairs[k, 0]), int(self.pairs[k, 1])
            self._pair_index[(u, v)] = k
            self._pair_index[(v, u)] = k
        self._faces = None
        # superposition bookkeeping, filled in by _from_piece
        self.piece = None
        self.vertex_kind = None
        self.vertex_ref = None
        self.p_of = None
        self.d_of = None
        self.m_of = None
        self.face_adj = None
        self.outer_face = None
        self.n_piece_faces = None

    @property
    def n_vertices(self):
        return len(self.pos)

    @property
    def n_pairs(self):
        return len(self.pairs)

    @property
    def is_superposition(self):
        return self.piece is not None

    def faces(self):
        """Face cycles of this host's own embedding, cached."""
        if self._faces is None:
            self._faces = _trace_faces(self.pos, self.pairs)
        return self._faces

    def edge_index(self, u, v):
        k = self._pair_index.get((int(u), int(v)))
        if k is None:
            raise KeyError(f"({u}, {v}) is not an edge")
        return k

    @classmethod
    def _from_piece(cls, piece):
        faces, outer, face_of = piece.faces()
        x = piece.x
        kind, ref, pos = [], [], []
        p_of = np.full(piece.n_vertices, -1, np.int64)
        for v in range(piece.n_vertices):
            if v == x:
                continue
            p_of[v] = len(kind)
            kind.append(cls.PRIMAL)
            ref.append(v)
            pos.append(piece.pos[v])
        d_of = np.full(len(faces), -1, np.int64)
        for f, cyc in enumerate(faces):
            if f == outer:
                continue
            d_of[f] = len(kind)
            kind.append(cls.DUAL)
            ref.append(f)
            pos.append(piece.pos[cyc].mean(axis=0))
        m_of = np.empty(piece.n_pairs, np.int64)
        for k in range(piece.n_pairs):
            m_of[k] = len(kind)
            kind.append(cls.MIDPOINT)
            ref.append(k)
            pos.append(piece.pos[piece.pairs[k]].mean(axis=0))
        eu, ev, ew = [], [], []
        adj = [[] for _ in range(len(faces))]
        for k in range(piece.n_pairs):
            a, b = int(piece.pairs[k, 0]), int(piece.pairs[k, 1])
            for u in (a, b):
                if u != x:
                    eu.append(m_of[k])
                    ev.append(p_of[u])
                    ew.append(piece.pair_weight[k])
            fl, fr = face_of[(a, b)], face_of[(b, a)]
            if fl != fr:  # a bridge sees the same face on both sides
                adj[fl].append((k, fr))
                adj[fr].append((k, fl))
                for f in (fl, fr):
                    if f != outer:
                        eu.append(m_of[k])
                        ev.append(d_of[f])
                        ew.append(1.0)
        kind = np.array(kind, np.int8)
        if len(kind) % 2:
            raise ValueError("superposition has an odd vertex count; "
                             "no perfect matchings exist")
        dg = cls(np.array(pos, float).reshape(-1, 2),
                 np.stack([eu, ev], axis=1) if eu else np.empty((0, 2), np.int64),
                 np.array(ew, float),
                 (kind == cls.MIDPOINT).astype(np.int8),
                 meta=dict(piece.meta))
        dg.piece = piece
        dg.vertex_kind = kind
        dg.vertex_ref = np.array(ref, np.int64)
        dg.p_of = p_of
        dg.d_of = d_of
        dg.m_of = m_of
        dg.face_adj = adj
        dg.outer_face = outer
        dg.n_piece_faces = len(faces)
        return dg

    @classmethod
    def from_planar(cls, graph):
        """Wrap a bipartite PlanarGraph (e.g. a honeycomb patch) as a
        dimer host.  Directed edges are collapsed to undirected pairs;
        weights must agree in both directions."""
        if graph.bipartite_class is None:
            raise ValueError("graph has no bipartition labels")
        a = np.asarray(graph.edge_src, np.int64)
        b = np.asarray(graph.edge_dst, np.int64)
        w = np.asarray(graph.edge_weight, float)
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        key = lo * graph.n_vertices + hi
        order = np.argsort(key, kind="stable")
        key, lo, hi, w = key[order], lo[order], hi[order], w[order]
        first = np.concatenate([[True], key[1:] != key[:-1]])
        if not np.all(np.bincount(np.cumsum(first) - 1) == 2):
            raise ValueError("graph is not symmetric: a one-way edge")
        if not np.allclose(w[first], w[~first], rtol=1e-12, atol=0.0):
            raise ValueError("asymmetric edge weights")
        pairs = np.stack([lo[first], hi[first]], axis=1)
        return cls(graph.pos, pairs, w[first], graph.bipartite_class,
                   meta=dict(graph.meta or {}))


def temperley_superpose(piece, boundary_removal=None):
    """Superpose a planar piece with its dual, removing the marked
    boundary vertex and the outer face.

    The piece must be connected with a simple outer boundary cycle;
    boundary_removal (a piece vertex index) overrides the piece's
    marked vertex and must lie on the outer boundary.
    """
    if boundary_removal is not None:
        piece = piece.marked_at(boundary_removal)
    if piece.n_pairs and not piece.boundary_is_simple():
        raise ValueError("outer boundary is not a simple cycle")
    return piece.superpose()


class DimerConfiguration:
    """Perfect matching of a dimer host, stored as each vertex's
    matched partner."""

    def __init__(self, graph, partner, validate=True):
        self.graph = graph
        self.partner = np.asarray(partner, dtype=np.int64)
        if validate:
            self.validate()

    def validate(self):
        dg = self.graph
        p = self.partner
        if p.shape != (dg.n_vertices,):
            raise ValueError("one partner per vertex required")
        if dg.n_vertices == 0:
            return
        if p.min() < 0 or p.max() >= dg.n_vertices:
            raise ValueError("a vertex is unmatched")
        idx = np.arange(dg.n_vertices)
        if np.any(p == idx):
            raise ValueError("a vertex is matched to itself")
        if np.any(p[p] != idx):
            raise ValueError("matching is not an involution")
        for u in range(dg.n_vertices):
            v = int(p[u])
            if u < v and (u, v) not in dg._pair_index:
                raise ValueError(f"matched pair ({u}, {v}) is not an edge")

    def matched_pairs(self):
        """(n/2, 2) array of matched vertex pairs, smaller index first."""
        n = self.graph.n_vertices
        idx = np.arange(n)
        lo = idx < self.partner
        return np.stack([idx[lo], self.partner[idx[lo]]], axis=1)

    def pair_set(self):
        """Canonical hashable identity of the matching."""
        return frozenset((int(u), int(v)) for u, v in self.matched_pairs())

    def matched_edge_ids(self):
        dg = self.graph
        return np.array([dg.edge_index(u, v) for u, v in self.matched_pairs()],
                        np.int64)

    def weight(self):
        """Product of matched edge weights."""
        w = self.graph.pair_weight[self.matched_edge_ids()]
        return float(np.prod(w)) if len(w) else 1.0


def _require_superposition(dg):
    if not isinstance(dg, DimerGraph) or not dg.is_superposition:
        raise TypeError("a Temperleyan superposition DimerGraph is required")


def tree_to_dimer(tree, dg):
    """Map a spanning tree of the primal piece to a perfect matching:
    every vertex is matched into the midpoint of its parent edge, dual
    vertices along the complementary dual tree rooted at the outer
    face."""
    _require_superposition(dg)
    rooted = dg.piece.rooted()
    if tree.graph is not rooted:
        raise ValueError("tree does not belong to this superposition's piece")
    partner = np.full(dg.n_vertices, -1, np.int64)
    kpar = rooted.edge_pair[tree.parent_edge]
    pv = dg.p_of[rooted.orig_of]
    mids = dg.m_of[kpar]
    partner[pv] = mids
    partner[mids] = pv
    in_tree = np.zeros(dg.piece.n_pairs, bool)
    in_tree[kpar] = True
    seen = np.zeros(dg.n_piece_faces, bool)
    seen[dg.outer_face] = True
    q = deque([dg.outer_face])
    while q:
        f = q.popleft()
        for k, g in dg.face_adj[f]:
            if in_tree[k] or seen[g]:
                continue
            seen[g] = True
            mid = int(dg.m_of[k])
            d = int(dg.d_of[g])
            partner[d] = mid
            partner[mid] = d
            q.append(g)
    if dg.n_vertices and partner.min() < 0:
        raise AssertionError("bijection failed to cover the superposition")
    return DimerConfiguration(dg, partner)


def dimer_to_tree(config, dg):
    """Invert the bijection: each primal vertex's parent edge is the
    piece edge whose midpoint it is matched to.  Raises on matchings
    whose parent map is not a tree."""
    _require_superposition(dg)
    if config.graph is not dg:
        raise ValueError("configuration does not live on this graph")
    piece = dg.piece
    rooted = piece.rooted()
    if rooted.n_interior == 0:
        return SpanningTree(rooted, np.empty(0, np.int64))
    orig = rooted.orig_of
    mid = config.partner[dg.p_of[orig]]
    if np.any(dg.vertex_kind[mid] != DimerGraph.MIDPOINT):
        raise ValueError("a primal vertex is not matched to an edge midpoint")
    k = dg.vertex_ref[mid]
    headed = piece.pairs[k, 0] == orig
    e = np.where(headed, rooted.dir_edge[k, 0], rooted.dir_edge[k, 1])
    if np.any(e < 0):
        raise ValueError("a matched edge does not leave its vertex")
    tree = SpanningTree(rooted, e)
    tree.validate()
    return tree


def sample_dimer(dg, rng, order=None):
    """Sample a weight-proportional random perfect matching by pushing
    a Wilson tree through the bijection."""
    _require_superposition(dg)
    tree = wilson_ust(dg.piece.rooted(), rng, order=order)
    return tree_to_dimer(tree, dg)


# ----------------------------------------------------------------------
# heights


class HeightField:
    """Height values attached to the cells of a dimer configuration.

    values[i] belongs to the cell at pos[i]; the anchor cell is the
    additive normalization point.  unit records the height convention:
    'turn' for branch-winding heights (one full turn = 1) and 'step'
    for raw integer lozenge heights (3 steps = 1 stacked cube).
    """

    def __init__(self, values, pos, anchor, unit, meta=None):
        self.values = np.asarray(values)
        self.pos = np.asarray(pos, dtype=float).reshape(-1, 2)
        if self.values.shape != (len(self.pos),):
            raise ValueError("one value per cell required")
        self.anchor = int(anchor)
        self.unit = str(unit)
        self.meta = dict(meta or {})


def piece_tree_winding(tree):
    """Intrinsic winding of the tree path from the root out to every
    vertex: the sum of signed turning angles at the path's interior
    vertices, accumulated in one depth-first pass."""
    rooted = tree.graph
    n = rooted.n_interior
    if n == 0:
        return np.zeros(0)
    indptr, ch = tree.children()
    top = ch[indptr[n]: indptr[n + 1]].astype(np.int64)
    h = np.zeros(n)
    dx = np.zeros(n)
    dy = np.zeros(n)
    d = rooted.pos[top] - rooted.root_pos
    dx[top] = d[:, 0]
    dy[top] = d[:, 1]
    _kernels.propagate_winding(
        indptr.astype(np.int64), ch.astype(np.int64), top, h, dx, dy,
        np.ascontiguousarray(rooted.pos[:, 0]),
        np.ascontiguousarray(rooted.pos[:, 1]),
    )
    return h


def dimer_height(config, dg, anchor=None):
    """Height of a matched configuration at every primal vertex: the
    branch winding of the underlying tree in units of one full turn.

    The anchor cell (default: the marked vertex's cell) is normalized
    to 0; the raw winding in radians is kept in meta['winding_rad'].
    """
    _require_superposition(dg)
    tree = dimer_to_tree(config, dg)
    w = piece_tree_winding(tree)
    piece = dg.piece
    winding = np.zeros(piece.n_vertices)
    winding[piece.rooted().orig_of] = w
    values = winding / (2.0 * np.pi)
    if anchor is None:
        anchor = piece.x
    values = values - values[int(anchor)]
    return HeightField(values, piece.pos, anchor, "turn",
                       meta={"winding_rad": winding})


HEIGHT_STEPS_PER_CUBE = 3


def lozenge_height(hex_config, anchor=None):
    """Integer lozenge height of a honeycomb dimer cover, one value per
    bounded face (hexagon) of the host.

    Stacked-cubes rule: crossing an edge with its class-0 endpoint to
    the left raises the height by 1 when the edge is unmatched and
    lowers it by 2 when matched; signs flip with direction.  Every
    closed loop through bounded faces then sums to 0 and one cube is 3
    steps.  The outer face is not a height cell (its boundary profile
    varies along the boundary), so increments are only taken across
    edges separating two bounded faces; anchor is a face index from the
    host's faces() and defaults to the first bounded face, with value 0.
    meta['face_ids'] maps each value back to its face index.
    """
    dg = hex_config.graph
    if dg.is_superposition:
        raise ValueError("lozenge heights need a honeycomb host, "
                         "not a Temperleyan superposition")
    deg = np.bincount(dg.pairs.ravel(), minlength=dg.n_vertices)
    if deg.max() > 3:
        raise ValueError("host is not a honeycomb: a vertex has degree > 3")
    faces, outer, face_of = dg.faces()
    bounded = [f for f in range(len(faces)) if f != outer]
    for f in bounded:
        if len(faces[f]) != 6:
            raise ValueError("host is not a honeycomb: a bounded face "
                             "is not a hexagon")
    cell_of = {f: i for i, f in enumerate(bounded)}
    matched = np.zeros(dg.n_pairs, bool)
    matched[hex_config.matched_edge_ids()] = True
    cls = dg.bipartite_class
    steps = []  # (cell_right, cell_left, step for right -> left)
    for k in range(dg.n_pairs):
        a, b = int(dg.pairs[k, 0]), int(dg.pairs[k, 1])
        if cls[a] == 1:
            a, b = b, a
        left = face_of[(a, b)]
        right = face_of[(b, a)]
        if left == right or left == outer or right == outer:
            continue
        steps.append((cell_of[right], cell_of[left], -2 if matched[k] else 1))
    nc = len(bounded)
    adj = [[] for _ in range(nc)]
    for r, l, s in steps:
        adj[r].append((l, s))
        adj[l].append((r, -s))
    if anchor is None:
        cell0 = 0
    else:
        if int(anchor) == outer:
            raise ValueError("the outer face is not a height cell")
        cell0 = cell_of[int(anchor)]
    h = np.zeros(nc, np.int64)
    done = np.zeros(nc, bool)
    done[cell0] = True
    q = deque([cell0])
    while q:
        f = q.popleft()
        for g, s in adj[f]:
            if not done[g]:
                done[g] = True
                h[g] = h[f] + s
                q.append(g)
    if not done.all():
        raise ValueError("bounded faces are not edge-connected; "
                         "heights would be determined only patchwise")
    for r, l, s in steps:
        if h[l] - h[r] != s:
            raise ValueError("height increments do not close up; "
                             "the matching is not a perfect dimer cover")
    centers = np.array([dg.pos[faces[f]].mean(axis=0) for f in bounded])
    return HeightField(h, centers.reshape(-1, 2), cell0, "step",
                       meta={"steps_per_cube": HEIGHT_STEPS_PER_CUBE,
                             "face_ids": np.array(bounded, np.int64),
                             "outer_face": outer})


# ----------------------------------------------------------------------
# exact counting oracles


def _mask_components(nbr, alive):
    comps = []
    rest = alive
    while rest:
        v = (rest & -rest).bit_length() - 1
        comp = 1 << v
        frontier = comp
        while frontier:
            grown = 0
            m = frontier
            while m:
                u = (m & -m).bit_length() - 1
                m &= m - 1
                grown |= nbr[u] & rest & ~comp
            comp |= grown
            frontier = grown
        comps.append(comp)
        rest &= ~comp
    return comps


def _match_count(nbr, wgt, alive, memo):
    if alive == 0:
        return 1
    cached = memo.get(alive)
    if cached is not None:
        return cached
    # branch on a lowest-degree live vertex
    best_v, best_d, best_nb = -1, 1 << 30, 0
    m = alive
    while m:
        v = (m & -m).bit_length() - 1
        m &= m - 1
        nb = nbr[v] & alive
        d = bin(nb).count("1")
        if d < best_d:
            best_v, best_d, best_nb = v, d, nb
            if d <= 1:
                break
    if best_d == 0:
        memo[alive] = 0
        return 0
    total = 0
    m = best_nb
    while m:
        u = (m & -m).bit_length() - 1
        m &= m - 1
        rest = alive & ~(1 << best_v) & ~(1 << u)
        sub = 1
        for comp in _mask_components(nbr, rest):
            if bin(comp).count("1") % 2:
                sub = 0
                break
            sub *= _match_count(nbr, wgt, comp, memo)
            if sub == 0:
                break
        total += wgt[(best_v, u)] * sub
    memo[alive] = total
    return total


def _matching_host(graph):
    """(n, pairs, weights) from a DimerGraph or bipartite PlanarGraph."""
    if isinstance(graph, DimerGraph):
        return graph.n_vertices, graph.pairs, graph.pair_weight
    if isinstance(graph, PlanarGraph):
        dg = DimerGraph.from_planar(graph)
        return dg.n_vertices, dg.pairs, dg.pair_weight
    raise TypeError("expected a DimerGraph or a bipartite PlanarGraph")


def count_matchings_brute(graph, max_vertices=64):
    """Exact weighted perfect-matching count by recursive search
    (lowest-degree pivot, component splitting, memoization on the live
    vertex set).  Oracle-grade but exponential; refuses hosts past
    max_vertices.  Integer weights give an exact integer."""
    n, pairs, weights = _matching_host(graph)
    if n > max_vertices:
        raise ValueError(f"{n} vertices exceeds the brute-force cap {max_vertices}")
    if n == 0:
        return 1
    if n % 2:
        return 0
    nbr = [0] * n
    wgt = {}
    integral = np.allclose(weights, np.round(weights)) if len(weights) else True
    for k in range(len(pairs)):
        u, v = int(pairs[k, 0]), int(pairs[k, 1])
        w = int(round(weights[k])) if integral else float(weights[k])
        nbr[u] |= 1 << v
        nbr[v] |= 1 << u
        wgt[(u, v)] = wgt[(v, u)] = w
    memo = {}
    total = 1
    for comp in _mask_components(nbr, (1 << n) - 1):
        if bin(comp).count("1") % 2:
            return 0
        total *= _match_count(nbr, wgt, comp, memo)
        if total == 0:
            break
    return total


def enumerate_matchings(graph, max_vertices=36):
    """All perfect matchings of a small host, as frozensets of (u, v)
    pairs; exhaustive recursion without memoization."""
    n, pairs, _ = _matching_host(graph)
    if n > max_vertices:
        raise ValueError(f"{n} vertices exceeds the enumeration cap {max_vertices}")
    if n == 0:
        return [frozenset()]
    if n % 2:
        return []
    nbr = [0] * n
    for k in range(len(pairs)):
        u, v = int(pairs[k, 0]), int(pairs[k, 1])
        nbr[u] |= 1 << v
        nbr[v] |= 1 << u
    out = []
    chosen = []

    def recurse(alive):
        if alive == 0:
            out.append(frozenset(chosen))
            return
        best_v, best_d, best_nb = -1, 1 << 30, 0
        m = alive
        while m:
            v = (m & -m).bit_length() - 1
            m &= m - 1
            nb = nbr[v] & alive
            d = bin(nb).count("1")
            if d < best_d:
                best_v, best_d, best_nb = v, d, nb
                if d <= 1:
                    break
        if best_d == 0:
            return
        m = best_nb
        while m:
            u = (m & -m).bit_length() - 1
            m &= m - 1
            chosen.append((min(best_v, u), max(best_v, u)))
            recurse(alive & ~(1 << best_v) & ~(1 << u))
            chosen.pop()

    recurse((1 << n) - 1)
    return out


def count_trees_kirchhoff(graph, max_vertices=400):
    """Weighted count of spanning trees rooted at the absorbing root,
    by the directed matrix-tree determinant (out-weight Laplacian with
    the root row and column removed).

    Accepts anything with the wired kernel attributes (wired graphs,
    rooted pieces) or a PlanarPiece.  Returns an exact integer when all
    weights are integers and the determinant is small enough for
    float64 to resolve it exactly.
    """
    if isinstance(graph, PlanarPiece):
        graph = graph.rooted()
    n = graph.n_interior
    if n > max_vertices:
        raise ValueError(f"{n} vertices exceeds the dense determinant cap "
                         f"{max_vertices}")
    if n == 0:
        return 1
    src = np.asarray(graph.e_src, np.int64)
    dst = np.asarray(graph.e_dst, np.int64)
    w = np.asarray(graph.e_weight, float)
    lap = np.zeros((n, n))
    np.add.at(lap, (src, src), w)
    keep = dst != graph.root
    np.subtract.at(lap, (src[keep], dst[keep]), w[keep])
    det = float(np.linalg.det(lap))
    if np.allclose(w, np.round(w)) and abs(det) < 2.0**52:
        return int(round(det))
    return det


def enumerate_trees(graph, max_choices=2_000_000):
    """All spanning trees of a small rooted or wired graph, as
    parent-edge tuples with their weights.  Exhaustive over per-vertex
    out-edge choices; meant for exact sampling-law oracles."""
    if isinstance(graph, PlanarPiece):
        graph = graph.rooted()
    n = graph.n_interior
    root = graph.root
    indptr = graph.indptr
    slices = [range(int(indptr[v]), int(indptr[v + 1])) for v in range(n)]
    total = 1
    for s in slices:
        total *= len(s)
        if total > max_choices:
            raise ValueError("choice space too large to enumerate")
    dst = [int(d) for d in graph.e_dst]
    wts = [float(x) for x in graph.e_weight]
    unit = all(x == 1.0 for x in wts)
    trees, weights = [], []
    conf = [0] * n  # stamp: confirmed to reach the root in this combo
    seen = [0] * n  # stamp: visited on the current upward walk
    combo_id = 0
    walk_id = 0
    for combo in itertools.product(*slices):
        combo_id += 1
        ok = True
        for v0 in range(n):
            if conf[v0] == combo_id:
                continue
            walk_id += 1
            v = v0
            chain = []
            while v != root and conf[v] != combo_id:
                if seen[v] == walk_id:
                    ok = False
                    break
                seen[v] = walk_id
                chain.append(v)
                v = dst[combo[v]]
            if not ok:
                break
            for u in chain:
                conf[u] = combo_id
        if ok:
            trees.append(tuple(combo))
            if unit:
                weights.append(1.0)
            else:
                w = 1.0
                for v in range(n):
                    w *= wts[combo[v]]
                weights.append(w)
    return trees, weights

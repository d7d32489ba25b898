"""Lattice generators, boundary wiring, serialization round trips."""
import json

import numpy as np
import pytest

from winding_gff import (
    Domain,
    PlanarGraph,
    WiredDomainGraph,
    clip_and_wire,
    gen_hex_lattice,
    gen_random_environment,
    gen_square_lattice,
)


def test_square_lattice_counts():
    g = gen_square_lattice(1.0, (0.0, 0.0, 4.0, 4.0))
    assert g.n_vertices == 25
    assert g.n_edges == 80          # directed arcs: 2 * 40
    g.validate()
    # spacing delta scales the embedding, not the combinatorics
    h = gen_square_lattice(0.5, (0.0, 0.0, 2.0, 2.0))
    assert h.n_vertices == 25 and h.n_edges == 80


def test_square_lattice_weights():
    g = gen_square_lattice(1.0, (0.0, 0.0, 2.0, 2.0), weight=2.5)
    assert np.all(g.edge_weight == 2.5)


def test_random_environment_kernel():
    g = gen_random_environment(1.0, (0.0, 0.0, 3.0, 3.0), eps=0.25, seed=5)
    out_total = np.zeros(g.n_vertices)
    np.add.at(out_total, g.edge_src, g.edge_weight)
    # interior vertices have all four arcs: outgoing weight exactly 1
    deg = np.bincount(g.edge_src)
    assert np.allclose(out_total[deg == 4], 1.0)
    # vertical pair weight p/2 in [eps/2, (1-eps)/2]
    vert = g.edge_weight[np.abs(g.pos[g.edge_dst, 1] - g.pos[g.edge_src, 1]) > 0.5]
    assert vert.min() >= 0.125 - 1e-12 and vert.max() <= 0.375 + 1e-12
    # same seed reproduces, different seed does not
    g2 = gen_random_environment(1.0, (0.0, 0.0, 3.0, 3.0), eps=0.25, seed=5)
    assert np.array_equal(g.edge_weight, g2.edge_weight)
    g3 = gen_random_environment(1.0, (0.0, 0.0, 3.0, 3.0), eps=0.25, seed=6)
    assert not np.array_equal(g.edge_weight, g3.edge_weight)


def test_hex_lattice_single_cell():
    g = gen_hex_lattice(1.0, Domain.disc((0.0, 0.0), 1.2))
    assert g.n_vertices == 6
    assert g.n_edges == 12          # one hexagon, both directions
    assert sorted(np.bincount(g.bipartite_class)) == [3, 3]
    # all edges unit length
    lens = np.hypot(*(g.pos[g.edge_dst] - g.pos[g.edge_src]).T)
    assert np.allclose(lens, 1.0)


def test_clip_and_wire_disc():
    full = gen_square_lattice(1.0, (-3.0, -3.0, 3.0, 3.0))
    w = clip_and_wire(full, Domain.disc((0.0, 0.0), 2.5))
    assert w.n_interior == 21
    assert w.n_edges == 84
    w.validate()
    # every interior vertex keeps its 4 outgoing arcs
    assert np.all(np.diff(w.indptr) == 4)
    # wired arcs carry a boundary coordinate and a crossing point on the circle
    to_root = w.e_dst == w.root
    assert np.all(np.isfinite(w.e_aux_s[to_root]))
    r = np.hypot(*w.e_aux_pos[to_root].T)
    assert np.allclose(r, 2.5, atol=1e-9)
    # interior arcs have no crossing data
    assert not np.any(np.isfinite(w.e_aux_s[~to_root]))


def test_clip_and_wire_rect():
    full = gen_square_lattice(1.0, (-2.0, -2.0, 3.0, 3.0))
    w = clip_and_wire(full, Domain.rect(-0.5, -0.5, 2.5, 2.5))
    assert w.n_interior == 9
    assert np.all(np.diff(w.indptr) == 4)
    # crossings sit on the rectangle boundary
    to_root = w.e_dst == w.root
    assert to_root.sum() == 12
    d = w.domain.distance_to_boundary(w.e_aux_pos[to_root])
    assert np.allclose(d, 0.0, atol=1e-9)


def test_clip_requires_interior_vertex():
    full = gen_square_lattice(1.0, (0.0, 0.0, 2.0, 2.0))
    with pytest.raises(ValueError):
        clip_and_wire(full, Domain.disc((0.5, 0.5), 0.2))


def test_nearest_and_exact_vertex_lookup():
    full = gen_square_lattice(1.0, (-3.0, -3.0, 3.0, 3.0))
    w = clip_and_wire(full, Domain.disc((0.0, 0.0), 2.5))
    v = w.vertex_at((1.0, 1.0))
    assert np.allclose(w.pos[v], (1.0, 1.0))
    assert w.nearest_vertex((0.9, 1.2)) == v
    with pytest.raises(KeyError):
        w.vertex_at((0.4, 0.4))


def test_out_slice_matches_indptr():
    full = gen_square_lattice(1.0, (-3.0, -3.0, 3.0, 3.0))
    w = clip_and_wire(full, Domain.disc((0.0, 0.0), 2.5))
    for v in (0, 5, w.n_interior - 1):
        sl = w.out_slice(v)
        assert (sl.start, sl.stop) == (w.indptr[v], w.indptr[v + 1])
        assert np.all(w.e_src[sl] == v)


def test_planar_graph_json_round_trip():
    g = gen_random_environment(0.5, (0.0, 0.0, 2.0, 2.0), eps=0.25, seed=9)
    doc = g.to_json()
    g2 = PlanarGraph.from_json(doc)
    assert np.array_equal(g.pos, g2.pos)
    assert np.array_equal(g.edge_src, g2.edge_src)
    assert np.array_equal(g.edge_dst, g2.edge_dst)
    assert np.array_equal(g.edge_weight, g2.edge_weight)
    # canonical form: dumping again is byte-identical
    assert g2.to_json() == doc
    json.loads(doc)  # valid JSON


def test_wired_graph_json_round_trip():
    full = gen_square_lattice(0.5, (-2.0, -2.0, 2.0, 2.0))
    w = clip_and_wire(full, Domain.disc((0.0, 0.0), 1.3))
    doc = w.to_json()
    w2 = WiredDomainGraph.from_json(doc)
    assert np.array_equal(w.pos, w2.pos)
    assert np.array_equal(w.e_src, w2.e_src)
    assert np.array_equal(w.e_dst, w2.e_dst)
    assert np.array_equal(w.e_weight, w2.e_weight)
    assert np.array_equal(w.orig_ids, w2.orig_ids)
    ok = np.isfinite(w.e_aux_s)
    assert np.array_equal(ok, np.isfinite(w2.e_aux_s))
    assert np.allclose(w.e_aux_s[ok], w2.e_aux_s[ok])
    assert np.allclose(w.e_aux_pos[ok], w2.e_aux_pos[ok])
    assert w.domain.kind == w2.domain.kind
    assert w2.to_json() == doc


def test_hex_clip_and_wire():
    g = gen_hex_lattice(0.5, Domain.rect(-2.0, -2.0, 2.0, 2.0))
    w = clip_and_wire(g, Domain.disc((0.1, 0.0), 1.4))
    w.validate()
    assert w.n_interior > 10
    # hex vertices have out-degree 3
    assert np.all(np.diff(w.indptr) == 3)

"""Tree/matching bijection, height functions, exact counting oracles."""
import numpy as np
import pytest
from scipy import stats

from winding_gff import (
    Domain,
    clip_and_wire,
    gen_hex_lattice,
    gen_square_lattice,
    rng_for_sample,
    wilson_ust,
)
from winding_gff.dimer import (
    DimerConfiguration,
    DimerGraph,
    PlanarPiece,
    count_matchings_brute,
    count_trees_kirchhoff,
    dimer_height,
    dimer_to_tree,
    enumerate_matchings,
    enumerate_trees,
    grid_piece,
    lozenge_height,
    piece_from_wired,
    piece_tree_winding,
    sample_dimer,
    temperley_superpose,
    tree_to_dimer,
)
from winding_gff.graphs import PlanarGraph

# spanning-tree counts of small grid graphs (standard sequence)
GRID_TREES = {(2, 2): 4, (2, 3): 15, (3, 3): 192, (3, 4): 2415, (4, 4): 100352}


def config_from_pairs(host, pairs):
    partner = np.full(host.n_vertices, -1, np.int64)
    for u, v in pairs:
        partner[u] = v
        partner[v] = u
    return DimerConfiguration(host, partner)


def flower_host():
    g = gen_hex_lattice(1.0, Domain.disc((0.0, 0.0), 2.7))
    return DimerGraph.from_planar(g)


@pytest.mark.parametrize("shape", sorted(GRID_TREES))
def test_grid_counts_three_ways(shape):
    piece = grid_piece(*shape)
    n_trees = GRID_TREES[shape]
    assert count_trees_kirchhoff(piece) == n_trees
    # Temperley: matchings of the superposition = trees of the piece
    dg = temperley_superpose(piece)
    assert count_matchings_brute(dg) == n_trees


def test_superposition_shape_4x4():
    piece = grid_piece(4, 4)
    dg = temperley_superpose(piece)
    # 16 primal - 1 marked + 24 edge midpoints + 9 bounded faces
    assert dg.n_vertices == 48
    assert dg.n_pairs == 82
    assert dg.is_superposition
    # midpoints form one bipartite class
    assert sorted(np.bincount(dg.bipartite_class)) == [24, 24]


def test_round_trips_through_bijection():
    piece = grid_piece(3, 3)
    dg = temperley_superpose(piece)
    rooted = piece.rooted()
    for i in range(300):
        tree = wilson_ust(rooted, rng_for_sample(83, i))
        cfg = tree_to_dimer(tree, dg)
        cfg.validate()
        back = dimer_to_tree(cfg, dg)
        assert tuple(back.parent_edge) == tuple(tree.parent_edge)
    for i in range(300):
        cfg = sample_dimer(dg, rng_for_sample(84, i))
        tree = dimer_to_tree(cfg, dg)
        again = tree_to_dimer(tree, dg)
        assert again.pair_set() == cfg.pair_set()


def weighted_square_piece():
    # 4-cycle with edge weights 1..4; tree law weights 24/w_dropped,
    # total 24 + 12 + 8 + 6 = 50
    pos = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    pairs = [(0, 1), (1, 2), (2, 3), (3, 0)]
    return PlanarPiece(pos, pairs, weights=[1.0, 2.0, 3.0, 4.0], x=0)


def test_weighted_pushforward_exact():
    piece = weighted_square_piece()
    assert count_trees_kirchhoff(piece) == 50
    trees, tw = enumerate_trees(piece)
    assert sorted(tw) == [6.0, 8.0, 12.0, 24.0]
    dg = temperley_superpose(piece)
    # matching weights reproduce the tree weights exactly (dual edges
    # carry weight 1)
    matchings = enumerate_matchings(dg)
    assert len(matchings) == 4
    mw = sorted(config_from_pairs(dg, m).weight() for m in matchings)
    assert mw == sorted(tw)


def test_sample_dimer_matches_weighted_law():
    piece = weighted_square_piece()
    dg = temperley_superpose(piece)
    matchings = enumerate_matchings(dg)
    weights = np.array([config_from_pairs(dg, m).weight() for m in matchings])
    index = {m: i for i, m in enumerate(matchings)}
    n = 6000
    counts = np.zeros(len(matchings))
    for i in range(n):
        cfg = sample_dimer(dg, rng_for_sample(99, i))
        counts[index[cfg.pair_set()]] += 1
    res = stats.chisquare(counts, f_exp=n * weights / weights.sum())
    assert res.pvalue > 1e-3


def test_height_equals_branch_winding_bitwise():
    piece = grid_piece(4, 3)
    dg = temperley_superpose(piece)
    rooted = piece.rooted()
    for i in range(50):
        tree = wilson_ust(rooted, rng_for_sample(17, i))
        cfg = tree_to_dimer(tree, dg)
        hf = dimer_height(cfg, dg)
        wind = piece_tree_winding(tree)
        # identical floats, not just close: same code path contract
        assert np.array_equal(hf.meta["winding_rad"][rooted.orig_of], wind)
        assert hf.meta["winding_rad"][piece.x] == 0.0
        assert np.array_equal(hf.values, hf.meta["winding_rad"] / (2 * np.pi))
        # square lattice turns are quarter turns
        q = hf.values * 4
        assert np.allclose(q, np.round(q), atol=1e-9)
        assert hf.values[hf.anchor] == 0.0


def test_flower_count_and_rotation():
    host = flower_host()
    assert host.n_vertices == 24
    assert host.n_pairs == 30
    faces, outer, _ = host.faces()
    assert len(faces) - 1 == 7            # bounded hexagons
    matchings = enumerate_matchings(host)
    assert len(matchings) == 20
    assert count_matchings_brute(host) == 20
    # an elementary rotation (symmetric difference = one hexagon) moves
    # exactly one cell's height by 3 steps = one cube
    found = 0
    for i in range(len(matchings)):
        for j in range(i + 1, len(matchings)):
            sym = matchings[i] ^ matchings[j]
            if len(sym) != 6:
                continue
            ha = lozenge_height(config_from_pairs(host, matchings[i]))
            hb = lozenge_height(config_from_pairs(host, matchings[j]))
            diff = ha.values - hb.values
            # one cell differs from the common level by exactly 3
            base = np.bincount(diff - diff.min()).argmax() + diff.min()
            moved = np.flatnonzero(diff != base)
            assert len(moved) == 1
            assert abs(int(diff[moved[0]] - base)) == 3
            found += 1
    assert found > 0


def horizontal_domino_patch():
    # honeycomb patch that is a union of complete horizontal dominoes,
    # so the all-horizontal matching is perfect
    g = gen_hex_lattice(1.0, Domain.disc((0.0, 0.0), 3.4))
    host0 = DimerGraph.from_planar(g)
    partner_h = np.full(g.n_vertices, -1)
    for k in range(host0.n_pairs):
        u, v = map(int, host0.pairs[k])
        if abs((host0.pos[v] - host0.pos[u])[1]) < 1e-9:
            partner_h[u] = v
            partner_h[v] = u
    keep = np.flatnonzero(partner_h >= 0)
    new_of = np.full(g.n_vertices, -1)
    new_of[keep] = np.arange(len(keep))
    src, dst = [], []
    for k in range(host0.n_pairs):
        u, v = map(int, host0.pairs[k])
        if new_of[u] >= 0 and new_of[v] >= 0:
            src += [new_of[u], new_of[v]]
            dst += [new_of[v], new_of[u]]
    sub = PlanarGraph(g.pos[keep], src, dst, np.ones(len(src)),
                      bipartite_class=g.bipartite_class[keep])
    return DimerGraph.from_planar(sub)


def test_frozen_patch_heights_are_affine():
    host = horizontal_domino_patch()
    pairs_h = []
    for k in range(host.n_pairs):
        u, v = map(int, host.pairs[k])
        if abs((host.pos[v] - host.pos[u])[1]) < 1e-9:
            pairs_h.append((u, v))
    cfg = config_from_pairs(host, pairs_h)
    cfg.validate()
    hf = lozenge_height(cfg)
    # brick-wall cover: heights are an exact affine function of position
    A = np.column_stack([np.ones(len(hf.values)), hf.pos[:, 0], hf.pos[:, 1]])
    coef, *_ = np.linalg.lstsq(A, hf.values.astype(float), rcond=None)
    assert np.max(np.abs(A @ coef - hf.values)) < 1e-9
    assert coef[1] == pytest.approx(0.0, abs=1e-9)
    assert coef[2] == pytest.approx(-2.0 / np.sqrt(3.0))
    assert set(hf.values) == {0, -2, -4}


def test_lozenge_rejects_superposition():
    dg = temperley_superpose(grid_piece(3, 3))
    cfg = sample_dimer(dg, rng_for_sample(0, 0))
    with pytest.raises(ValueError):
        lozenge_height(cfg)


def test_partial_matching_rejected():
    host = flower_host()
    m = enumerate_matchings(host)[0]
    partner = np.full(host.n_vertices, -1, np.int64)
    pairs = sorted(m)[:-1]                 # drop one dimer
    for u, v in pairs:
        partner[u] = v
        partner[v] = u
    with pytest.raises(ValueError):
        DimerConfiguration(host, partner)


def test_superpose_requires_boundary_removal():
    piece = grid_piece(3, 3)
    # vertex 4 is the centre of the 3x3 grid: not on the outer cycle
    with pytest.raises(ValueError):
        temperley_superpose(piece, boundary_removal=4)


def test_piece_from_wired_requires_symmetric_weights():
    from winding_gff import gen_random_environment

    env = gen_random_environment(1.0, (-3.0, -3.0, 3.0, 3.0), eps=0.25, seed=1)
    w = clip_and_wire(env, Domain.disc((0.0, 0.0), 2.5))
    with pytest.raises(ValueError):
        piece_from_wired(w)


def test_piece_from_wired_keeps_indices():
    full = gen_square_lattice(1.0, (-4.0, -4.0, 4.0, 4.0))
    w = clip_and_wire(full, Domain.disc((0.0, 0.0), 3.2))
    piece = piece_from_wired(w)
    assert piece.n_vertices == w.n_interior
    assert np.array_equal(piece.pos, w.pos[: w.n_interior])
    # marked vertex sits at the rightmost interior abscissa
    assert piece.pos[piece.x, 0] == w.pos[: w.n_interior, 0].max()
    dg = temperley_superpose(piece)
    cfg = sample_dimer(dg, rng_for_sample(55, 0))
    tree = dimer_to_tree(cfg, dg)
    # trees are rooted at the marked vertex: one parent per other vertex
    assert len(tree.parent_edge) == piece.n_vertices - 1


def test_kirchhoff_weight_homogeneity():
    pos = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    pairs = [(0, 1), (1, 2), (2, 3), (3, 0)]
    base = PlanarPiece(pos, pairs, weights=[1.0, 2.0, 3.0, 4.0], x=0)
    scaled = PlanarPiece(pos, pairs, weights=[3.0, 6.0, 9.0, 12.0], x=0)
    # n-1 = 3 tree edges: count scales by 3^3
    assert count_trees_kirchhoff(scaled) == 27 * count_trees_kirchhoff(base)

"""Winding fields: full field vs direct branch windings, truncated field
saturation and determinism, and the m-correction estimator contract."""

import numpy as np
import pytest

from winding_gff import walk
from winding_gff.domains import Domain
from winding_gff.graphs import clip_and_wire, gen_square_lattice
from winding_gff.polylines import intrinsic_winding
from winding_gff.winding import (
    WindingField,
    branch_winding,
    branch_with_boundary,
    estimate_m_correction,
    sample_truncated_windings,
    truncated_field,
    winding_field,
)


def wired_disc(radius=2.5, pad=4):
    base = gen_square_lattice(1.0, (-pad, -pad, pad, pad))
    return clip_and_wire(base, Domain.disc((0.0, 0.0), radius))


@pytest.fixture(scope="module")
def disc_tree():
    g = wired_disc()
    return walk.wilson_ust(g, np.random.default_rng(7))


def test_field_shape_validation():
    g = wired_disc()
    with pytest.raises(ValueError):
        WindingField(g, np.zeros(g.n_interior + 1), "full")


def test_full_field_matches_direct_branch_winding(disc_tree):
    # One DFS pass over the tree vs an independent per-branch line
    # integral: identical geometry, so the agreement is exact.
    g = disc_tree.graph
    f = winding_field(disc_tree)
    for v in range(g.n_interior):
        verts, edges = disc_tree.branch(v)
        direct = branch_winding(g.domain, g, verts, edges)
        assert abs(direct - f.values[v]) < 1e-12


def test_full_field_matches_direct_on_rect():
    g = clip_and_wire(
        gen_square_lattice(1.0, (-3, -3, 6, 6)),
        Domain.rect(-0.5, -0.5, 3.5, 3.5),
    )
    tree = walk.wilson_ust(g, np.random.default_rng(5))
    f = winding_field(tree)
    for v in range(g.n_interior):
        direct = branch_winding(g.domain, g, *tree.branch(v))
        assert abs(direct - f.values[v]) < 1e-12


def test_branch_with_boundary_converges_to_field(disc_tree):
    # The explicit polyline discretizes the boundary arc, so its intrinsic
    # winding approaches the field value linearly as arc_step shrinks.
    g = disc_tree.graph
    f = winding_field(disc_tree)
    errs = []
    for step in (0.5, 0.1, 0.02):
        e = max(
            abs(intrinsic_winding(branch_with_boundary(disc_tree, v, arc_step=step))
                - f.values[v])
            for v in range(g.n_interior)
        )
        errs.append(e)
    assert errs[0] < 0.2
    assert errs[1] < 0.4 * errs[0]
    assert errs[2] < 0.01


def test_branch_with_boundary_endpoints(disc_tree):
    g = disc_tree.graph
    pts = branch_with_boundary(disc_tree, 3)
    # starts at the marked boundary point, ends at the vertex
    assert np.allclose(pts[0], g.domain.boundary_point(0.0))
    assert np.allclose(pts[-1], g.pos[3])


def test_truncated_field_subset_and_meta(disc_tree):
    g = disc_tree.graph
    tf, sat = truncated_field(
        disc_tree, 0.4, cap_samples=48, rng=np.random.default_rng(3),
        vertices=[0, 5],
    )
    assert tf.kind == "truncated"
    assert tf.meta["t"] == 0.4
    assert sat.shape == (g.n_interior,) and sat.dtype == bool
    mask = np.zeros(g.n_interior, bool)
    mask[[0, 5]] = True
    assert np.all(tf.values[~mask] == 0.0)
    assert np.all(tf.values[mask] != 0.0)


def test_saturated_truncation_recovers_full_field(disc_tree):
    # A cut level beyond every branch's capacity range uses the whole
    # branch; the topological winding plus the argument corrections then
    # reproduces the intrinsic field exactly.
    f = winding_field(disc_tree)
    tf, sat = truncated_field(
        disc_tree, 1e6, cap_samples=32, rng=np.random.default_rng(3)
    )
    assert sat.all()
    assert np.max(np.abs(tf.values - f.values)) < 1e-9


def test_sample_truncated_windings_contract():
    g = wired_disc()
    t_values = [0.2, 0.8, 3.0, 50.0]
    va, sa = sample_truncated_windings(g, (0.3, -0.2), t_values, 3, 11,
                                       cap_samples=48)
    assert va.shape == (3, 4)
    assert sa.shape == (4,)
    # larger cut level -> saturation count never drops
    assert np.all(np.diff(sa) >= 0)
    # same master seed -> identical stream
    vb, sb = sample_truncated_windings(g, (0.3, -0.2), t_values, 3, 11,
                                       cap_samples=48)
    assert np.array_equal(va, vb) and np.array_equal(sa, sb)
    # sample_offset indexes into the same stream
    v2, _ = sample_truncated_windings(g, (0.3, -0.2), t_values, 1, 11,
                                      cap_samples=48, sample_offset=2)
    assert np.array_equal(v2[0], va[2])


def test_sample_truncated_saturated_columns_agree():
    # both levels past the capacity range cut nothing, so the columns match
    g = wired_disc()
    va, sa = sample_truncated_windings(g, (0.3, -0.2), [1e5, 1e6], 3, 11,
                                       cap_samples=32)
    assert sa[0] == sa[1] == 3
    assert np.array_equal(va[:, 0], va[:, 1])


def test_estimate_m_validation():
    with pytest.raises(ValueError):
        estimate_m_correction(2, 0, box_radius=12.0, cut_radius=0.5)
    with pytest.raises(ValueError):
        estimate_m_correction(2, 0, box_radius=12.0, cut_radius=6.0)
    with pytest.raises(ValueError):
        estimate_m_correction(2, 0, kind="triangular")
    with pytest.raises(ValueError):
        estimate_m_correction(2, 0, kind="square-env")


def test_estimate_m_smoke():
    out = estimate_m_correction(4, 3, box_radius=12.0, cut_radius=3.0,
                                cap_samples=32, profile_points=6)
    assert set(out) >= {"estimate", "se", "n_samples"}
    assert out["n_samples"] == 4
    assert np.isfinite(out["estimate"]) and np.isfinite(out["se"])


def test_estimate_m_deterministic():
    kw = dict(box_radius=12.0, cut_radius=3.0, cap_samples=32,
              profile_points=6)
    a = estimate_m_correction(3, 9, **kw)
    b = estimate_m_correction(3, 9, **kw)
    assert a["estimate"] == b["estimate"] and a["se"] == b["se"]

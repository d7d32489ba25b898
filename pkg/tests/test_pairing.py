"""Field-test-function pairing: Voronoi cell quadrature against exact
areas and an independent polar-grid reference integral."""

import numpy as np
import pytest

from winding_gff.domains import Domain
from winding_gff.graphs import clip_and_wire, gen_square_lattice
from winding_gff.pairing import (
    VoronoiPairing,
    make_test_function,
    poly_bump,
    radial_bump,
    reference_integral,
)

DISC = Domain.disc((0.0, 0.0), 2.5)


def wired(delta=1.0, domain=DISC):
    base = gen_square_lattice(delta, (-4, -4, 4, 4))
    return clip_and_wire(base, domain)


def const_one(p):
    return np.ones(len(np.atleast_2d(p)))


def test_rect_cells_are_exact_unit_squares():
    # integer sites in a half-integer box: every Voronoi cell is a unit
    # square that survives clipping untouched
    dom = Domain.rect(-0.5, -0.5, 3.5, 3.5)
    g = clip_and_wire(gen_square_lattice(1.0, (-3, -3, 6, 6)), dom)
    vp = VoronoiPairing(g)
    ci = vp.cell_integrals(const_one)
    assert np.allclose(ci, 1.0, atol=1e-9)
    assert abs(vp.total_area() - dom.area()) < 1e-9


def test_disc_total_area_close():
    vp = VoronoiPairing(wired())
    assert abs(vp.total_area() - DISC.area()) < 1e-3 * DISC.area()


def test_constant_integrals_are_cell_areas():
    vp = VoronoiPairing(wired())
    ci = vp.cell_integrals(const_one)
    assert np.all(ci > 0)
    assert abs(ci.sum() - vp.total_area()) < 1e-9


def test_pair_is_dot_with_cell_integrals():
    g = wired()
    vp = VoronoiPairing(g)
    f = radial_bump((0.5, 0.0), 0.8)
    vals = np.sin(np.arange(g.n_interior, dtype=float))
    assert vp.pair(vals, f) == pytest.approx(np.dot(vals, vp.cell_integrals(f)),
                                             abs=1e-12)


def test_pairing_matches_reference_integral_and_refines():
    f = radial_bump((0.5, 0.0), 0.8)
    ref = reference_integral(f, (0.5, 0.0), 0.8)
    errs = []
    for delta in (1.0, 0.5):
        vp = VoronoiPairing(wired(delta))
        errs.append(abs(vp.cell_integrals(f).sum() - ref))
    assert errs[0] < 5e-3
    assert errs[1] < errs[0]


def test_radial_bump_support():
    f = radial_bump((0.5, 0.0), 0.8)
    assert f((0.5, 0.0))[0] == 1.0
    assert f((2.0, 0.0))[0] == 0.0
    assert np.allclose(f.support_center, [0.5, 0.0])
    assert f.support_radius == 0.8
    assert f.params["kind"] == "radial-bump"
    # smooth positive interior
    xs = np.stack([np.linspace(-0.29, 1.29, 33), np.zeros(33)], axis=1)
    assert np.all(f(xs) > 0)


def test_poly_bump_moments():
    # odd power in x integrates to zero over a centered support
    f = poly_bump((0.0, 0.0), 1.0, px=1, py=0)
    assert abs(reference_integral(f, (0.0, 0.0), 1.0)) < 1e-12
    base = radial_bump((0.0, 0.0), 1.0)
    pts = np.array([[0.3, -0.2], [0.1, 0.4]])
    assert np.allclose(f(pts), pts[:, 0] * base(pts))


def test_make_test_function_registry():
    f = make_test_function("radial-bump", center=(0.1, 0.2), radius=0.5)
    assert f.params == {"kind": "radial-bump", "center": [0.1, 0.2],
                        "radius": 0.5}
    g = make_test_function("poly-bump", center=(0.0, 0.0), radius=1.0,
                           px=0, py=2)
    assert g.params["py"] == 2
    with pytest.raises(ValueError):
        make_test_function("bogus")


def test_reference_integral_polynomial_oracles():
    assert reference_integral(const_one, (0.0, 0.0), 1.0) == pytest.approx(np.pi)

    def fx2(p):
        return np.atleast_2d(p)[:, 0] ** 2

    # int x^2 over the unit disc = pi/4
    assert reference_integral(fx2, (0.0, 0.0), 1.0) == pytest.approx(np.pi / 4)
    # shifted disc: int (x-c)^2 picks up c^2 * area cross terms
    val = reference_integral(fx2, (2.0, 0.0), 1.0)
    assert val == pytest.approx(np.pi / 4 + 4.0 * np.pi)

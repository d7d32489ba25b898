"""Domain geometry: containment, boundary crossings, arc bookkeeping."""
import numpy as np
import pytest

from winding_gff import Domain


def test_constructors_validate():
    with pytest.raises(ValueError):
        Domain.disc((0, 0), -1.0)
    with pytest.raises(ValueError):
        Domain.rect(1.0, 0.0, 0.0, 2.0)
    # clockwise polygon rejected
    with pytest.raises(ValueError):
        Domain.polygon([(0, 0), (0, 1), (1, 1), (1, 0)])
    # marked point must sit on the boundary
    with pytest.raises(ValueError):
        Domain.disc((0, 0), 1.0, x=(0.5, 0.0))
    with pytest.raises(ValueError):
        Domain.rect(0, 0, 1, 1, x=(0.5, 0.5))


def test_contains_strictness():
    d = Domain.disc((0.0, 0.0), 1.0)
    assert d.contains(np.array([0.3, 0.4]))
    assert not d.contains(np.array([1.0, 0.0]))          # on circle
    assert d.contains(np.array([1.0, 0.0]), strict=False, tol=1e-12)

    r = Domain.rect(0.0, 0.0, 2.0, 1.0)
    assert r.contains(np.array([1.0, 0.5]))
    assert not r.contains(np.array([0.0, 0.5]))          # on edge
    assert not r.contains(np.array([0.0, 0.0]))          # corner
    assert r.contains(np.array([0.0, 0.5]), strict=False)

    p = Domain.polygon([(0, 0), (2, 0), (2, 1), (0, 1)])
    assert p.contains(np.array([1.0, 0.5]))
    assert not p.contains(np.array([1.0, 0.0]))
    assert p.contains(np.array([1.0, 0.0]), strict=False)


def test_area_and_perimeter():
    assert Domain.disc((1, 2), 3.0).area() == pytest.approx(9 * np.pi)
    assert Domain.rect(0, 0, 2, 1).area() == pytest.approx(2.0)
    tri = Domain.polygon([(0, 0), (1, 0), (0, 1)])
    assert tri.area() == pytest.approx(0.5)
    # disc boundary parameter is angle, others arclength
    assert Domain.disc((0, 0), 5.0).boundary_length() == pytest.approx(2 * np.pi)
    assert Domain.rect(0, 0, 2, 1).boundary_length() == pytest.approx(6.0)


def test_first_exit_oracles():
    d = Domain.disc((0.0, 0.0), 1.0)
    t = d.first_exit(np.array([0.0, 0.0]), np.array([2.0, 0.0]))
    assert t == pytest.approx(0.5)
    assert np.isnan(d.first_exit(np.array([0.0, 0.0]), np.array([0.5, 0.0])))

    r = Domain.rect(-0.5, -0.5, 1.5, 1.5)
    # oblique: (0,0)->(2,1) leaves through x=1.5 at t=0.75
    assert r.first_exit(np.array([0.0, 0.0]), np.array([2.0, 1.0])) == pytest.approx(0.75)
    assert r.first_exit(np.array([0.0, 0.0]), np.array([-1.0, 0.0])) == pytest.approx(0.5)

    p = Domain.polygon([(-0.5, -0.5), (1.5, -0.5), (1.5, 1.5), (-0.5, 1.5)])
    assert p.first_exit(np.array([0.0, 0.0]), np.array([2.0, 1.0])) == pytest.approx(0.75)


@pytest.mark.parametrize("dom", [
    Domain.disc((0.2, -0.1), 1.3),
    Domain.rect(-1.0, -0.5, 2.0, 1.5),
    Domain.polygon([(0, 0), (2, 0), (2.5, 1.2), (1, 2), (-0.5, 1)]),
])
def test_first_exit_consistency_fuzz(dom):
    rng = np.random.default_rng(7)
    x0, y0, x1, y1 = dom.bbox()
    n = 0
    while n < 200:
        p = rng.uniform((x0, y0), (x1, y1))
        if not dom.contains(p):
            continue
        q = p + rng.normal(size=2) * 2.0 * max(x1 - x0, y1 - y0)
        if dom.contains(q):
            continue
        t = dom.first_exit(p, q)
        assert np.isfinite(t) and 0 < t <= 1
        c = p + t * (q - p)
        assert dom.distance_to_boundary(c[None])[0] == pytest.approx(0.0, abs=1e-9)
        # point just before the crossing is still inside
        assert dom.contains(p + 0.999 * t * (q - p))
        n += 1


@pytest.mark.parametrize("dom", [
    Domain.disc((0.0, 0.0), 2.0),
    Domain.rect(0.0, 0.0, 3.0, 1.0),
    Domain.polygon([(0, 0), (2, 0), (2.5, 1.2), (1, 2), (-0.5, 1)]),
])
def test_boundary_param_round_trip(dom):
    L = dom.boundary_length()
    for s in np.linspace(0.0, L, 17, endpoint=False):
        pt = dom.boundary_point(s)
        assert dom.boundary_coord(pt) == pytest.approx(s % L, abs=1e-9)
        tan = dom.boundary_tangent(s)
        assert np.hypot(*tan) == pytest.approx(1.0)


def test_disc_tangent_is_anticlockwise():
    d = Domain.disc((0.0, 0.0), 1.0)
    for s in (0.0, 1.0, 3.5):
        pt = d.boundary_point(s)
        tan = d.boundary_tangent(s)
        assert pt[0] * tan[1] - pt[1] * tan[0] > 0


def test_conformal_radius_disc():
    d = Domain.disc((0.0, 0.0), 2.0)
    assert d.conformal_radius((0.0, 0.0)) == pytest.approx(2.0)
    # R(z) = R (1 - rho^2) at relative radius rho
    assert d.conformal_radius((1.0, 0.0)) == pytest.approx(2.0 * (1 - 0.25))
    with pytest.raises(ValueError):
        d.conformal_radius((2.5, 0.0))
    assert Domain.rect(0, 0, 1, 1).conformal_radius((0.5, 0.5)) is None


def test_arc_intrinsic_winding_disc_and_rect():
    d = Domain.disc((0.0, 0.0), 1.0)
    for s in (0.5, np.pi, 5.0):
        assert d.arc_intrinsic_winding(s) == pytest.approx(s)
    # default marked point of rect(0,0,2,1) is (2, 0.5); first corner (2,1)
    # is at arclength 0.5, then corners every side
    r = Domain.rect(0.0, 0.0, 2.0, 1.0)
    assert r.arc_intrinsic_winding(0.25) == pytest.approx(0.0)
    assert r.arc_intrinsic_winding(1.0) == pytest.approx(np.pi / 2)
    assert r.arc_intrinsic_winding(3.0) == pytest.approx(np.pi)
    assert r.arc_intrinsic_winding(5.9) == pytest.approx(2 * np.pi, abs=1e-9)


def test_arc_winding_around_center():
    d = Domain.disc((0.0, 0.0), 1.0)
    for s in (np.pi / 2, np.pi, 4.7):
        # arc subtending angle s winds by exactly s around the center
        assert d.arc_winding_around(s, (0.0, 0.0)) == pytest.approx(s, abs=1e-12)
    # off-center point: nearly-full loop winds by ~2pi
    w = d.arc_winding_around(2 * np.pi - 1e-6, (0.3, 0.2))
    assert w == pytest.approx(2 * np.pi, abs=1e-3)
    with pytest.raises(ValueError):
        d.arc_winding_around(1.0, (1.5, 0.0))


def test_arc_points_resolution():
    d = Domain.disc((0.0, 0.0), 2.0)
    pts = d.arc_points(np.pi, max_step=0.1)
    steps = np.hypot(*np.diff(pts, axis=0).T)
    assert steps.max() <= 0.1 + 1e-12
    assert np.allclose(np.hypot(*pts.T), 2.0)
    r = Domain.rect(0.0, 0.0, 2.0, 1.0)
    pts = r.arc_points(2.0, max_step=0.25)
    assert np.hypot(*np.diff(pts, axis=0).T).max() <= 0.25 + 1e-12

"""Disc automorphisms, boundary harmonic extension, capacity estimators."""
import numpy as np
import pytest

from winding_gff import (
    Domain,
    MobiusMap,
    arg_branch_1_minus_disc,
    check_change_of_coords,
    conformal_radius_mc,
    mobius_derivative_fd_residual,
    winding_boundary_function,
)
from winding_gff.conformal import refine_toward, truncate_at_capacity
from winding_gff.polylines import fuzz_disc_path


def test_mobius_map_basic():
    m = MobiusMap(0.3 + 0.4j)
    assert m.apply(1.0) == pytest.approx(1.0)
    assert abs(m.apply(0.3 + 0.4j)) == pytest.approx(0.0, abs=1e-15)
    rng = np.random.default_rng(2)
    for _ in range(200):
        t = (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)) * 0.7
        w = m.apply(t)
        assert abs(w) < 1.0
        assert m.inverse(w) == pytest.approx(t, abs=1e-12)
    # boundary goes to boundary
    th = rng.uniform(0, 2 * np.pi, size=50)
    assert np.allclose(np.abs([m.apply(np.exp(1j * a)) for a in th]), 1.0)


def test_mobius_derivative_matches_finite_differences():
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(200):
        z0 = (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)) * 0.6
        t = (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)) * 0.6
        worst = max(worst, mobius_derivative_fd_residual(MobiusMap(z0), t))
    assert worst < 1e-8


def test_arg_branch_matches_principal():
    # Re(1-z) > 0 on the disc, so the continuous branch is the principal Arg
    rng = np.random.default_rng(6)
    for _ in range(100):
        z = (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)) * 0.7
        assert arg_branch_1_minus_disc(z) == pytest.approx(np.angle(1 - z))


def test_winding_boundary_function_closed_form():
    # harmonic extension of theta on (0, 2pi): u(z) = pi + 2 Arg(1 - z)
    for z in (0.0, 0.5j, -0.3 + 0.2j, 0.6, -0.7j):
        u = winding_boundary_function(z)
        assert u == pytest.approx(np.pi + 2 * np.angle(1 - z), abs=1e-5)


def test_change_of_coords_identity_fuzz():
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(100):
        pts = fuzz_disc_path(rng)
        worst = max(worst, check_change_of_coords(pts))
    assert worst < 1e-6


def test_refine_toward_adaptive_subdivision():
    # pieces shrink as the polyline nears the target, endpoints kept
    pts = np.array([[1.0, 0.0], [0.05, 0.0], [0.05, 1.0]])
    target = np.zeros(2)
    out = refine_toward(pts, target, rho=0.1)
    assert np.allclose(out[0], pts[0]) and np.allclose(out[-1], pts[-1])
    seg_len = np.hypot(*np.diff(out, axis=0).T)
    dist = np.hypot(*(out[:-1] - target).T)
    assert np.all(seg_len <= np.maximum(1e-9, 0.1 * dist) + 1e-12)


def test_truncate_at_capacity_interpolates():
    # synthetic straight branch with a linear capacity profile
    n = 11
    pts = np.stack([np.linspace(1.0, 0.0, n), np.zeros(n)], axis=1)
    counts = np.array([0, 5, 10])
    t_values = np.array([0.0, 1.0, 2.0])
    cut = truncate_at_capacity(pts, counts, t_values, 1.0)
    assert len(cut) == 6
    assert truncate_at_capacity(pts, counts, t_values, 5.0) is None
    half = truncate_at_capacity(pts, counts, t_values, 0.5)
    assert 2 <= len(half) <= 5


def test_conformal_radius_mc_plain_disc():
    # estimator returns log R; exact log R(z) = log(1 - |z|^2)
    dom = Domain.disc((0.0, 0.0), 1.0)
    rng = np.random.default_rng(10)
    est = conformal_radius_mc(dom, np.array([0.3, 0.0]), 4000, rng)
    assert est.se > 0
    assert abs(est.value - np.log(1.0 - 0.09)) < 4 * est.se + 0.01


def test_conformal_radius_mc_radial_slit():
    # disc minus the radial slit [r0, 1]: R(0) = 4 r0 / (1 + r0)^2
    dom = Domain.disc((0.0, 0.0), 1.0)
    rng = np.random.default_rng(12)
    r0 = 0.5
    slit = np.stack([np.linspace(1.0, r0, 40), np.zeros(40)], axis=1)
    est = conformal_radius_mc(dom, np.array([0.0, 0.0]), 6000, rng, slit=slit)
    exact = np.log(4 * r0 / (1 + r0) ** 2)
    assert abs(est.value - exact) < 4 * est.se + 0.02

"""Mobius maps, argument branches, capacity estimation and the
change-of-coordinates winding identities on the unit disc."""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import _kernels
from .polylines import winding_increments


class MobiusMap:
    """Automorphism of the unit disc fixing 1 and sending z0 to 0."""

    def __init__(self, z0):
        z0 = complex(z0)
        if abs(z0) >= 1:
            raise ValueError("z0 must lie strictly inside the unit disc")
        self.z0 = z0
        # phase factor making psi(1) = 1
        self.phase = (1 - z0.conjugate()) / (1 - z0)

    def apply(self, w):
        w = np.asarray(w, dtype=complex)
        return (w - self.z0) / (1 - w * self.z0.conjugate()) * self.phase

    def deriv(self, t):
        """psi'(t) = (1-|z0|^2) / (1 - t*conj(z0))^2 * (1-conj(z0))/(1-z0)."""
        t = np.asarray(t, dtype=complex)
        return (1 - abs(self.z0) ** 2) / (1 - t * self.z0.conjugate()) ** 2 * self.phase

    def inverse(self, w):
        w = np.asarray(w, dtype=complex) / self.phase
        return (w + self.z0) / (1 + w * self.z0.conjugate())


def mobius_derivative(map_, t):
    return map_.deriv(t)


def mobius_derivative_fd_residual(map_, t, h=1e-6):
    """|psi'(t) - central difference of psi| at one point.

    The map is analytic, so a real-direction central difference
    approximates the complex derivative to O(h^2)."""
    t = complex(t)
    fd = (map_.apply(t + h) - map_.apply(t - h)) / (2 * h)
    return abs(complex(fd) - complex(map_.deriv(t)))


def arg_branch_1_minus_disc(z):
    """Argument of 1-z for z in the unit disc, valued in (-pi/2, pi/2)."""
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1):
        raise ValueError("z must lie strictly inside the unit disc")
    w = 1 - z
    out = np.arctan2(w.imag, w.real)
    return out if out.ndim else float(out)


# ----------------------------------------------------------------------
# Monte Carlo conformal radius / capacity


@dataclass
class CapacityEstimate:
    value: float
    se: float
    n_samples: int
    n_capped: int = 0


def _as_slit_array(slit):
    if slit is None:
        return np.zeros((1, 2)), 0
    s = np.ascontiguousarray(np.asarray(slit, float))
    if s.ndim != 2 or s.shape[1] != 2:
        raise ValueError("slit must be an (k, 2) polyline")
    return s, s.shape[0]


def conformal_radius_mc(domain, z, n_samples, rng, slit=None, method="wos",
                        eps=None, fine_delta=None, max_steps=None):
    """Estimate log R(z, domain minus slit) as E log|B_tau - z| over the
    exit point B_tau of Brownian motion started at z.

    method 'wos' runs walk-on-spheres with absorption shell eps (default
    1e-4 of the domain scale); method 'lattice' runs a fine random walk of
    step fine_delta (disc domains only), absorbing where a step crosses
    the boundary or the slit."""
    z = np.asarray(z, float).reshape(2)
    slit_arr, nslit = _as_slit_array(slit)
    if method == "wos":
        if eps is None:
            eps = 1e-4 * _domain_scale(domain)
        if max_steps is None:
            max_steps = 100_000
        if domain.kind == "disc":
            s1, s2, capped = _kernels.wos_disc(
                z[0], z[1], domain.center[0], domain.center[1], domain.radius,
                slit_arr, nslit, int(n_samples), float(eps), int(max_steps), rng,
            )
        else:
            loop = np.ascontiguousarray(domain._loop)
            s1, s2, capped = _kernels.wos_segments(
                z[0], z[1], loop, slit_arr, nslit,
                int(n_samples), float(eps), int(max_steps), rng,
            )
    elif method == "lattice":
        if domain.kind != "disc":
            raise ValueError("lattice exit estimator only supports discs")
        if fine_delta is None:
            raise ValueError("lattice method needs fine_delta")
        if max_steps is None:
            # ~20x the mean exit time so capping is negligible
            max_steps = int(20 * (_domain_scale(domain) / fine_delta) ** 2)
        s1, s2, capped = _kernels.lattice_exit_disc(
            z[0], z[1], float(fine_delta),
            domain.center[0], domain.center[1], domain.radius,
            slit_arr, nslit, int(n_samples), int(max_steps), rng,
        )
        if capped == n_samples:
            raise RuntimeError("no lattice walker was absorbed")
        n_samples = n_samples - capped  # unabsorbed walkers carry no exit
    else:
        raise ValueError(f"unknown method: {method}")
    mean = s1 / n_samples
    var = max(s2 / n_samples - mean * mean, 0.0)
    se = float(np.sqrt(var / n_samples))
    return CapacityEstimate(float(mean), se, int(n_samples), int(capped))


def _domain_scale(domain):
    if domain.kind == "disc":
        return domain.radius
    lo = domain._loop.min(axis=0)
    hi = domain._loop.max(axis=0)
    return float(max(hi - lo))


def capacity_along_branch(domain, branch_pts, z, n_samples, rng,
                          grid_step=None, counts=None, method="wos", eps=None,
                          fine_delta=None, last_seg=None):
    """Capacity profile t(s) = log R(z, D) - log R(z, D minus branch[:s])
    along a branch polyline, at a coarse grid of prefix segment counts.

    The grid is `counts` if given, else every grid_step segments (default
    ceil(L/50)) up to last_seg (default all L segments; pass L-1 when the
    branch ends at z itself, where the capacity diverges).  The estimates
    are made monotone by a running maximum.  Returns a dict with
    seg_counts (starting at 0), t (same length, t[0] = 0), se, log_r0."""
    pts = np.asarray(branch_pts, float)
    nseg = len(pts) - 1
    if nseg < 1:
        raise ValueError("branch must contain at least one segment")
    if counts is None:
        if last_seg is None:
            last_seg = nseg
        if grid_step is None:
            grid_step = max(1, int(np.ceil(nseg / 50)))
        counts = list(range(grid_step, last_seg + 1, grid_step))
        if not counts or counts[-1] != last_seg:
            counts.append(last_seg)
    else:
        counts = [int(c) for c in counts]
        if any(c < 1 or c > nseg for c in counts):
            raise ValueError("grid counts out of range")
    base = conformal_radius_mc(domain, z, n_samples, rng, slit=None,
                               method=method, eps=eps, fine_delta=fine_delta)
    t = [0.0]
    se = [base.se]
    for c in counts:
        est = conformal_radius_mc(domain, z, n_samples, rng,
                                  slit=pts[: c + 1], method=method,
                                  eps=eps, fine_delta=fine_delta)
        t.append(base.value - est.value)
        se.append(float(np.hypot(base.se, est.se)))
    t = np.maximum.accumulate(np.asarray(t))
    return {
        "seg_counts": np.asarray([0] + counts, dtype=np.int64),
        "t": t,
        "se": np.asarray(se),
        "log_r0": base.value,
    }


def truncate_at_capacity(branch_pts, seg_counts, t_values, t_star):
    """Cut a branch polyline at capacity t_star using a sampled profile.

    Linear interpolation in segment count between grid values; returns the
    truncated polyline, or None when t_star exceeds the profile's reach
    (the caller should then use the full branch)."""
    pts = np.asarray(branch_pts, float)
    t = np.asarray(t_values, float)
    counts = np.asarray(seg_counts, float)
    if t_star <= 0:
        return pts[:1].copy()
    if t_star > t[-1]:
        return None
    j = int(np.searchsorted(t, t_star))
    # t[j-1] < t_star <= t[j]
    if t[j] == t[j - 1]:
        frac_count = counts[j]
    else:
        lam = (t_star - t[j - 1]) / (t[j] - t[j - 1])
        frac_count = counts[j - 1] + lam * (counts[j] - counts[j - 1])
    k = int(np.floor(frac_count))
    frac = frac_count - k
    if k >= len(pts) - 1:
        return pts.copy()
    out = pts[: k + 1]
    if frac > 0:
        extra = pts[k] + frac * (pts[k + 1] - pts[k])
        out = np.vstack([out, extra])
    return out.copy()


# ----------------------------------------------------------------------
# Winding boundary function on the disc


def winding_boundary_function(z, tol=1e-6):
    """Harmonic extension at z of the boundary data u(e^{i theta}) = theta,
    theta in (0, 2pi), on the unit disc with marked point 1.

    Evaluated by adaptive quadrature of the Poisson integral."""
    z = complex(z)
    if abs(z) >= 1:
        raise ValueError("z must lie strictly inside the unit disc")

    def integrand(theta):
        w = np.exp(1j * theta)
        pk = (1 - abs(z) ** 2) / abs(w - z) ** 2
        return theta * pk / (2 * np.pi)

    val, _err = quad(integrand, 0.0, 2 * np.pi, epsabs=tol / 4, epsrel=tol / 4,
                     limit=400)
    return float(val)


# ----------------------------------------------------------------------
# Change-of-coordinates identity


def refine_toward(points, target, rho=0.05, floor=1e-9):
    """Subdivide a polyline so each piece is shorter than
    max(floor, rho * distance to target).  Used before mapping a polyline
    through a conformal map so that chordwise winding of the image equals
    the winding of the true image curve."""
    pts = np.asarray(points, float)
    target = np.asarray(target, float).reshape(2)
    out = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        seg = b - a
        seg_len = float(np.hypot(*seg))
        if seg_len == 0.0:
            continue
        t = 0.0
        while True:
            cur = a + t * seg
            step = max(floor, rho * float(np.hypot(*(cur - target)))) / seg_len
            t = t + step
            if t >= 1.0:
                break
            out.append(a + t * seg)
        out.append(b)
    return np.asarray(out)


def _winding_around_zero(w):
    """Winding around 0 of a complex polyline; points exactly at 0
    contribute no increment (signed zeros would otherwise let atan2
    return +/- pi)."""
    x = w.real
    y = w.imag
    cross = x[:-1] * y[1:] - y[:-1] * x[1:]
    dot = x[:-1] * x[1:] + y[:-1] * y[1:]
    r2 = x * x + y * y
    live = (r2[:-1] > 0.0) & (r2[1:] > 0.0)
    return float(np.where(live, np.arctan2(cross, dot), 0.0).sum())


def _refined_offsets(points, target, rho, floor):
    """Offsets (points - target) of the refinement of `points` toward
    `target`, computed in centered coordinates so tiny offsets keep full
    relative precision (a tip exactly at target gives exact scaling)."""
    pts = np.asarray(points, float)
    t0 = np.asarray(target, float).reshape(2)
    ua_all = (pts[:, 0] - t0[0]) + 1j * (pts[:, 1] - t0[1])
    out = [ua_all[0]]
    for i in range(len(pts) - 1):
        ua = ua_all[i]
        ub = ua_all[i + 1]
        seg = ub - ua
        seg_len = abs(seg)
        if seg_len == 0.0:
            continue
        if ub == 0.0:
            # segment runs straight into the target: subdivide
            # multiplicatively (s*ua is exact at every scale, whereas
            # ua + t*(ub-ua) would lose all relative precision near 0)
            s = 1.0 - rho
            while s * seg_len > floor:
                out.append(s * ua)
                s *= 1.0 - rho
            out.append(0.0 + 0.0j)
            continue
        t = 0.0
        while True:
            cur = ua + t * seg
            t = t + max(floor, rho * abs(cur)) / seg_len
            if t >= 1.0:
                break
            out.append(ua + t * seg)
        out.append(ub)
    return np.asarray(out)


def check_change_of_coords(points, mobius=None, rho=0.02):
    """Residual of the Mobius change-of-coordinates winding identity

        W(psi(gamma), 0) = W(gamma, z0) - Arg(1 - z0)

    for a simple polyline gamma from the marked boundary point 1 to the
    tip z0 (exactly), psi the disc automorphism fixing 1 with psi(z0)=0.
    Both sides are computed independently: the left by mapping a refined
    polyline through psi, the right from the source polyline."""
    pts = np.asarray(points, float)
    if mobius is None:
        mobius = MobiusMap(complex(pts[-1, 0], pts[-1, 1]))
    z0 = np.array([mobius.z0.real, mobius.z0.imag])
    if np.hypot(*(pts[0] - np.array([1.0, 0.0]))) > 1e-12:
        raise ValueError("polyline must start at the marked point 1")
    if np.hypot(*(pts[-1] - z0)) > 1e-12:
        raise ValueError("polyline tip must be exactly z0")
    # image values from tip-centered offsets u = w - z0:
    #   psi(w) = u / ((1-|z0|^2) - u conj(z0)) * const_phase,
    # keeping full relative precision near the tip; the constant phase
    # does not move winding increments
    u = _refined_offsets(pts, z0, rho, 1e-12)
    zc = mobius.z0
    img = u / ((1.0 - abs(zc) ** 2) - u * zc.conjugate())
    lhs = _winding_around_zero(img)
    rhs = float(winding_increments(pts, z0).sum()) - arg_branch_1_minus_disc(zc)
    return abs(lhs - rhs)

"""Reference Green functions, Gaussian targets and moment estimators.

The winding field's covariance target on the unit disc is
2 * log|(1 - x conj(y)) / (x - y)|: the constant 2 is pinned by the
capacity-variance slope (Var h_t grows by 2 per unit capacity), and the
shape is validated against the discrete Green function of the actual
wired graph by the calibration procedure below.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import eigsh, splu


# ----------------------------------------------------------------------
# discrete Green function


def laplacian_matrix(graph, unit_weights=False):
    """Wired-graph Laplacian L = diag(total out-weight) - W restricted to
    interior vertices (the root row/column is dropped: Dirichlet)."""
    n = graph.n_interior
    w = np.ones(graph.n_edges) if unit_weights else graph.e_weight
    interior = graph.e_dst < n
    off = sparse.coo_matrix(
        (-w[interior], (graph.e_src[interior], graph.e_dst[interior])),
        shape=(n, n),
    )
    diag = np.zeros(n)
    np.add.at(diag, graph.e_src, w)
    return (sparse.diags(diag) + off).tocsc()


class GreenKernel:
    """Discrete Green function G = L^{-1} of a wired graph, solve-on-demand
    with a cached sparse factorization."""

    def __init__(self, graph, unit_weights=False):
        self.graph = graph
        self.L = laplacian_matrix(graph, unit_weights=unit_weights)
        self._lu = splu(self.L)

    def column(self, y):
        """G[., y]: u = L^{-1} e_y, so u[x] = G(x, y) = expected visits to
        y from x divided by the total out-weight at y."""
        n = self.graph.n_interior
        e = np.zeros(n)
        e[int(y)] = 1.0
        return self._lu.solve(e)

    def value(self, x, y):
        return float(self.column(y)[int(x)])

    def apply_inverse(self, rhs):
        """Solve L u = rhs."""
        return self._lu.solve(np.asarray(rhs, float))

    def quadratic_form(self, fvec, gvec):
        """f^T G g for per-vertex vectors (pairing cell integrals)."""
        return float(np.asarray(fvec, float) @ self.apply_inverse(gvec))


def discrete_green(graph, x, y):
    """G(x, y) of the wired graph: expected visits to y from x before
    absorption, divided by the total out-weight at y."""
    return GreenKernel(graph).value(x, y)


# ----------------------------------------------------------------------
# continuum target and calibration


def continuum_green_disc(x, y, center=(0.0, 0.0), radius=1.0):
    """log |(1 - x conj(y)) / (x - y)| on a disc, mapped to unit-disc
    coordinates.  Symmetric, positive, zero as either point reaches the
    boundary."""
    cx = complex(*np.asarray(center, float))
    zx = (complex(*np.asarray(x, float)) - cx) / radius
    zy = (complex(*np.asarray(y, float)) - cx) / radius
    if zx == zy:
        raise ValueError("Green function diverges on the diagonal")
    return float(np.log(abs(1 - zx * zy.conjugate()) / abs(zx - zy)))


@dataclass
class GreenCalibration:
    constant: float
    residual: float
    n_pairs: int
    ratios: np.ndarray = field(repr=False)

    def require(self, max_residual=0.05):
        if self.residual > max_residual:
            raise ValueError(
                f"discrete/continuum Green ratio varies by "
                f"{self.residual:.3f} > {max_residual}: lattice Green does "
                f"not match the continuum form"
            )
        return self


def calibrate_green(graph, n_sources=4, n_targets=6, rmax=0.55,
                    min_sep=0.35, kernel=None):
    """Ratio of the wired graph's discrete Green function to the continuum
    disc form over a grid of well-separated interior pairs.

    Returns GreenCalibration(constant = mean ratio, residual = max relative
    deviation of the ratios from that mean).  For unit-weight Z^2 the
    constant approaches 1/(2 pi)."""
    dom = graph.domain
    if dom.kind != "disc":
        raise ValueError("calibration grid is defined for disc domains")
    if kernel is None:
        kernel = GreenKernel(graph)
    c, R = np.asarray(dom.center, float), dom.radius
    src_angles = np.linspace(0.0, 2 * np.pi, n_sources, endpoint=False)
    tgt_angles = np.linspace(0.0, 2 * np.pi, n_targets, endpoint=False) + 0.4
    ratios = []
    for a in src_angles:
        y_pt = c + 0.5 * rmax * R * np.array([np.cos(a), np.sin(a)])
        y = graph.nearest_vertex(y_pt)
        col = kernel.column(y)
        for b in tgt_angles:
            for rr in (0.6 * rmax, rmax):
                x_pt = c + rr * R * np.array([np.cos(b), np.sin(b)])
                x = graph.nearest_vertex(x_pt)
                if np.hypot(*(graph.pos[x] - graph.pos[y])) < min_sep * R:
                    continue
                g_cont = continuum_green_disc(graph.pos[x], graph.pos[y],
                                              center=c, radius=R)
                ratios.append(col[x] / g_cont)
    ratios = np.asarray(ratios)
    const = float(ratios.mean())
    residual = float(np.max(np.abs(ratios / const - 1.0)))
    return GreenCalibration(const, residual, len(ratios), ratios)


def gff_covariance_target(domain, x, y, calibration, max_residual=0.05):
    """Pointwise winding-covariance target 2 * continuum Green at (x, y).

    The multiplicative constant 2 is the capacity-variance slope; the
    calibration argument certifies (residual < max_residual) that the
    lattice's Green function has the continuum shape."""
    calibration.require(max_residual)
    if domain.kind != "disc":
        raise ValueError("continuum disc form requested for non-disc domain")
    return 2.0 * continuum_green_disc(x, y, center=domain.center,
                                      radius=domain.radius)


def _disc_quad_nodes(center, radius, n_r, n_th):
    u, wu = np.polynomial.legendre.leggauss(n_r)
    r = radius * np.sqrt((u + 1.0) / 2.0)
    wr = wu * (radius**2 / 4.0) * (2 * np.pi / n_th)
    th = np.linspace(0.0, 2 * np.pi, n_th, endpoint=False)
    c = np.asarray(center, float)
    pts = c + np.stack(
        [np.outer(r, np.cos(th)).ravel(), np.outer(r, np.sin(th)).ravel()],
        axis=1,
    )
    w = np.repeat(wr, n_th)
    return pts, w


def gff_covariance_pair_target(domain, f, g, calibration=None, n_r=32,
                               n_th=64, max_residual=0.05):
    """2 * double integral of G_cont(x,y) f(x) g(y) over the disc, for test
    functions with disjoint compact supports (so the kernel is smooth on
    the product of the supports)."""
    if calibration is not None:
        calibration.require(max_residual)
    if domain.kind != "disc":
        raise ValueError("continuum disc form requested for non-disc domain")
    for fn in (f, g):
        if not hasattr(fn, "support_center"):
            raise ValueError("test functions must expose their support disc")
    gap = np.hypot(*(f.support_center - g.support_center))
    if gap <= f.support_radius + g.support_radius:
        raise ValueError("test function supports must be disjoint")
    px, wx = _disc_quad_nodes(f.support_center, f.support_radius, n_r, n_th)
    py, wy = _disc_quad_nodes(g.support_center, g.support_radius, n_r, n_th)
    fx = np.asarray(f(px), float) * wx
    gy = np.asarray(g(py), float) * wy
    c = np.asarray(domain.center, float)
    zx = ((px[:, 0] - c[0]) + 1j * (px[:, 1] - c[1])) / domain.radius
    zy = ((py[:, 0] - c[0]) + 1j * (py[:, 1] - c[1])) / domain.radius
    kern = np.log(
        np.abs(1.0 - zx[:, None] * zy[None].conjugate())
        / np.abs(zx[:, None] - zy[None])
    )
    return 2.0 * float(fx @ kern @ gy)


# ----------------------------------------------------------------------
# Gaussian reference sampler


def sample_dgff(graph, rng, n_samples=1, unit_weights=False, max_dense=4000,
                _cache={}):
    """Centered Gaussian field(s) with covariance = discrete Green function,
    via dense Cholesky of the wired Laplacian (reference pipeline for
    validating the estimator stack; symmetric weights only)."""
    n = graph.n_interior
    if n > max_dense:
        raise ValueError(f"{n} vertices exceeds the dense-solver cap "
                         f"{max_dense}")
    key = (id(graph), unit_weights)
    chol = _cache.get(key)
    if chol is None:
        L = laplacian_matrix(graph, unit_weights=unit_weights).toarray()
        if not np.allclose(L, L.T, rtol=0, atol=1e-12 * np.abs(L).max()):
            raise ValueError("DGFF sampling needs symmetric edge weights")
        chol = np.linalg.cholesky(L)
        _cache.clear()
        _cache[key] = chol
    from scipy.linalg import solve_triangular

    xi = rng.standard_normal((n, int(n_samples)))
    x = solve_triangular(chol.T, xi, lower=False)
    return x[:, 0] if n_samples == 1 else x.T


# ----------------------------------------------------------------------
# moment estimators


def jackknife_blocks(values, stat, n_blocks=50):
    """Delete-block jackknife SE of stat(values) along axis 0."""
    values = np.asarray(values)
    n = len(values)
    n_blocks = min(n_blocks, n)
    idx = np.array_split(np.arange(n), n_blocks)
    full = stat(values)
    parts = np.array(
        [stat(np.delete(values, block, axis=0)) for block in idx]
    )
    return float(np.sqrt((n_blocks - 1) / n_blocks
                         * ((parts - parts.mean()) ** 2).sum()))


def centered_product_moment(samples, powers):
    """E prod_i (X_i - E X_i)^{p_i} from a sample matrix (N, k), with
    delete-block jackknife SE."""
    x = np.atleast_2d(np.asarray(samples, float))
    powers = np.atleast_1d(np.asarray(powers, int))
    if x.shape[1] != len(powers):
        raise ValueError("one power per column")
    if len(x) < 2:
        raise ValueError("need at least 2 samples")

    def stat(block):
        c = block - block.mean(axis=0)
        return float(np.prod(c ** powers[None, :], axis=1).mean())

    est = stat(x)
    se = jackknife_blocks(x, stat)
    return est, se


def covariance_of_pairings(samples):
    """Cov(X_1, X_2) of a 2-column pairing sample matrix with jackknife SE."""
    x = np.asarray(samples, float)
    if x.ndim != 2 or x.shape[1] != 2:
        raise ValueError("expected an (N, 2) pairing matrix")

    def stat(block):
        return float(np.cov(block.T, ddof=1)[0, 1])

    return stat(x), jackknife_blocks(x, stat)


def wick_fourth_moment_check(samples):
    """(E X^4, SE) and the Wick target 3 (E X^2)^2 for a 1-d sample."""
    x = np.asarray(samples, float).ravel()
    c = x - x.mean()

    def m4(block):
        b = block - block.mean()
        return float((b**4).mean())

    est4 = float((c**4).mean())
    se4 = jackknife_blocks(x, m4)

    def target(block):
        b = block - block.mean()
        return 3.0 * float((b**2).mean()) ** 2

    tgt = target(x)
    se_t = jackknife_blocks(x, target)
    return est4, se4, tgt, se_t


def anderson_darling_pvalue_ok(samples, level=0.01):
    """True when the Anderson-Darling normality statistic is below the
    critical value at the given significance level (scipy tabulates levels,
    not p-values)."""
    from scipy.stats import anderson

    res = anderson(np.asarray(samples, float).ravel(), dist="norm")
    levels = np.asarray(res.significance_level, float) / 100.0
    j = int(np.argmin(np.abs(levels - level)))
    if abs(levels[j] - level) > 1e-9:
        raise ValueError(f"level {level} not tabulated (have {levels})")
    return bool(res.statistic < res.critical_values[j]), float(res.statistic), \
        float(res.critical_values[j])


# ----------------------------------------------------------------------
# Sobolev norm


def sobolev_norm(values, graph, eta, n_modes=200, return_modes=False):
    """sum_j (field, e_j)^2 lambda_j^{-1-eta} over the lowest n_modes
    Dirichlet eigenpairs of the unit-weight wired Laplacian."""
    values = np.asarray(values, float)
    n = graph.n_interior
    if values.shape != (n,):
        raise ValueError("field must have one value per interior vertex")
    if eta <= 0:
        raise ValueError("eta must be positive")
    n_modes = int(min(n_modes, n - 1))
    L = laplacian_matrix(graph, unit_weights=True)
    lam, vec = eigsh(L.tocsc(), k=n_modes, sigma=0.0, which="LM")
    order = np.argsort(lam)
    lam, vec = lam[order], vec[:, order]
    coef = vec.T @ values
    out = float(np.sum(coef**2 * lam ** (-1.0 - eta)))
    if return_modes:
        return out, lam, vec
    return out


# ----------------------------------------------------------------------
# report entries


@dataclass
class ReportEntry:
    statistic: str
    estimate: float
    se: float
    target: float
    target_provenance: str
    tolerance: float
    verdict: str = ""

    def settle(self):
        """PASS when within tolerance; an out-of-tolerance result whose SE
        exceeds the tolerance is INCONCLUSIVE (underpowered), not FAIL."""
        dev = abs(self.estimate - self.target)
        if dev <= self.tolerance:
            self.verdict = "PASS"
        elif self.se > self.tolerance:
            self.verdict = "INCONCLUSIVE"
        else:
            self.verdict = "FAIL"
        return self

    def to_dict(self):
        return {
            "statistic": self.statistic,
            "estimate": self.estimate,
            "se": self.se,
            "target": self.target,
            "target_provenance": self.target_provenance,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
        }


def moment_report(entries):
    """Assemble settled entries into the report document."""
    out = []
    for e in entries:
        if not e.verdict:
            e.settle()
        out.append(e.to_dict())
    hard_fail = any(e["verdict"] == "FAIL" for e in out)
    return {"version": "winding-gff/report/1", "entries": out,
            "hard_fail": hard_fail}

"""Discrete winding fields of wired spanning trees.

The extended branch of an interior vertex v is the boundary arc from the
marked point x to the branch's exit point (anticlockwise in time order),
followed by the reversed tree branch down to v.  The full field is its
intrinsic winding; the truncated field is the topological winding of the
branch cut at a capacity level, plus deterministic argument corrections.
"""

import numpy as np

from . import _kernels
from .conformal import capacity_along_branch, truncate_at_capacity
from .polylines import intrinsic_winding, winding_increments
from .walk import branch_polyline, rng_for_sample, sample_branch


class WindingField:
    """Per-interior-vertex winding values for one sampled tree."""

    def __init__(self, graph, values, kind, meta=None):
        values = np.asarray(values, float)
        if values.shape != (graph.n_interior,):
            raise ValueError("field must have one value per interior vertex")
        self.graph = graph
        self.values = values
        self.kind = kind
        self.meta = dict(meta or {})


def _signed_turn(d0, d1):
    return np.arctan2(
        d0[0] * d1[1] - d0[1] * d1[0], d0[0] * d1[0] + d0[1] * d1[1]
    )


def _top_base_terms(domain, s_exit, aux_pos, first_pos):
    """Intrinsic winding of (boundary arc + junction turn) for each branch
    entering the domain at aux_pos with boundary coordinate s_exit and
    continuing to first_pos."""
    d = first_pos - aux_pos
    if domain.kind == "disc":
        th = domain._theta_x + s_exit
        tang = np.stack([-np.sin(th), np.cos(th)], axis=1)
        arc = s_exit.astype(float)
    else:
        tang = np.empty_like(d)
        arc = np.empty(len(s_exit))
        for i, s in enumerate(s_exit):
            tang[i] = domain.boundary_tangent(s)
            arc[i] = domain.arc_intrinsic_winding(s)
    turn = np.arctan2(
        tang[:, 0] * d[:, 1] - tang[:, 1] * d[:, 0],
        (tang * d).sum(axis=1),
    )
    return arc + turn


def winding_field(tree):
    """Full discrete winding field: h(v) = intrinsic winding of the
    extended branch of v, for every interior vertex, computed by one
    depth-first pass over the tree."""
    g = tree.graph
    dom = g.domain
    indptr, ch = tree.children()
    top = ch[indptr[g.n_interior]: indptr[g.n_interior + 1]]
    h = np.zeros(g.n_interior)
    dx = np.zeros(g.n_interior)
    dy = np.zeros(g.n_interior)
    e_top = tree.parent_edge[top]
    aux = g.e_aux_pos[e_top]
    d = g.pos[top] - aux
    h[top] = _top_base_terms(dom, g.e_aux_s[e_top], aux, g.pos[top])
    dx[top] = d[:, 0]
    dy[top] = d[:, 1]
    _kernels.propagate_winding(
        indptr, ch, top.astype(np.int64), h, dx, dy,
        np.ascontiguousarray(g.pos[:, 0]), np.ascontiguousarray(g.pos[:, 1]),
    )
    return WindingField(g, h, "full")


def branch_winding(domain, graph, verts, edges):
    """Intrinsic winding of one extended branch, computed directly from a
    sampled (vertices, edges) branch.  Matches winding_field at verts[0]."""
    e_last = edges[-1]
    s = float(graph.e_aux_s[e_last])
    pts = branch_polyline(graph, verts, edges)[::-1]  # aux -> ... -> v
    w = domain.arc_intrinsic_winding(s)
    w += _signed_turn(domain.boundary_tangent(s), pts[1] - pts[0])
    if len(pts) > 2:
        w += intrinsic_winding(pts)
    return float(w)


def _graph_step(graph):
    d = graph.meta.get("delta")
    if d is not None:
        return float(d)
    interior = graph.e_dst < graph.n_interior
    d = graph.pos[graph.e_src[interior]] - graph.pos[graph.e_dst[interior]]
    return float(np.median(np.hypot(d[:, 0], d[:, 1])))


def branch_with_boundary(tree, v, arc_step=None):
    """Extended branch of v as an explicit polyline: the boundary arc from
    the marked point to the exit (steps <= arc_step, default half a lattice
    step), then the reversed tree branch down to v."""
    g = tree.graph
    verts, edges = tree.branch(v)
    s = float(g.e_aux_s[edges[-1]])
    if arc_step is None:
        arc_step = 0.5 * _graph_step(g)
    arc = g.domain.arc_points(s, max_step=arc_step)
    beta = branch_polyline(g, verts, edges)[::-1]
    if np.hypot(*(arc[-1] - beta[0])) < 1e-12:
        return np.vstack([arc, beta[1:]])
    return np.vstack([arc, beta])


# ----------------------------------------------------------------------
# truncated field


def _h_t_corrections(domain, z):
    """-Arg(-gamma'(-1)) + arg_{x-D}(x-z); for non-smooth boundaries the
    rough convention drops the tangent term (global constant fixed to 0)."""
    z = np.asarray(z, float)
    single = z.ndim == 1
    u = np.atleast_1d(domain.arg_from_x(z[None] if single else z))
    if domain.kind == "disc":
        tx = domain.tangent_at_x()
        c = -np.arctan2(-tx[1], -tx[0])
    else:
        c = 0.0
    return float(c + u[0]) if single else c + u


def truncated_branch_winding(domain, graph, verts, edges, z, t_values,
                             cap_samples=192, rng=None, grid_step=None,
                             method="wos", eps=None, fine_delta=None):
    """h_t(z) for one sampled branch to z, at each capacity level in
    t_values.  Returns (values, saturated) where saturated flags levels
    beyond the measured capacity range (full branch used there: the last
    straight segment into z itself winds zero around z)."""
    z = np.asarray(z, float)
    if rng is None:
        rng = np.random.default_rng()
    e_last = edges[-1]
    s = float(graph.e_aux_s[e_last])
    beta = branch_polyline(graph, verts, edges)[::-1]  # aux -> v
    nseg = len(beta) - 1
    arc_w = domain.arc_winding_around(s, z)
    corr = float(_h_t_corrections(domain, z))
    t_values = np.atleast_1d(np.asarray(t_values, float))
    values = np.empty(len(t_values))
    saturated = np.zeros(len(t_values), bool)
    if nseg >= 2:
        prof = capacity_along_branch(
            domain, beta, z, cap_samples, rng, grid_step=grid_step,
            last_seg=nseg - 1, method=method, eps=eps, fine_delta=fine_delta,
        )
    else:
        prof = {"seg_counts": np.array([0]), "t": np.array([0.0])}
    for i, t_star in enumerate(t_values):
        cut = truncate_at_capacity(beta, prof["seg_counts"], prof["t"], t_star)
        if cut is None:
            cut = beta
            saturated[i] = True
        if len(cut) >= 2:
            w = float(winding_increments(cut, z).sum())
        else:
            w = 0.0
        values[i] = arc_w + w + corr
    return values, saturated


def sample_truncated_windings(graph, z, t_values, n_branches, master_seed,
                              cap_samples=192, sample_offset=0, **cap_kw):
    """Monte Carlo samples of h_t(z): one loop-erased branch from the
    vertex nearest z per sample, truncated at each level of t_values.

    Returns (values (n_branches, len(t_values)), saturated counts)."""
    z = np.asarray(z, float)
    v = graph.nearest_vertex(z)
    t_values = np.atleast_1d(np.asarray(t_values, float))
    out = np.empty((n_branches, len(t_values)))
    sat = np.zeros(len(t_values), np.int64)
    for i in range(n_branches):
        rng = rng_for_sample(master_seed, sample_offset + i)
        verts, edges, _hit = sample_branch(graph, v, rng)
        vals, s = truncated_branch_winding(
            graph.domain, graph, verts, edges, z, t_values,
            cap_samples=cap_samples, rng=rng, **cap_kw,
        )
        out[i] = vals
        sat += s
    return out, sat


def truncated_field(tree, t, cap_samples=192, rng=None, vertices=None,
                    **cap_kw):
    """Truncated winding field h_t over `vertices` (default: all interior)
    for one tree.  Expensive: one capacity profile per vertex.  Returns
    (WindingField, saturated mask); values are NaN off the requested
    vertex set."""
    g = tree.graph
    if rng is None:
        rng = np.random.default_rng()
    if vertices is None:
        vertices = np.arange(g.n_interior)
    else:
        vertices = np.asarray(vertices, np.int64)
    vals = np.full(g.n_interior, np.nan)
    sat = np.zeros(g.n_interior, bool)
    for v in vertices:
        verts, edges = tree.branch(int(v))
        z = g.pos[int(v)]
        hv, s = truncated_branch_winding(
            g.domain, g, verts, edges, z, [t],
            cap_samples=cap_samples, rng=rng, **cap_kw,
        )
        vals[v] = hv[0]
        sat[v] = s[0]
    return WindingField(g, np.where(np.isnan(vals), 0.0, vals), "truncated",
                        meta={"t": float(t)}), sat


# ----------------------------------------------------------------------
# m correction (expected microscopic winding of the lattice)


def estimate_m_correction(n_samples, master_seed, kind="square",
                          box_radius=48.0, eps_env=None, env_seed=0,
                          cap_samples=192, profile_points=12,
                          sample_offset=0, cut_radius=8.0):
    """Monte Carlo estimate of m = E[winding around v of the branch tail
    beyond a fixed capacity cutoff], with the full plane replaced by a
    wired disc of radius box_radius (lattice units) around v.

    The cut is where R(v, disc minus branch prefix) crosses cut_radius;
    the crossing is located on a coarse monotone capacity profile.  The
    cutoff choice shifts nothing in expectation (the winding accumulated
    between two capacity levels is symmetric around zero), so it is set
    well above the lattice scale: at cut_radius ~ 1 the cut degenerates
    into the final straight segment and every sample returns exactly 0.
    Returns dict with estimate, se, n_samples."""
    from .domains import Domain
    from .graphs import clip_and_wire, gen_random_environment, gen_square_lattice

    box = box_radius + 2.0
    if kind == "square":
        base = gen_square_lattice(1.0, (-box, -box, box, box))
    elif kind == "square-env":
        if eps_env is None:
            raise ValueError("square-env needs eps_env")
        base = gen_random_environment(1.0, (-box, -box, box, box), eps_env,
                                      seed=env_seed)
    else:
        raise ValueError(f"unknown lattice kind: {kind}")
    if not 1.0 <= cut_radius < box_radius / 2:
        raise ValueError("cut_radius must sit between the lattice scale "
                         "and the box radius")
    dom = Domain.disc((0.0, 0.0), float(box_radius))
    g = clip_and_wire(base, dom)
    v = g.nearest_vertex((0.0, 0.0))
    z = g.pos[v]

    vals = np.empty(n_samples)
    for i in range(n_samples):
        rng = rng_for_sample(master_seed, sample_offset + i)
        verts, edges, _hit = sample_branch(g, v, rng)
        beta = branch_polyline(g, verts, edges)[::-1]
        nseg = len(beta) - 1
        # coarse capacity profile; find where t crosses
        # log(box_radius / cut_radius), i.e. R(v, disc minus prefix) =
        # cut_radius (v sits at the disc center, so the empty-slit
        # radius is box_radius)
        t_cross = np.log(box_radius / cut_radius)
        if nseg >= 2:
            step = max(1, (nseg - 1) // profile_points)
            prof = capacity_along_branch(
                dom, beta, z, cap_samples, rng, grid_step=step,
                last_seg=nseg - 1,
            )
            cut = truncate_at_capacity(beta, prof["seg_counts"], prof["t"],
                                       t_cross)
        else:
            cut = None
        if cut is None:
            # crossing lies inside the final straight segment into v,
            # which winds zero around v
            vals[i] = 0.0
            continue
        # tail = beta from the cut point on; a duplicated grid point is
        # harmless (zero increment)
        k = len(cut) - 1
        tail = np.vstack([cut[-1][None], beta[min(k, nseg):]])
        vals[i] = float(winding_increments(tail, z).sum())
    est = float(vals.mean())
    se = float(vals.std(ddof=1) / np.sqrt(n_samples)) if n_samples > 1 else np.inf
    return {"estimate": est, "se": se, "n_samples": int(n_samples),
            "kind": kind, "box_radius": float(box_radius),
            "cut_radius": float(cut_radius)}

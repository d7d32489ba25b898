"""Command-line front end: generate graphs, run sampling campaigns, and
emit fields and reports for external plotting.

Every subcommand reads an optional flat config file (--config), applies
CLI flag overrides on top, resolves the master seed (flag > config >
WINDING_GFF_SEED > 0), and writes data files plus JSON sidecars under
--out.  Progress and logs go to stderr; data only to files or stdout.
Exit codes: 0 success, 1 FAIL verdicts, 2 usage errors.
"""

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import io
from .conformal import (
    MobiusMap,
    check_change_of_coords,
    mobius_derivative_fd_residual,
)
from .domains import Domain
from .fieldstats import (
    ReportEntry,
    anderson_darling_pvalue_ok,
    calibrate_green,
    jackknife_blocks,
    moment_report,
    wick_fourth_moment_check,
)
from .graphs import (
    clip_and_wire,
    gen_hex_lattice,
    gen_random_environment,
    gen_square_lattice,
)
from .pairing import VoronoiPairing, radial_bump
from .polylines import (
    fuzz_disc_path,
    fuzz_simple_polyline,
    intrinsic_to_topological_residual,
)
from .walk import crossing_probability, rng_for_sample, wilson_ust
from .winding import (
    estimate_m_correction,
    sample_truncated_windings,
    winding_field,
)
from . import dimer

log = logging.getLogger("winding-gff")

_REQUIRED = object()


class UsageError(Exception):
    pass


# -- effective settings ----------------------------------------------------

class Run:
    """Config file + CLI overrides + seed fallback, with typed getters.

    The config hash covers the effective flat dict, overrides and the
    resolved seed included, so sidecars identify the run exactly.  The
    output directory is excluded: where artifacts land does not change
    what they contain.
    """

    def __init__(self, cfg):
        self.cfg = dict(cfg)
        env = os.environ.get("WINDING_GFF_SEED")
        if "seed" not in self.cfg and env is not None:
            self.cfg["seed"] = env
        self.cfg.setdefault("seed", "0")
        self.seed = self.get("seed", int)
        hashed = {k: v for k, v in self.cfg.items() if k != "out_dir"}
        self.hash = io.config_hash(hashed)

    @classmethod
    def from_args(cls, args):
        cfg = io.load_config(args.config) if args.config else {}
        skip = {"config", "func", "command"}
        for dest, val in vars(args).items():
            if dest in skip or val is None:
                continue
            key = "out_dir" if dest == "out" else dest
            cfg[key] = str(val)
        return cls(cfg)

    def get(self, key, cast=str, default=_REQUIRED):
        raw = self.cfg.get(key)
        if raw is None:
            if default is _REQUIRED:
                raise UsageError(f"missing config key: {key}")
            return default
        try:
            if cast is bool:
                return str(raw).lower() in ("1", "true", "yes", "on")
            return cast(raw)
        except ValueError:
            raise UsageError(f"config key {key}: cannot parse {raw!r}")

    def floats(self, key, default=_REQUIRED):
        raw = self.cfg.get(key)
        if raw is None:
            if default is _REQUIRED:
                raise UsageError(f"missing config key: {key}")
            return list(default)
        try:
            return io.parse_list(raw, float)
        except ValueError:
            raise UsageError(f"config key {key}: cannot parse {raw!r}")

    def out_dir(self):
        out = self.get("out_dir", str, ".")
        os.makedirs(out, exist_ok=True)
        return out

    def path(self, name):
        return os.path.join(self.out_dir(), name)


def _write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


# -- graph construction from settings ---------------------------------------

def build_domain(run):
    kind = run.get("domain", str, "disc")
    if kind == "disc":
        cx, cy = run.floats("domain_center", (0.0, 0.0))
        return Domain.disc((cx, cy), run.get("domain_radius", float, 1.0))
    if kind == "rect":
        return Domain.rect(*run.floats("domain_rect"))
    raise UsageError(f"unknown domain kind: {kind}")


def build_base(run, dom=None):
    delta = run.get("delta", float, 1.0 / 16)
    lattice = run.get("lattice", str, "square")
    if dom is None:
        dom = build_domain(run)
    x0, y0, x1, y1 = dom.bbox()
    pad = 3.0 * delta
    box = run.floats("box", (x0 - pad, y0 - pad, x1 + pad, y1 + pad))
    if lattice == "square":
        return gen_square_lattice(delta, box)
    if lattice == "random-env":
        return gen_random_environment(
            delta, box, run.get("eps", float, 0.25),
            seed=run.get("env_seed", int, 0))
    if lattice == "hex":
        return gen_hex_lattice(delta, Domain.rect(*box))
    raise UsageError(f"unknown lattice: {lattice}")


def build_wired(run):
    dom = build_domain(run)
    g = clip_and_wire(build_base(run, dom), dom)
    log.info("wired graph: %d interior vertices, %d directed edges",
             g.n_interior, len(g.e_src))
    return g


def _graph_meta(run):
    return {"delta": run.get("delta", float, 1.0 / 16),
            "lattice": run.get("lattice", str, "square"),
            "domain": build_domain(run).to_dict()}


# -- subcommands -------------------------------------------------------------

def cmd_gen_graph(args):
    run = Run.from_args(args)
    path = run.path("graph.json")
    if run.get("base_only", bool, False):
        g = build_base(run)
        n, m = len(g.pos), g.n_edges
    else:
        g = build_wired(run)
        n, m = g.n_interior, len(g.e_src)
    with open(path, "w") as fh:
        fh.write(g.to_json())
        fh.write("\n")
    io.write_sidecar(path, run.hash, run.seed,
                     extra={"kind": "graph", **_graph_meta(run)})
    log.info("wrote %s (%d vertices, %d edges)", path, n, m)
    return 0


def cmd_sample_ust(args):
    run = Run.from_args(args)
    g = build_wired(run)
    n = run.get("n_samples", int, 1)
    meta = _graph_meta(run)
    for i in range(n):
        tree = wilson_ust(g, rng_for_sample(run.seed, i))
        path = run.path(f"tree_{i:04d}.csv")
        io.write_tree_csv(path, tree)
        io.write_sidecar(path, run.hash, run.seed, extra={
            "kind": "tree", "sample_index": i, "order": "index", **meta})
    log.info("wrote %d trees under %s", n, run.out_dir())
    return 0


def cmd_winding_field(args):
    run = Run.from_args(args)
    g = build_wired(run)
    n = run.get("n_samples", int, 1)
    want_pgm = run.get("pgm", bool, False)
    meta = _graph_meta(run)
    ids = np.arange(g.n_interior)
    for i in range(n):
        tree = wilson_ust(g, rng_for_sample(run.seed, i))
        field = winding_field(tree)
        path = run.path(f"winding_{i:04d}.csv")
        io.write_field_csv(path, ids, g.pos, field.values)
        io.write_sidecar(path, run.hash, run.seed, extra={
            "kind": "winding-field", "sample_index": i, **meta})
        if want_pgm:
            ppath = run.path(f"winding_{i:04d}.pgm")
            affine = io.write_pgm(ppath, g.pos, field.values,
                                  box=build_domain(run).bbox(),
                                  width=run.get("pgm_width", int, 256))
            io.write_sidecar(ppath, run.hash, run.seed, extra={
                "kind": "winding-field-raster", "sample_index": i,
                "value_map": affine, **meta})
    log.info("wrote %d winding fields under %s", n, run.out_dir())
    return 0


def cmd_truncated_field(args):
    run = Run.from_args(args)
    g = build_wired(run)
    z = run.floats("z", (0.0, 0.0))
    t_grid = run.floats("t_grid", (1.0, 2.0, 3.0, 4.0))
    n = run.get("n_samples", int, 50)
    cap = run.get("cap_samples", int, 192)
    vals, sat = sample_truncated_windings(g, z, t_grid, n, run.seed,
                                          cap_samples=cap)
    path = run.path("truncated.csv")
    rows = [(i, float(t), float(vals[i, j]))
            for i in range(n) for j, t in enumerate(t_grid)]
    io._write_csv(path, ("sample", "t", "value"), rows)
    io.write_sidecar(path, run.hash, run.seed, extra={
        "kind": "truncated-windings", "z": list(z), "t_grid": list(t_grid),
        "cap_samples": cap,
        "saturated_counts": [int(s) for s in sat], **_graph_meta(run)})
    for j, t in enumerate(t_grid):
        log.info("t=%.3g: var %.4f (saturated %d/%d)", t,
                 float(np.var(vals[:, j], ddof=1)), int(sat[j]), n)
    return 0


def cmd_estimate_m(args):
    run = Run.from_args(args)
    lattice = run.get("lattice", str, "square")
    if lattice == "square":
        kind, eps = "square", None
    elif lattice == "random-env":
        kind, eps = "square-env", run.get("eps", float, 0.25)
    else:
        raise UsageError(f"no microscopic correction for lattice {lattice}")
    box = run.get("m_box_radius", float, 48.0)
    res = estimate_m_correction(
        run.get("m_samples", int, 200), run.seed, kind=kind,
        box_radius=box, eps_env=eps,
        env_seed=run.get("env_seed", int, 0),
        cap_samples=run.get("cap_samples", int, 192),
        cut_radius=run.get("m_cut_radius", float, min(8.0, box / 4.0)))
    path = run.path("m.json")
    _write_json(path, res)
    io.write_sidecar(path, run.hash, run.seed,
                     extra={"kind": "m-correction", "lattice": lattice})
    log.info("m estimate %.4f +- %.4f (n=%d)", res["estimate"], res["se"],
             res["n_samples"])
    return 0


def _build_piece(run):
    g = build_wired(run)
    piece = dimer.piece_from_wired(g)
    return dimer.temperley_superpose(piece)


def cmd_sample_dimer(args):
    run = Run.from_args(args)
    dg = _build_piece(run)
    n = run.get("n_samples", int, 1)
    meta = _graph_meta(run)
    for i in range(n):
        config = dimer.sample_dimer(dg, rng_for_sample(run.seed, i))
        path = run.path(f"dimer_{i:04d}.csv")
        io.write_dimer_csv(path, config)
        io.write_sidecar(path, run.hash, run.seed, extra={
            "kind": "dimer", "sample_index": i,
            "n_superposition_vertices": dg.n_vertices,
            "marked_vertex": int(dg.piece.x), **meta})
    log.info("wrote %d dimer configurations under %s", n, run.out_dir())
    return 0


def cmd_height_field(args):
    run = Run.from_args(args)
    dg = _build_piece(run)
    n = run.get("n_samples", int, 1)
    want_pgm = run.get("pgm", bool, False)
    meta = _graph_meta(run)
    for i in range(n):
        config = dimer.sample_dimer(dg, rng_for_sample(run.seed, i))
        field = dimer.dimer_height(config, dg)
        path = run.path(f"height_{i:04d}.csv")
        io.write_height_csv(path, field)
        io.write_sidecar(path, run.hash, run.seed, extra={
            "kind": "height-field", "sample_index": i, "unit": field.unit,
            "anchor": int(field.anchor), **meta})
        if want_pgm:
            ppath = run.path(f"height_{i:04d}.pgm")
            affine = io.write_pgm(ppath, field.pos, field.values,
                                  box=build_domain(run).bbox(),
                                  width=run.get("pgm_width", int, 256))
            io.write_sidecar(ppath, run.hash, run.seed, extra={
                "kind": "height-field-raster", "sample_index": i,
                "value_map": affine, **meta})
    log.info("wrote %d height fields under %s", n, run.out_dir())
    return 0


def cmd_green_oracle(args):
    run = Run.from_args(args)
    g = build_wired(run)
    cal = calibrate_green(g)
    tol = run.get("green_max_residual", float, 0.05)
    verdict = "PASS" if cal.residual <= tol else "FAIL"
    path = run.path("green.json")
    _write_json(path, {"constant": cal.constant, "residual": cal.residual,
                       "n_pairs": cal.n_pairs, "max_residual": tol,
                       "verdict": verdict})
    io.write_sidecar(path, run.hash, run.seed,
                     extra={"kind": "green-calibration", **_graph_meta(run)})
    log.info("green calibration: constant %.5f, residual %.4f -> %s",
             cal.constant, cal.residual, verdict)
    return 0 if verdict == "PASS" else 1


def cmd_check_crossing(args):
    run = Run.from_args(args)
    deltas = run.floats("deltas", (1.0 / 16, 1.0 / 32, 1.0 / 64))
    c1 = run.floats("ball1", (-0.5, 0.0, 0.1))
    c2 = run.floats("ball2", (0.5, 0.0, 0.15))
    n = run.get("cross_n", int, 300)
    rows = []
    for k, d in enumerate(deltas):
        sub = Run(dict(run.cfg, delta=str(d)))
        g = build_wired(sub)
        res = crossing_probability(g, ((c1[0], c1[1]), c1[2]),
                                   ((c2[0], c2[1]), c2[2]), n,
                                   run.seed, sample_offset=k * n)
        lo = res["estimate"] - 1.96 * res["se"]
        hi = res["estimate"] + 1.96 * res["se"]
        rows.append({"delta": d, "estimate": res["estimate"],
                     "se": res["se"], "ci95": [lo, hi],
                     "n_samples": res["n_samples"]})
        log.info("delta=%.5f: p %.4f +- %.4f", d, res["estimate"], res["se"])
    floor_ok = all(r["estimate"] > 0.01 for r in rows)
    overlap_ok = (max(r["ci95"][0] for r in rows)
                  <= min(r["ci95"][1] for r in rows))
    verdict = "PASS" if (floor_ok and overlap_ok) else "FAIL"
    path = run.path("crossing.json")
    _write_json(path, {"rows": rows, "floor_ok": floor_ok,
                       "overlap_ok": overlap_ok, "verdict": verdict})
    io.write_sidecar(path, run.hash, run.seed, extra={
        "kind": "crossing-check", "ball1": list(c1), "ball2": list(c2)})
    log.info("crossing check: %s", verdict)
    return 0 if verdict == "PASS" else 1


def _identity_residuals(run):
    n_poly = run.get("n_fuzz", int, 1000)
    n_mob = run.get("n_mobius", int, 200)
    n_der = run.get("n_deriv", int, 200)
    rng = np.random.default_rng(np.random.SeedSequence((run.seed, 641)))
    worst_top = 0.0
    for _ in range(n_poly):
        pts = fuzz_simple_polyline(rng)
        worst_top = max(worst_top,
                        abs(intrinsic_to_topological_residual(pts)))
    worst_mob = 0.0
    for _ in range(n_mob):
        pts = fuzz_disc_path(rng)
        worst_mob = max(worst_mob, check_change_of_coords(pts))
    worst_der = 0.0
    for _ in range(n_der):
        z0 = rng.uniform(-0.8, 0.8) + 1j * rng.uniform(-0.8, 0.8)
        t = rng.uniform(-0.8, 0.8) + 1j * rng.uniform(-0.8, 0.8)
        if abs(z0) > 0.85 or abs(t) > 0.85:
            continue
        worst_der = max(worst_der,
                        mobius_derivative_fd_residual(MobiusMap(z0), t))
    return {"intrinsic_top_max": worst_top,
            "change_of_coords_max": worst_mob,
            "derivative_fd_max": worst_der,
            "n_fuzz": n_poly, "n_mobius": n_mob, "n_deriv": n_der}


def cmd_check_identities(args):
    run = Run.from_args(args)
    res = _identity_residuals(run)
    tol = run.get("identity_tol", float, 1e-6)
    worst = max(res["intrinsic_top_max"], res["change_of_coords_max"],
                res["derivative_fd_max"])
    verdict = "PASS" if worst < tol else "FAIL"
    path = run.path("identities.json")
    _write_json(path, {**res, "tol": tol, "verdict": verdict})
    io.write_sidecar(path, run.hash, run.seed,
                     extra={"kind": "identity-check"})
    for key in ("intrinsic_top_max", "change_of_coords_max",
                "derivative_fd_max"):
        log.info("%s: %.3g", key, res[key])
    log.info("identity check: %s (tol %g)", verdict, tol)
    return 0 if verdict == "PASS" else 1


def _pairing_weights(run, g):
    pairing = VoronoiPairing(g)
    cf = run.floats("bump_center", (-0.45, 0.0))
    f = radial_bump((cf[0], cf[1]), run.get("bump_radius", float, 0.3))
    cg = run.floats("bump2_center", (0.45, 0.0))
    g2 = radial_bump((cg[0], cg[1]), run.get("bump2_radius", float, 0.3))
    return pairing.cell_integrals(f), pairing.cell_integrals(g2)


def _moment_chunk(cfg, i0, i1):
    """Worker task: rebuild the graph from the flat config and pair the
    winding fields of samples [i0, i1).  Seed-indexed samples keep the
    result independent of the worker split."""
    run = Run(cfg)
    g = build_wired(run)
    Ff, Fg = _pairing_weights(run, g)
    out = np.empty((i1 - i0, 2))
    for i in range(i0, i1):
        tree = wilson_ust(g, rng_for_sample(run.seed, i))
        vals = winding_field(tree).values
        out[i - i0] = (vals @ Ff, vals @ Fg)
    return out


def cmd_estimate_moments(args):
    run = Run.from_args(args)
    n = run.get("n_samples", int, 200)
    workers = run.get("workers", int, 0) or os.cpu_count() or 1
    workers = min(workers, n)
    if workers > 1:
        bounds = np.linspace(0, n, workers + 1).astype(int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_moment_chunk, [run.cfg] * workers,
                                  bounds[:-1], bounds[1:]))
        samples = np.vstack(parts)
    else:
        samples = _moment_chunk(run.cfg, 0, n)
    path = run.path("pairings.csv")
    rows = [(i, float(a), float(b)) for i, (a, b) in enumerate(samples)]
    io._write_csv(path, ("sample", "value_f", "value_g"), rows)
    wf, wg = samples[:, 0], samples[:, 1]
    cwf, cwg = wf - wf.mean(), wg - wg.mean()
    m4, m4_se, wick_target, wick_se = wick_fourth_moment_check(wf)
    doc = {
        "n_samples": int(n),
        "mean_f": float(wf.mean()), "mean_g": float(wg.mean()),
        "var_f": float(np.var(wf, ddof=1)),
        "var_f_se": jackknife_blocks(wf, lambda x: np.var(x, ddof=1)),
        "cov_fg": float(np.mean(cwf * cwg) * n / (n - 1)),
        "cov_fg_se": jackknife_blocks(
            samples, lambda s: np.cov(s[:, 0], s[:, 1])[0, 1]),
        "normality_ok": bool(anderson_darling_pvalue_ok(wf)),
        "fourth_moment": m4, "fourth_moment_se": m4_se,
        "wick_target": wick_target, "wick_target_se": wick_se,
    }
    mpath = run.path("moments.json")
    _write_json(mpath, doc)
    meta = {"kind": "moments", **_graph_meta(run)}
    io.write_sidecar(path, run.hash, run.seed, extra=meta)
    io.write_sidecar(mpath, run.hash, run.seed, extra=meta)
    log.info("moments over %d samples: var_f %.4f +- %.4f, cov_fg %.4f",
             n, doc["var_f"], doc["var_f_se"], doc["cov_fg"])
    return 0


# -- report suite ------------------------------------------------------------

def _entries_identities(run):
    res = _identity_residuals(run)
    tol = run.get("identity_tol", float, 1e-6)
    prov = "deterministic winding identity"
    return [
        ReportEntry("intrinsic_vs_topological_residual",
                    res["intrinsic_top_max"], 0.0, 0.0, prov, tol),
        ReportEntry("mobius_change_of_coords_residual",
                    res["change_of_coords_max"], 0.0, 0.0, prov, tol),
        ReportEntry("mobius_derivative_fd_residual",
                    res["derivative_fd_max"], 0.0, 0.0, prov, tol),
    ]


def _entries_green(run):
    cal = calibrate_green(build_wired(run))
    return [ReportEntry("green_calibration_residual", cal.residual, 0.0,
                        0.0, "discrete vs continuum Green ratio spread",
                        run.get("green_max_residual", float, 0.05))]


def _entries_mzero(run):
    box = run.get("m_box_radius", float, 48.0)
    res = estimate_m_correction(
        run.get("m_samples", int, 200), run.seed,
        box_radius=box,
        cap_samples=run.get("cap_samples", int, 192),
        cut_radius=run.get("m_cut_radius", float, min(8.0, box / 4.0)))
    return [ReportEntry("m_correction_at_center", res["estimate"],
                        res["se"], 0.0,
                        "symmetric lattice: correction vanishes",
                        3.0 * res["se"])]


def _entries_crossing(run):
    deltas = run.floats("deltas", (1.0 / 16, 1.0 / 32, 1.0 / 64))
    c1 = run.floats("ball1", (-0.5, 0.0, 0.1))
    c2 = run.floats("ball2", (0.5, 0.0, 0.15))
    n = run.get("cross_n", int, 300)
    est, se = [], []
    for k, d in enumerate(deltas):
        sub = Run(dict(run.cfg, delta=str(d)))
        res = crossing_probability(build_wired(sub),
                                   ((c1[0], c1[1]), c1[2]),
                                   ((c2[0], c2[1]), c2[2]), n, run.seed,
                                   sample_offset=k * n)
        est.append(res["estimate"])
        se.append(res["se"])
    spread = max(est) - min(est)
    halfwidths = 1.96 * (se[int(np.argmax(est))] + se[int(np.argmin(est))])
    entries = [ReportEntry("crossing_probability_spread", spread,
                           float(np.hypot(se[int(np.argmax(est))],
                                          se[int(np.argmin(est))])),
                           0.0, "walk crossing stability across mesh sizes",
                           halfwidths)]
    entries.append(ReportEntry("crossing_probability_min", min(est),
                               min(se), 0.5,
                               "crossing events not vanishingly rare",
                               0.49))
    return entries


_SUITES = {
    "identities": _entries_identities,
    "green": _entries_green,
    "mzero": _entries_mzero,
    "crossing": _entries_crossing,
}


def cmd_report(args):
    run = Run.from_args(args)
    names = [s for s in io.parse_list(run.get("suite", str, "identities"),
                                      str)]
    entries = []
    for name in names:
        if name not in _SUITES:
            raise UsageError(f"unknown suite entry: {name} "
                             f"(have {', '.join(sorted(_SUITES))})")
        entries.extend(_SUITES[name](run))
    doc = moment_report(entries)
    doc["config_hash"] = run.hash
    doc["seed"] = run.seed
    path = run.path("report.json")
    _write_json(path, doc)
    io.write_sidecar(path, run.hash, run.seed, extra={"kind": "report",
                                                      "suite": names})
    for e in doc["entries"]:
        log.info("%-38s %- .4g  target %- .4g  tol %.3g  %s",
                 e["statistic"], e["estimate"], e["target"], e["tolerance"],
                 e["verdict"])
    log.info("report: %s", "FAIL" if doc["hard_fail"] else "PASS")
    return 1 if doc["hard_fail"] else 0


# -- parser ------------------------------------------------------------------

def _add_common(sp):
    sp.add_argument("--config", help="flat key=value config file")
    sp.add_argument("--out", help="output directory (config: out_dir)")
    sp.add_argument("--seed", type=int, help="master seed")
    sp.add_argument("--delta", type=float, help="lattice mesh size")
    sp.add_argument("--lattice", choices=("square", "hex", "random-env"))
    sp.add_argument("--n-samples", dest="n_samples", type=int)
    sp.add_argument("--workers", type=int,
                    help="worker processes (0 = all cores)")


def build_parser():
    p = argparse.ArgumentParser(
        prog="winding-gff",
        description="spanning trees, winding fields, and dimer heights "
                    "on planar graphs")
    sub = p.add_subparsers(dest="command", required=True)
    table = [
        ("gen-graph", cmd_gen_graph, "write the configured graph as JSON"),
        ("sample-ust", cmd_sample_ust, "sample wired spanning trees"),
        ("winding-field", cmd_winding_field,
         "per-vertex branch winding fields"),
        ("truncated-field", cmd_truncated_field,
         "capacity-truncated winding at a point"),
        ("estimate-m", cmd_estimate_m,
         "microscopic winding correction of the lattice"),
        ("sample-dimer", cmd_sample_dimer,
         "sample dimer configurations through the tree correspondence"),
        ("height-field", cmd_height_field, "dimer height fields"),
        ("green-oracle", cmd_green_oracle,
         "discrete vs continuum Green calibration"),
        ("check-crossing", cmd_check_crossing,
         "walk crossing probabilities across mesh sizes"),
        ("check-identities", cmd_check_identities,
         "deterministic winding identity fuzz suites"),
        ("estimate-moments", cmd_estimate_moments,
         "smoothed-field moments from a sampling campaign"),
        ("report", cmd_report, "run a configured suite, emit report JSON"),
    ]
    for name, func, help_ in table:
        sp = sub.add_parser(name, help=help_)
        _add_common(sp)
        if name in ("winding-field", "height-field"):
            sp.add_argument("--pgm", action="store_true", default=None,
                            help="also write a PGM raster per sample")
        if name == "gen-graph":
            sp.add_argument("--base-only", dest="base_only",
                            action="store_true", default=None,
                            help="write the unclipped lattice instead")
        if name == "report":
            sp.add_argument("--suite", help="comma list: "
                            + ", ".join(sorted(_SUITES)))
        sp.set_defaults(func=func)
    return p


def main(argv=None):
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        log.error("error: %s", exc)
        return 2
    except (ValueError, OSError) as exc:
        log.error("error: %s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())

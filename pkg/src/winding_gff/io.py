"""Run configs and the on-disk formats (CSV, JSON sidecars, PGM).

Every data file written here can get a companion ``<name>.meta.json``
sidecar recording the artifact version, a hash of the effective run
config, and the master seed, so any output traces back to the run that
produced it.  No writer embeds timestamps: rerunning with the same
config and seed reproduces every byte.
"""

import csv
import hashlib
import json
import os

import numpy as np

ARTIFACT_VERSION = "winding-gff/artifact/1"


# -- run configuration ---------------------------------------------------

def load_config(path, _stack=None):
    """Read a flat ``key = value`` config file into a dict of strings.

    ``#`` starts a comment line, blank lines are skipped, and the special
    key ``include`` splices another file (path relative to the including
    file) at that point.  Later assignments win, so keys written after an
    include override the included values.
    """
    path = os.path.abspath(path)
    stack = _stack if _stack is not None else set()
    if path in stack:
        raise ValueError(f"config include cycle at {path}")
    stack.add(path)
    cfg = {}
    try:
        with open(path) as fh:
            for ln, raw in enumerate(fh, 1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{ln}: expected key = value")
                key, val = line.split("=", 1)
                key, val = key.strip(), val.strip()
                if not key:
                    raise ValueError(f"{path}:{ln}: empty key")
                if key == "include":
                    inc = os.path.join(os.path.dirname(path), val)
                    cfg.update(load_config(inc, stack))
                else:
                    cfg[key] = val
    finally:
        stack.discard(path)
    return cfg


def config_hash(cfg):
    """Short stable hash of an effective (post-include, post-override)
    config dict."""
    blob = "\n".join(f"{k}={v}" for k, v in sorted(cfg.items()))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def parse_list(text, cast=float):
    """Comma-separated list out of a config value."""
    return [cast(part.strip()) for part in str(text).split(",")
            if part.strip()]


# -- sidecars ------------------------------------------------------------

def write_sidecar(path, cfg_hash, seed, extra=None):
    """Write ``<path>.meta.json`` next to a data file."""
    doc = {"version": ARTIFACT_VERSION, "config_hash": cfg_hash,
           "seed": None if seed is None else int(seed)}
    if extra:
        doc.update(extra)
    out = str(path) + ".meta.json"
    with open(out, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return out


# -- CSV formats ---------------------------------------------------------

def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _read_csv(path, header, casts):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        got = tuple(next(r, ()))
        if got != tuple(header):
            raise ValueError(f"{path}: expected header {','.join(header)}")
        cols = [[] for _ in header]
        for row in r:
            if len(row) != len(header):
                raise ValueError(f"{path}: short row {row!r}")
            for col, cast, cell in zip(cols, casts, row):
                col.append(cast(cell))
    return [np.asarray(col) for col in cols]


def write_field_csv(path, vertex_ids, pos, values):
    """Per-vertex scalar field: vertex_id, x, y, value."""
    pos = np.asarray(pos, float)
    rows = [(int(i), float(p[0]), float(p[1]), float(v))
            for i, p, v in zip(vertex_ids, pos, values)]
    _write_csv(path, ("vertex_id", "x", "y", "value"), rows)


def read_field_csv(path):
    ids, xs, ys, vals = _read_csv(
        path, ("vertex_id", "x", "y", "value"), (int, float, float, float))
    return ids, np.column_stack([xs, ys]), vals


def write_tree_csv(path, tree):
    """Spanning tree as (vertex_id, parent_vertex_id) rows, one per
    interior vertex; the wired root appears only as a parent."""
    rows = [(int(i), int(p)) for i, p in enumerate(tree.parent_vertex)]
    _write_csv(path, ("vertex_id", "parent_vertex_id"), rows)


def read_tree_csv(path):
    ids, parents = _read_csv(
        path, ("vertex_id", "parent_vertex_id"), (int, int))
    return ids, parents


def write_dimer_csv(path, config):
    """Matched pairs of a dimer configuration, one row (u, v) per dimer
    with u < v, sorted by u."""
    rows = sorted((int(u), int(v)) for u, v in config.matched_pairs())
    _write_csv(path, ("u", "v"), rows)


def read_dimer_csv(path):
    us, vs = _read_csv(path, ("u", "v"), (int, int))
    return np.column_stack([us, vs])


def write_height_csv(path, field):
    """Height field rows: face_id, cx, cy, height.

    Face-supported heights carry their host face ids in
    meta["face_ids"]; vertex-supported heights use vertex indices.
    """
    ids = field.meta.get("face_ids")
    if ids is None:
        ids = np.arange(len(field.values))
    pos = np.asarray(field.pos, float)
    rows = [(int(i), float(p[0]), float(p[1]), float(h))
            for i, p, h in zip(ids, pos, field.values)]
    _write_csv(path, ("face_id", "cx", "cy", "height"), rows)


def read_height_csv(path):
    ids, xs, ys, hs = _read_csv(
        path, ("face_id", "cx", "cy", "height"), (int, float, float, float))
    return ids, np.column_stack([xs, ys]), hs


# -- PGM raster ----------------------------------------------------------

def write_pgm(path, pos, values, box=None, width=200):
    """Raster a vertex field to binary PGM (P5) by nearest-vertex lookup.

    Pixels are sampled at their centers; the first image row is the top
    of the box (max y).  Returns the affine gray -> value map for the
    sidecar: value = offset + scale * gray.
    """
    from scipy.spatial import cKDTree

    pos = np.asarray(pos, float)
    values = np.asarray(values, float)
    if box is None:
        (x0, y0), (x1, y1) = pos.min(axis=0), pos.max(axis=0)
    else:
        x0, y0, x1, y1 = map(float, box)
    if not (x1 > x0 and y1 > y0):
        raise ValueError("raster box must have positive extent")
    width = int(width)
    height = max(1, round(width * (y1 - y0) / (x1 - x0)))
    xs = x0 + (np.arange(width) + 0.5) * (x1 - x0) / width
    ys = y1 - (np.arange(height) + 0.5) * (y1 - y0) / height
    X, Y = np.meshgrid(xs, ys)
    _, idx = cKDTree(pos).query(np.column_stack([X.ravel(), Y.ravel()]))
    vmin, vmax = float(values.min()), float(values.max())
    span = (vmax - vmin) or 1.0
    gray = np.rint((values[idx] - vmin) / span * 255.0)
    gray = gray.astype(np.uint8).reshape(height, width)
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (width, height))
        fh.write(gray.tobytes())
    return {"gray_to_value_scale": span / 255.0,
            "gray_to_value_offset": vmin,
            "width": width, "height": height,
            "box": [x0, y0, x1, y1]}


def read_pgm(path):
    """Parse a binary P5 file back to a (height, width) uint8 array."""
    with open(path, "rb") as fh:
        data = fh.read()
    ptr = 0

    def token():
        nonlocal ptr
        while data[ptr] in b" \t\r\n":
            ptr += 1
        start = ptr
        while data[ptr] not in b" \t\r\n":
            ptr += 1
        return data[start:ptr]

    if token() != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    w, h, maxval = int(token()), int(token()), int(token())
    if maxval != 255:
        raise ValueError(f"{path}: expected 8-bit raster")
    ptr += 1
    raster = np.frombuffer(data[ptr:ptr + w * h], np.uint8)
    if raster.size != w * h:
        raise ValueError(f"{path}: truncated raster")
    return raster.reshape(h, w)

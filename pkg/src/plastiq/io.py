"""Delimited-text and legacy-VTK export of fields, regions, and traces.

Every writer has a matching reader so the artifacts round-trip; reports are
canonical JSON (sorted keys, fixed indentation) so identical runs produce
bit-identical files.
"""
from __future__ import annotations

import csv
import json

import numpy as np

from .mesh import MeshError


# -- cell / vertex field tables ---------------------------------------------

def write_fields_csv(prefix, mesh, u, sigma, plastic):
    """Write <prefix>_cells.csv (stress and plastic strain) and <prefix>_vertices.csv (u)."""
    cells = f"{prefix}_cells.csv"
    with open(cells, "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(["centroid_x", "centroid_y", "sigma_x", "sigma_y", "sigma_norm", "p_x", "p_y"])
        norms = np.linalg.norm(sigma, axis=1)
        for c, s, n, p in zip(mesh.centroids, sigma, norms, plastic.interior):
            wr.writerow([repr(float(c[0])), repr(float(c[1])), repr(float(s[0])),
                         repr(float(s[1])), repr(float(n)), repr(float(p[0])),
                         repr(float(p[1]))])
    verts = f"{prefix}_vertices.csv"
    with open(verts, "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(["x", "y", "u"])
        for v, val in zip(mesh.vertices, u):
            wr.writerow([repr(float(v[0])), repr(float(v[1])), repr(float(val))])
    return [cells, verts]


def read_fields_csv(prefix):
    """Read back the pair written by `write_fields_csv` as (cells, vertices) arrays."""
    def load(path):
        with open(path, newline="") as f:
            rd = csv.reader(f)
            header = next(rd)
            rows = [[float(x) for x in row] for row in rd]
        return header, np.array(rows)
    hc, cells = load(f"{prefix}_cells.csv")
    hv, verts = load(f"{prefix}_vertices.csv")
    return {"cell_header": hc, "cells": cells, "vertex_header": hv, "vertices": verts}


# -- region map --------------------------------------------------------------

def write_regions_csv(path, regionmap):
    sigma_norm = np.linalg.norm(regionmap.sigma, axis=1)
    with open(path, "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(["triangle", "label", "sigma_norm"])
        for i, (lab, n) in enumerate(zip(regionmap.labels, sigma_norm)):
            wr.writerow([i, "plastic" if lab == 1 else "elastic", repr(float(n))])
    return path


def read_regions_csv(path):
    with open(path, newline="") as f:
        rd = csv.reader(f)
        next(rd)
        rows = list(rd)
    labels = np.array([1 if r[1] == "plastic" else 0 for r in rows], dtype=np.int8)
    norms = np.array([float(r[2]) for r in rows])
    return labels, norms


def write_polylines_csv(path, polylines):
    """Point lists of interface / characteristic-boundary chains."""
    with open(path, "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(["polyline", "x", "y"])
        for i, line in enumerate(polylines):
            for pt in np.asarray(line):
                wr.writerow([i, repr(float(pt[0])), repr(float(pt[1]))])
    return path


def read_polylines_csv(path):
    with open(path, newline="") as f:
        rd = csv.reader(f)
        next(rd)
        rows = [(int(r[0]), float(r[1]), float(r[2])) for r in rd]
    out = []
    for idx in sorted({r[0] for r in rows}):
        out.append(np.array([[x, y] for i, x, y in rows if i == idx]))
    return out


# -- characteristics ---------------------------------------------------------

def write_characteristics_csv(path, characteristics):
    """Polylines with arc length and sampled fields, one row per trace point."""
    with open(path, "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(["trace", "s", "x", "y", "sigma_x", "sigma_y", "u"])
        for i, ch in enumerate(characteristics):
            s = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(ch.points, axis=0).T))])
            uu = ch.u_samples if ch.u_samples is not None else np.full(len(ch.points), np.nan)
            for sv, pt, sg, uv in zip(s, ch.points, ch.sigma_samples, uu):
                wr.writerow([i, repr(float(sv)), repr(float(pt[0])), repr(float(pt[1])),
                             repr(float(sg[0])), repr(float(sg[1])), repr(float(uv))])
    return path


def read_characteristics_csv(path):
    with open(path, newline="") as f:
        rd = csv.reader(f)
        next(rd)
        rows = [(int(r[0]),) + tuple(float(x) for x in r[1:]) for r in rd]
    out = {}
    for r in rows:
        out.setdefault(r[0], []).append(r[1:])
    return {k: np.array(v) for k, v in out.items()}


# -- legacy VTK ---------------------------------------------------------------

def write_vtk(path, mesh, point_data=None, cell_data=None, title="plastiq fields"):
    """ASCII legacy-VTK unstructured grid with scalar/vector point and cell data."""
    point_data = point_data or {}
    cell_data = cell_data or {}
    nv, nt = mesh.num_vertices, mesh.num_triangles
    with open(path, "w") as f:
        f.write("# vtk DataFile Version 3.0\n")
        f.write(title + "\n")
        f.write("ASCII\nDATASET UNSTRUCTURED_GRID\n")
        f.write(f"POINTS {nv} double\n")
        for x, y in mesh.vertices:
            f.write(f"{float(x)!r} {float(y)!r} 0.0\n")
        f.write(f"CELLS {nt} {4 * nt}\n")
        for a, b, c in mesh.triangles:
            f.write(f"3 {a} {b} {c}\n")
        f.write(f"CELL_TYPES {nt}\n")
        f.write("\n".join(["5"] * nt) + "\n")

        def emit(data, n):
            for name, arr in data.items():
                arr = np.asarray(arr, dtype=float)
                if arr.ndim == 1:
                    f.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
                    for v in arr:
                        f.write(f"{float(v)!r}\n")
                else:
                    f.write(f"VECTORS {name} double\n")
                    for v in arr:
                        f.write(f"{float(v[0])!r} {float(v[1])!r} 0.0\n")

        if point_data:
            f.write(f"POINT_DATA {nv}\n")
            emit(point_data, nv)
        if cell_data:
            f.write(f"CELL_DATA {nt}\n")
            emit(cell_data, nt)
    return path


def read_vtk(path):
    """Parse back the subset of legacy VTK written by `write_vtk`."""
    with open(path) as f:
        lines = [ln.rstrip("\n") for ln in f]
    i = 0

    def expect(pred):
        nonlocal i
        while i < len(lines) and not lines[i].strip():
            i += 1
        ln = lines[i]
        if not pred(ln):
            raise MeshError(f"{path}: unexpected line {ln!r}")
        i += 1
        return ln

    expect(lambda ln: ln.startswith("# vtk"))
    i += 1  # title
    expect(lambda ln: ln.strip() == "ASCII")
    expect(lambda ln: ln.strip() == "DATASET UNSTRUCTURED_GRID")
    ln = expect(lambda ln: ln.startswith("POINTS"))
    nv = int(ln.split()[1])
    pts = np.array([[float(x) for x in lines[i + k].split()[:2]] for k in range(nv)])
    i += nv
    ln = expect(lambda ln: ln.startswith("CELLS"))
    nt = int(ln.split()[1])
    tris = np.array([[int(x) for x in lines[i + k].split()[1:]] for k in range(nt)])
    i += nt
    expect(lambda ln: ln.startswith("CELL_TYPES"))
    i += nt
    data = {"points": pts, "triangles": tris, "point_data": {}, "cell_data": {}}
    current = None
    n = 0
    while i < len(lines):
        ln = lines[i].strip()
        i += 1
        if not ln:
            continue
        if ln.startswith("POINT_DATA"):
            current, n = "point_data", int(ln.split()[1])
        elif ln.startswith("CELL_DATA"):
            current, n = "cell_data", int(ln.split()[1])
        elif ln.startswith("SCALARS"):
            name = ln.split()[1]
            i += 1  # lookup table
            vals = np.array([float(lines[i + k]) for k in range(n)])
            i += n
            data[current][name] = vals
        elif ln.startswith("VECTORS"):
            name = ln.split()[1]
            vals = np.array([[float(x) for x in lines[i + k].split()[:2]] for k in range(n)])
            i += n
            data[current][name] = vals
    return data


# -- reports ------------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_report_json(path, report):
    with open(path, "w") as f:
        json.dump(_jsonable(report), f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def read_report_json(path):
    with open(path) as f:
        return json.load(f)
